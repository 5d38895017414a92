from setuptools import setup

setup(
    name='robust-shrinkage',
    version='0.1.0',
    description='Regularized fixed-point covariance estimation for heavy-tailed data and STAP detection',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    py_modules=[
        'matrix_core',
        'estimators',
        'likelihood',
        'scenarios',
        'scenario_config',
        'detection',
        'experiments',
        'config_manager',
        'error_handler',
        'logger_config',
        'solver_metrics',
        'run_rshrink',
    ],
    packages=['estimation'],
    install_requires=[
        # Numerics
        'numpy>=1.21.0',
        'scipy>=1.7.0',
        'pandas>=1.3.0',

        # Configuration and Validation
        'python-dotenv>=0.19.0',
        'jsonschema>=3.2.0',
        'pyyaml>=5.4.0',

        # Logging, Error Tracking and Monitoring
        'structlog>=21.1.0',
        'sentry-sdk>=1.3.0',
        'prometheus-client>=0.12.0',
    ],
    extras_require={
        'dev': [
            'pytest>=6.2.0',
            'pytest-cov>=2.12.0',
            'mypy>=0.910',
            'black>=21.5b1',
            'flake8>=3.9.0'
        ]
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords='covariance estimation shrinkage tyler robust statistics stap radar',
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'rshrink=run_rshrink:main',
        ],
    },
)
