import pytest
import os
import sys

import numpy as np

# Add the project root directory to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

TEST_LOG_DIR = os.path.join(os.path.dirname(__file__), 'test_logs')


def pytest_configure(config):
    """
    Configure pytest settings and logging
    """
    # The log directory has to exist before the file handlers open
    os.makedirs(TEST_LOG_DIR, exist_ok=True)

    from logger_config import configure_logging
    configure_logging(log_level='WARNING', log_dir=TEST_LOG_DIR)


def pytest_addoption(parser):
    """
    Add custom command-line options for pytest
    """
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run slow tests (full-size Monte-Carlo reproductions)"
    )


def pytest_collection_modifyitems(config, items):
    """
    Modify test collection based on custom options
    """
    # Skip slow tests by default
    if not config.getoption("--runslow"):
        skip_slow = pytest.mark.skip(reason="need --runslow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


def random_pds(rng: np.random.Generator, m: int, spread: float = 1.0):
    """Random Hermitian positive-definite matrix A·Aᴴ/m + spread·I."""
    from matrix_core import HermitianPDS
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return HermitianPDS(a @ a.conj().T / m + spread * np.eye(m))


def random_hermitian(rng: np.random.Generator, m: int):
    from matrix_core import HermitianMatrix
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return HermitianMatrix((a + a.conj().T) / 2.0)


@pytest.fixture
def rng():
    """Fixed numpy generator for ad-hoc test data"""
    return np.random.default_rng(20240611)


@pytest.fixture
def toeplitz_sigma():
    """Normalized Toeplitz covariance, m=8, rho=0.5"""
    from scenarios import ToeplitzSpec, toeplitz_covariance
    return toeplitz_covariance(ToeplitzSpec(8, 0.5))


@pytest.fixture
def gaussian_samples(toeplitz_sigma):
    """N=32 Gaussian samples of the m=8 Toeplitz covariance"""
    from scenarios import RngSeed, sample_gaussian
    return sample_gaussian(toeplitz_sigma, 32, RngSeed(1234))


@pytest.fixture
def undersampled():
    """N=8 samples in dimension m=16 (beta_min = 0.5)"""
    from scenarios import RngSeed, ToeplitzSpec, sample_gaussian, toeplitz_covariance
    sigma = toeplitz_covariance(ToeplitzSpec(16, 0.5))
    return sample_gaussian(sigma, 8, RngSeed(99))


@pytest.fixture(scope="session")
def desk_scenario():
    """S=4 sensors, M=16 pulses, half-wavelength spacing"""
    from scenarios import StapScenario
    return StapScenario.preset('desk')


@pytest.fixture(scope="session")
def small_scenario():
    """Reduced geometry (m=16) for quick detection tests"""
    from scenarios import StapScenario
    return StapScenario(
        sensors=4, pulses=4, carrier_freq_hz=10.0e9, bandwidth_hz=5.0e6,
        platform_speed_mps=7.5, element_spacing_m=0.015, prf_hz=1000.0,
        cnr_db=20.0, scr_db=-5.0,
    )


@pytest.fixture
def isolated_cwd(tmp_path, monkeypatch):
    """Run in an empty directory so no project config files are picked up"""
    monkeypatch.chdir(tmp_path)
    for variable in ('RSHRINK_SEED', 'RSHRINK_THREADS', 'RSHRINK_TOL', 'RSHRINK_MAX_ITER'):
        monkeypatch.delenv(variable, raising=False)
    return tmp_path
