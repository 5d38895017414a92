import os
import sys
import argparse
from typing import List, Optional


# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from config_manager import ConfigManager, EXPERIMENT_KINDS
from error_handler import (
    ConfigurationError,
    ErrorHandler,
    FailureBudgetExceeded,
    InvalidBeta,
    NoConvergence,
    ShrinkageError,
)
from experiments import ExperimentConfig, ExperimentResult, run_experiment
from logger_config import bind_run_context, clear_run_context, configure_logging, get_logger
from solver_metrics import write_metrics

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments

    Returns:
        argparse.Namespace: Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog='rshrink',
        description="Robust shrinkage covariance estimation experiments"
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    for kind in EXPERIMENT_KINDS:
        sub = subparsers.add_parser(kind, help=f"Run a {kind} experiment")
        sub.add_argument('--config', required=True, help='Experiment file (YAML or JSON)')
        sub.add_argument('--seed', type=int, help='Override the experiment seed')
        sub.add_argument('--threads', type=int, help='Worker threads')
        sub.add_argument('--out', help='Output path (a directory for stap-map)')
        sub.add_argument(
            '--log-level',
            default=None,
            choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
            help='Logging level (default: LOG_LEVEL or INFO)'
        )
        sub.add_argument('--log-dir', default=None, help='Directory for rotating log files')
        sub.add_argument('--metrics-file', help='Write solver metrics in Prometheus text format')

    return parser.parse_args(argv)


def load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    """
    Merge the experiment file, environment defaults and CLI overrides

    Raises:
        ConfigurationError: If the file kind differs from the command or a value is invalid
    """
    manager = ConfigManager(args.config)
    if manager.kind != args.command:
        raise ConfigurationError(
            f"{args.config} describes a {manager.kind!r} experiment, not {args.command!r}"
        )
    manager.update({'seed': args.seed, 'threads': args.threads, 'output': args.out})
    return ExperimentConfig.from_mapping(manager.as_dict())


@ErrorHandler.critical_error_handler
def run_command(args: argparse.Namespace) -> ExperimentResult:
    return run_experiment(load_experiment(args))


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigurationError, InvalidBeta)):
        return EXIT_CONFIG
    if isinstance(error, (FailureBudgetExceeded, NoConvergence)):
        return EXIT_SOLVER
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the application

    Returns:
        int: Exit code (0 success, 2 configuration, 3 solver failures, 1 otherwise)
    """
    args = parse_arguments(argv)
    configure_logging(log_level=args.log_level, log_dir=args.log_dir, command=args.command)
    bind_run_context(command=args.command, config=args.config)
    logger = get_logger('rshrink.cli')

    code = EXIT_OK
    try:
        result = run_command(args)
        logger.info(f"{args.command} finished: {result.output_path}")
    except KeyboardInterrupt:
        logger.warning("interrupted")
        code = EXIT_FAILURE
    except ShrinkageError as e:
        logger.error(f"{args.command} failed: {e.message}")
        code = exit_code_for(e)
    finally:
        if args.metrics_file:
            write_metrics(args.metrics_file)
        clear_run_context()
    return code


if __name__ == "__main__":
    sys.exit(main())
