"""Prometheus instrumentation for solvers and Monte-Carlo trials.

Metrics live in a private registry so that repeated imports (tests, worker
threads) never collide with the process-global default registry. The CLI dumps
the registry to a textfile after a run.
"""
import os

import prometheus_client

REGISTRY = prometheus_client.CollectorRegistry()

SOLVER_RUNS = prometheus_client.Counter(
    'rshrink_solver_runs_total',
    'Fixed-point solver runs',
    ['solver', 'outcome'],
    registry=REGISTRY
)
SOLVER_ITERATIONS = prometheus_client.Histogram(
    'rshrink_solver_iterations',
    'Iterations used per fixed-point solve',
    ['solver'],
    buckets=(1, 5, 10, 25, 50, 100, 250, 500, 1000, 5000, 20000, 100000),
    registry=REGISTRY
)
TRIALS = prometheus_client.Counter(
    'rshrink_trials_total',
    'Monte-Carlo trials by experiment and outcome',
    ['experiment', 'outcome'],
    registry=REGISTRY
)


def record_solve(solver: str, iterations: int, converged: bool) -> None:
    outcome = 'converged' if converged else 'exhausted'
    SOLVER_RUNS.labels(solver=solver, outcome=outcome).inc()
    SOLVER_ITERATIONS.labels(solver=solver).observe(iterations)


def record_trial(experiment: str, ok: bool) -> None:
    TRIALS.labels(experiment=experiment, outcome='ok' if ok else 'failed').inc()


def write_metrics(path: str) -> None:
    """
    Write all collected metrics in Prometheus text format

    Args:
        path (str): Destination file (textfile collector convention: *.prom)
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    prometheus_client.write_to_textfile(path, REGISTRY)
