"""Fixed-point (Tyler-type) shrinkage estimators"""
from dataclasses import replace
from typing import Callable, Optional, Tuple

from estimation.base_estimator import CovarianceEstimator, EstimatorTag
from estimators import (
    SampleSet,
    SolverConfig,
    SolverReport,
    shrinkage_fpe,
    trace_normalized_shrinkage_fpe,
    wiesel_fpe,
)
from matrix_core import HermitianPDS

Solver = Callable[[SampleSet, SolverConfig], Tuple[HermitianPDS, SolverReport]]


class FixedPointEstimator(CovarianceEstimator):
    """Runs a fixed-point solver and keeps its last SolverReport"""

    solver: Solver

    def __init__(self, beta: float, solver_config: Optional[SolverConfig] = None):
        super().__init__(beta=beta)
        base = solver_config or SolverConfig(beta=beta)
        self.solver_config = replace(base, beta=beta)

    def estimate(self, samples: SampleSet) -> HermitianPDS:
        estimate, report = type(self).solver(samples, self.solver_config)
        self.last_report = report
        return estimate


class ShrinkageFpeEstimator(FixedPointEstimator):
    tag = EstimatorTag.S_FPE
    solver = staticmethod(shrinkage_fpe)


class WieselFpeEstimator(FixedPointEstimator):
    tag = EstimatorTag.S_FPE_W
    solver = staticmethod(wiesel_fpe)


class TraceNormalizedFpeEstimator(FixedPointEstimator):
    tag = EstimatorTag.S_FPE_TN
    solver = staticmethod(trace_normalized_shrinkage_fpe)
