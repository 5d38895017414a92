"""Sample covariance based estimators"""
from error_handler import ConfigurationError
from estimation.base_estimator import CovarianceEstimator, EstimatorTag
from estimators import SampleSet, dl_scm, scm
from matrix_core import HermitianPDS


class ScmEstimator(CovarianceEstimator):
    """Plain sample covariance; invertible only for N ≥ m in general position"""

    tag = EstimatorTag.SCM

    def __init__(self) -> None:
        super().__init__(beta=None)

    def estimate(self, samples: SampleSet) -> HermitianPDS:
        return scm(samples).to_pds()


class DiagonalLoadingEstimator(CovarianceEstimator):
    """(1−β)·SCM + β·I"""

    tag = EstimatorTag.DL_SCM

    def __init__(self, beta: float):
        if not 0.0 <= beta <= 1.0:
            raise ConfigurationError(f"loading weight must lie in [0, 1], got {beta}")
        super().__init__(beta=beta)

    def estimate(self, samples: SampleSet) -> HermitianPDS:
        estimate = dl_scm(samples, self.beta)
        return estimate if isinstance(estimate, HermitianPDS) else estimate.to_pds()
