from enum import Enum
from typing import Any, Dict, Optional

from estimators import SampleSet, SolverReport
from matrix_core import HermitianPDS


class EstimatorTag(Enum):
    """Covariance estimators available to the detector"""
    SCM = 'SCM'
    DL_SCM = 'DL_SCM'
    S_FPE = 'S_FPE'
    S_FPE_W = 'S_FPE_W'
    S_FPE_TN = 'S_FPE_TN'

    @property
    def uses_beta(self) -> bool:
        return self is not EstimatorTag.SCM


class CovarianceEstimator:
    """Base class for covariance estimators built on secondary data"""

    tag: EstimatorTag

    def __init__(self, beta: Optional[float] = None):
        self.beta = beta
        self.last_report: Optional[SolverReport] = None

    def estimate(self, samples: SampleSet) -> HermitianPDS:
        """Placeholder method to be implemented by subclasses"""
        raise NotImplementedError("Subclasses must implement estimate method")

    def describe(self) -> Dict[str, Any]:
        return {'estimator': self.tag.value, 'beta': self.beta}

    @property
    def label(self) -> str:
        if self.beta is None:
            return self.tag.value
        return f"{self.tag.value}_beta{self.beta:g}"

    def __repr__(self) -> str:
        return f"{type(self).__name__}(beta={self.beta})"
