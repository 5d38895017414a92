"""Estimator Factory resolving estimator tags to implementations"""
from typing import Dict, List, Optional, Type, Union

from error_handler import ConfigurationError
from estimation.base_estimator import CovarianceEstimator, EstimatorTag
from estimation.fixed_point_estimators import (
    FixedPointEstimator,
    ShrinkageFpeEstimator,
    TraceNormalizedFpeEstimator,
    WieselFpeEstimator,
)
from estimation.sample_estimators import DiagonalLoadingEstimator, ScmEstimator
from estimators import Normalization, SolverConfig

_FIXED_POINT: Dict[EstimatorTag, Type[FixedPointEstimator]] = {
    EstimatorTag.S_FPE: ShrinkageFpeEstimator,
    EstimatorTag.S_FPE_W: WieselFpeEstimator,
    EstimatorTag.S_FPE_TN: TraceNormalizedFpeEstimator,
}


class EstimatorFactory:
    """Factory for creating covariance estimators"""

    @staticmethod
    def create_estimator(
        tag: Union[str, EstimatorTag],
        beta: Optional[float] = None,
        solver_config: Optional[SolverConfig] = None
    ) -> CovarianceEstimator:
        """
        Create an estimator

        Args:
            tag (str | EstimatorTag): Estimator name (SCM, DL_SCM, S_FPE, S_FPE_W, S_FPE_TN)
            beta (float, optional): Shrinkage / loading weight, required except for SCM
            solver_config (SolverConfig, optional): Iteration controls for fixed-point estimators

        Returns:
            CovarianceEstimator: Configured estimator
        """
        tag = EstimatorFactory.parse_tag(tag)

        if tag is EstimatorTag.SCM:
            return ScmEstimator()

        if beta is None:
            raise ConfigurationError(f"estimator {tag.value} needs a beta value")

        if tag is EstimatorTag.DL_SCM:
            return DiagonalLoadingEstimator(beta)

        if solver_config is not None and solver_config.normalization is not Normalization.NONE:
            raise ConfigurationError("fixed-point estimators choose their own normalization")
        return _FIXED_POINT[tag](beta, solver_config)

    @staticmethod
    def parse_tag(tag: Union[str, EstimatorTag]) -> EstimatorTag:
        if isinstance(tag, EstimatorTag):
            return tag
        try:
            return EstimatorTag(str(tag).upper())
        except ValueError:
            raise ConfigurationError(
                f"unknown estimator {tag!r}; expected one of "
                f"{', '.join(EstimatorFactory.get_supported_estimators())}"
            )

    @staticmethod
    def get_supported_estimators() -> List[str]:
        return [tag.value for tag in EstimatorTag]
