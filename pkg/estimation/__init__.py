"""Pluggable covariance estimators resolved by tag (SCM, DL_SCM, S_FPE, ...)."""
from estimation.base_estimator import CovarianceEstimator, EstimatorTag
from estimation.estimator_factory import EstimatorFactory

__all__ = ['CovarianceEstimator', 'EstimatorTag', 'EstimatorFactory']
