"""Generalized likelihood of the shrinkage estimator and its calculus.

    log F_β(Σ) = −N log det Σ − Nβ Tr(Σ⁻¹) − m(1−β) Σₙ log(xₙᴴΣ⁻¹xₙ)

The fixed points of f_β are exactly the critical points of log F_β, and the
gradient is −NΣ⁻¹(Σ − f_β(Σ))Σ⁻¹. Everything here works in the log domain;
F itself underflows long before m = 256, N = 400.

Profile quantities use the solution path β ↦ Σ(β):
M(β) = log F_β(Σ(β)) and M′(β) = −Nm + m Σₙ log(xₙᴴΣ(β)⁻¹xₙ).
M is convex, so its maximum over [0, 1] sits at an endpoint.
"""
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from error_handler import ConfigurationError, InvalidBeta, NumericalBreakdown
from estimators import (
    Normalization,
    SampleSet,
    SolverConfig,
    beta_lower_bound,
    check_beta,
    evaluate_map,
    shrinkage_fpe,
    tyler_fpe,
)
from logger_config import get_logger
from matrix_core import (
    HermitianMatrix,
    HermitianPDS,
    frob_norm,
    inv_trace,
    inverse,
    log_det,
    quad_forms,
    real_part,
    trace_product,
)

logger = get_logger('rshrink.likelihood')


@dataclass(frozen=True)
class LikelihoodContext:
    samples: SampleSet
    beta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigurationError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class ProfilePoint:
    """One point of the profile likelihood along the solution path."""
    beta: float
    value: float
    slope: float
    grad_norm: float
    inv_trace: float
    iterations: int


def _positive_quad_forms(sigma: HermitianPDS, samples: SampleSet) -> np.ndarray:
    if sigma.dim != samples.dim:
        raise ConfigurationError(
            f"matrix dimension {sigma.dim} does not match sample dimension {samples.dim}"
        )
    q = quad_forms(samples.vectors, sigma)
    if np.any(q < 1e-300):
        raise NumericalBreakdown(f"quadratic form underflow (min {float(q.min()):.3e})")
    return q


def log_likelihood(sigma: HermitianPDS, ctx: LikelihoodContext) -> float:
    """
    log F_β(Σ).

    Args:
        sigma (HermitianPDS): Evaluation point
        ctx (LikelihoodContext): Samples and β

    Returns:
        float: Finite log-likelihood value
    """
    m, N, beta = ctx.samples.dim, ctx.samples.count, ctx.beta
    q = _positive_quad_forms(sigma, ctx.samples)
    return float(
        -N * log_det(sigma)
        - N * beta * inv_trace(sigma)
        - m * (1.0 - beta) * np.sum(np.log(q))
    )


def grad_log_likelihood(sigma: HermitianPDS, ctx: LikelihoodContext) -> HermitianMatrix:
    """
    ∇ log F_β(Σ) = −N Σ⁻¹(Σ − f_β(Σ))Σ⁻¹, Hermitian, zero at fixed points of f_β.
    """
    N = ctx.samples.count
    sigma_inv = inverse(sigma).entries
    mapped = evaluate_map(sigma, ctx.samples, ctx.beta).entries
    return HermitianMatrix(-N * sigma_inv @ (sigma.entries - mapped) @ sigma_inv)


def _as_hermitian(Q: Union[HermitianMatrix, ArrayLike]) -> np.ndarray:
    return Q.entries if isinstance(Q, HermitianMatrix) else HermitianMatrix(Q).entries


def hessian_quad_form(
    sigma: HermitianPDS, Q: Union[HermitianMatrix, ArrayLike], ctx: LikelihoodContext
) -> float:
    """
    Curvature of log F_β along the Hermitian direction Q, divided by N.

    Returns ⟨Q, d∇log F_β(Σ)(Q)⟩/N = −Tr(Σ⁻¹QΣ⁻¹Q) + (1−β)(m/N) Σₙ (xₙᴴΣ⁻¹QΣ⁻¹xₙ)²/qₙ².
    At a critical point this equals (1/N)·d²/dt² log F_β(Σ + tQ) at t = 0 and
    is bounded above by ``curvature_bound``.

    Raises:
        InvalidBeta: For β = 0, where the curvature vanishes along the scale ray
    """
    if ctx.beta == 0.0:
        raise InvalidBeta(
            0.0, beta_lower_bound(ctx.samples.dim, ctx.samples.count),
            reason="curvature form needs beta > 0"
        )
    m, N, beta = ctx.samples.dim, ctx.samples.count, ctx.beta
    q_dir = _as_hermitian(Q)
    q = _positive_quad_forms(sigma, ctx.samples)
    sigma_inv = inverse(sigma).entries
    sandwich = sigma_inv @ q_dir @ sigma_inv
    X = ctx.samples.vectors
    projections = np.einsum('ni,ij,nj->n', X.conj(), sandwich, X).real
    return float(
        -trace_product(sandwich, q_dir)
        + (1.0 - beta) * m / N * np.sum((projections / q) ** 2)
    )


def curvature_bound(sigma: HermitianPDS, Q: Union[HermitianMatrix, ArrayLike], beta: float) -> float:
    """−β·Tr(QΣ⁻²QΣ⁻¹), an upper bound of hessian_quad_form at critical points."""
    q_dir = _as_hermitian(Q)
    sigma_inv = inverse(sigma).entries
    product = q_dir @ sigma_inv @ sigma_inv @ q_dir @ sigma_inv
    scale = float(np.linalg.norm(q_dir) ** 2 * np.linalg.norm(sigma_inv) ** 3)
    return -beta * real_part(np.trace(product), scale, 'curvature bound')


def log_l_functional(sigma: HermitianPDS) -> float:
    """log L(Σ) = −Tr(Σ⁻¹) − log det Σ; at most −m, attained at Σ = I."""
    return -inv_trace(sigma) - log_det(sigma)


def log_determinant_bound(samples: SampleSet, cfg: SolverConfig) -> float:
    """
    Upper bound on log det Σ(β) valid for every β in (0, 1]:
    −m − log L(P) with P the Tyler fixed point normalized to Tr(P) = m.
    """
    tyler, _ = tyler_fpe(samples, replace(cfg, beta=0.0, init=None,
                                          normalization=Normalization.TRACE_M))
    return -samples.dim - log_l_functional(tyler)


def profile_point(
    beta: float, samples: SampleSet, cfg: SolverConfig
) -> Tuple[ProfilePoint, HermitianPDS]:
    """
    Solve for Σ(β) and evaluate M(β), M′(β) and the gradient norm there.

    Args:
        beta (float): Shrinkage weight in (β̄, 1]
        samples (SampleSet): Data
        cfg (SolverConfig): Solver controls; its beta is replaced

    Returns:
        Tuple[ProfilePoint, HermitianPDS]: Profile values and the solution
    """
    m, N = samples.dim, samples.count
    check_beta(beta, m, N)
    solution, report = shrinkage_fpe(
        samples, replace(cfg, beta=beta, normalization=Normalization.NONE)
    )
    ctx = LikelihoodContext(samples, beta)
    q = _positive_quad_forms(solution, samples)
    point = ProfilePoint(
        beta=beta,
        value=log_likelihood(solution, ctx),
        slope=float(-N * m + m * np.sum(np.log(q))),
        grad_norm=frob_norm(grad_log_likelihood(solution, ctx)),
        inv_trace=inv_trace(solution),
        iterations=report.iterations,
    )
    return point, solution


def profile_likelihood(beta: float, samples: SampleSet, cfg: SolverConfig) -> float:
    """M(β) = log F_β(Σ(β))."""
    return profile_point(beta, samples, cfg)[0].value


def profile_likelihood_slope(beta: float, samples: SampleSet, cfg: SolverConfig) -> float:
    """M′(β) = −Nm + m Σₙ log(xₙᴴΣ(β)⁻¹xₙ)."""
    return profile_point(beta, samples, cfg)[0].slope


def profile_sweep(
    betas: Sequence[float], samples: SampleSet, cfg: SolverConfig
) -> List[ProfilePoint]:
    """
    Profile points over a β grid by continuation.

    The grid is walked in descending β, each solve starting from the previous
    solution. Points are returned in ascending β.
    """
    points: List[ProfilePoint] = []
    init = cfg.init
    for beta in sorted(set(float(b) for b in betas), reverse=True):
        point, solution = profile_point(beta, samples, replace(cfg, init=init))
        points.append(point)
        init = solution
        logger.debug(f"profile point beta={beta} M={point.value:.6f} iterations={point.iterations}")
    return sorted(points, key=lambda p: p.beta)


def endpoint_log_likelihoods(samples: SampleSet, cfg: SolverConfig) -> Tuple[float, float]:
    """
    Global maxima of log F at the two ends of the β interval.

    Returns:
        Tuple[float, float]: (log F₀ at the Tyler ray, log F₁(I) = −Nm)

    Raises:
        InvalidBeta: If N ≤ m (the β = 0 end is not attained)
    """
    m, N = samples.dim, samples.count
    tyler, _ = tyler_fpe(samples, replace(cfg, beta=0.0, init=None,
                                          normalization=Normalization.TRACE_M))
    at_zero = log_likelihood(tyler, LikelihoodContext(samples, 0.0))
    return at_zero, float(-N * m)


def preferred_endpoint(samples: SampleSet, cfg: SolverConfig) -> float:
    """β ∈ {0, 1} at which F reaches its global maximum over [0, 1] × PDS."""
    at_zero, at_one = endpoint_log_likelihoods(samples, cfg)
    return 0.0 if at_zero > at_one else 1.0
