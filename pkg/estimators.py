"""Covariance and scatter estimators.

Contains the sample covariance (plain and diagonally loaded), the Tyler
fixed-point estimator under both scale normalizations, the shrinkage
fixed-point estimator

    Σ = (1−β)(m/N) Σₙ xₙxₙᴴ/(xₙᴴΣ⁻¹xₙ) + βI,

which is iterated without any trace renormalization, and two variants that
renormalize every step: the self-scaling Wiesel load and the trace-normalized
shrinkage iteration.

All solvers are pure functions of (SampleSet, SolverConfig).
"""
import json
import os
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from error_handler import (
    ConfigurationError,
    InvalidBeta,
    NoConvergence,
    NotPositiveDefinite,
    NumericalBreakdown,
    ZeroVector,
)
from logger_config import get_logger
from matrix_core import (
    TINY_NORM,
    HermitianMatrix,
    HermitianPDS,
    inv_trace,
    quad_forms,
    relative_difference,
)
from solver_metrics import record_solve

logger = get_logger('rshrink.estimators')

HPV1_MAGIC = 'HPV1'


class Normalization(Enum):
    """Per-step scale normalization of a fixed-point iteration"""
    NONE = 'none'
    TRACE_M = 'trace_m'
    TRACE_INV_M = 'trace_inv_m'


class SampleSet:
    """
    N nonzero complex m-vectors, stored as the rows of a read-only N×m array.

    Args:
        vectors: Array-like of shape (N, m)
    """

    __slots__ = ('_vectors',)

    def __init__(self, vectors: ArrayLike):
        X = np.array(vectors, dtype=np.complex128, copy=True)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ConfigurationError(f"samples must have shape (N, m) with N, m ≥ 1, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise NumericalBreakdown("non-finite sample entries")
        norms = np.linalg.norm(X, axis=1)
        degenerate = np.flatnonzero(norms < TINY_NORM)
        if degenerate.size:
            raise ZeroVector('SampleSet', context={'indices': degenerate[:20].tolist()})
        X.setflags(write=False)
        self._vectors = X

    @property
    def vectors(self) -> NDArray[np.complex128]:
        return self._vectors

    @property
    def dim(self) -> int:
        return self._vectors.shape[1]

    @property
    def count(self) -> int:
        return self._vectors.shape[0]

    def scaled(self, factors: Union[float, ArrayLike]) -> 'SampleSet':
        """Multiply sample n by factors[n] (or all samples by one scalar)."""
        c = np.asarray(factors, dtype=np.float64)
        if c.ndim == 0:
            return SampleSet(self._vectors * c)
        return SampleSet(self._vectors * c[:, np.newaxis])

    def subset(self, indices: Sequence[int]) -> 'SampleSet':
        return SampleSet(self._vectors[np.asarray(indices, dtype=int)])

    def __repr__(self) -> str:
        return f"SampleSet(dim={self.dim}, count={self.count})"


@dataclass(frozen=True)
class SolverConfig:
    """
    Fixed-point iteration controls.

    ``init=None`` starts from the identity. ``tol`` bounds the relative
    successive change ‖Σ_{k+1} − Σ_k‖_F/‖Σ_k‖_F, scaled up by the solver's
    error gain when the slowest mode contracts at a rate close to one.
    """
    beta: float
    tol: float = 1e-8
    max_iter: int = 1000
    init: Optional[HermitianPDS] = None
    normalization: Normalization = Normalization.NONE

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigurationError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be an integer ≥ 1, got {self.max_iter}")


@dataclass
class SolverReport:
    """Iteration count and the error estimate recorded after every step."""
    iterations: int
    final_residual: float
    converged: bool
    residual_history: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str) -> None:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=4)


def beta_lower_bound(m: int, N: int) -> float:
    """Existence boundary max(0, 1 − N/m) of the shrinkage fixed point."""
    return max(0.0, 1.0 - N / m)


def check_beta(beta: float, m: int, N: int) -> None:
    """
    Reject β outside (β̄, 1].

    Raises:
        InvalidBeta: If β ≤ max(0, 1 − N/m) or β > 1
    """
    lower = beta_lower_bound(m, N)
    if not lower < beta <= 1.0:
        raise InvalidBeta(beta, lower)


def scm(samples: SampleSet) -> HermitianMatrix:
    """
    Sample covariance (1/N) Σ xₙxₙᴴ.

    The result is only positive semi-definite in general; call ``to_pds()``
    where an inverse is needed (NotPositiveDefinite when N < m).
    """
    X = samples.vectors
    return HermitianMatrix(X.T @ X.conj() / samples.count)


def dl_scm(samples: SampleSet, beta: float) -> Union[HermitianPDS, HermitianMatrix]:
    """
    Diagonally loaded sample covariance (1−β)·SCM + β·I.

    Args:
        samples (SampleSet): Secondary data
        beta (float): Loading weight in [0, 1]

    Returns:
        HermitianPDS for β > 0, the plain SCM for β = 0
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigurationError(f"loading weight must lie in [0, 1], got {beta}")
    if beta == 0.0:
        return scm(samples)
    X = samples.vectors
    loaded = (1.0 - beta) * (X.T @ X.conj()) / samples.count + beta * np.eye(samples.dim)
    return HermitianPDS(loaded)


def _weighted_scatter(sigma: HermitianPDS, X: NDArray) -> Tuple[NDArray, NDArray]:
    """Σₙ xₙxₙᴴ/qₙ and the quadratic forms qₙ = xₙᴴΣ⁻¹xₙ."""
    q = quad_forms(X, sigma)
    if not np.all(np.isfinite(q)) or np.any(q < TINY_NORM):
        raise NumericalBreakdown(
            f"quadratic form underflow (min {float(np.min(q)):.3e})",
            context={'dim': X.shape[1]}
        )
    return (X.T / q) @ X.conj(), q


def _map_entries(sigma: HermitianPDS, samples: SampleSet, beta: float) -> NDArray:
    _check_dims(sigma, samples)
    weighted, _ = _weighted_scatter(sigma, samples.vectors)
    gain = (1.0 - beta) * samples.dim / samples.count
    return gain * weighted + beta * np.eye(samples.dim)


def evaluate_map(sigma: HermitianPDS, samples: SampleSet, beta: float) -> HermitianMatrix:
    """f_β(Σ) as a Hermitian matrix, without certifying positive-definiteness."""
    return HermitianMatrix(_map_entries(sigma, samples, beta))


def apply_map_f(sigma: HermitianPDS, samples: SampleSet, beta: float) -> HermitianPDS:
    """
    One application of f_β(Σ) = (1−β)(m/N) Σ xxᴴ/(xᴴΣ⁻¹x) + βI.

    Raises:
        NotPositiveDefinite: For β = 0 when the samples do not span ℂᵐ
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigurationError(f"beta must lie in [0, 1], got {beta}")
    return HermitianPDS(_map_entries(sigma, samples, beta))


def tyler_map(sigma: HermitianPDS, samples: SampleSet) -> HermitianPDS:
    """The β = 0 map f₀; degree-one homogeneous in Σ, invariant to sample scaling."""
    return apply_map_f(sigma, samples, 0.0)


def fp_residual(sigma: HermitianPDS, samples: SampleSet, beta: float) -> float:
    """‖Σ − f_β(Σ)‖_F / ‖Σ‖_F."""
    return relative_difference(_map_entries(sigma, samples, beta), sigma)


def _check_dims(sigma: HermitianMatrix, samples: SampleSet) -> None:
    if sigma.dim != samples.dim:
        raise ConfigurationError(
            f"matrix dimension {sigma.dim} does not match sample dimension {samples.dim}"
        )


def _normalize(sigma: HermitianPDS, normalization: Normalization) -> HermitianPDS:
    if normalization is Normalization.TRACE_M:
        return sigma.scaled(sigma.dim / float(np.trace(sigma.entries).real))
    if normalization is Normalization.TRACE_INV_M:
        return sigma.scaled(inv_trace(sigma) / sigma.dim)
    return sigma


def _starting_point(samples: SampleSet, cfg: SolverConfig) -> HermitianPDS:
    if cfg.init is None:
        return HermitianPDS.identity(samples.dim)
    _check_dims(cfg.init, samples)
    return cfg.init


def _run_fixed_point(
    solver: str,
    step: Callable[[HermitianPDS], HermitianPDS],
    start: HermitianPDS,
    cfg: SolverConfig,
    error_gain: float = 1.0
) -> Tuple[HermitianPDS, SolverReport]:
    """
    Iterate ``step`` until the estimated distance to the fixed point is below tol.

    The estimate is the relative successive change times ``error_gain``. A map
    whose slowest mode contracts at rate r is still about r/(1−r) times the last
    change away from its fixed point, so solvers with r near one pass a gain
    of at least that much.
    """
    sigma = start
    history: List[float] = []
    for _ in range(cfg.max_iter):
        try:
            nxt = step(sigma)
        except NotPositiveDefinite as e:
            # f_β(Σ) ≥ βI, so a failed certificate means the iterates left working precision
            report = SolverReport(len(history), history[-1] if history else float('inf'),
                                  False, history)
            record_solve(solver, report.iterations, False)
            raise NoConvergence(solver, sigma, report) from e
        change = relative_difference(nxt, sigma)
        if not np.isfinite(change):
            raise NumericalBreakdown(f"{solver}: non-finite iterate change")
        residual = change * error_gain
        history.append(residual)
        sigma = nxt
        if residual <= cfg.tol:
            break

    report = SolverReport(
        iterations=len(history),
        final_residual=history[-1],
        converged=history[-1] <= cfg.tol,
        residual_history=history
    )
    record_solve(solver, report.iterations, report.converged)
    if not report.converged:
        raise NoConvergence(solver, sigma, report)

    logger.debug(
        f"{solver} converged in {report.iterations} iterations "
        f"(beta={cfg.beta}, residual={report.final_residual:.3e})"
    )
    return sigma, report


def shrinkage_fpe(samples: SampleSet, cfg: SolverConfig) -> Tuple[HermitianPDS, SolverReport]:
    """
    Shrinkage fixed-point estimator, iterating Σ_{k+1} = f_β(Σ_k).

    The solution is unique for β ∈ (β̄, 1] and satisfies Tr(Σ⁻¹) = m without
    any normalization step. β = 0 is delegated to the Tyler estimator
    normalized by Tr(Σ⁻¹) = m, the limit of the solution path as β → 0.

    The stop accounts for the slow 1 − β contraction of the scale, so small β
    take on the order of log(1/tol)/β iterations.

    Args:
        samples (SampleSet): Secondary data
        cfg (SolverConfig): Controls; normalization must be NONE

    Returns:
        Tuple[HermitianPDS, SolverReport]: Estimate and convergence report

    Raises:
        InvalidBeta: If β ∉ (β̄, 1]
        NoConvergence: If max_iter is exhausted
    """
    if cfg.normalization is not Normalization.NONE:
        raise ConfigurationError("shrinkage_fpe iterates without normalization")
    if cfg.beta == 0.0:
        return tyler_fpe(samples, replace(cfg, normalization=Normalization.TRACE_INV_M))

    m, N = samples.dim, samples.count
    check_beta(cfg.beta, m, N)
    X = samples.vectors
    gain = (1.0 - cfg.beta) * m / N
    load = cfg.beta * np.eye(m)

    def step(sigma: HermitianPDS) -> HermitianPDS:
        weighted, _ = _weighted_scatter(sigma, X)
        return HermitianPDS(gain * weighted + load)

    # the scale mode contracts at rate 1 − β
    error_gain = max(1.0, (1.0 - cfg.beta) / cfg.beta)
    return _run_fixed_point('shrinkage_fpe', step, _starting_point(samples, cfg), cfg, error_gain)


def tyler_fpe(samples: SampleSet, cfg: SolverConfig) -> Tuple[HermitianPDS, SolverReport]:
    """
    Tyler fixed-point estimator Σ = (m/N) Σ xxᴴ/(xᴴΣ⁻¹x).

    Solutions form a ray, so each iterate is rescaled so that Tr(Σ) = m
    (TRACE_M) or Tr(Σ⁻¹) = m (TRACE_INV_M).

    Raises:
        InvalidBeta: If m ≥ N
        NoConvergence: If max_iter is exhausted
    """
    if cfg.beta != 0.0:
        raise ConfigurationError(f"tyler_fpe requires beta = 0, got {cfg.beta}")
    if cfg.normalization is Normalization.NONE:
        raise ConfigurationError("tyler_fpe requires a TRACE_M or TRACE_INV_M normalization")

    m, N = samples.dim, samples.count
    if m >= N:
        raise InvalidBeta(0.0, beta_lower_bound(m, N), reason=f"Tyler estimator needs N > m ({N} ≤ {m})")
    X = samples.vectors
    gain = m / N
    normalization = cfg.normalization

    def step(sigma: HermitianPDS) -> HermitianPDS:
        weighted, _ = _weighted_scatter(sigma, X)
        return _normalize(HermitianPDS(gain * weighted), normalization)

    start = _normalize(_starting_point(samples, cfg), normalization)
    return _run_fixed_point(f'tyler_fpe_{normalization.value}', step, start, cfg)


def shrinkage_fpe_limit(samples: SampleSet, cfg: SolverConfig) -> HermitianPDS:
    """β → 0 limit of the shrinkage estimator: Tyler with Tr(Σ⁻¹) = m."""
    estimate, _ = tyler_fpe(
        samples, replace(cfg, beta=0.0, normalization=Normalization.TRACE_INV_M)
    )
    return estimate


def _wiesel_entries(sigma: HermitianPDS, samples: SampleSet, beta: float) -> NDArray:
    weighted, _ = _weighted_scatter(sigma, samples.vectors)
    m, N = samples.dim, samples.count
    return (1.0 - beta) * m / N * weighted + beta * m / inv_trace(sigma) * np.eye(m)


def wiesel_residual(sigma: HermitianPDS, samples: SampleSet, beta: float) -> float:
    """Plug-back residual of the self-scaling shrinkage equation (scale invariant)."""
    _check_dims(sigma, samples)
    return relative_difference(_wiesel_entries(sigma, samples, beta), sigma)


def wiesel_fpe(samples: SampleSet, cfg: SolverConfig) -> Tuple[HermitianPDS, SolverReport]:
    """
    Shrinkage fixed point with the self-scaling load β·m/Tr(Σ⁻¹)·I.

    Solutions are unique only up to scale; iterates are normalized to
    Tr(Σ) = m. Any solution is a positive multiple of the shrinkage_fpe
    solution for the same β.
    """
    m, N = samples.dim, samples.count
    check_beta(cfg.beta, m, N)
    beta = cfg.beta

    def step(sigma: HermitianPDS) -> HermitianPDS:
        return _normalize(HermitianPDS(_wiesel_entries(sigma, samples, beta)), Normalization.TRACE_M)

    start = _normalize(_starting_point(samples, cfg), Normalization.TRACE_M)
    return _run_fixed_point('wiesel_fpe', step, start, cfg)


def trace_normalized_shrinkage_fpe(
    samples: SampleSet, cfg: SolverConfig
) -> Tuple[HermitianPDS, SolverReport]:
    """
    Shrinkage iteration with a Tr(Σ) = m renormalization after every step.

    The normalized iterates converge to a matrix with Tr(Σ) = m, which in
    general is not a solution of the shrinkage equation (its inverse trace
    differs from m).
    """
    m, N = samples.dim, samples.count
    check_beta(cfg.beta, m, N)
    X = samples.vectors
    gain = (1.0 - cfg.beta) * m / N
    load = cfg.beta * np.eye(m)

    def step(sigma: HermitianPDS) -> HermitianPDS:
        weighted, _ = _weighted_scatter(sigma, X)
        return _normalize(HermitianPDS(gain * weighted + load), Normalization.TRACE_M)

    start = _normalize(_starting_point(samples, cfg), Normalization.TRACE_M)
    return _run_fixed_point('trace_normalized_shrinkage_fpe', step, start, cfg)


def write_samples(samples: SampleSet, path: str) -> None:
    """Header ``HPV1 <N> <m>`` then N·m lines ``re im``, sample after sample."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    lines = [f"{HPV1_MAGIC} {samples.count} {samples.dim}"]
    for z in samples.vectors.ravel():
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    with open(path, 'w', encoding='ascii', newline='\n') as f:
        f.write('\n'.join(lines) + '\n')


def read_samples(path: str) -> SampleSet:
    with open(path, 'r', encoding='ascii') as f:
        header = f.readline().split()
        if len(header) != 3 or header[0] != HPV1_MAGIC:
            raise ConfigurationError(f"{path}: missing '{HPV1_MAGIC} <N> <m>' header")
        N, m = int(header[1]), int(header[2])
        values = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if values.shape != (N * m, 2):
        raise ConfigurationError(f"{path}: expected {N * m} 're im' lines, got {values.shape[0]}")
    return SampleSet((values[:, 0] + 1j * values[:, 1]).reshape(N, m))
