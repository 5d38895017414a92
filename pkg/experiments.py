"""
Monte-Carlo and scenario experiments behind the ``rshrink`` commands.

Every run writes a CSV through pandas and a JSON sidecar holding the
resolved configuration. Trial t draws from ``RngSeed(seed, t)`` and results
are reduced in trial order, so the CSV bytes do not depend on the number of
worker threads.
"""
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from config_manager import validate_experiment_config
from detection import AngleVelocityGrid, DetectionMap, detection_map, export_map, select_secondary
from error_handler import (
    ConfigurationError,
    FailureBudgetExceeded,
    InvalidBeta,
    NoConvergence,
    NotPositiveDefinite,
)
from estimation import EstimatorFactory, EstimatorTag
from estimators import (
    SampleSet,
    SolverConfig,
    check_beta,
    read_samples,
    shrinkage_fpe,
    shrinkage_fpe_limit,
)
from likelihood import log_determinant_bound, endpoint_log_likelihoods, profile_sweep
from logger_config import get_logger
from matrix_core import HermitianPDS, relative_difference, write_hpd1
from scenario_config import ScenarioConfigManager
from scenarios import (
    DEFAULT_PATCHES,
    RngSeed,
    StapScenario,
    ToeplitzSpec,
    sample_gaussian,
    sample_sirv,
    scenario_summary,
    synth_datacube,
    targets_from_config,
    texture_from_mapping,
    toeplitz_covariance,
)
from solver_metrics import record_trial

logger = get_logger('rshrink.experiments')

FAILURE_BUDGET = 0.001
CSV_FLOAT_FORMAT = '%.12g'


class ExperimentKind(Enum):
    NMSE = 'nmse'
    CONVERGENCE = 'convergence'
    LIKELIHOOD_SCAN = 'likelihood-scan'
    STAP_MAP = 'stap-map'
    ESTIMATE = 'estimate'

    @property
    def solver_based(self) -> bool:
        return self in (ExperimentKind.NMSE, ExperimentKind.CONVERGENCE,
                        ExperimentKind.LIKELIHOOD_SCAN)


DEFAULT_TRIALS = {
    ExperimentKind.NMSE: 2000,
    ExperimentKind.CONVERGENCE: 200,
}

DEFAULT_OUTPUTS = {
    ExperimentKind.NMSE: os.path.join('results', 'nmse.csv'),
    ExperimentKind.CONVERGENCE: os.path.join('results', 'convergence.csv'),
    ExperimentKind.LIKELIHOOD_SCAN: os.path.join('results', 'likelihood_scan.csv'),
    ExperimentKind.STAP_MAP: os.path.join('results', 'stap_map'),
    ExperimentKind.ESTIMATE: os.path.join('results', 'estimate.hpd'),
}


@dataclass(frozen=True)
class MapEstimator:
    tag: EstimatorTag
    betas: Tuple[Optional[float], ...]


@dataclass(frozen=True)
class StapMapSettings:
    """Scene, range protocol and estimator sweep of a stap-map run."""
    scenario: Dict[str, Any]
    n_range_cells: int
    cut: int
    estimators: Tuple[MapEstimator, ...]
    guard: int = 4
    n_secondary: Optional[int] = None
    keep_contaminated: bool = True
    contaminated: Optional[Tuple[int, ...]] = None
    n_patches: int = DEFAULT_PATCHES
    texture: Optional[Dict[str, Any]] = None
    targets: Tuple[Dict[str, Any], ...] = ()
    angle_step_deg: float = 1.0
    velocity_bins: int = 101

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> 'StapMapSettings':
        estimators = []
        for entry in mapping['estimators']:
            tag = EstimatorFactory.parse_tag(entry['tag'])
            betas = entry.get('betas')
            if tag.uses_beta and not betas:
                raise ConfigurationError(f"estimator {tag.value} needs a 'betas' list")
            values: Tuple[Optional[float], ...] = (
                tuple(float(b) for b in betas) if tag.uses_beta else (None,)
            )
            estimators.append(MapEstimator(tag, values))

        contaminated = mapping.get('contaminated')
        grid = mapping.get('grid') or {}
        return cls(
            scenario=ScenarioConfigManager.resolve(mapping['scenario']),
            n_range_cells=int(mapping['n_range_cells']),
            cut=int(mapping['cut']),
            estimators=tuple(estimators),
            guard=int(mapping.get('guard', 4)),
            n_secondary=mapping.get('n_secondary'),
            keep_contaminated=bool(mapping.get('keep_contaminated', True)),
            contaminated=None if contaminated is None else tuple(int(c) for c in contaminated),
            n_patches=int(mapping.get('n_patches', DEFAULT_PATCHES)),
            texture=mapping.get('texture'),
            targets=tuple(dict(t) for t in mapping.get('targets', ())),
            angle_step_deg=float(grid.get('angle_step_deg', 1.0)),
            velocity_bins=int(grid.get('velocity_bins', 101)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Resolved experiment parameters.

    Solver-based kinds (nmse, convergence, likelihood-scan) need m, N, rho
    and a beta grid inside (β̄, 1]; nmse and convergence also need N > m for
    the unregularized fixed point they compare against.
    """
    kind: ExperimentKind
    output: str
    seed: RngSeed = RngSeed(0)
    threads: int = 1
    trials: int = 1
    m: Optional[int] = None
    N: Optional[int] = None
    rho: Optional[float] = None
    beta_grid: Tuple[float, ...] = ()
    tol: float = 1e-8
    max_iter: int = 1000
    nmse_metric: str = 'relative'
    sampling: Dict[str, Any] = field(default_factory=dict)
    stap: Optional[StapMapSettings] = None
    samples_path: Optional[str] = None
    estimator: str = EstimatorTag.S_FPE.value
    beta: Optional[float] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigurationError(f"trials must be ≥ 1, got {self.trials}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be ≥ 1, got {self.threads}")
        if self.nmse_metric not in ('relative', 'squared'):
            raise ConfigurationError(f"unknown nmse metric {self.nmse_metric!r}")
        if self.kind.solver_based:
            if self.m is None or self.N is None or self.rho is None:
                raise ConfigurationError(f"{self.kind.value} needs m, N and rho")
            if not self.beta_grid:
                raise ConfigurationError(f"{self.kind.value} needs a non-empty beta_grid")
            for beta in self.beta_grid:
                check_beta(beta, self.m, self.N)
        if self.kind in (ExperimentKind.NMSE, ExperimentKind.CONVERGENCE) and self.N <= self.m:
            raise ConfigurationError(
                f"{self.kind.value} compares against the Tyler estimator, which needs N > m "
                f"(got m={self.m}, N={self.N})"
            )
        if self.kind is ExperimentKind.STAP_MAP and self.stap is None:
            raise ConfigurationError("stap-map needs scenario settings")
        if self.kind is ExperimentKind.ESTIMATE and not self.samples_path:
            raise ConfigurationError("estimate needs a samples file")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> 'ExperimentConfig':
        """
        Build from a validated experiment mapping (see config_manager).

        Args:
            mapping (Mapping[str, Any]): Keys of one experiment file

        Returns:
            ExperimentConfig: Resolved configuration
        """
        validate_experiment_config(dict(mapping))
        kind = ExperimentKind(mapping['kind'])
        grid = tuple(sorted({float(b) for b in mapping.get('beta_grid', ())}))
        return cls(
            kind=kind,
            output=mapping.get('output') or DEFAULT_OUTPUTS[kind],
            seed=RngSeed(int(mapping.get('seed', 0))),
            threads=int(mapping.get('threads', 1)),
            trials=int(mapping.get('trials', DEFAULT_TRIALS.get(kind, 1))),
            m=mapping.get('m'),
            N=mapping.get('N'),
            rho=mapping.get('rho'),
            beta_grid=grid,
            tol=float(mapping.get('tol', 1e-8)),
            max_iter=int(mapping.get('max_iter', 1000)),
            nmse_metric=mapping.get('nmse_metric', 'relative'),
            sampling=dict(mapping.get('sampling') or {}),
            stap=StapMapSettings.from_mapping(mapping) if kind is ExperimentKind.STAP_MAP else None,
            samples_path=mapping.get('samples'),
            estimator=mapping.get('estimator', EstimatorTag.S_FPE.value),
            beta=mapping.get('beta'),
        )

    def solver_config(self, beta: float, init: Optional[HermitianPDS] = None) -> SolverConfig:
        return SolverConfig(beta=beta, tol=self.tol, max_iter=self.max_iter, init=init)

    def to_dict(self) -> Dict[str, Any]:
        """Sidecar form: everything that determines the CSV, thread count excluded."""
        data: Dict[str, Any] = {
            'kind': self.kind.value,
            'seed': self.seed.seed,
            'tol': self.tol,
            'max_iter': self.max_iter,
        }
        if self.kind.solver_based:
            data.update(m=self.m, N=self.N, rho=self.rho, beta_grid=list(self.beta_grid),
                        sampling=self.sampling)
        if self.kind in (ExperimentKind.NMSE, ExperimentKind.CONVERGENCE):
            data['trials'] = self.trials
        if self.kind is ExperimentKind.NMSE:
            data['nmse_metric'] = self.nmse_metric
        if self.stap is not None:
            stap = asdict(self.stap)
            stap['estimators'] = [
                {'tag': e.tag.value, 'betas': list(e.betas)} for e in self.stap.estimators
            ]
            data['stap'] = stap
        if self.kind is ExperimentKind.ESTIMATE:
            data.update(samples=self.samples_path, estimator=self.estimator, beta=self.beta)
        return data


@dataclass(frozen=True)
class NmseRecord:
    beta: float
    nmse_sfpe: float
    nmse_fpe: float
    trials: int
    stderr: float
    stderr_fpe: float

    def __post_init__(self) -> None:
        if self.nmse_sfpe < 0 or self.nmse_fpe < 0:
            raise ConfigurationError("nmse values must be non-negative")


@dataclass
class ExperimentResult:
    kind: ExperimentKind
    frame: pd.DataFrame
    output_path: str
    sidecar_path: str
    failed_trials: List[int] = field(default_factory=list)
    maps: Dict[str, DetectionMap] = field(default_factory=dict)


@dataclass
class TrialOutcome:
    trial: int
    values: Optional[NDArray[np.float64]]
    error: Optional[str] = None


def _draw_samples(cfg: ExperimentConfig, sigma: HermitianPDS, seed: RngSeed) -> SampleSet:
    model = cfg.sampling.get('model', 'gaussian')
    if model == 'sirv':
        texture = texture_from_mapping(cfg.sampling.get('texture'))
        if texture is None:
            raise ConfigurationError("sirv sampling needs a texture")
        return sample_sirv(sigma, cfg.N, texture, seed)
    return sample_gaussian(sigma, cfg.N, seed)


def _true_covariance(cfg: ExperimentConfig) -> HermitianPDS:
    return toeplitz_covariance(ToeplitzSpec(cfg.m, cfg.rho, normalize=True))


def _run_trials(
    cfg: ExperimentConfig,
    trial: Callable[[int], NDArray[np.float64]],
) -> Tuple[NDArray[np.float64], List[int]]:
    """
    Run cfg.trials independent trials and stack the successful ones in trial order.

    Raises:
        FailureBudgetExceeded: If more than 0.1% of the trials did not converge
    """
    name = cfg.kind.value

    def guarded(t: int) -> TrialOutcome:
        try:
            values = trial(t)
        except NoConvergence as e:
            logger.warning(f"{name} trial {t} excluded: {e.message}")
            record_trial(name, False)
            return TrialOutcome(t, None, e.message)
        record_trial(name, True)
        return TrialOutcome(t, values)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(guarded, range(cfg.trials)))
    else:
        outcomes = [guarded(t) for t in range(cfg.trials)]

    failed = [o.trial for o in outcomes if o.values is None]
    if len(failed) > FAILURE_BUDGET * cfg.trials:
        raise FailureBudgetExceeded(name, len(failed), cfg.trials, failed)
    if failed:
        logger.warning(f"{name}: {len(failed)} of {cfg.trials} trials excluded")
    return np.stack([o.values for o in outcomes if o.values is not None]), failed


def _mean_and_stderr(values: NDArray[np.float64]) -> Tuple[NDArray, NDArray]:
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / np.sqrt(n)


def _write_frame(frame: pd.DataFrame, cfg: ExperimentConfig,
                 extra: Optional[Dict[str, Any]] = None) -> Tuple[str, str]:
    directory = os.path.dirname(os.path.abspath(cfg.output))
    os.makedirs(directory, exist_ok=True)
    frame.to_csv(cfg.output, index=False, float_format=CSV_FLOAT_FORMAT)
    sidecar_path = os.path.splitext(cfg.output)[0] + '.json'
    _write_json(sidecar_path, {**cfg.to_dict(), **(extra or {})})
    logger.info(f"{cfg.kind.value}: wrote {len(frame)} rows to {cfg.output}")
    return cfg.output, sidecar_path


def _write_json(path: str, payload: Dict[str, Any]) -> None:
    with open(path, 'w') as f:
        json.dump(payload, f, indent=4, sort_keys=True)


def _nmse_error(metric: str) -> Callable[[HermitianPDS, HermitianPDS], float]:
    if metric == 'squared':
        return lambda estimate, truth: relative_difference(estimate, truth) ** 2
    return relative_difference


def run_nmse(cfg: ExperimentConfig) -> ExperimentResult:
    """
    NMSE of the shrinkage estimator versus β, next to the Tyler baseline.

    The true covariance is the normalized Toeplitz matrix (Tr Σ⁻¹ = m) and the
    baseline is Tyler's estimator on the same scale, so it does not depend on
    β. Each trial solves the β grid in descending order, warm-starting from
    the previous solution.

    Returns:
        ExperimentResult: Columns beta, nmse_sfpe, nmse_fpe, trials, stderr, stderr_fpe
    """
    sigma = _true_covariance(cfg)
    error = _nmse_error(cfg.nmse_metric)
    descending = sorted(cfg.beta_grid, reverse=True)
    logger.info(
        f"nmse: m={cfg.m} N={cfg.N} rho={cfg.rho} trials={cfg.trials} "
        f"betas={len(cfg.beta_grid)} metric={cfg.nmse_metric}"
    )

    def trial(t: int) -> NDArray[np.float64]:
        samples = _draw_samples(cfg, sigma, cfg.seed.for_trial(t))
        baseline = error(shrinkage_fpe_limit(samples, cfg.solver_config(0.0)), sigma)
        errors: Dict[float, float] = {}
        init = None
        for beta in descending:
            estimate, _ = shrinkage_fpe(samples, cfg.solver_config(beta, init))
            errors[beta] = error(estimate, sigma)
            init = estimate
        return np.array([[errors[b], baseline] for b in cfg.beta_grid])

    values, failed = _run_trials(cfg, trial)
    mean, stderr = _mean_and_stderr(values)
    records = [
        NmseRecord(
            beta=beta,
            nmse_sfpe=float(mean[i, 0]),
            nmse_fpe=float(mean[i, 1]),
            trials=values.shape[0],
            stderr=float(stderr[i, 0]),
            stderr_fpe=float(stderr[i, 1]),
        )
        for i, beta in enumerate(cfg.beta_grid)
    ]
    frame = pd.DataFrame([asdict(r) for r in records])
    output, sidecar = _write_frame(frame, cfg, {'failed_trials': failed})
    return ExperimentResult(cfg.kind, frame, output, sidecar, failed)


def run_convergence(cfg: ExperimentConfig) -> ExperimentResult:
    """
    C₁(β) = ‖Σ(β) − Σ_FP‖_F/‖Σ_FP‖_F averaged over trials.

    Σ_FP is Tyler's estimator with Tr(Σ_FP⁻¹) = m and seeds every shrinkage
    solve of its trial. Small β contract slowly, so configs pushing β toward
    zero need a large max_iter.

    Returns:
        ExperimentResult: Columns beta, c1, stderr, trials
    """
    logger.info(f"convergence: m={cfg.m} N={cfg.N} rho={cfg.rho} trials={cfg.trials}")
    sigma = _true_covariance(cfg)

    def trial(t: int) -> NDArray[np.float64]:
        samples = _draw_samples(cfg, sigma, cfg.seed.for_trial(t))
        fixed_point = shrinkage_fpe_limit(samples, cfg.solver_config(0.0))
        distances = []
        for beta in cfg.beta_grid:
            estimate, _ = shrinkage_fpe(samples, cfg.solver_config(beta, fixed_point))
            distances.append(relative_difference(estimate, fixed_point))
        return np.array(distances)

    values, failed = _run_trials(cfg, trial)
    mean, stderr = _mean_and_stderr(values)
    frame = pd.DataFrame({
        'beta': list(cfg.beta_grid),
        'c1': mean,
        'stderr': stderr,
        'trials': values.shape[0],
    })
    output, sidecar = _write_frame(frame, cfg, {'failed_trials': failed})
    return ExperimentResult(cfg.kind, frame, output, sidecar, failed)


def run_likelihood_scan(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Profile likelihood along the solution path for one sample set (trial 0).

    Returns:
        ExperimentResult: Columns beta, M, M_prime, grad_norm_at_solution, inv_trace
    """
    sigma = _true_covariance(cfg)
    samples = _draw_samples(cfg, sigma, cfg.seed.for_trial(0))
    points = profile_sweep(cfg.beta_grid, samples, cfg.solver_config(1.0))
    frame = pd.DataFrame({
        'beta': [p.beta for p in points],
        'M': [p.value for p in points],
        'M_prime': [p.slope for p in points],
        'grad_norm_at_solution': [p.grad_norm for p in points],
        'inv_trace': [p.inv_trace for p in points],
    })

    extra: Dict[str, Any] = {
        'log_f_at_zero': None,
        'log_f_at_one': float(-cfg.N * cfg.m),
        'preferred_endpoint': None,
        'log_det_bound': None,
    }
    if cfg.N > cfg.m:
        at_zero, at_one = endpoint_log_likelihoods(samples, cfg.solver_config(0.0))
        extra.update(
            log_f_at_zero=at_zero,
            preferred_endpoint=0.0 if at_zero > at_one else 1.0,
            log_det_bound=log_determinant_bound(samples, cfg.solver_config(0.0)),
        )
    output, sidecar = _write_frame(frame, cfg, extra)
    return ExperimentResult(cfg.kind, frame, output, sidecar)


def _map_name(tag: EstimatorTag, beta: Optional[float]) -> str:
    return tag.value if beta is None else f"{tag.value}_beta{beta:g}"


def run_stap_map(cfg: ExperimentConfig) -> ExperimentResult:
    """
    One detection map per (estimator, β) on a synthetic datacube.

    Maps are written to ``<output>/<ESTIMATOR>_beta<β>.csv`` with JSON
    sidecars; ``<output>/summary.csv`` lists every combination with its peak
    and status. Combinations outside an estimator's β domain (InvalidBeta) or
    that fail to converge are recorded in the summary and skipped.
    """
    settings = cfg.stap
    scn = StapScenario.from_mapping(settings.scenario)
    cube = synth_datacube(
        scn,
        settings.n_range_cells,
        targets=targets_from_config(settings.targets),
        seed=cfg.seed,
        n_patches=settings.n_patches,
        texture=texture_from_mapping(settings.texture),
    )
    contaminated = settings.contaminated
    if contaminated is None:
        contaminated = tuple(c for c in cube.target_cells() if c != settings.cut)
    selection = select_secondary(
        cube.n_cells, settings.cut, settings.guard,
        keep_contaminated=settings.keep_contaminated,
        contaminated=contaminated,
        n_secondary=settings.n_secondary,
    )
    grid = AngleVelocityGrid.default(scn, settings.angle_step_deg, settings.velocity_bins)
    secondary = cube.samples(selection.selected)
    logger.info(
        f"stap-map: m={scn.dim} N={selection.selected_count} cut={settings.cut} "
        f"grid={grid.shape[0]}x{grid.shape[1]}"
    )

    os.makedirs(cfg.output, exist_ok=True)
    rows: List[Dict[str, Any]] = []
    maps: Dict[str, DetectionMap] = {}
    for entry in settings.estimators:
        for beta in entry.betas:
            name = _map_name(entry.tag, beta)
            row: Dict[str, Any] = {
                'estimator': entry.tag.value, 'beta': beta, 'status': 'ok',
                'peak_angle_deg': None, 'peak_velocity_mps': None,
                'peak_to_median': None, 'iterations': None,
            }
            estimator = EstimatorFactory.create_estimator(
                entry.tag, beta,
                None if beta is None else SolverConfig(beta=beta, tol=cfg.tol, max_iter=cfg.max_iter)
            )
            try:
                estimate = estimator.estimate(secondary)
            except InvalidBeta as e:
                logger.warning(f"{name} skipped: {e.message}")
                rows.append({**row, 'status': 'invalid_beta'})
                continue
            except (NoConvergence, NotPositiveDefinite) as e:
                logger.warning(f"{name} failed: {e.message}")
                rows.append({**row, 'status': 'failed'})
                continue

            result = detection_map(cube, scn, settings.cut, estimator, grid=grid,
                                   selection=selection, estimate=estimate, threads=cfg.threads)
            export_map(result, os.path.join(cfg.output, f"{name}.csv"),
                       {'scenario': scenario_summary(scn)})
            maps[name] = result
            angle, velocity = result.argmax()
            rows.append({
                **row,
                'peak_angle_deg': angle,
                'peak_velocity_mps': velocity,
                'peak_to_median': result.peak_to_median_margin(),
                'iterations': None if estimator.last_report is None else estimator.last_report.iterations,
            })

    frame = pd.DataFrame(rows, columns=['estimator', 'beta', 'status', 'peak_angle_deg',
                                        'peak_velocity_mps', 'peak_to_median', 'iterations'])
    summary_path = os.path.join(cfg.output, 'summary.csv')
    frame.to_csv(summary_path, index=False, float_format=CSV_FLOAT_FORMAT)
    sidecar_path = os.path.join(cfg.output, 'summary.json')
    _write_json(sidecar_path, {
        **cfg.to_dict(),
        'scenario_summary': scenario_summary(scn),
        'secondary_cells': selection.selected_count,
        'excluded_cells': list(selection.excluded),
    })
    return ExperimentResult(cfg.kind, frame, summary_path, sidecar_path, maps=maps)


def run_estimate(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Estimate a covariance from an HPV1 sample file.

    Writes the estimate as HPD1 to ``output`` and a JSON report next to it.
    """
    samples = read_samples(cfg.samples_path)
    tag = EstimatorFactory.parse_tag(cfg.estimator)
    solver_config = None
    if cfg.beta is not None:
        solver_config = SolverConfig(beta=cfg.beta, tol=cfg.tol, max_iter=cfg.max_iter)
    estimator = EstimatorFactory.create_estimator(tag, cfg.beta, solver_config)
    estimate = estimator.estimate(samples)

    directory = os.path.dirname(os.path.abspath(cfg.output))
    os.makedirs(directory, exist_ok=True)
    write_hpd1(estimate, cfg.output)
    report = None if estimator.last_report is None else estimator.last_report.to_dict()
    sidecar_path = os.path.splitext(cfg.output)[0] + '.json'
    _write_json(sidecar_path, {
        **cfg.to_dict(),
        **estimator.describe(),
        'm': samples.dim,
        'N': samples.count,
        'report': report,
    })
    logger.info(f"estimate: {estimator.label} on N={samples.count}, m={samples.dim} -> {cfg.output}")
    frame = pd.DataFrame([{**estimator.describe(), 'm': samples.dim, 'N': samples.count,
                           'iterations': None if report is None else report['iterations']}])
    return ExperimentResult(cfg.kind, frame, cfg.output, sidecar_path)


RUNNERS: Dict[ExperimentKind, Callable[[ExperimentConfig], ExperimentResult]] = {
    ExperimentKind.NMSE: run_nmse,
    ExperimentKind.CONVERGENCE: run_convergence,
    ExperimentKind.LIKELIHOOD_SCAN: run_likelihood_scan,
    ExperimentKind.STAP_MAP: run_stap_map,
    ExperimentKind.ESTIMATE: run_estimate,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.kind](cfg)


def with_overrides(cfg: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Copy of cfg with the non-None overrides applied (CLI flags)."""
    values = {k: v for k, v in overrides.items() if v is not None}
    if 'seed' in values:
        values['seed'] = RngSeed(int(values['seed']))
    return replace(cfg, **values)
