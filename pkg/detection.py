"""ANMF detection over an angle/velocity grid.

For a cell under test y, a steering vector p and a covariance estimate M
built from secondary range cells,

    Λ = |pᴴM⁻¹y|² / (pᴴM⁻¹p · yᴴM⁻¹y)  ∈ [0, 1].

Λ does not change when M is multiplied by a positive constant, so estimators
with different scale conventions give comparable maps.
"""
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from error_handler import ConfigurationError, ZeroVector
from estimation import CovarianceEstimator
from logger_config import get_logger
from matrix_core import HermitianPDS, as_vector, solve_lower
from scenarios import Datacube, StapScenario, steering_matrix

logger = get_logger('rshrink.detection')

DEFAULT_GUARD = 4
DEFAULT_VELOCITY_BINS = 101
EXPORT_DYNAMIC_DB = 30.0
EXPORT_COLUMNS = ['angle_deg', 'velocity_mps', 'log10_lambda']


def anmf(p: ArrayLike, y: ArrayLike, M: HermitianPDS) -> float:
    """
    Adaptive normalized matched filter statistic.

    Args:
        p: Steering vector
        y: Observation under test
        M (HermitianPDS): Covariance estimate

    Returns:
        float: Λ in [0, 1]
    """
    p = as_vector(p, 'steering vector')
    y = as_vector(y, 'observation')
    if np.linalg.norm(p) == 0.0:
        raise ZeroVector('anmf steering vector')
    if np.linalg.norm(y) == 0.0:
        raise ZeroVector('anmf observation')
    wp = solve_lower(M, p)
    wy = solve_lower(M, y)
    value = abs(np.vdot(wp, wy)) ** 2 / (np.vdot(wp, wp).real * np.vdot(wy, wy).real)
    return float(min(max(value, 0.0), 1.0))


def anmf_batch(P: NDArray, y: ArrayLike, M: HermitianPDS) -> NDArray[np.float64]:
    """Λ for every row of P against one observation."""
    y = as_vector(y, 'observation')
    if np.linalg.norm(y) == 0.0:
        raise ZeroVector('anmf observation')
    wy = solve_lower(M, y)
    W = solve_lower(M, np.asarray(P).T)
    numerator = np.abs(W.conj().T @ wy) ** 2
    denominator = np.einsum('ij,ij->j', W.conj(), W).real * np.vdot(wy, wy).real
    return np.clip(numerator / denominator, 0.0, 1.0)


@dataclass(frozen=True)
class AngleVelocityGrid:
    angles_deg: NDArray[np.float64]
    velocities_mps: NDArray[np.float64]

    @classmethod
    def default(cls, scn: StapScenario, angle_step_deg: float = 1.0,
                velocity_bins: int = DEFAULT_VELOCITY_BINS) -> 'AngleVelocityGrid':
        """Angles −90°…90°, velocities ±f_r·λ/4."""
        n_angles = int(round(180.0 / angle_step_deg)) + 1
        v_max = scn.max_velocity_mps
        return cls(
            angles_deg=np.linspace(-90.0, 90.0, n_angles),
            velocities_mps=np.linspace(-v_max, v_max, velocity_bins),
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.angles_deg), len(self.velocities_mps)

    def nearest(self, angle_deg: float, velocity_mps: float) -> Tuple[int, int]:
        return (int(np.argmin(np.abs(self.angles_deg - angle_deg))),
                int(np.argmin(np.abs(self.velocities_mps - velocity_mps))))


@dataclass(frozen=True)
class CellSelection:
    cell_under_test: int
    guard: int
    excluded: Tuple[int, ...]
    selected: Tuple[int, ...]

    @property
    def selected_count(self) -> int:
        return len(self.selected)


def select_secondary(
    n_cells: int,
    cut: int,
    guard: int = DEFAULT_GUARD,
    keep_contaminated: bool = True,
    contaminated: Sequence[int] = (),
    n_secondary: Optional[int] = None,
) -> CellSelection:
    """
    Secondary range cells around a cell under test.

    The CUT and ``guard`` cells on each side are never selected. Cells listed
    in ``contaminated`` are dropped unless ``keep_contaminated``. When
    ``n_secondary`` is given, the cells nearest in range to the CUT are kept
    (lower index first on ties).

    Raises:
        ConfigurationError: If the guard band leaves the range axis
    """
    if guard < 0:
        raise ConfigurationError(f"guard must be ≥ 0, got {guard}")
    if not 0 <= cut < n_cells:
        raise ConfigurationError(f"cell under test {cut} outside [0, {n_cells})")
    if cut - guard < 0 or cut + guard > n_cells - 1:
        raise ConfigurationError(
            f"guard band [{cut - guard}, {cut + guard}] exceeds range axis [0, {n_cells - 1}]"
        )

    excluded = set(range(cut - guard, cut + guard + 1))
    if not keep_contaminated:
        excluded.update(c for c in contaminated if 0 <= c < n_cells)
    candidates = [i for i in range(n_cells) if i not in excluded]

    if n_secondary is not None:
        if n_secondary < 1:
            raise ConfigurationError(f"requested secondary count must be ≥ 1, got {n_secondary}")
        if n_secondary > len(candidates):
            logger.warning(
                f"requested {n_secondary} secondary cells, only {len(candidates)} available"
            )
        nearest = sorted(candidates, key=lambda i: (abs(i - cut), i))[:n_secondary]
        dropped = set(candidates) - set(nearest)
        excluded.update(dropped)
        candidates = sorted(nearest)

    return CellSelection(
        cell_under_test=cut,
        guard=guard,
        excluded=tuple(sorted(excluded)),
        selected=tuple(candidates),
    )


@dataclass(frozen=True)
class DetectionMap:
    """ANMF values on an (angle, velocity) grid; rows are angles."""
    angles_deg: NDArray[np.float64]
    velocities_mps: NDArray[np.float64]
    values: NDArray[np.float64]
    estimator_tag: str
    beta: Optional[float]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.angles_deg), len(self.velocities_mps)):
            raise ConfigurationError(
                f"map values {self.values.shape} do not match grid "
                f"({len(self.angles_deg)}, {len(self.velocities_mps)})"
            )
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise ConfigurationError("ANMF values must lie in [0, 1]")

    def peak_index(self) -> Tuple[int, int]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(i), int(j)

    def argmax(self) -> Tuple[float, float]:
        """(angle_deg, velocity_mps) of the largest statistic."""
        i, j = self.peak_index()
        return float(self.angles_deg[i]), float(self.velocities_mps[j])

    def log10_values(self) -> NDArray[np.float64]:
        return np.log10(np.maximum(self.values, np.finfo(float).tiny))

    def clipped_log10(self, dynamic_db: float = EXPORT_DYNAMIC_DB) -> NDArray[np.float64]:
        """log10 Λ floored at (max − dynamic_db/10)."""
        logs = self.log10_values()
        return np.maximum(logs, logs.max() - dynamic_db / 10.0)

    def peak_to_median_margin(self) -> float:
        """log10 of the peak over the map median."""
        logs = self.log10_values()
        return float(logs.max() - np.median(logs))

    def to_frame(self, dynamic_db: float = EXPORT_DYNAMIC_DB) -> pd.DataFrame:
        angles, velocities = np.meshgrid(self.angles_deg, self.velocities_mps, indexing='ij')
        return pd.DataFrame({
            'angle_deg': angles.ravel(),
            'velocity_mps': velocities.ravel(),
            'log10_lambda': self.clipped_log10(dynamic_db).ravel(),
        }, columns=EXPORT_COLUMNS)


def anmf_map(
    scn: StapScenario,
    grid: AngleVelocityGrid,
    y: ArrayLike,
    M: HermitianPDS,
    threads: int = 1,
) -> NDArray[np.float64]:
    """Λ over the grid for one observation and one covariance estimate."""
    y = as_vector(y, 'cell under test')
    if M.dim != scn.dim or y.size != scn.dim:
        raise ConfigurationError(f"estimate/observation dimension does not match scenario m={scn.dim}")

    def row(angle: float) -> NDArray[np.float64]:
        return anmf_batch(steering_matrix(scn, angle, grid.velocities_mps), y, M)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, grid.angles_deg))
    else:
        rows = [row(angle) for angle in grid.angles_deg]
    return np.vstack(rows)


def detection_map(
    datacube: Datacube,
    scn: StapScenario,
    cut: int,
    estimator: CovarianceEstimator,
    grid: Optional[AngleVelocityGrid] = None,
    selection: Optional[CellSelection] = None,
    estimate: Optional[HermitianPDS] = None,
    threads: int = 1,
) -> DetectionMap:
    """
    Estimate the covariance from secondary cells and sweep Λ over the grid.

    Args:
        datacube (Datacube): Range-indexed snapshots
        scn (StapScenario): Geometry used for the steering vectors
        cut (int): Cell under test
        estimator (CovarianceEstimator): From EstimatorFactory
        grid (AngleVelocityGrid, optional): Defaults to AngleVelocityGrid.default(scn)
        selection (CellSelection, optional): Defaults to select_secondary with 4 guard cells
        estimate (HermitianPDS, optional): Precomputed estimate for this
            (CUT, estimator, beta), reused instead of solving again
        threads (int): Workers for the grid sweep

    Returns:
        DetectionMap: Raw statistics (clipping only happens at export)
    """
    grid = grid or AngleVelocityGrid.default(scn)
    selection = selection or select_secondary(datacube.n_cells, cut)
    if selection.cell_under_test != cut:
        raise ConfigurationError(
            f"selection was built for cell {selection.cell_under_test}, not {cut}"
        )
    if estimate is None:
        estimate = estimator.estimate(datacube.samples(selection.selected))

    values = anmf_map(scn, grid, datacube.cell(cut), estimate, threads=threads)
    metadata = {
        'estimator': estimator.tag.value,
        'beta': estimator.beta,
        'm': scn.dim,
        'N': selection.selected_count,
        'cut': cut,
        'seed': None if datacube.seed is None else datacube.seed.seed,
    }
    result = DetectionMap(
        angles_deg=grid.angles_deg,
        velocities_mps=grid.velocities_mps,
        values=values,
        estimator_tag=estimator.tag.value,
        beta=estimator.beta,
        metadata=metadata,
    )
    peak_angle, peak_velocity = result.argmax()
    logger.info(
        f"{estimator.label} map: peak at {peak_angle:.1f} deg, {peak_velocity:.2f} m/s "
        f"(N={selection.selected_count}, m={scn.dim})"
    )
    return result


def export_map(result: DetectionMap, path: str, extra: Optional[Dict[str, Any]] = None) -> str:
    """
    Write the map CSV (angle_deg,velocity_mps,log10_lambda) and its JSON sidecar.

    Returns:
        str: Sidecar path
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    result.to_frame().to_csv(path, index=False, float_format='%.10g')

    sidecar_path = os.path.splitext(path)[0] + '.json'
    sidecar = {**result.metadata, **(extra or {})}
    with open(sidecar_path, 'w') as f:
        json.dump(sidecar, f, indent=4, sort_keys=True)
    logger.info(f"map written to {path}")
    return sidecar_path
