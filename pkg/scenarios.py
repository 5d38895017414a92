"""Synthetic data: Toeplitz covariances, Gaussian/SIRV sampling and STAP scenes.

The STAP clutter model is a discrete sum of patches along the clutter ridge
v(θ) = V·sinθ, a stand-in for recorded clutter. Two scenarios are kept: a
desk-scale one with half-wavelength spacing and one with the recorded-data
geometry (d/λ = 10), see ``scenario_config``.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.constants import speed_of_light
from scipy.linalg import toeplitz

from error_handler import ConfigurationError
from estimators import SampleSet
from logger_config import get_logger
from matrix_core import ComplexVector, HermitianPDS, inv_trace
from scenario_config import ScenarioConfigManager

logger = get_logger('rshrink.scenarios')

NOISE_POWER = 1.0
DEFAULT_PATCHES = 181


@dataclass(frozen=True)
class ToeplitzSpec:
    """Σ_ij = α·ρ^|i−j|, with α = Tr(M⁻¹)/m when ``normalize`` is set."""
    m: int
    rho: float
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigurationError(f"dimension must be ≥ 1, got {self.m}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigurationError(f"rho must lie in (0, 1), got {self.rho}")


@dataclass(frozen=True)
class RngSeed:
    """
    Seed plus stream id of a counter-based (Philox) generator.

    Streams with distinct ids are statistically independent, so trial t of a
    Monte-Carlo run draws from ``RngSeed(seed, t)`` whatever thread runs it.
    """
    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream < 0:
            raise ConfigurationError(f"stream id must be non-negative, got {self.stream}")

    def generator(self, substream: int = 0) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream, substream))
        return np.random.Generator(np.random.Philox(sequence))

    def for_trial(self, trial: int) -> 'RngSeed':
        return RngSeed(self.seed, trial)


# Substreams of one RngSeed
_GAUSSIAN = 0
_TEXTURE = 1
_TARGETS = 2


@dataclass(frozen=True)
class InverseGammaTexture:
    """τ ~ InvGamma(shape, scale = shape − 1): unit mean for shape > 1 (t-like tails)."""
    shape: float

    def __post_init__(self) -> None:
        if not self.shape > 0:
            raise ConfigurationError(f"texture shape must be positive, got {self.shape}")

    def draw(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        scale = self.shape - 1.0 if self.shape > 1.0 else 1.0
        return scale / rng.gamma(self.shape, 1.0, size)


@dataclass(frozen=True)
class GammaTexture:
    """τ ~ Gamma(shape, 1/shape): unit mean, K-distributed amplitudes."""
    shape: float

    def __post_init__(self) -> None:
        if not self.shape > 0:
            raise ConfigurationError(f"texture shape must be positive, got {self.shape}")

    def draw(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        return rng.gamma(self.shape, 1.0 / self.shape, size)


@dataclass(frozen=True)
class DeterministicTexture:
    value: float = 1.0

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise ConfigurationError(f"texture value must be positive, got {self.value}")

    def draw(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        return np.full(size, self.value)


Texture = Union[InverseGammaTexture, GammaTexture, DeterministicTexture]


def texture_from_mapping(spec: Optional[Mapping[str, Any]]) -> Optional[Texture]:
    """Build a texture from ``{'kind': 'inverse_gamma'|'gamma'|'deterministic', ...}``."""
    if not spec:
        return None
    kind = spec.get('kind', 'deterministic')
    if kind == 'inverse_gamma':
        return InverseGammaTexture(float(spec['shape']))
    if kind == 'gamma':
        return GammaTexture(float(spec['shape']))
    if kind == 'deterministic':
        return DeterministicTexture(float(spec.get('value', 1.0)))
    raise ConfigurationError(f"unknown texture kind: {kind}")


def toeplitz_covariance(spec: ToeplitzSpec) -> HermitianPDS:
    """
    Correlation matrix ρ^|i−j|, scaled so that Tr(Σ⁻¹) = m when normalized.

    Args:
        spec (ToeplitzSpec): Dimension, correlation and normalization flag

    Returns:
        HermitianPDS: The covariance
    """
    base = HermitianPDS(toeplitz(spec.rho ** np.arange(spec.m)))
    if not spec.normalize:
        return base
    return base.scaled(inv_trace(base) / spec.m)


def sample_gaussian(sigma: HermitianPDS, N: int, seed: RngSeed) -> SampleSet:
    """N circular complex Gaussian vectors x = L·z, z ~ CN(0, I)."""
    if N < 1:
        raise ConfigurationError(f"sample count must be ≥ 1, got {N}")
    rng = seed.generator(_GAUSSIAN)
    m = sigma.dim
    z = (rng.standard_normal((N, m)) + 1j * rng.standard_normal((N, m))) / np.sqrt(2.0)
    return SampleSet(z @ sigma.factor.T)


def sample_sirv(sigma: HermitianPDS, N: int, texture: Texture, seed: RngSeed) -> SampleSet:
    """
    Compound-Gaussian vectors x = √τ·g.

    The Gaussian part g is the exact stream ``sample_gaussian`` draws for the
    same seed; the texture comes from a separate substream.
    """
    g = sample_gaussian(sigma, N, seed).vectors
    tau = texture.draw(seed.generator(_TEXTURE), N)
    return SampleSet(np.sqrt(tau)[:, np.newaxis] * g)


@dataclass(frozen=True)
class StapScenario:
    """Airborne side-looking array geometry and timing; data dimension S·M."""
    sensors: int
    pulses: int
    carrier_freq_hz: float
    bandwidth_hz: float
    platform_speed_mps: float
    element_spacing_m: float
    prf_hz: float
    cnr_db: float
    scr_db: float

    def __post_init__(self) -> None:
        if self.sensors < 1 or self.pulses < 1:
            raise ConfigurationError("sensors and pulses must be ≥ 1")
        for name in ('carrier_freq_hz', 'bandwidth_hz', 'element_spacing_m', 'prf_hz'):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.platform_speed_mps < 0:
            raise ConfigurationError(f"platform speed must be ≥ 0, got {self.platform_speed_mps}")

    @property
    def dim(self) -> int:
        return self.sensors * self.pulses

    @property
    def wavelength_m(self) -> float:
        return speed_of_light / self.carrier_freq_hz

    @property
    def max_velocity_mps(self) -> float:
        """Unambiguous radial velocity f_r·λ/4."""
        return self.prf_hz * self.wavelength_m / 4.0

    @property
    def clutter_power(self) -> float:
        return NOISE_POWER * 10.0 ** (self.cnr_db / 10.0)

    @classmethod
    def from_mapping(cls, config: Mapping[str, Any]) -> 'StapScenario':
        """Build from the scenario file keys (sensors, pulses, f0_hz, ...)."""
        try:
            return cls(
                sensors=int(config['sensors']),
                pulses=int(config['pulses']),
                carrier_freq_hz=float(config['f0_hz']),
                bandwidth_hz=float(config['bandwidth_hz']),
                platform_speed_mps=float(config['speed_mps']),
                element_spacing_m=float(config['spacing_m']),
                prf_hz=float(config['prf_hz']),
                cnr_db=float(config['cnr_db']),
                scr_db=float(config['scr_db']),
            )
        except KeyError as e:
            raise ConfigurationError(f"scenario is missing key {e}")

    @classmethod
    def preset(cls, name: str) -> 'StapScenario':
        return cls.from_mapping(ScenarioConfigManager.get_scenario(name))


def _phases(scn: StapScenario, angle_deg: ArrayLike, velocity_mps: ArrayLike) -> Tuple[NDArray, NDArray]:
    lam = scn.wavelength_m
    spatial = 2.0 * np.pi * (scn.element_spacing_m / lam) * np.sin(np.deg2rad(angle_deg))
    temporal = 2.0 * np.pi * (2.0 * np.asarray(velocity_mps, dtype=float) / (lam * scn.prf_hz))
    return spatial, temporal


def steering_matrix(scn: StapScenario, angles_deg: ArrayLike, velocities_mps: ArrayLike) -> NDArray:
    """
    Unit-norm steering vectors for paired (angle, velocity) arrays, one per row.

    Entry (pulse k, sensor s), stored at index k·S + s, has phase k·φ_t + s·φ_s.
    """
    spatial, temporal = _phases(scn, np.atleast_1d(angles_deg), np.atleast_1d(velocities_mps))
    spatial, temporal = np.broadcast_arrays(spatial, temporal)
    k = np.arange(scn.pulses)
    s = np.arange(scn.sensors)
    temporal_part = np.exp(1j * np.outer(temporal, k))
    spatial_part = np.exp(1j * np.outer(spatial, s))
    p = (temporal_part[:, :, np.newaxis] * spatial_part[:, np.newaxis, :]).reshape(len(spatial), -1)
    return p / np.sqrt(scn.dim)


def stap_steering(scn: StapScenario, angle_deg: float, velocity_mps: float) -> ComplexVector:
    """Space-time steering vector p = t ⊗ s of unit norm."""
    return steering_matrix(scn, angle_deg, velocity_mps)[0]


def clutter_patch_angles(n_patches: int) -> NDArray[np.float64]:
    return np.linspace(-90.0, 90.0, n_patches)


def synth_clutter_cov(scn: StapScenario, n_patches: int = DEFAULT_PATCHES) -> HermitianPDS:
    """
    σ_c²·(m/P)·Σᵢ p(θᵢ, V sinθᵢ)p(θᵢ, V sinθᵢ)ᴴ + σ_n²·I.

    Clutter power per element is σ_c² = σ_n²·10^(CNR/10), so the clutter and
    noise traces stand in the ratio given by the CNR. ``n_patches = 0`` gives
    pure noise.
    """
    if n_patches < 0:
        raise ConfigurationError(f"patch count must be ≥ 0, got {n_patches}")
    m = scn.dim
    noise = NOISE_POWER * np.eye(m)
    if n_patches == 0:
        return HermitianPDS(noise)
    angles = clutter_patch_angles(n_patches)
    P = steering_matrix(scn, angles, scn.platform_speed_mps * np.sin(np.deg2rad(angles)))
    clutter = scn.clutter_power * m / n_patches * (P.T @ P.conj())
    return HermitianPDS(clutter + noise)


def brennan_rank(scn: StapScenario) -> int:
    """Clutter rank S + (M−1)·2V/(d·f_r), rounded half up, capped at S·M."""
    gamma = 2.0 * scn.platform_speed_mps / (scn.element_spacing_m * scn.prf_hz)
    rank = int(np.floor(scn.sensors + (scn.pulses - 1) * gamma + 0.5))
    return max(1, min(scn.dim, rank))


@dataclass(frozen=True)
class Target:
    angle_deg: float
    velocity_mps: float
    cell: int
    scr_db: Optional[float] = None


@dataclass(frozen=True)
class Datacube:
    """One space-time snapshot per range cell (rows of ``cells``)."""
    scenario: StapScenario
    cells: NDArray[np.complex128]
    targets: Tuple[Target, ...] = field(default_factory=tuple)
    seed: Optional[RngSeed] = None

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def cell(self, index: int) -> ComplexVector:
        return self.cells[index]

    def samples(self, indices: Sequence[int]) -> SampleSet:
        return SampleSet(self.cells[np.asarray(indices, dtype=int)])

    def target_cells(self) -> List[int]:
        return sorted({t.cell for t in self.targets})


def synth_datacube(
    scn: StapScenario,
    n_range_cells: int,
    targets: Sequence[Target] = (),
    seed: RngSeed = RngSeed(0),
    n_patches: int = DEFAULT_PATCHES,
    texture: Optional[Texture] = None,
) -> Datacube:
    """
    Draw clutter-plus-noise for every range cell and inject targets.

    Each target adds a·√m·p(θ, v)·e^{jφ} to its cell, with |a|² equal to the
    clutter power times 10^(SCR/10) and a random phase φ. With a texture, the
    clutter of each cell is scaled by √τ (heterogeneous clutter).
    """
    if n_range_cells < 1:
        raise ConfigurationError(f"range cell count must be ≥ 1, got {n_range_cells}")
    covariance = synth_clutter_cov(scn, n_patches)
    if texture is None:
        cells = sample_gaussian(covariance, n_range_cells, seed).vectors.copy()
    else:
        cells = sample_sirv(covariance, n_range_cells, texture, seed).vectors.copy()

    rng = seed.generator(_TARGETS)
    for target in targets:
        if not 0 <= target.cell < n_range_cells:
            raise ConfigurationError(f"target cell {target.cell} outside [0, {n_range_cells})")
        scr_db = scn.scr_db if target.scr_db is None else target.scr_db
        amplitude = np.sqrt(scn.clutter_power * 10.0 ** (scr_db / 10.0) * scn.dim)
        phase = np.exp(2j * np.pi * rng.random())
        cells[target.cell] += amplitude * phase * stap_steering(scn, target.angle_deg, target.velocity_mps)

    cells.setflags(write=False)
    logger.debug(f"synthesized datacube: {n_range_cells} cells, m={scn.dim}, {len(targets)} targets")
    return Datacube(scenario=scn, cells=cells, targets=tuple(targets), seed=seed)


def targets_from_config(entries: Sequence[Mapping[str, Any]]) -> List[Target]:
    targets = []
    for entry in entries:
        targets.append(Target(
            angle_deg=float(entry['angle_deg']),
            velocity_mps=float(entry['velocity_mps']),
            cell=int(entry['cell']),
            scr_db=None if entry.get('scr_db') is None else float(entry['scr_db']),
        ))
    return targets


def scenario_summary(scn: StapScenario) -> Dict[str, Any]:
    return {
        'dim': scn.dim,
        'wavelength_m': scn.wavelength_m,
        'max_velocity_mps': scn.max_velocity_mps,
        'brennan_rank': brennan_rank(scn),
    }
