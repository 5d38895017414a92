import pytest
import numpy as np
from numpy.testing import assert_allclose

from error_handler import ConfigurationError
from matrix_core import inv_trace
from scenarios import (
    DeterministicTexture,
    GammaTexture,
    InverseGammaTexture,
    RngSeed,
    StapScenario,
    Target,
    ToeplitzSpec,
    brennan_rank,
    sample_gaussian,
    sample_sirv,
    scenario_summary,
    stap_steering,
    steering_matrix,
    synth_clutter_cov,
    synth_datacube,
    targets_from_config,
    texture_from_mapping,
    toeplitz_covariance,
)


class TestToeplitz:
    """Exponentially correlated covariances"""

    def test_unnormalized_entries(self):
        sigma = toeplitz_covariance(ToeplitzSpec(4, 0.5, normalize=False))
        assert sigma.entries[3, 0] == pytest.approx(0.125)
        assert sigma.entries[1, 1] == pytest.approx(1.0)

    @pytest.mark.parametrize('rho', [0.01, 0.5, 0.99])
    def test_normalized_inverse_trace(self, rho):
        sigma = toeplitz_covariance(ToeplitzSpec(12, rho))
        assert inv_trace(sigma) == pytest.approx(12.0, rel=1e-10)

    @pytest.mark.parametrize('m,rho', [(0, 0.5), (4, 0.0), (4, 1.0)])
    def test_invalid(self, m, rho):
        with pytest.raises(ConfigurationError):
            ToeplitzSpec(m, rho)


class TestRngSeed:
    """Counter-based, stream-separated random generators"""

    def test_reproducible(self):
        a = RngSeed(5, 2).generator().standard_normal(4)
        b = RngSeed(5, 2).generator().standard_normal(4)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngSeed(5, 0).generator().standard_normal(4)
        b = RngSeed(5, 1).generator().standard_normal(4)
        c = RngSeed(5, 0).generator(1).standard_normal(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_for_trial(self):
        assert RngSeed(9).for_trial(17) == RngSeed(9, 17)

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            RngSeed(-1)
        with pytest.raises(ConfigurationError):
            RngSeed(1, -2)


class TestSampling:
    """Gaussian and compound-Gaussian sample generation"""

    def test_gaussian_shape_and_determinism(self, toeplitz_sigma):
        a = sample_gaussian(toeplitz_sigma, 10, RngSeed(3))
        b = sample_gaussian(toeplitz_sigma, 10, RngSeed(3))
        assert a.vectors.shape == (10, 8)
        assert np.array_equal(a.vectors, b.vectors)

    def test_gaussian_covariance(self):
        sigma = toeplitz_covariance(ToeplitzSpec(4, 0.7))
        X = sample_gaussian(sigma, 40000, RngSeed(8)).vectors
        empirical = X.T @ X.conj() / X.shape[0]
        assert np.linalg.norm(empirical - sigma.entries) / np.linalg.norm(sigma.entries) < 0.03

    def test_sirv_shares_gaussian_stream(self, toeplitz_sigma):
        """x = √τ·g with g the Gaussian draw of the same seed"""
        seed = RngSeed(21, 4)
        g = sample_gaussian(toeplitz_sigma, 50, seed).vectors
        x = sample_sirv(toeplitz_sigma, 50, InverseGammaTexture(3.0), seed).vectors
        ratio = np.abs(x) / np.abs(g)
        assert_allclose(ratio, ratio[:, :1] * np.ones((1, 8)), rtol=1e-10)

    def test_rejects_empty(self, toeplitz_sigma):
        with pytest.raises(ConfigurationError):
            sample_gaussian(toeplitz_sigma, 0, RngSeed(0))


class TestTextures:
    """Unit-mean texture distributions"""

    @pytest.mark.parametrize('texture', [InverseGammaTexture(4.0), GammaTexture(2.0)])
    def test_unit_mean(self, texture):
        tau = texture.draw(np.random.default_rng(0), 200000)
        assert np.all(tau > 0)
        assert tau.mean() == pytest.approx(1.0, abs=0.02)

    def test_deterministic(self):
        assert np.all(DeterministicTexture(2.5).draw(np.random.default_rng(0), 3) == 2.5)

    def test_from_mapping(self):
        assert texture_from_mapping(None) is None
        assert texture_from_mapping({'kind': 'gamma', 'shape': 0.5}) == GammaTexture(0.5)
        with pytest.raises(ConfigurationError):
            texture_from_mapping({'kind': 'weibull'})
        with pytest.raises(ConfigurationError):
            InverseGammaTexture(0.0)


class TestStapScenario:
    """Array geometry and derived quantities"""

    def test_desk_preset(self, desk_scenario):
        assert desk_scenario.dim == 64
        assert desk_scenario.wavelength_m == pytest.approx(0.0299792458)
        assert desk_scenario.max_velocity_mps == pytest.approx(7.4948, rel=1e-4)
        assert desk_scenario.clutter_power == pytest.approx(100.0)

    def test_brennan_rank(self, desk_scenario):
        assert brennan_rank(desk_scenario) == 19
        assert brennan_rank(StapScenario.preset('recorded')) == 46

    def test_from_mapping_missing_key(self):
        with pytest.raises(ConfigurationError):
            StapScenario.from_mapping({'sensors': 4})

    def test_invalid_geometry(self):
        with pytest.raises(ConfigurationError):
            StapScenario(0, 16, 1e10, 5e6, 7.5, 0.015, 1000.0, 20.0, -5.0)
        with pytest.raises(ConfigurationError):
            StapScenario(4, 16, 1e10, 5e6, -1.0, 0.015, 1000.0, 20.0, -5.0)

    def test_summary(self, desk_scenario):
        summary = scenario_summary(desk_scenario)
        assert summary['dim'] == 64
        assert summary['brennan_rank'] == 19


class TestSteering:
    """Space-time steering vectors"""

    def test_unit_norm(self, desk_scenario):
        P = steering_matrix(desk_scenario, np.linspace(-80, 80, 7), np.linspace(-5, 5, 7))
        assert_allclose(np.linalg.norm(P, axis=1), 1.0)

    def test_broadside_zero_velocity_is_flat(self, desk_scenario):
        p = stap_steering(desk_scenario, 0.0, 0.0)
        assert_allclose(p, np.full(64, 1.0 / 8.0))

    def test_index_layout(self, desk_scenario):
        """Entry k·S + s carries phase k·φ_t + s·φ_s"""
        scn = desk_scenario
        p = stap_steering(scn, 30.0, 2.0) * np.sqrt(scn.dim)
        phi_s = 2 * np.pi * scn.element_spacing_m / scn.wavelength_m * np.sin(np.deg2rad(30.0))
        phi_t = 2 * np.pi * 2 * 2.0 / (scn.wavelength_m * scn.prf_hz)
        k, s = 3, 2
        assert p[k * scn.sensors + s] == pytest.approx(np.exp(1j * (k * phi_t + s * phi_s)))


class TestClutter:
    """Clutter-plus-noise covariance"""

    def test_rank_matches_brennan(self, desk_scenario):
        """With 2V/(d·f_r) = 1 the clutter occupies exactly S + M − 1 dimensions"""
        eigenvalues = np.linalg.eigvalsh(synth_clutter_cov(desk_scenario).entries)
        assert int(np.sum(eigenvalues > 1.0 + 1e-6)) == brennan_rank(desk_scenario)
        assert eigenvalues.min() == pytest.approx(1.0, abs=1e-8)

    def test_clutter_to_noise_trace(self, desk_scenario):
        cov = synth_clutter_cov(desk_scenario)
        assert np.trace(cov.entries).real == pytest.approx(64 * (100.0 + 1.0), rel=1e-10)

    def test_no_patches_is_noise(self, desk_scenario):
        assert_allclose(synth_clutter_cov(desk_scenario, 0).entries, np.eye(64))
        with pytest.raises(ConfigurationError):
            synth_clutter_cov(desk_scenario, -1)


class TestDatacube:
    """Range-indexed snapshots with injected targets"""

    def test_shape_and_read_only(self, small_scenario):
        cube = synth_datacube(small_scenario, 30, seed=RngSeed(4))
        assert cube.cells.shape == (30, 16)
        assert cube.n_cells == 30
        with pytest.raises(ValueError):
            cube.cells[0, 0] = 1.0

    def test_target_injection(self, small_scenario):
        """Only the target cell changes, by a·√m·p with |a|² = σ_c²·10^(SCR/10)"""
        target = Target(angle_deg=10.0, velocity_mps=3.0, cell=7, scr_db=0.0)
        clean = synth_datacube(small_scenario, 20, seed=RngSeed(4))
        dirty = synth_datacube(small_scenario, 20, targets=[target], seed=RngSeed(4))
        diff = dirty.cells - clean.cells
        assert np.count_nonzero(np.abs(diff).sum(axis=1) > 0) == 1
        injected = diff[7]
        expected_norm = np.sqrt(small_scenario.clutter_power * small_scenario.dim)
        assert np.linalg.norm(injected) == pytest.approx(expected_norm, rel=1e-10)
        p = stap_steering(small_scenario, 10.0, 3.0)
        assert abs(np.vdot(p, injected)) == pytest.approx(expected_norm, rel=1e-10)
        assert dirty.target_cells() == [7]

    def test_target_outside_range(self, small_scenario):
        with pytest.raises(ConfigurationError):
            synth_datacube(small_scenario, 5, targets=[Target(0.0, 0.0, cell=5)])

    def test_targets_from_config(self):
        targets = targets_from_config([{'angle_deg': 0, 'velocity_mps': 4, 'cell': 80}])
        assert targets == [Target(0.0, 4.0, 80, None)]

    def test_heterogeneous_clutter(self, small_scenario):
        cube = synth_datacube(small_scenario, 10, seed=RngSeed(2), texture=GammaTexture(0.5))
        homogeneous = synth_datacube(small_scenario, 10, seed=RngSeed(2))
        ratio = np.linalg.norm(cube.cells, axis=1) / np.linalg.norm(homogeneous.cells, axis=1)
        assert not np.allclose(ratio, 1.0)
