import pytest
import numpy as np
from numpy.testing import assert_allclose

from conftest import random_pds
from error_handler import ConfigurationError, InvalidBeta, NoConvergence, ZeroVector
from estimators import (
    Normalization,
    SampleSet,
    SolverConfig,
    apply_map_f,
    beta_lower_bound,
    check_beta,
    dl_scm,
    fp_residual,
    read_samples,
    scm,
    shrinkage_fpe,
    shrinkage_fpe_limit,
    trace_normalized_shrinkage_fpe,
    tyler_fpe,
    tyler_map,
    wiesel_fpe,
    wiesel_residual,
    write_samples,
)
from matrix_core import HermitianPDS, inv_trace, relative_difference
from scenarios import (
    GammaTexture,
    InverseGammaTexture,
    RngSeed,
    ToeplitzSpec,
    sample_gaussian,
    sample_sirv,
    toeplitz_covariance,
)


def _trace(A):
    return float(np.trace(A.entries).real)


class TestSampleSet:
    """Validation of the N×m sample container"""

    def test_shape(self, gaussian_samples):
        assert gaussian_samples.dim == 8
        assert gaussian_samples.count == 32

    def test_zero_vector_rejected(self):
        X = np.ones((3, 2), dtype=complex)
        X[1] = 0.0
        with pytest.raises(ZeroVector):
            SampleSet(X)

    def test_scaled_per_sample(self):
        S = SampleSet(np.ones((2, 3)))
        scaled = S.scaled([2.0, 3.0])
        assert_allclose(scaled.vectors[1], 3.0)


class TestSolverConfig:
    """Defaults and validation of the iteration controls"""

    def test_defaults(self):
        cfg = SolverConfig(beta=0.5)
        assert cfg.tol == 1e-8
        assert cfg.max_iter == 1000
        assert cfg.init is None
        assert cfg.normalization is Normalization.NONE

    @pytest.mark.parametrize('kwargs', [
        {'beta': -0.1}, {'beta': 1.5}, {'beta': 0.5, 'tol': 0.0}, {'beta': 0.5, 'max_iter': 0}
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            SolverConfig(**kwargs)


class TestBetaDomain:
    """Existence boundary max(0, 1 - N/m)"""

    def test_lower_bound(self):
        assert beta_lower_bound(16, 8) == pytest.approx(0.5)
        assert beta_lower_bound(12, 24) == 0.0
        assert beta_lower_bound(256, 200) == pytest.approx(0.21875)

    def test_check_beta(self):
        check_beta(0.6, 16, 8)
        with pytest.raises(InvalidBeta) as exc:
            check_beta(0.5, 16, 8)
        assert exc.value.lower == pytest.approx(0.5)
        with pytest.raises(InvalidBeta):
            check_beta(0.0, 12, 24)


class TestSampleCovariance:
    """Plain and diagonally loaded sample covariance"""

    def test_scm_matches_outer_products(self, gaussian_samples):
        X = gaussian_samples.vectors
        expected = sum(np.outer(x, x.conj()) for x in X) / X.shape[0]
        assert_allclose(scm(gaussian_samples).entries, expected, atol=1e-12)

    def test_dl_scm_endpoints(self, gaussian_samples):
        assert_allclose(dl_scm(gaussian_samples, 1.0).entries, np.eye(8))
        assert isinstance(dl_scm(gaussian_samples, 0.5), HermitianPDS)
        assert not isinstance(dl_scm(gaussian_samples, 0.0), HermitianPDS)

    def test_dl_scm_regularizes_undersampled(self, undersampled):
        """SCM of 8 samples in dimension 16 is singular, any loading fixes it"""
        loaded = dl_scm(undersampled, 0.1)
        assert inv_trace(loaded) > 0


class TestShrinkageFpe:
    """Shrinkage fixed-point estimator"""

    def test_trace_of_inverse_is_m(self, gaussian_samples):
        """Tr(Σ⁻¹) = m holds at the solution without any normalization step"""
        for beta in (0.1, 0.3, 0.6, 0.9):
            sigma, report = shrinkage_fpe(gaussian_samples, SolverConfig(beta=beta, tol=1e-10,
                                                                         max_iter=5000))
            assert report.converged
            assert inv_trace(sigma) == pytest.approx(8.0, abs=1e-6 * 8)

    def test_solution_is_fixed_point(self, gaussian_samples):
        sigma, report = shrinkage_fpe(gaussian_samples, SolverConfig(beta=0.4, tol=1e-11,
                                                                     max_iter=5000))
        assert fp_residual(sigma, gaussian_samples, 0.4) < 1e-9
        assert report.residual_history[-1] == report.final_residual
        assert report.iterations == len(report.residual_history)

    def test_init_independence(self, gaussian_samples, rng):
        cfg = SolverConfig(beta=0.3, tol=1e-11, max_iter=5000)
        from_identity, _ = shrinkage_fpe(gaussian_samples, cfg)
        init = random_pds(rng, 8, spread=0.5).scaled(4.0)
        from_random, _ = shrinkage_fpe(gaussian_samples, SolverConfig(beta=0.3, tol=1e-11,
                                                                      max_iter=5000, init=init))
        assert relative_difference(from_random, from_identity) < 1e-6

    def test_beta_one_is_identity(self, gaussian_samples):
        sigma, report = shrinkage_fpe(gaussian_samples, SolverConfig(beta=1.0))
        assert np.array_equal(sigma.entries, np.eye(8))
        assert report.iterations <= 2

    def test_beta_zero_routes_to_tyler(self, gaussian_samples):
        """β = 0 returns the Tyler point scaled to Tr(Σ⁻¹) = m"""
        sigma, _ = shrinkage_fpe(gaussian_samples, SolverConfig(beta=0.0, tol=1e-10))
        expected = shrinkage_fpe_limit(gaussian_samples, SolverConfig(beta=0.0, tol=1e-10))
        assert relative_difference(sigma, expected) < 1e-12
        assert inv_trace(sigma) == pytest.approx(8.0, rel=1e-8)

    def test_rejects_normalization(self, gaussian_samples):
        with pytest.raises(ConfigurationError):
            shrinkage_fpe(gaussian_samples,
                          SolverConfig(beta=0.5, normalization=Normalization.TRACE_M))

    def test_no_convergence_carries_partial_result(self, gaussian_samples):
        with pytest.raises(NoConvergence) as exc:
            shrinkage_fpe(gaussian_samples, SolverConfig(beta=0.05, max_iter=3))
        assert exc.value.report.iterations == 3
        assert not exc.value.report.converged
        assert isinstance(exc.value.estimate, HermitianPDS)

    def test_undersampled_above_boundary_converges(self, undersampled):
        """m=16, N=8: β = 0.6 lies above β̄ = 0.5"""
        sigma, report = shrinkage_fpe(undersampled, SolverConfig(beta=0.6))
        assert report.converged
        assert report.iterations < 1000
        assert inv_trace(sigma) == pytest.approx(16.0, rel=1e-5)

    def test_undersampled_at_boundary_is_invalid(self, undersampled):
        with pytest.raises(InvalidBeta):
            shrinkage_fpe(undersampled, SolverConfig(beta=0.5))

    def test_undersampled_below_boundary_fails(self, undersampled):
        """Below β̄ there is no fixed point, so the solver refuses before iterating"""
        with pytest.raises(InvalidBeta) as exc:
            shrinkage_fpe(undersampled, SolverConfig(beta=0.4))
        assert exc.value.lower == pytest.approx(0.5)

    @pytest.mark.parametrize('beta,warm', [
        (1e-3, False), (1e-3, True), pytest.param(1e-4, True, marks=pytest.mark.slow),
    ])
    def test_small_beta_keeps_trace_of_inverse(self, beta, warm):
        """The scale contracts at 1 − β, so a converged report must still mean Tr(Σ⁻¹) = m"""
        samples = sample_gaussian(toeplitz_covariance(ToeplitzSpec(3, 0.5)), 12, RngSeed(0))
        start = shrinkage_fpe_limit(samples, SolverConfig(beta=0.0, tol=1e-12)) if warm else None
        sigma, report = shrinkage_fpe(samples, SolverConfig(beta=beta, max_iter=400000, init=start))
        assert report.converged
        assert abs(inv_trace(sigma) - 3.0) <= 1e-6 * 3.0
        assert report.final_residual <= 1e-8

    def test_small_beta_needs_more_than_default_iterations(self):
        samples = sample_gaussian(toeplitz_covariance(ToeplitzSpec(3, 0.5)), 12, RngSeed(0))
        with pytest.raises(NoConvergence) as exc:
            shrinkage_fpe(samples, SolverConfig(beta=1e-3))
        assert exc.value.report.iterations == 1000

    def test_map_dominates_loading(self, gaussian_samples, rng):
        """f_β(Σ) − βI is positive semi-definite"""
        image = apply_map_f(random_pds(rng, 8), gaussian_samples, 0.3)
        assert np.linalg.eigvalsh(image.entries - 0.3 * np.eye(8)).min() > -1e-10

    @pytest.mark.parametrize('trial', range(20))
    def test_random_configurations(self, trial):
        """Trace-of-inverse invariant over random (m, N, β, ρ)"""
        rng = np.random.default_rng(1000 + trial)
        m = int(rng.integers(4, 17))
        N = int(rng.integers(m + 1, 4 * m + 1))
        beta = float(rng.uniform(0.1, 1.0))
        rho = float(rng.choice([0.01, 0.5, 0.99]))
        samples = sample_gaussian(toeplitz_covariance(ToeplitzSpec(m, rho)), N, RngSeed(trial))
        sigma, _ = shrinkage_fpe(samples, SolverConfig(beta=beta, tol=1e-10, max_iter=10000))
        assert abs(inv_trace(sigma) - m) <= 1e-6 * m

    @pytest.mark.slow
    def test_random_configurations_full(self):
        """500 random configurations with m up to 32"""
        rng = np.random.default_rng(77)
        for trial in range(500):
            m = int(rng.integers(4, 33))
            N = int(rng.integers(m + 1, 4 * m + 1))
            beta = float(rng.uniform(0.05, 1.0))
            rho = float(rng.choice([0.01, 0.5, 0.99]))
            samples = sample_gaussian(toeplitz_covariance(ToeplitzSpec(m, rho)), N, RngSeed(5, trial))
            sigma, _ = shrinkage_fpe(samples, SolverConfig(beta=beta, tol=1e-10, max_iter=50000))
            assert abs(inv_trace(sigma) - m) <= 1e-6 * m


class TestTylerFpe:
    """Tyler estimator under both scale normalizations"""

    def test_normalizations(self, gaussian_samples):
        by_trace, _ = tyler_fpe(gaussian_samples, SolverConfig(
            beta=0.0, tol=1e-10, normalization=Normalization.TRACE_M))
        by_inv_trace, _ = tyler_fpe(gaussian_samples, SolverConfig(
            beta=0.0, tol=1e-10, normalization=Normalization.TRACE_INV_M))
        assert _trace(by_trace) == pytest.approx(8.0, rel=1e-12)
        assert inv_trace(by_inv_trace) == pytest.approx(8.0, rel=1e-10)
        # same ray
        rescaled = by_trace.scaled(_trace(by_inv_trace) / 8.0)
        assert relative_difference(rescaled, by_inv_trace) < 1e-7

    def test_is_fixed_point_of_tyler_map(self, gaussian_samples):
        sigma, _ = tyler_fpe(gaussian_samples, SolverConfig(
            beta=0.0, tol=1e-12, max_iter=5000, normalization=Normalization.TRACE_M))
        assert relative_difference(tyler_map(sigma, gaussian_samples), sigma) < 1e-9

    def test_requires_more_samples_than_dimension(self, undersampled):
        with pytest.raises(InvalidBeta):
            tyler_fpe(undersampled, SolverConfig(beta=0.0, normalization=Normalization.TRACE_M))

    def test_requires_normalization(self, gaussian_samples):
        with pytest.raises(ConfigurationError):
            tyler_fpe(gaussian_samples, SolverConfig(beta=0.0))

    def test_map_scale_equivariance(self, gaussian_samples, rng):
        """f₀(cΣ) = c·f₀(Σ) and f₀ ignores per-sample rescaling"""
        sigma = random_pds(rng, 8)
        base = tyler_map(sigma, gaussian_samples)
        assert_allclose(tyler_map(sigma.scaled(7.0), gaussian_samples).entries,
                        7.0 * base.entries, rtol=1e-10, atol=1e-12)
        factors = rng.uniform(0.1, 10.0, gaussian_samples.count)
        assert_allclose(tyler_map(sigma, gaussian_samples.scaled(factors)).entries,
                        base.entries, rtol=1e-10, atol=1e-12)


class TestSelfScalingVariants:
    """Wiesel load and trace-normalized shrinkage"""

    def test_wiesel_is_multiple_of_shrinkage(self, gaussian_samples):
        cfg = SolverConfig(beta=0.5, tol=1e-12, max_iter=5000)
        shrink, _ = shrinkage_fpe(gaussian_samples, cfg)
        wiesel, _ = wiesel_fpe(gaussian_samples, cfg)
        assert _trace(wiesel) == pytest.approx(8.0, rel=1e-10)
        assert wiesel_residual(wiesel, gaussian_samples, 0.5) < 1e-9
        # the shrinkage solution solves the same equation at its own scale
        assert wiesel_residual(shrink, gaussian_samples, 0.5) < 1e-9
        rescaled = shrink.scaled(8.0 / _trace(shrink))
        assert relative_difference(rescaled, wiesel) < 1e-7

    def test_trace_normalized_differs_from_shrinkage(self, gaussian_samples):
        """Tr(Σ) = m is imposed, which moves the solution off Tr(Σ⁻¹) = m"""
        cfg = SolverConfig(beta=0.5, tol=1e-11, max_iter=5000)
        normalized, _ = trace_normalized_shrinkage_fpe(gaussian_samples, cfg)
        shrink, _ = shrinkage_fpe(gaussian_samples, cfg)
        assert _trace(normalized) == pytest.approx(8.0, rel=1e-10)
        assert inv_trace(normalized) > 8.0 + 1e-6
        assert relative_difference(normalized, shrink) > 1e-4

    def test_variants_check_beta(self, undersampled):
        with pytest.raises(InvalidBeta):
            wiesel_fpe(undersampled, SolverConfig(beta=0.3))
        with pytest.raises(InvalidBeta):
            trace_normalized_shrinkage_fpe(undersampled, SolverConfig(beta=0.3))


class TestTextureInvariance:
    """Estimates ignore the per-sample power of compound-Gaussian data"""

    @pytest.mark.parametrize('solver', [shrinkage_fpe, wiesel_fpe])
    def test_per_sample_rescaling(self, gaussian_samples, rng, solver):
        cfg = SolverConfig(beta=0.4, tol=1e-11, max_iter=5000)
        factors = rng.uniform(0.01, 100.0, gaussian_samples.count)
        base, _ = solver(gaussian_samples, cfg)
        rescaled, _ = solver(gaussian_samples.scaled(factors), cfg)
        assert relative_difference(rescaled, base) < 1e-8

    @pytest.mark.parametrize('texture', [InverseGammaTexture(1.5), GammaTexture(0.3)])
    def test_sirv_matches_gaussian_of_same_stream(self, toeplitz_sigma, texture):
        """x = √τ·g and g come from one seed: fixed-point estimates agree, the SCM does not"""
        seed = RngSeed(31, 2)
        gaussian = sample_gaussian(toeplitz_sigma, 40, seed)
        heavy = sample_sirv(toeplitz_sigma, 40, texture, seed)
        cfg = SolverConfig(beta=0.3, tol=1e-11, max_iter=5000)
        assert relative_difference(shrinkage_fpe(heavy, cfg)[0], shrinkage_fpe(gaussian, cfg)[0]) < 1e-8
        assert relative_difference(wiesel_fpe(heavy, cfg)[0], wiesel_fpe(gaussian, cfg)[0]) < 1e-8
        tyler_cfg = SolverConfig(beta=0.0, tol=1e-11, max_iter=5000,
                                 normalization=Normalization.TRACE_M)
        assert relative_difference(tyler_fpe(heavy, tyler_cfg)[0],
                                   tyler_fpe(gaussian, tyler_cfg)[0]) < 1e-8
        assert relative_difference(scm(heavy), scm(gaussian)) > 1e-2

class TestSampleFiles:
    """HPV1 sample files"""

    def test_write_then_read(self, gaussian_samples, tmp_path):
        path = str(tmp_path / 'x.hpv')
        write_samples(gaussian_samples, path)
        assert np.array_equal(read_samples(path).vectors, gaussian_samples.vectors)
        assert open(path).readline().strip() == 'HPV1 32 8'

    def test_truncated_file(self, tmp_path):
        path = tmp_path / 'short.hpv'
        path.write_text('HPV1 2 2\n1.0 0.0\n0.0 1.0\n')
        with pytest.raises(ConfigurationError):
            read_samples(str(path))
