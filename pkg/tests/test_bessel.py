import math

import numpy as np
import pytest
from scipy import integrate, stats

from slerho import bessel
from slerho.errors import DomainError, UnsupportedError


def pooled_z(mean_a, se_a, mean_b, se_b):
    return abs(mean_a - mean_b) / math.hypot(se_a, se_b)


def exact_mean_quad(dimension, x0, t):
    # one-dimensional quadrature of the exact squared-process transition law
    lam = x0**2 / t
    val, _ = integrate.quad(
        lambda z: math.sqrt(t * z) * stats.ncx2.pdf(z, dimension, lam), 0, np.inf,
        limit=200,
    )
    return val


class TestSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            bessel.BesselSpec(0.5, 1.0)
        with pytest.raises(DomainError):
            bessel.BesselSpec(3.0, -0.1)
        assert bessel.BesselSpec(3.0, 1.0).nu == 0.5

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            bessel.sample_path(bessel.BesselSpec(3.0, 1.0), T=1.0, dt=2.0, stream=0)

    def test_low_dimension_pathwise_unsupported(self):
        with pytest.raises(UnsupportedError):
            bessel.sample_path(bessel.BesselSpec(1.5, 1.0), T=1.0, dt=0.1, stream=0)


class TestSamplePath:
    def test_determinism_and_stream_independence(self):
        spec = bessel.BesselSpec(2.5, 1.0)
        p1 = bessel.sample_path(spec, T=0.5, dt=0.01, stream=42)
        p2 = bessel.sample_path(spec, T=0.5, dt=0.01, stream=42)
        p3 = bessel.sample_path(spec, T=0.5, dt=0.01, stream=43)
        assert np.array_equal(p1.values, p2.values)
        assert not np.array_equal(p1.values, p3.values)

    def test_positivity_and_monotone_integrals(self):
        spec = bessel.BesselSpec(2.05, 0.3)
        path = bessel.sample_path(spec, T=1.0, dt=1e-3, stream=7)
        assert path.values[0] == 0.3
        assert np.all(path.values > 0.0)
        assert np.all(np.diff(path.inv_sq_integral) > 0.0)
        assert path.inv_sq_integral[0] == 0.0
        assert np.all(np.diff(path.inv_integral) > 0.0)

    @pytest.mark.slow
    def test_d3_mean_against_gaussian_modulus(self):
        # a 3-d Bessel is the modulus of a 3-d Brownian motion
        n = 100_000
        T = 1.0
        spec = bessel.BesselSpec(3.0, 1.0)
        xT, _, _ = bessel._kernels.bessel_summaries(spec.nu, spec.x0, 1000, 1e-3, 2024, 0, n)
        rng = np.random.default_rng(555)
        g = rng.normal(size=(n, 3)) * math.sqrt(T)
        g[:, 0] += 1.0
        oracle = np.linalg.norm(g, axis=1)
        z = pooled_z(xT.mean(), xT.std() / math.sqrt(n), oracle.mean(), oracle.std() / math.sqrt(n))
        assert z < 3.0, f"z={z}"

    @pytest.mark.slow
    def test_zero_start_marginal_is_chi_square(self):
        # from 0 the squared value at time 1 is exactly chi-square with d dof
        n = 100_000
        d = 3.0
        spec = bessel.BesselSpec(d, 0.0)
        xT, _, _ = bessel._kernels.bessel_summaries(spec.nu, spec.x0, 1000, 1e-3, 99, 0, n)
        ks = stats.kstest(xT**2, stats.chi2(d).cdf).statistic
        assert ks < 0.01, f"KS={ks}"

    @pytest.mark.slow
    def test_positive_start_marginal_is_noncentral_chi_square(self):
        n = 100_000
        d, x0, t = 2.5, 1.0, 1.0
        spec = bessel.BesselSpec(d, x0)
        xT, _, _ = bessel._kernels.bessel_summaries(spec.nu, spec.x0, 1000, 1e-3, 1234, 0, n)
        ks = stats.kstest(xT**2 / t, stats.ncx2(d, x0**2 / t).cdf).statistic
        assert ks < 0.01, f"KS={ks}"

    def test_weak_error_shrinks_with_dt(self):
        # scheme consistency: halving dt repeatedly shrinks the bias of E[X_T]
        n = 400_000
        d, x0, T = 3.0, 1.0, 0.5
        target = exact_mean_quad(d, x0, T)
        spec = bessel.BesselSpec(d, x0)
        errs = []
        noise = None
        for dt, steps in ((0.1, 5), (0.0125, 40)):
            xT, _, _ = bessel._kernels.bessel_summaries(spec.nu, spec.x0, steps, dt, 31, 0, n)
            errs.append(abs(xT.mean() - target))
            noise = xT.std() / math.sqrt(n)
        assert errs[1] < max(0.7 * errs[0], 4.0 * noise), f"errs={errs}, noise={noise}"

    def test_exact_sampler_matches_scipy_law(self):
        spec = bessel.BesselSpec(2.5, 1.0)
        x = bessel.sample_exact(spec, t=2.0, n=50_000, stream=5)
        ks = stats.kstest(x**2 / 2.0, stats.ncx2(2.5, 0.5).cdf).statistic
        assert ks < 0.012, f"KS={ks}"
        x0 = bessel.sample_exact(bessel.BesselSpec(3.0, 0.0), t=1.0, n=50_000, stream=6)
        ks0 = stats.kstest(x0**2, stats.chi2(3.0).cdf).statistic
        assert ks0 < 0.012, f"KS={ks0}"


class TestGirsanov:
    def test_identity_weight(self):
        spec = bessel.BesselSpec(2.5, 1.0)
        path = bessel.sample_path(spec, T=1.0, dt=0.01, stream=11)
        w = bessel.girsanov_weight(path, mu_to=spec.nu)
        assert w.weight == 1.0

    def test_zero_start_rejected(self):
        spec = bessel.BesselSpec(3.0, 0.0)
        path = bessel.sample_path(spec, T=0.1, dt=0.01, stream=1)
        with pytest.raises(DomainError):
            bessel.girsanov_weight(path, mu_to=1.0)

    @pytest.mark.slow
    def test_unit_expectation(self):
        # the density has unit mean under the original law
        n = 100_000
        spec = bessel.BesselSpec(2.5, 1.0)
        xT, _, i2 = bessel._kernels.bessel_summaries(spec.nu, spec.x0, 1000, 1e-3, 77, 0, n)
        w = bessel.weight_values(xT, i2, spec.x0, spec.nu, 0.75)
        z = abs(w.mean() - 1.0) / (w.std() / math.sqrt(n))
        assert z < 3.0, f"z={z}, mean={w.mean()}"

    @pytest.mark.slow
    def test_change_of_measure_grid(self):
        # E_nu[w f(X_T)] = E_mu[f(X_T)] for bounded f on the index grid.
        # A pooled-stderr z-test needs E[w^2] < inf, which holds iff
        # (2 mu - nu)^2 >= 2 (mu - nu)^2; the down-weighting directions of
        # this grid all violate it, and each unordered pair is covered by its
        # finite-variance direction.
        n = 30_000
        steps, dt = 1000, 1e-3
        x0 = 1.0
        failures = []
        tested = 0
        for idx_nu, nu in enumerate((0.0, 0.25, 0.5, 1.0)):
            xT, _, i2 = bessel._kernels.bessel_summaries(nu, x0, steps, dt, 1000 + idx_nu, 0, n)
            for idx_mu, mu in enumerate((0.0, 0.25, 0.5, 1.0)):
                if (2.0 * mu - nu) ** 2 < 2.0 * (mu - nu) ** 2:
                    continue
                tested += 1
                w = bessel.weight_values(xT, i2, x0, nu, mu)
                fw = w * np.minimum(xT, 5.0)
                yT, _, _ = bessel._kernels.bessel_summaries(
                    mu, x0, steps, dt, 2000 + 10 * idx_nu + idx_mu, 0, n
                )
                f_direct = np.minimum(yT, 5.0)
                z = pooled_z(
                    fw.mean(), fw.std() / math.sqrt(n),
                    f_direct.mean(), f_direct.std() / math.sqrt(n),
                )
                if z >= 3.0:
                    failures.append((nu, mu, z))
        assert tested == 10  # 6 up-weighting pairs + 4 diagonal points
        assert not failures, f"grid points outside 3 pooled stderr: {failures}"

    def test_telescoping(self):
        spec = bessel.BesselSpec(3.0, 1.0)
        path = bessel.sample_path(spec, T=1.0, dt=1e-3, stream=21)
        mu = 1.25
        k = 400
        w_full = bessel.girsanov_weight(path, mu).weight
        w_a = bessel.girsanov_weight(path.restarted(0, k), mu).weight
        w_b = bessel.girsanov_weight(path.restarted(k), mu).weight
        assert abs(w_full - w_a * w_b) < 1e-10 * abs(w_full)


class TestNegMoment:
    def test_trivial_zeroth_moment(self):
        assert bessel.neg_moment_from_zero(0.75, 0.0, 1.0) == 1.0

    def test_against_quadrature_oracle(self):
        # chi density quadrature: E[X_1^{-1}] for d = 3
        val = bessel.neg_moment_from_zero(0.5, 1.0, 1.0)
        d = 3.0
        norm = 2.0 ** (1.0 - d / 2.0) / math.gamma(d / 2.0)
        oracle, _ = integrate.quad(
            lambda x: (1.0 / x) * norm * x ** (d - 1.0) * math.exp(-0.5 * x * x), 0, np.inf
        )
        assert abs(val - oracle) < 1e-10
        assert abs(val - math.sqrt(2.0 / math.pi)) < 1e-12

    def test_time_scaling(self):
        v1 = bessel.neg_moment_from_zero(1.0, 0.75, 1.0)
        v2 = bessel.neg_moment_from_zero(1.0, 0.75, 4.0)
        assert abs(v2 - v1 * 4.0 ** (-0.375)) < 1e-12

    def test_divergent_moment_rejected(self):
        with pytest.raises(DomainError):
            bessel.neg_moment_from_zero(0.5, 3.0, 1.0)


class TestLowDimensionMarginals:
    def test_exact_sampler_below_two_dimensions(self):
        # marginals stay available where pathwise sampling is unsupported
        x = bessel.sample_exact(bessel.BesselSpec(1.5, 0.0), t=1.0, n=50_000, stream=8)
        ks = stats.kstest(x**2, stats.chi2(1.5).cdf).statistic
        assert ks < 0.012, f"KS={ks}"

    def test_restart_slice_validation(self):
        path = bessel.sample_path(bessel.BesselSpec(3.0, 1.0), T=0.1, dt=0.01, stream=2)
        with pytest.raises(ValueError):
            path.restarted(5, 3)
        sub = path.restarted(3, 7)
        assert sub.n_steps == 4
        assert sub.inv_sq_integral[0] == 0.0
