import numpy as np
import pytest

from torusgibbs.gff import (covariance_function, gradient_sq_integral,
                            lp_integral, mass, mass_tail_samples, sample_gff,
                            sample_gff_block, sobolev_norm)
from torusgibbs.grid import Field, SpectralWeights, TorusGrid

# Green's function of alpha - d^2/dx^2 on the line at alpha = 1:
# e^{-|z|}/2, confirmed by quadrature of the continuum spectral integral
# int cos(2 pi xi z) / (1 + 4 pi^2 xi^2) d xi  (scipy.integrate.quad).
GREEN_ALPHA1 = {0.0: 0.5, 1.0: 0.18393972058572117}


def test_sampler_determinism():
    g = TorusGrid(32.0, 512)
    f1 = sample_gff(g, 1.0, np.random.default_rng(7))
    f2 = sample_gff(g, 1.0, np.random.default_rng(7))
    assert np.array_equal(f1.values, f2.values)
    assert not np.array_equal(f1.values, sample_gff(g, 1.0, np.random.default_rng(8)).values)


def test_sampler_rejects_bad_alpha(rng):
    g = TorusGrid(32.0, 64)
    with pytest.raises(ValueError):
        sample_gff(g, -1.0, rng)
    with pytest.raises(ValueError):
        sample_gff(g, 2.0, rng, weights=SpectralWeights(1.0, g))


def test_mean_mass_matches_truncated_sum(rng):
    # exact finite target: sum of sigma_k^2 over the sampled modes
    g = TorusGrid(32.0, 512)
    w = SpectralWeights(1.0, g)
    target = float(np.sum(w.variances))
    vals = sample_gff_block(g, w, 2000, rng)
    masses = np.sum(vals.real**2 + vals.imag**2, axis=1) * g.dx
    se = masses.std(ddof=1) / np.sqrt(len(masses))
    assert abs(masses.mean() - target) <= 3 * se


def test_per_mode_variances(rng):
    g = TorusGrid(32.0, 128)
    w = SpectralWeights(1.0, g)
    n_samp = 10_000
    z = rng.standard_normal((n_samp, 2, g.n))
    coeffs = w.sigma * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    k = g.wavenumbers
    for kk in (0, 1, -1, 2, -2, 3, -3, 4):
        col = coeffs[:, k == kk][:, 0]
        var = np.mean(np.abs(col) ** 2)
        sigma2 = w.variances[k == kk][0]
        se = np.std(np.abs(col) ** 2, ddof=1) / np.sqrt(n_samp)
        assert abs(var - sigma2) <= 5 * se


def test_large_alpha_kills_field(rng):
    g = TorusGrid(16.0, 128)
    f = sample_gff(g, 1e8, rng)
    assert mass(f) < 1e-4


def test_mass_trivial_cases():
    g = TorusGrid(8.0, 64)
    assert mass(Field.zero(g)) == 0.0
    ones = Field.from_values(g, np.ones(g.n, dtype=complex))
    assert mass(ones) == pytest.approx(8.0, rel=1e-14)
    wave = Field.from_values(g, np.exp(2j * np.pi * g.x / g.length))
    assert mass(wave) == pytest.approx(g.length, rel=1e-14)


def test_lp_integral_trivial_and_additive(rng):
    g = TorusGrid(8.0, 256)
    assert lp_integral(Field.zero(g), 4.0) == 0.0
    ones = Field.from_values(g, np.ones(g.n, dtype=complex))
    assert lp_integral(ones, 4.0) == pytest.approx(8.0, rel=1e-14)
    with pytest.raises(ValueError):
        lp_integral(ones, 0.5)
    f = sample_gff(g, 1.0, rng)
    whole = lp_integral(f, 4.0)
    for a in (-2.0, -1.3, 0.7):
        inner = lp_integral(f, 4.0, (a, 2.1))
        left = lp_integral(f, 4.0, (-g.length / 2, a))
        right = lp_integral(f, 4.0, (2.1, g.length / 2))
        assert whole - (left + right) == pytest.approx(inner, rel=1e-12)


def test_sobolev_norm(rng):
    g = TorusGrid(16.0, 256)
    f = sample_gff(g, 1.0, rng)
    assert sobolev_norm(f, 0.0, 1.0) == pytest.approx(np.sqrt(mass(f)), rel=1e-12)
    assert sobolev_norm(Field.zero(g), 0.5, 1.0) == 0.0
    with pytest.raises(ValueError):
        sobolev_norm(f, 2.5, 1.0)


def test_sobolev_moment_matches_sum(rng):
    # E ||phi||_{H^s}^2 = sum_k (alpha + 4 pi^2 (k/L)^2)^{s-1} over sampled modes
    g = TorusGrid(16.0, 128)
    alpha, s = 1.0, 0.25
    w = SpectralWeights(alpha, g)
    weight = (alpha + g.laplacian_eigs) ** s
    target = float(np.sum(weight * w.variances))
    n_samp = 4000
    z = np.random.default_rng(5).standard_normal((n_samp, 2, g.n))
    coeffs = w.sigma * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    vals = np.sum(weight * np.abs(coeffs) ** 2, axis=1)
    se = vals.std(ddof=1) / np.sqrt(n_samp)
    assert abs(vals.mean() - target) <= 3 * se


def test_covariance_function_values():
    assert covariance_function(1.0, 64.0, 4096, 0.0) == pytest.approx(
        GREEN_ALPHA1[0.0], abs=2e-2)
    assert covariance_function(1.0, 64.0, 4096, 1.0) == pytest.approx(
        GREEN_ALPHA1[1.0], abs=2e-2)
    for z in (0.3, 1.7, 5.0):
        assert covariance_function(1.0, 64.0, 1024, z) == \
            covariance_function(1.0, 64.0, 1024, -z)
    with pytest.raises(ValueError):
        covariance_function(1.0, 64.0, 256, 40.0)


def test_covariance_matches_empirical(rng):
    g = TorusGrid(32.0, 256)
    alpha = 1.0
    w = SpectralWeights(alpha, g)
    n_samp = 6000
    vals = sample_gff_block(g, w, n_samp, rng)
    for z_cells in (0, 1, g.n // 4):
        z = z_cells * g.dx
        prods = (np.roll(vals, -z_cells, axis=1) * np.conj(vals)).mean(axis=1).real
        se = prods.std(ddof=1) / np.sqrt(n_samp)
        assert abs(prods.mean() - covariance_function(alpha, g.length, g.n, z)) <= 5 * se


def test_translation_invariance(rng):
    g = TorusGrid(16.0, 64)
    w = SpectralWeights(1.0, g)
    vals = sample_gff_block(g, w, 8000, rng)
    sq = vals.real**2 + vals.imag**2
    per_site = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(sq.shape[0])
    assert np.all(np.abs(per_site - per_site.mean()) <= 5 * se)


def test_gradient_sq_integral():
    g = TorusGrid(8.0, 128)
    wave = Field.from_values(g, np.exp(2j * np.pi * 3 * g.x / g.length))
    # |u'|^2 = (2 pi 3 / L)^2 integrated over L
    expect = (2 * np.pi * 3 / g.length) ** 2 * g.length
    assert gradient_sq_integral(wave) == pytest.approx(expect, rel=1e-12)


def test_mass_tail_samples(rng):
    g = TorusGrid(64.0, 512)
    devs = mass_tail_samples(g, 1.0, (-8.0, 8.0), 2000, rng)
    assert devs.shape == (2000,) and np.all(devs >= 0)
    # tail monotone in the threshold
    ms = np.linspace(0.5, 6.0, 8)
    tails = [(devs > m).mean() for m in ms]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    # zero-length window: deviations vanish identically
    zero = mass_tail_samples(g, 1.0, (0.0, 0.0), 200, rng)
    assert np.all(zero == 0.0)
    with pytest.raises(ValueError):
        mass_tail_samples(g, 1.0, (-8.0, 8.0), 50, rng)


def test_mass_tail_slope_negative(rng):
    g = TorusGrid(64.0, 1024)
    devs = mass_tail_samples(g, 1.0, (-8.0, 8.0), 10_000, rng)
    xs = np.array([0.25, 0.5, 0.75, 1.0, 1.25]) * 4.0  # units of sqrt(|I|)
    logp = np.log([(devs > x).mean() for x in xs])
    slope = np.polyfit(xs / 4.0, logp, 1)[0]
    assert slope < 0
