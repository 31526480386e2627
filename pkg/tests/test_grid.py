import numpy as np
import pytest

from torusgibbs.grid import Field, LineGrid, SpectralWeights, TorusGrid


def test_grid_validation():
    with pytest.raises(ValueError):
        TorusGrid(32.0, 7)
    with pytest.raises(ValueError):
        TorusGrid(32.0, 100)  # not a power of two
    with pytest.raises(ValueError):
        TorusGrid(-1.0, 64)
    g = TorusGrid(32.0, 512)
    assert g.dx * g.n == g.length  # exact for power-of-two n


def test_grid_geometry():
    g = TorusGrid(8.0, 16)
    assert g.x[0] == -4.0
    assert np.allclose(np.diff(g.x), g.dx)
    k = g.wavenumbers
    assert k[0] == 0 and k[1] == 1 and k[-1] == -1 and k.min() == -8


def test_parseval_and_roundtrip(rng):
    g = TorusGrid(16.0, 256)
    for _ in range(20):
        vals = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
        f = Field.from_values(g, vals)
        phys = np.sum(np.abs(f.values) ** 2) * g.dx
        spec = np.sum(np.abs(f.coeffs) ** 2)
        assert abs(phys - spec) <= 1e-10 * spec
        back = Field.from_coeffs(g, f.coeffs)
        assert np.max(np.abs(back.values - vals)) <= 1e-12 * np.max(np.abs(vals))


def test_field_immutable(rng):
    g = TorusGrid(8.0, 64)
    f = Field.from_values(g, rng.standard_normal(g.n).astype(complex))
    with pytest.raises(ValueError):
        f.values[0] = 0.0
    with pytest.raises(ValueError):
        f.coeffs[0] = 0.0


def test_spectral_weights():
    g = TorusGrid(32.0, 128)
    w = SpectralWeights(2.0, g)
    k = g.wavenumbers
    assert w.sigma[k == 0][0] == pytest.approx(2.0**-0.5, rel=1e-14)
    for kk in range(1, g.n // 2):
        assert w.sigma[k == kk][0] == pytest.approx(w.sigma[k == -kk][0], rel=1e-14)
    # nonincreasing in |k|, Nyquist zeroed
    order = np.argsort(np.abs(k), kind="stable")
    sorted_sigma = w.sigma[order]
    assert np.all(np.diff(sorted_sigma) <= 1e-15)
    assert w.sigma[k == -g.n // 2][0] == 0.0
    with pytest.raises(ValueError):
        SpectralWeights(0.0, g)


def test_line_grid():
    g = LineGrid(20.0, 255)
    assert g.h == pytest.approx(40.0 / 256)
    assert g.x[0] == pytest.approx(-20.0 + g.h)
    assert g.x[-1] == pytest.approx(20.0 - g.h)
    with pytest.raises(ValueError):
        LineGrid(0.0, 64)
