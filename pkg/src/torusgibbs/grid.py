"""Grids and complex fields on the torus, plus the line grids used by the
constrained minimizers.

Fourier convention
------------------
For ``u`` sampled at ``n`` points ``x_j = -L/2 + j*dx`` (``dx = L/n``) the
spectral coefficients are

    c_k = (sqrt(L)/n) * fft(u)[k],      u_j = (n/sqrt(L)) * ifft(c)[j],

stored in numpy FFT order ``k = 0, 1, ..., n/2-1, -n/2, ..., -1``.  With this
normalisation Parseval reads ``sum_j |u_j|^2 dx = sum_k |c_k|^2``, i.e. the
spectral l2 norm squared equals the mass.  (The choice of origin only rotates
each c_k by a unimodular factor and is immaterial to every operation below.)

Band limit: the sampled Gaussian field lives on the symmetric mode set
``|k| <= n/2 - 1``; the unpaired FFT Nyquist mode ``k = -n/2`` carries zero
weight so that mode sums have exact +/-k symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus [-L/2, L/2) with n a power of two."""

    length: float
    n: int

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"torus length must be positive, got {self.length}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"point count must be a power of two >= 8, got {self.n}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.length / 2 + self.dx * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return np.rint(k).astype(np.int64)

    @property
    def laplacian_eigs(self) -> np.ndarray:
        """Eigenvalues 4*pi^2*(k/L)^2 of -d^2/dx^2, FFT order."""
        return (2.0 * np.pi * self.wavenumbers / self.length) ** 2

    def index_of(self, x: float) -> int:
        """Nearest grid index of a position (used for window snapping)."""
        j = int(round((x + self.length / 2) / self.dx))
        return min(max(j, 0), self.n)


def to_coeffs(grid: TorusGrid, values: np.ndarray) -> np.ndarray:
    return (np.sqrt(grid.length) / grid.n) * np.fft.fft(values)


def to_values(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    return (grid.n / np.sqrt(grid.length)) * np.fft.ifft(coeffs)


@dataclass(frozen=True)
class Field:
    """Complex field on a torus grid with paired physical/spectral data.

    Immutable: both arrays are flagged read-only.  Construct with
    :meth:`from_values` or :meth:`from_coeffs` so the representations stay
    consistent.
    """

    grid: TorusGrid
    values: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n,) or self.coeffs.shape != (self.grid.n,):
            raise ValueError("field arrays must match the grid size")
        self.values.flags.writeable = False
        self.coeffs.flags.writeable = False

    @classmethod
    def from_values(cls, grid: TorusGrid, values: np.ndarray) -> "Field":
        values = np.ascontiguousarray(values, dtype=np.complex128)
        return cls(grid, values, to_coeffs(grid, values))

    @classmethod
    def from_coeffs(cls, grid: TorusGrid, coeffs: np.ndarray) -> "Field":
        coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
        return cls(grid, to_values(grid, coeffs), coeffs)

    @classmethod
    def zero(cls, grid: TorusGrid) -> "Field":
        return cls.from_values(grid, np.zeros(grid.n, dtype=np.complex128))


@dataclass(frozen=True)
class SpectralWeights:
    """Per-mode standard deviations sigma_k = (alpha + 4pi^2(k/L)^2)^{-1/2}.

    The unpaired Nyquist mode gets weight zero (see module docstring).
    """

    alpha: float
    grid: TorusGrid
    sigma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        sigma = (self.alpha + self.grid.laplacian_eigs) ** -0.5
        sigma[self.grid.wavenumbers == -self.grid.n // 2] = 0.0
        sigma.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)

    @property
    def variances(self) -> np.ndarray:
        return self.sigma**2


@dataclass(frozen=True)
class LineGrid:
    """Interior points of [-R, R] with homogeneous Dirichlet boundary.

    x_i = -R + (i+1)h with h = 2R/(n+1); the ghost values at +-R are zero.
    """

    half_width: float
    n: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half width must be positive")
        if self.n < 8:
            raise ValueError("line grid needs at least 8 points")

    @property
    def h(self) -> float:
        return 2 * self.half_width / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.h * (np.arange(self.n) + 1)
