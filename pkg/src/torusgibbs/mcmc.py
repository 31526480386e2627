"""Function-space MCMC for the mass-cutoff focusing Gibbs measure.

The target has density exp(Phi(u)) * 1{M(u) <= N L} against the Gaussian
free field, with Phi(u) = (beta/(p L^gamma)) int |u|^p.  The sampler is
preconditioned Crank-Nicolson: proposals u' = sqrt(1-s^2) u + s xi with xi a
fresh Gaussian field draw, accepted with probability min(1, exp(Phi' - Phi));
proposals violating the hard mass cutoff are rejected outright, which keeps
the chain reversible for the cutoff measure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .diagnostics import effective_sample_size
from .gff import complex_standard_normal, mass_of_values
from .grid import Field, SpectralWeights, TorusGrid, to_values

ESS_WARN_THRESHOLD = 50.0
ADAPT_BLOCK = 100
MAIN_BLOCK = 1024
CACHE_CHECK_RTOL = 1e-8

# ratio-normalized optimal GNS constant at p=6: C^6 = 4/pi^2 (sech^{1/2} extremizer)
_QUINTIC_C6 = 4.0 / np.pi**2


class ChainInitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GibbsParams:
    """Physical parameter tuple (p, beta, alpha, N, gamma, L).

    The mass cutoff is extensive: M(u) <= N * L.  Construction enforces the
    finite-partition-function gate: 2 < p < 6, or p = 6 with N below the
    critical mass (ratio-normalized constant).
    """

    p: float
    beta: float
    alpha: float
    mass_density: float
    gamma: float
    length: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.mass_density <= 0:
            raise ValueError(f"mass density bound must be positive, got {self.mass_density}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.length <= 0:
            raise ValueError(f"torus length must be positive, got {self.length}")
        if not 2 < self.p < 6:
            if self.p == 6 and self.beta > 0:
                n0 = (3.0 / (self.beta * _QUINTIC_C6)) ** 0.25
                if self.mass_density * self.length > n0 * (1 + 1e-12):
                    raise ValueError(
                        f"p=6 needs total mass N*L <= critical mass {n0:.6g}; "
                        f"got {self.mass_density * self.length:.6g} (partition "
                        f"function diverges)")
            elif not (self.p == 6 and self.beta == 0):
                raise ValueError(f"p must lie in (2, 6] with the p=6 mass gate, got {self.p}")

    @property
    def mass_cutoff(self) -> float:
        return self.mass_density * self.length

    @property
    def potential_coefficient(self) -> float:
        """beta / (p L^gamma), the prefactor of int |u|^p in the exponent."""
        return self.beta / (self.p * self.length**self.gamma)


def potential(params: GibbsParams, values: np.ndarray, dx: float) -> float:
    a2 = values.real**2 + values.imag**2
    return params.potential_coefficient * dx * float(np.sum(a2 ** (params.p / 2)))


@dataclass
class ChainState:
    """Current MCMC state: field values with cached potential and mass."""

    grid: TorusGrid
    values: np.ndarray
    phi: float
    mass: float
    step_size: float
    rng: np.random.Generator
    step_count: int = 0

    @property
    def field(self) -> Field:
        return Field.from_values(self.grid, self.values)


@dataclass
class ChainStats:
    acceptance_rate: float
    ess: dict
    traces: dict
    seconds_per_step: float
    step_size: float
    n_steps: int
    burn_in: int
    thin: int
    tainted: bool = False


def initial_state(params: GibbsParams, grid: TorusGrid, step_size: float,
                  rng: np.random.Generator, init: str = "reject",
                  max_tries: int = 10_000) -> ChainState:
    """Draw the initial state from the free field conditioned on the cutoff.

    init="reject" retries up to max_tries and fails with advice; init="zero"
    is the documented fallback for parameter sets where P(M <= NL) is tiny;
    init="drift" warm-starts at the rescaled ground-state profile (the mode
    of the measure in the concentrating regimes; falls back to rejection at
    beta = 0).  The initial state only fixes the burn-in starting point.
    """
    if not 0 < step_size <= 1:
        raise ValueError(f"pCN step size must lie in (0, 1], got {step_size}")
    weights = SpectralWeights(params.alpha, grid)
    if init == "drift":
        init = "reject"
        if params.beta > 0:
            from .partition import DriftResolutionError, soliton_drift

            try:
                w = soliton_drift(params, grid, subtract_mean=False)
                scale = np.sqrt(0.8 * params.mass_cutoff /
                                (mass_of_values(w, grid.dx) + 1e-300))
                values = (min(scale, 1.0) * w).astype(np.complex128)
                init = "done"
            except DriftResolutionError:
                pass
    if init == "zero":
        values = np.zeros(grid.n, dtype=np.complex128)
    elif init == "done":
        pass
    elif init == "reject":
        for _ in range(max_tries):
            coeffs = weights.sigma * complex_standard_normal(rng, grid.n)
            values = to_values(grid, coeffs)
            if mass_of_values(values, grid.dx) <= params.mass_cutoff:
                break
        else:
            raise ChainInitError(
                f"no admissible initial state in {max_tries} draws; the cutoff "
                f"N*L = {params.mass_cutoff:.4g} is far below the typical free-field "
                f"mass — increase N, decrease L, or use init='zero'")
    else:
        raise ValueError(f"unknown init mode {init!r}")
    return ChainState(grid, np.ascontiguousarray(values), potential(params, values, grid.dx),
                      mass_of_values(values, grid.dx), step_size, rng)


def pcn_step(state: ChainState, params: GibbsParams,
             weights: SpectralWeights | None = None) -> ChainState:
    """One reference pCN step (used for tests; run_chain uses the block kernel).

    Consumes, in order, 2n standard normals (the proposal noise) and one
    uniform from the state's generator.
    """
    grid = state.grid
    if weights is None:
        weights = SpectralWeights(params.alpha, grid)
    s = state.step_size
    xi = to_values(grid, weights.sigma * complex_standard_normal(state.rng, grid.n))
    r = state.rng.random()
    w = math.sqrt(1 - s * s) * state.values + s * xi
    mass_w = mass_of_values(w, grid.dx)
    phi_w = potential(params, w, grid.dx)
    dphi = phi_w - state.phi
    if mass_w <= params.mass_cutoff and (dphi >= 0.0 or r < math.exp(dphi)):
        return ChainState(grid, w, phi_w, mass_w, s, state.rng, state.step_count + 1)
    return ChainState(grid, state.values, state.phi, state.mass, s, state.rng,
                      state.step_count + 1)


def _noise_block(weights: SpectralWeights, grid: TorusGrid, count: int,
                 rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((count, 2, grid.n))
    coeffs = weights.sigma * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    return np.ascontiguousarray((grid.n / np.sqrt(grid.length)) * np.fft.ifft(coeffs, axis=1))


def run_chain(params: GibbsParams, grid: TorusGrid, n_steps: int, burn_in: int,
              thin: int, step_size: float, seed, init: str = "reject",
              adapt: bool = True, target_acceptance: float = 0.25):
    """Run the pCN chain; returns (samples, ChainStats).

    Step-size adaptation happens during burn-in only (frozen afterward to
    preserve stationarity).  Thinned samples are recorded every ``thin``
    steps after burn-in.  All randomness flows from ``seed``; reruns are
    bit-identical for a fixed backend.
    """
    if n_steps < burn_in:
        raise ValueError("n_steps must be at least burn_in")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = initial_state(params, grid, step_size, rng, init=init)
    weights = SpectralWeights(params.alpha, grid)
    dx = grid.dx
    coeff = params.potential_coefficient
    n_keep = (n_steps - burn_in) // thin
    samples = np.empty((n_keep, grid.n), dtype=np.complex128)
    phi_trace = np.empty(n_keep)
    mass_trace = np.empty(n_keep)

    t0 = time.perf_counter()
    accepted = 0
    kept = 0
    step = 0
    s = step_size
    while step < n_steps:
        in_burn = step < burn_in
        block = min(ADAPT_BLOCK if in_burn else MAIN_BLOCK, n_steps - step)
        if in_burn:
            block = min(block, burn_in - step)
        noise = _noise_block(weights, grid, block, rng)
        uniforms = rng.random(block)
        idx = np.arange(step, step + block)
        snap_mask = ((idx >= burn_in) & ((idx - burn_in + 1) % thin == 0)).astype(np.uint8)
        n_snap = int(snap_mask.sum())
        contraction = math.sqrt(1 - s * s)
        acc, phi, m, got = kernels.run_pcn_block(
            state.values, noise, uniforms, contraction, s, dx, coeff, params.p,
            params.mass_cutoff, state.phi, state.mass, snap_mask,
            samples[kept:kept + n_snap], phi_trace[kept:kept + n_snap],
            mass_trace[kept:kept + n_snap])
        state.phi, state.mass = phi, m
        accepted += acc
        kept += got
        step += block
        state.step_count = step
        if in_burn and adapt:
            rate = acc / block
            s = float(np.clip(s * math.exp(0.5 * (rate - target_acceptance)), 1e-3, 1.0))
        # cache coherence check, roughly every 10^3 steps
        phi_re = potential(params, state.values, dx)
        mass_re = mass_of_values(state.values, dx)
        if (abs(phi_re - state.phi) > CACHE_CHECK_RTOL * max(1.0, abs(phi_re))
                or abs(mass_re - state.mass) > CACHE_CHECK_RTOL * max(1.0, mass_re)):
            raise RuntimeError("chain cache drifted from recomputation")
        if state.mass > params.mass_cutoff * (1 + 1e-12):
            raise RuntimeError("chain state violates the mass cutoff")
    state.step_size = s
    seconds = (time.perf_counter() - t0) / max(n_steps, 1)

    traces = {"potential": phi_trace[:kept], "mass": mass_trace[:kept]}
    ess = {k: effective_sample_size(v) for k, v in traces.items()}
    tainted = any(np.isfinite(e) and e < ESS_WARN_THRESHOLD for e in ess.values()) \
        and kept > 0
    stats = ChainStats(acceptance_rate=accepted / max(n_steps, 1), ess=ess,
                       traces=traces, seconds_per_step=seconds, step_size=s,
                       n_steps=n_steps, burn_in=burn_in, thin=thin, tainted=tainted)
    return samples[:kept], stats


# ---------------------------------------------------------------------------
# observables


def observable_local_mass(field: Field, half_width: float) -> float:
    """int_{-M}^{M} |u| dx (rectangle rule, window snapped to the grid)."""
    if half_width > field.grid.length / 2:
        raise ValueError("window half-width exceeds L/2")
    from .gff import lp_integral

    return lp_integral(field, 1.0, (-half_width, half_width))


def concentration_rescale(params: GibbsParams) -> float:
    """Regime rescale for the soliton-distance statistic.

    Supercritical (gamma < p/2 - 1): the concentrating profiles have width
    L^{-(p-2-2gamma)/(6-p)}.  At and above the critical line the reference
    profile already carries the beta-dependent width, so lam = 1.
    """
    p, gamma = params.p, params.gamma
    if gamma < p / 2 - 1:
        return float(params.length ** (-(p - 2 - 2 * gamma) / (6 - p)))
    return 1.0


def observable_concentration(field: Field, params: GibbsParams, q: float = 4.0,
                             profile=None, lam: float | None = None,
                             profile_points: int = 2048) -> float:
    """Distance of the field to the rescaled soliton manifold for (beta, N).

    Delegates to :func:`torusgibbs.variational.soliton_distance`; the
    reference profile is the closed-form ground state at (beta, N) unless one
    is supplied (required when beta = 0, where no ground state exists).
    """
    from .variational import LineGrid, ground_state_profile, soliton_distance, suggested_half_width

    if lam is None:
        lam = concentration_rescale(params)
    if profile is None:
        if params.beta <= 0:
            raise ValueError("beta = 0 has no ground state; pass a reference profile")
        half = suggested_half_width(params.p, params.beta, params.mass_density)
        profile = ground_state_profile(params.p, params.beta, params.mass_density,
                                       LineGrid(half, profile_points))
    return soliton_distance(field, profile, lam, q).distance
