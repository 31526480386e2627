"""Constrained energy minimization on the line and the torus.

Implements the focusing energy  E[u] = -(beta/p) int |u|^p + 1/2 int |u'|^2
minimized over mass-constrained profiles: the line infimum (over
||u||^2 <= N, Dirichlet box) and its torus, mean-zero analogue; the explicit
sech-power ground states; optimal Gagliardo-Nirenberg-Sobolev constants; the
exact scaling transport of the infimum; and the distance-to-soliton-manifold
statistic used as a concentration observable.

Sign convention for the multiplier: profiles satisfy

    -Q'' + lam * Q = beta * Q^(p-1),   lam > 0,

i.e. ``lambda_mult`` is the bound-state eigenvalue (the Lagrange multiplier of
the mass constraint with the opposite sign convention is -lam).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from .grid import Field, LineGrid, TorusGrid


class NonConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its budget; carries the last iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# ---------------------------------------------------------------------------
# energy functional


@dataclass
class EnergyFunctional:
    """E[u] = -(beta/p) int |u|^p + 1/2 int |u'|^2 on a line or torus grid.

    Line grids use second-order finite differences with Dirichlet decay;
    torus grids use the spectral derivative.  ``mean_zero`` adds the
    int u = 0 constraint handled by the projection step of the solvers.
    """

    p: float
    beta: float
    domain: object
    mean_zero: bool = False

    def __post_init__(self):
        if not 2 < self.p <= 6:
            raise ValueError(f"p must lie in (2, 6], got {self.p}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if isinstance(self.domain, TorusGrid):
            self._lap_r = (2 * np.pi * np.fft.rfftfreq(self.domain.n, d=1.0 / self.domain.n)
                           / self.domain.length) ** 2

    @property
    def weight(self) -> float:
        return self.domain.h if isinstance(self.domain, LineGrid) else self.domain.dx

    def inner(self, u, v) -> float:
        return float(self.weight * np.dot(u, v))

    def norm(self, u) -> float:
        return float(np.sqrt(self.weight * np.dot(u, u)))

    def kinetic(self, u) -> float:
        if isinstance(self.domain, LineGrid):
            h = self.domain.h
            d = np.diff(u)
            return 0.5 * (np.dot(d, d) + u[0] ** 2 + u[-1] ** 2) / h
        c = np.fft.rfft(u)
        scale = self.domain.length / self.domain.n**2
        # rfft folds +-k together except k=0 and Nyquist
        w = np.full(c.shape, 2.0)
        w[0] = 1.0
        if self.domain.n % 2 == 0:
            w[-1] = 1.0
        return 0.5 * scale * float(np.sum(w * self._lap_r * (c.real**2 + c.imag**2)))

    def lp(self, u) -> float:
        return float(self.weight * np.sum(np.abs(u) ** self.p))

    def energy(self, u) -> float:
        return -(self.beta / self.p) * self.lp(u) + self.kinetic(u)

    def neg_laplacian(self, u) -> np.ndarray:
        if isinstance(self.domain, LineGrid):
            h2 = self.domain.h**2
            out = 2 * u
            out[:-1] -= u[1:]
            out[1:] -= u[:-1]
            return out / h2
        return np.fft.irfft(self._lap_r * np.fft.rfft(u), n=self.domain.n)

    def gradient(self, u) -> np.ndarray:
        """L^2 gradient: -beta |u|^{p-2} u - u''."""
        return -self.beta * np.abs(u) ** (self.p - 2) * u + self.neg_laplacian(u)


# ---------------------------------------------------------------------------
# profiles and results


@dataclass(frozen=True)
class SolitonProfile:
    """Real nonnegative ground-state profile with its invariants."""

    grid: object
    values: np.ndarray
    mass: float
    energy: float
    lambda_mult: float

    def __post_init__(self):
        self.values.flags.writeable = False

    def lp_norm(self, q: float) -> float:
        w = self.grid.h if isinstance(self.grid, LineGrid) else self.grid.dx
        return float((w * np.sum(np.abs(self.values) ** q)) ** (1.0 / q))


@dataclass(frozen=True)
class MinimizationResult:
    profile: SolitonProfile
    energy: float
    iterations: int
    grad_norm: float
    converged: bool
    energy_trace: np.ndarray


def _project(u, n_target, weight, mean_zero, ball):
    if mean_zero:
        u = u - u.mean()
    m = weight * np.dot(u, u)
    if m == 0.0:
        return u
    if ball and m <= n_target:
        return u
    return u * np.sqrt(n_target / m)


def _tangent_gradient(g, u, weight, mean_zero, ball, n_target):
    if mean_zero:
        g = g - g.mean()
        u = u - u.mean()
    m = weight * np.dot(u, u)
    if ball and (m < n_target * (1 - 1e-12) or weight * np.dot(g, u) > 0):
        # constraint inactive, or -g points into the ball: unconstrained step
        return g
    if m > 0:
        g = g - (weight * np.dot(g, u) / m) * u
    return g


def _shifted_inverse(func: EnergyFunctional, shift: float):
    """Apply (shift - Laplacian)^{-1}: banded Cholesky on the line, spectral
    division on the torus.  SPD, so preconditioned directions stay descent."""
    if isinstance(func.domain, LineGrid):
        n = func.domain.n
        h2 = func.domain.h**2
        band = np.zeros((2, n))
        band[0, 1:] = -1.0 / h2
        band[1, :] = shift + 2.0 / h2
        factor = cholesky_banded(band, lower=False)
        return lambda v: cho_solve_banded((factor, False), v)
    denom = shift + func._lap_r
    n = func.domain.n
    return lambda v: np.fft.irfft(np.fft.rfft(v) / denom, n=n)


def _spg_minimize(func: EnergyFunctional, n_target: float, u0: np.ndarray,
                  gtol: float = 1e-8, max_iter: int = 100_000,
                  recentre_every: int = 100, ball: bool = False,
                  precond_shift: float = 1.0):
    """Monotone projected gradient descent, preconditioned by the shifted
    inverse Laplacian, with Barzilai-Borwein step lengths."""
    w = func.weight
    mz = func.mean_zero
    u = _project(u0.astype(float), n_target, w, mz, ball)
    e = func.energy(u)
    prec = _shifted_inverse(func, precond_shift)

    def directions(u_cur):
        # project, precondition the projected gradient, re-project: the
        # sandwich keeps <gt, dt> = <gt, M^{-1} gt> > 0 (guaranteed descent)
        gt_ = _tangent_gradient(func.gradient(u_cur), u_cur, w, mz, ball, n_target)
        dt_ = _tangent_gradient(prec(gt_), u_cur, w, mz, ball, n_target)
        return gt_, dt_

    gt, dt = directions(u)
    alpha = 1.0
    trace = [e]
    gnorm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = float(np.sqrt(w * np.dot(gt, gt)))
        if gnorm < gtol:
            break
        slope = w * np.dot(gt, dt)
        direction = dt
        if slope <= 0:  # only possible at roundoff level
            direction, slope = gt, w * np.dot(gt, gt)
        step = alpha
        decreased = False
        for _ in range(60):
            u_new = _project(u - step * direction, n_target, w, mz, ball)
            e_new = func.energy(u_new)
            if e_new <= e - 1e-4 * step * slope or e_new <= e:
                decreased = True
                break
            step *= 0.5
        if not decreased:
            break  # no decrease possible: at numerical floor
        gt_new, dt_new = directions(u_new)
        s = u_new - u
        y = dt_new - dt
        sy = w * np.dot(s, y)
        ss = w * np.dot(s, s)
        alpha = min(max(ss / sy, 1e-8), 1e6) if sy > 0 else 1.0
        u, e, gt, dt = u_new, e_new, gt_new, dt_new
        trace.append(e)
        if recentre_every and it % recentre_every == 0:
            shifted = _recentre(u, func)
            if shifted is not None:
                u_c = _project(shifted, n_target, w, mz, ball)
                e_c = func.energy(u_c)
                if e_c <= e + 1e-12 * abs(e):
                    u, e = u_c, e_c
                    gt, dt = directions(u)
    return u, e, gt, gnorm, it, np.array(trace)


def _recentre(u, func):
    """Shift the iterate so its maximum sits at the domain centre."""
    n = u.shape[0]
    shift = n // 2 - int(np.argmax(np.abs(u)))
    if shift == 0:
        return None
    out = np.roll(u, shift)
    if isinstance(func.domain, LineGrid):
        if shift > 0:
            out[:shift] = 0.0
        else:
            out[shift:] = 0.0
    return out


def _finish(func, n_target, u, e, gnorm, it, trace, gtol, max_iter, what):
    if func.mean_zero:
        # mean-zero minimizers are signed; no sign cleanup applies
        lam = np.nan
        vals = u
    else:
        # line ground states are nonnegative up to solver noise
        vals = np.maximum(u, 0.0)
        vals = _project(vals, n_target, func.weight, False, ball=(func.beta == 0))
        mass0 = func.weight * np.dot(vals, vals)
        lam = (func.beta * func.lp(vals) - 2 * func.kinetic(vals)) / mass0 \
            if mass0 > 0 else np.nan
    mass = func.weight * np.dot(vals, vals)
    energy = func.energy(vals)
    profile = SolitonProfile(func.domain, vals, float(mass), float(energy), float(lam))
    result = MinimizationResult(profile, float(energy), it, float(gnorm),
                                gnorm < gtol, trace)
    if not result.converged and it >= max_iter:
        raise NonConvergenceError(
            f"{what}: gradient norm {gnorm:.3e} after {it} iterations (tol {gtol:g})",
            result=result)
    return result


def suggested_half_width(p: float, beta: float, n_mass: float, factor: float = 20.0) -> float:
    """R large enough that the expected profile is negligible at the boundary."""
    lam = ground_state_multiplier(p, beta, n_mass)
    return max(20.0, factor / np.sqrt(lam))


def minimize_a(p: float, beta: float, n_mass: float, half_width: float | None = None,
               n_points: int = 2048, gtol: float = 1e-8, max_iter: int = 100_000,
               start_width: float | None = None) -> MinimizationResult:
    """Line infimum A(beta, N) by projected gradient flow from a Gaussian bump.

    beta > 0 projects every iterate onto the sphere ||u||^2 = N (the infimum
    saturates the mass constraint); beta == 0 projects onto the ball, whose
    infimum 0 is approached by the decaying flow.  p >= 6 is rejected: the
    infimum is -infinity there.

    The half-width contract R >= 20/sqrt(lam_est) is enforced: a smaller
    request is raised to the heuristic (the truncated box would otherwise
    bias the energy above the box-free value).  The effective grid is on the
    returned profile.
    """
    if not 2 < p < 6:
        raise ValueError(f"A(beta, N) is finite only for 2 < p < 6 (unbounded below "
                         f"otherwise); got p={p}")
    if n_mass <= 0:
        raise ValueError("mass bound must be positive")
    needed = suggested_half_width(p, beta, n_mass) if beta > 0 else 20.0
    half_width = needed if half_width is None else max(half_width, needed)
    grid = LineGrid(half_width, n_points)
    func = EnergyFunctional(p, beta, grid)
    lam_est = ground_state_multiplier(p, beta, n_mass) if beta > 0 else 1.0
    if start_width is None:
        start_width = 1.0 / np.sqrt(lam_est)
    u0 = np.exp(-grid.x**2 / (2 * start_width**2))
    u, e, g, gnorm, it, trace = _spg_minimize(func, n_mass, u0, gtol, max_iter,
                                              ball=(beta == 0), precond_shift=lam_est)
    return _finish(func, n_mass, u, e, gnorm, it, trace, gtol, max_iter, "minimize_a")


def minimize_b(p: float, beta: float, n_mass: float, grid: TorusGrid,
               gtol: float = 1e-8, max_iter: int = 100_000) -> MinimizationResult:
    """Torus, mean-zero analogue B(beta, N) >= A(beta, N) on the given torus.

    The mean-zero constraint forces sign changes, and the landscape has
    several basins at moderate L (offset single bump vs a bump/anti-bump
    pair); the flow is run from both starts plus a plain Gaussian and the
    best converged value is returned (still an upper bound for the true
    infimum, as any admissible profile is).  A negative infimum is always
    attained at full mass (E(sqrt(t) u) decreases in t wherever E < 0), so
    the sphere-projected flows cover it; when every basin ends positive the
    admissible competitor u = 0 wins and the zero profile is returned.
    """
    if not 2 < p < 6:
        raise ValueError(f"B(beta, N) is finite only for 2 < p < 6; got p={p}")
    if n_mass <= 0:
        raise ValueError("mass bound must be positive")
    func = EnergyFunctional(p, beta, grid, mean_zero=True)
    lam_est = ground_state_multiplier(p, beta, n_mass) if beta > 0 else 1.0
    width = min(1.0 / np.sqrt(lam_est), grid.length / 8)
    starts = [np.exp(-grid.x**2 / (2 * width**2))]
    if beta > 0:
        lam_half = ground_state_multiplier(p, beta, n_mass / 2)
        a, b, m = sech_power_coefficients(p, beta, lam_half)
        shift = grid.length / 4
        pair = (a / np.cosh(b * (grid.x + shift)) ** m
                - a / np.cosh(b * (grid.x - shift)) ** m)
        a1, b1, m1 = sech_power_coefficients(p, beta, ground_state_multiplier(p, beta, n_mass))
        single = a1 / np.cosh(b1 * grid.x) ** m1
        starts += [pair, single]
    best = None
    for u0 in starts:
        u, e, g, gnorm, it, trace = _spg_minimize(func, n_mass, u0, gtol, max_iter,
                                                  ball=(beta == 0),
                                                  precond_shift=lam_est)
        res = _finish(func, n_mass, u, e, gnorm, it, trace, gtol, max_iter,
                      "minimize_b")
        if best is None or res.energy < best.energy:
            best = res
    if best.energy > 0:
        # every explored basin ends above the admissible competitor u = 0
        zero = np.zeros(grid.n)
        profile = SolitonProfile(grid, zero, 0.0, 0.0, float("nan"))
        best = MinimizationResult(profile, 0.0, best.iterations, 0.0, True,
                                  np.array([0.0]))
    return best


# ---------------------------------------------------------------------------
# explicit ground states


def sech_power_coefficients(p: float, beta: float, lambda_mult: float):
    """(a, b, m) with Q = a sech^m(b x) solving -Q'' + lam Q = beta Q^(p-1)."""
    if not 2 < p < 6:
        raise ValueError(f"sech-power ground state needs 2 < p < 6, got {p}")
    if lambda_mult <= 0:
        raise ValueError(f"multiplier must be positive, got {lambda_mult}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    m = 2.0 / (p - 2.0)
    b = np.sqrt(lambda_mult) * (p - 2.0) / 2.0
    a = (lambda_mult * p / (2.0 * beta)) ** (1.0 / (p - 2.0))
    return a, b, m


def soliton_closed_form(p: float, beta: float, lambda_mult: float, grid) -> SolitonProfile:
    """Explicit ground state a sech^m(b x) evaluated on a line or torus grid.

    For p = 4 this is Q(x) = sqrt(2 lam / beta) sech(sqrt(lam) x).
    """
    a, b, m = sech_power_coefficients(p, beta, lambda_mult)
    x = grid.x
    vals = a / np.cosh(b * x) ** m
    func = EnergyFunctional(p, beta, grid)
    w = func.weight
    return SolitonProfile(grid, vals, float(w * np.dot(vals, vals)),
                          float(func.energy(vals)), float(lambda_mult))


def sech_power_mass(p: float, beta: float, lambda_mult: float) -> float:
    """Continuum mass int Q^2 of the sech-power ground state (= 4 sqrt(lam)/beta at p=4)."""
    a, b, m = sech_power_coefficients(p, beta, lambda_mult)
    c2m = np.sqrt(np.pi) * gamma_fn(m) / gamma_fn(m + 0.5)
    return float(a * a * c2m / b)


def ground_state_multiplier(p: float, beta: float, n_mass: float) -> float:
    """Multiplier lam for which the sech-power ground state has mass N."""
    a1, b1, m = sech_power_coefficients(p, beta, 1.0)
    c2m = np.sqrt(np.pi) * gamma_fn(m) / gamma_fn(m + 0.5)
    # mass(lam) = lam^((6-p)/(2(p-2))) * a1^2 c / b1
    expo = (6.0 - p) / (2.0 * (p - 2.0))
    return float((n_mass * b1 / (a1 * a1 * c2m)) ** (1.0 / expo))


def ground_state_profile(p: float, beta: float, n_mass: float, grid) -> SolitonProfile:
    """Closed-form minimizer of A(beta, N) on a grid, mass-matched to N.

    The multiplier solves grid-mass(lam) = N by bracketed root finding around
    the continuum value; a final rescale pins the grid mass to N exactly.
    """
    lam0 = ground_state_multiplier(p, beta, n_mass)
    func = EnergyFunctional(p, beta, grid)
    w = func.weight

    def grid_mass(lam):
        prof = soliton_closed_form(p, beta, lam, grid)
        return prof.mass - n_mass

    lo, hi = lam0 / 2, lam0 * 2
    for _ in range(60):
        if grid_mass(lo) < 0 < grid_mass(hi):
            break
        lo /= 2
        hi *= 2
    lam = brentq(grid_mass, lo, hi, xtol=1e-14 * lam0, rtol=1e-14)
    prof = soliton_closed_form(p, beta, lam, grid)
    vals = prof.values * np.sqrt(n_mass / prof.mass)
    return SolitonProfile(grid, vals, float(w * np.dot(vals, vals)),
                          float(func.energy(vals)), float(lam))


def closed_form_residual(p: float, beta: float, lambda_mult: float, x: np.ndarray) -> float:
    """L^2 norm of -Q'' + lam Q - beta Q^(p-1) using the analytic Q''."""
    a, b, m = sech_power_coefficients(p, beta, lambda_mult)
    sech = 1.0 / np.cosh(b * x)
    q = a * sech**m
    q2 = a * b * b * (m * m * sech**m - m * (m + 1) * sech ** (m + 2))
    res = -q2 + lambda_mult * q - beta * q ** (p - 1)
    h = x[1] - x[0]
    return float(np.sqrt(h * np.dot(res, res)))


def discrete_el_residual(profile: SolitonProfile, p: float, beta: float) -> float:
    """L^2 norm of the discrete Euler-Lagrange residual grad E + lam Q."""
    func = EnergyFunctional(p, beta, profile.grid)
    res = func.gradient(profile.values) + profile.lambda_mult * profile.values
    return func.norm(res)


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg-Sobolev


class _PeriodicBoxRatio:
    """Scale-invariant GNS ratio on a periodic box (spectral derivative).

    For rapidly decaying u the periodic box is indistinguishable from the
    line, and spectral accuracy makes the discrete ratio scale invariant to
    roundoff, which the dilation-invariance property test relies on.
    """

    def __init__(self, p, half_width, n):
        self.p = p
        self.half_width = half_width
        self.n = n
        self.h = 2 * half_width / n
        self.x = -half_width + self.h * np.arange(n)
        self.lap_r = (np.pi * np.fft.rfftfreq(n, d=1.0 / n) / half_width) ** 2

    def pieces(self, u):
        ip = self.h * np.sum(np.abs(u) ** self.p)
        i2 = self.h * np.dot(u, u)
        c = np.fft.rfft(u)
        w = np.full(c.shape, 2.0)
        w[0] = 1.0
        if self.n % 2 == 0:
            w[-1] = 1.0
        ig = (2 * self.half_width / self.n**2) * float(
            np.sum(w * self.lap_r * (c.real**2 + c.imag**2)))
        return ip, ig, i2

    def ratio(self, u):
        ip, ig, i2 = self.pieces(u)
        return ip / (ig ** ((self.p - 2) / 4) * i2 ** ((self.p + 2) / 4))

    def log_ratio_gradient(self, u):
        ip, ig, i2 = self.pieces(u)
        lap_u = np.fft.irfft(self.lap_r * np.fft.rfft(u), n=self.n)
        return (self.p * np.abs(u) ** (self.p - 2) * u / ip
                + (self.p - 2) / 2 * (-lap_u) / ig
                - (self.p + 2) / 2 * u / i2)


def gns_ratio(p: float, u: np.ndarray, half_width: float) -> float:
    """Evaluate int|u|^p / [ (int|u'|^2)^((p-2)/4) (int|u|^2)^((p+2)/4) ]."""
    return _PeriodicBoxRatio(p, half_width, u.shape[0]).ratio(u)


def gns_constant(p: float, half_width: float = 30.0, n_points: int = 2048,
                 gtol: float = 1e-9, max_iter: int = 20_000) -> float:
    """Optimal constant C with C^p = sup of the GNS ratio, by gradient ascent.

    Ascends the log-ratio from a sech start; the supremum is attained on the
    sech-power family, any member of which gives the same ratio.  For p = 4
    the exact value is C^4 = 3^{-1/2}.
    """
    if not 2 < p <= 6:
        raise ValueError(f"p must lie in (2, 6], got {p}")
    box = _PeriodicBoxRatio(p, half_width, n_points)
    u = 1.0 / np.cosh(box.x)
    u /= np.sqrt(box.h * np.dot(u, u))
    j = np.log(box.ratio(u))
    g = box.log_ratio_gradient(u)
    alpha = 1e-2
    gnorm = np.inf
    for _ in range(max_iter):
        gnorm = float(np.sqrt(box.h * np.dot(g, g)))
        if gnorm < gtol:
            return float(box.ratio(u) ** (1.0 / p))
        step = alpha
        for _ in range(60):
            u_new = u + step * g
            u_new /= np.sqrt(box.h * np.dot(u_new, u_new))
            j_new = np.log(box.ratio(u_new))
            if j_new >= j:
                break
            step *= 0.5
        else:
            return float(box.ratio(u) ** (1.0 / p))
        g_new = box.log_ratio_gradient(u_new)
        s = u_new - u
        y = g_new - g
        sy = -box.h * np.dot(s, y)
        ss = box.h * np.dot(s, s)
        alpha = min(max(ss / sy, 1e-8), 1e4) if sy > 0 else 1e-2
        u, j, g = u_new, j_new, g_new
    raise NonConvergenceError(
        f"gns_constant: gradient norm {gnorm:.3e} after {max_iter} iterations")


def critical_mass_quintic(beta: float, c_gns6: float) -> float:
    """Mass threshold N0 with N0^2 = 3/(beta * C), C normalizing
    int|u|^6 <= C * M(u)^2 * int|u'|^2."""
    if beta <= 0 or c_gns6 <= 0:
        raise ValueError("beta and the constant must be positive")
    return float(np.sqrt(3.0 / (beta * c_gns6)))


def critical_mass_quintic_from_ratio(beta: float, c_gns: float) -> float:
    """Mass threshold from the ratio-normalized constant: (beta/6) C^6 N0^4 = 1/2.

    Note: this and :func:`critical_mass_quintic` normalize the optimal
    constant differently and agree only after converting C conventions; both
    are exposed deliberately.
    """
    if beta <= 0 or c_gns <= 0:
        raise ValueError("beta and the constant must be positive")
    return float((3.0 / (beta * c_gns**6)) ** 0.25)


# ---------------------------------------------------------------------------
# scaling transport


def scaling_transport(a_value: float, p: float, lam: float, mu: float) -> float:
    """Transport a minimum value through u = mu lam^{1/2} v(lam x):
    A(beta, N) = mu^2 lam^2 A(beta', N') at the parameters from
    :func:`transport_parameters`."""
    if lam <= 0 or mu <= 0:
        raise ValueError("scaling factors must be positive")
    return mu * mu * lam * lam * a_value


def transport_parameters(p: float, beta: float, n_mass: float, lam: float, mu: float):
    """(beta', N') = (lam^{-(6-p)/2} mu^{p-2} beta, N / mu^2)."""
    if lam <= 0 or mu <= 0:
        raise ValueError("scaling factors must be positive")
    return beta * mu ** (p - 2) * lam ** (-(6.0 - p) / 2.0), n_mass / mu**2


def a_closed_form_quartic(beta: float, n_mass: float) -> float:
    """A(beta, N) = -beta^2 N^3 / 96 at p = 4 (sech ansatz)."""
    return -(beta**2) * n_mass**3 / 96.0


# ---------------------------------------------------------------------------
# soliton-manifold distance


@dataclass(frozen=True)
class SolitonDistance:
    distance: float
    shift: float
    phase: float
    l2_part: float
    lq_part: float


def embed_profile(profile: SolitonProfile, grid: TorusGrid, lam: float,
                  center: float = 0.0) -> np.ndarray:
    """Width-lam embedding sqrt(L/lam) Q((x - c)/lam) on the torus grid."""
    if lam <= 0:
        raise ValueError("rescale factor must be positive")
    rel = np.mod(grid.x - center + grid.length / 2, grid.length) - grid.length / 2
    vals = np.interp(rel / lam, profile.grid.x, profile.values, left=0.0, right=0.0)
    return np.sqrt(grid.length / lam) * vals


class SolitonManifold:
    """Precomputed machinery for distances to {e^{i theta} Q_lam(. - x0)}.

    Caches the width-lam embedding and its FFT so that distance evaluation
    over many samples costs two FFTs per sample.
    """

    def __init__(self, profile: SolitonProfile, grid: TorusGrid, lam: float,
                 q: float = 4.0):
        self.profile = profile
        self.grid = grid
        self.lam = lam
        self.q = q
        self.emb0 = embed_profile(profile, grid, lam)
        self.fft_emb0 = np.fft.fft(self.emb0)
        # norm domain [-L/2, L/2] in the rescaled coordinate = an x-window of
        # size lam*L around the matched shift (the whole torus once lam >= 1)
        self.window_half = min(lam * grid.length / 2, grid.length / 2)
        self._zero = self._norms(self.emb0.astype(complex), 0.0)

    def _norms(self, diff: np.ndarray, center: float):
        dx, length = self.grid.dx, self.grid.length
        rel = np.mod(self.grid.x - center + length / 2, length) - length / 2
        mask = np.abs(rel) <= self.window_half
        a2 = diff.real[mask] ** 2 + diff.imag[mask] ** 2
        d2 = float(np.sqrt(dx * np.sum(a2) / length))
        lq_int = dx * float(np.sum(a2 ** (self.q / 2)))
        dq = float(self.lam ** (0.5 - 1.0 / self.q) * length**-0.5
                   * lq_int ** (1.0 / self.q))
        return d2, dq

    def reference_distance(self) -> float:
        """Distance of the zero field, max(sqrt(N), ||Q||_{L^q}) up to the
        window truncation of the embedding's tails."""
        return max(self._zero)

    def distance(self, values: np.ndarray) -> SolitonDistance:
        grid, dx = self.grid, self.grid.dx
        u = values

        corr = dx * np.fft.ifft(np.fft.fft(u) * np.conj(self.fft_emb0))
        mags = np.abs(corr)
        m_best = int(np.argmax(mags))
        center = float(grid.x[(grid.n // 2 + m_best) % grid.n])
        best_inner = corr[m_best]
        emb = None

        # parabolic refinement of the correlation peak (sub-grid shift)
        ym = mags[(m_best - 1) % grid.n]
        yp = mags[(m_best + 1) % grid.n]
        denom = ym - 2 * mags[m_best] + yp
        if denom < 0:
            delta = 0.5 * (ym - yp) / denom
            if abs(delta) <= 0.5 and delta != 0.0:
                c_ref = center + delta * dx
                emb_ref = embed_profile(self.profile, grid, self.lam, center=c_ref)
                inner_ref = dx * np.vdot(emb_ref, u)  # sum u conj(emb)
                if abs(inner_ref) > abs(best_inner):
                    center, best_inner, emb = c_ref, inner_ref, emb_ref
        if emb is None:
            emb = np.roll(self.emb0, m_best)

        theta = float(np.angle(best_inner)) if best_inner != 0 else 0.0
        # explicit difference: free of the cancellation the correlation
        # formula suffers near the manifold
        d2, dq = self._norms(u - np.exp(1j * theta) * emb, center)
        return SolitonDistance(max(d2, dq), center, theta, d2, dq)


def soliton_distance(field: Field, profile: SolitonProfile, lam: float,
                     q: float = 4.0) -> SolitonDistance:
    """Distance to the soliton manifold {e^{i theta} Q(. - x0)} after rescaling.

    Minimizes || L^{-1/2} lam^{1/2} u(lam(. - x0)) - e^{i theta} Q || over
    grid shifts (cross-correlation, with parabolic sub-grid refinement of the
    peak) and phases (closed form: the argument of the inner product), in the
    norm max(L^2, L^q).
    """
    return SolitonManifold(profile, field.grid, lam, q).distance(field.values)


# ---------------------------------------------------------------------------
# periodic unfolding and the torus GNS check


@dataclass(frozen=True)
class LineField:
    grid: LineGrid
    values: np.ndarray


def unfold_periodic(field: Field) -> LineField:
    """Cut a real mean-zero torus field at a zero and lay the period on the line.

    The construction preserves int |f|^p exactly (same samples) and
    int |f'|^2 up to quadrature tolerance, and is the device behind the
    torus-to-line comparison B >= A.
    """
    v = field.values
    if np.max(np.abs(v.imag)) > 1e-10 * max(1.0, np.max(np.abs(v.real))):
        raise ValueError("unfolding is defined for real-valued fields")
    f = v.real.copy()
    scale = max(1.0, float(np.max(np.abs(f))))
    if abs(f.mean()) > 1e-8 * scale:
        raise ValueError("unfolding requires a mean-zero field (a zero must exist)")
    sign_change = np.nonzero(f * np.roll(f, -1) <= 0)[0]
    if sign_change.size == 0:
        raise ValueError("no zero crossing found")
    j0 = int(sign_change[np.argmin(np.abs(f[sign_change]))])
    period = np.roll(f, -j0)

    n = field.grid.n
    line = LineGrid(field.grid.length, 2 * n - 1)
    vals = np.zeros(2 * n - 1)
    start = (n - 1) // 2
    vals[start:start + n] = period
    return LineField(line, vals)


@dataclass(frozen=True)
class TorusGnsCheck:
    passed: bool
    slack_projected: float
    slack_mean_mode: float
    slack_delta_form: float


def gns_torus_check(field: Field, p: float, c_gns: float, delta: float = 0.1,
                    tol: float = 0.0) -> TorusGnsCheck:
    """Verify the torus GNS inequality on the projected field plus its
    delta-form with the mean-mode bound int|P0 f|^p <= L^{1-p/2} ||f||^p."""
    from .gff import gradient_sq_integral

    grid = field.grid
    dx = grid.dx
    length = grid.length
    p0 = field.values.mean()
    f_nz = field.values - p0
    i2 = dx * float(np.sum(np.abs(f_nz) ** 2))
    ip = dx * float(np.sum(np.abs(f_nz) ** p))
    ig = gradient_sq_integral(field)
    mass_f = dx * float(np.sum(np.abs(field.values) ** 2))

    rhs_nz = c_gns**p * i2 ** ((p + 2) / 4) * ig ** ((p - 2) / 4)
    slack_nz = rhs_nz - ip

    lhs_mean = length * abs(p0) ** p
    slack_mean = length ** (1 - p / 2) * mass_f ** (p / 2) - lhs_mean

    ip_full = dx * float(np.sum(np.abs(field.values) ** p))
    c_delta = (1 - (1 + delta) ** (-1.0 / (p - 1))) ** (1 - p)
    rhs_delta = ((1 + delta) * rhs_nz
                 + c_delta * length ** (1 - p / 2) * mass_f ** (p / 2))
    slack_delta = rhs_delta - ip_full

    floor = tol + 1e-12 * (abs(ip_full) + abs(rhs_nz) + 1.0)
    passed = slack_nz >= -floor and slack_mean >= -floor and slack_delta >= -floor
    return TorusGnsCheck(passed, float(slack_nz), float(slack_mean), float(slack_delta))
