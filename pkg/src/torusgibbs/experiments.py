"""Scripted experiment drivers at desk scale.

Each driver runs a grid of cells (parameter combinations), records estimates
with batch-means Monte Carlo errors, and emits a serializable ResultRecord.
Limit statements become monotone-trend observables here: the torus caps at
L = 64 with n up to 4096.

Reproducibility: all randomness flows from one master seed; cell i uses the
generator seeded by SeedSequence(master, spawn_key=(i,)), so results do not
depend on scheduling and reruns with one seed are byte-identical (wall-clock
timing never enters a record).  Cells are independent jobs; ``threads`` caps
the worker pool and only the record assembly is serialized.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from . import __version__
from .diagnostics import batch_means_error
from .gff import lp_integral, mass_tail_samples
from .grid import Field, LineGrid, TorusGrid
from .mcmc import GibbsParams, concentration_rescale, run_chain
from .variational import SolitonManifold, ground_state_profile, suggested_half_width

MAX_POINTS = 4096


def next_power_of_two(x: float) -> int:
    n = 8
    while n < x:
        n *= 2
    return n


def cell_seed(master: int, index: int) -> np.random.SeedSequence:
    """Documented seed-splitting scheme: per-cell seed = hash(master, index)."""
    return np.random.SeedSequence(master, spawn_key=(index,))


def cell_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(cell_seed(master, index))


@dataclass
class ExperimentConfig:
    """Inputs of one experiment run (parsed from INI-style config files)."""

    tag: str = "run"
    p: float = 4.0
    alpha: float = 1.0
    mass_density: float = 1.0
    gamma: float = 0.0
    beta_list: tuple = (0.0, 1.0)
    length_list: tuple = (32.0,)
    points_list: tuple = ()          # optional per-L override
    steps: int = 20_000
    burn_in: int = 4_000
    thin: int = 10
    step_size: float = 0.3
    init: str = "reject"
    local_mass_halfwidth: float = 2.0
    ou_window: float = 4.0
    lags: tuple = (0.0, 0.5, 1.0, 2.0)
    q: float = 4.0
    delta_list: tuple = (0.1, 0.2, 0.4)
    intervals: tuple = (16.0,)
    tail_grid: tuple = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
    tail_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        for name in ("beta_list", "length_list", "lags", "delta_list",
                     "intervals", "tail_grid"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"config: {name} must be nonempty")
        if self.steps <= 0 or self.burn_in < 0 or self.steps < self.burn_in:
            raise ValueError("config: need steps > 0 and steps >= burn_in")
        if self.points_list and len(self.points_list) != len(self.length_list):
            raise ValueError("config: points_list must match length_list")

    def points_for(self, i: int, length: float, beta_max: float = 0.0) -> int:
        if self.points_list:
            return int(self.points_list[i])
        base = 16 * length
        if self.gamma < self.p / 2 - 1:
            base = max(base, 1.6 * length**2)       # resolve width-1/L solitons
        if beta_max > 0:
            base = max(base, 3.2 * beta_max * self.mass_density * length)
        return min(next_power_of_two(base), MAX_POINTS)

    def params_for(self, beta: float, length: float) -> GibbsParams:
        return GibbsParams(self.p, float(beta), self.alpha, self.mass_density,
                           self.gamma, float(length))


_FIELD_TYPES = {f.name: f.type for f in ExperimentConfig.__dataclass_fields__.values()}
_TUPLE_KEYS = {"beta_list", "length_list", "points_list", "lags", "delta_list",
               "intervals", "tail_grid"}
_INT_KEYS = {"steps", "burn_in", "thin", "seed", "tail_samples"}
_STR_KEYS = {"tag", "init"}


def config_from_ini(path: str) -> ExperimentConfig:
    """Parse a flat key-value config with sections; keys map to
    ExperimentConfig fields regardless of which section they sit in."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"config: cannot read {path}")
    kwargs = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _FIELD_TYPES:
                raise ValueError(f"config: unknown key {section}.{key}")
            if key in _STR_KEYS:
                kwargs[key] = raw.strip()
            elif key in _TUPLE_KEYS:
                items = [s for s in raw.replace(",", " ").split() if s]
                cast = int if key == "points_list" else float
                try:
                    kwargs[key] = tuple(cast(s) for s in items)
                except ValueError as exc:
                    raise ValueError(f"config: bad value for {section}.{key}: {raw!r}") from exc
            else:
                cast = int if key in _INT_KEYS else float
                try:
                    kwargs[key] = cast(raw)
                except ValueError as exc:
                    raise ValueError(f"config: bad value for {section}.{key}: {raw!r}") from exc
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ValueError(f"config: {exc}") from exc


@dataclass
class ResultRecord:
    """Serializable output of an experiment: inputs, estimates, errors, seed."""

    experiment: str
    config: dict
    seed: int
    cells: list
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        data = json.loads(text)
        return cls(experiment=data["experiment"], config=data["config"],
                   seed=data["seed"], cells=data["cells"], version=data["version"])

    def to_csv(self) -> str:
        """Flat table, one row per cell; floats at 17 significant digits.

        Leading '#' lines embed the resolved config, seed, and version so the
        file is self-describing (readers should skip comment lines).
        """
        keys = sorted({k for cell in self.cells for k in cell})
        buf = io.StringIO()
        buf.write(f"# experiment: {self.experiment}\n")
        buf.write(f"# seed: {self.seed}\n")
        buf.write(f"# version: {self.version}\n")
        buf.write(f"# config: {json.dumps(self.config, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for cell in self.cells:
            row = []
            for k in keys:
                v = cell.get(k, "")
                if isinstance(v, float):
                    row.append(format(v, ".17g"))
                else:
                    row.append(v)
            writer.writerow(row)
        return buf.getvalue()


def _clean(d: Mapping) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, float)):
            out[k] = float(v)
        elif isinstance(v, (np.integer, int)):
            out[k] = int(v)
        else:
            out[k] = v
    return out


def _config_echo(config: ExperimentConfig) -> dict:
    echo = asdict(config)
    for k, v in echo.items():
        if isinstance(v, tuple):
            echo[k] = list(v)
    return echo


def _chain_cell(config, params, n_points, rng):
    grid = TorusGrid(params.length, n_points)
    samples, stats = run_chain(params, grid, config.steps, config.burn_in,
                               config.thin, config.step_size, rng,
                               init=config.init)
    return grid, samples, stats


def _run_jobs(jobs, threads: int) -> list:
    """Run independent cell jobs, optionally over a thread pool.

    Each job owns its cell-indexed generator, so outputs are identical for
    any thread count.
    """
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


def _distance_stats(samples, manifold):
    dists = np.array([manifold.distance(v).distance for v in samples])
    return float(dists.mean()), batch_means_error(dists), dists


def _reference_profile(config: ExperimentConfig, beta: float, points: int = 2048):
    half = suggested_half_width(config.p, beta, config.mass_density)
    return ground_state_profile(config.p, beta, config.mass_density,
                                LineGrid(half, points))


# ---------------------------------------------------------------------------
# experiment drivers


def phase_scan(config: ExperimentConfig, threads: int = 1) -> ResultRecord:
    """Order-parameter scan in beta along the critical line gamma = p/2 - 1.

    The distance statistic uses one fixed reference profile (ground state at
    the largest scanned beta) for every cell, so the order parameter
    1 - distance/distance(0-field) is a single comparable scalar across the
    scan, including the beta = 0 control column.
    """
    if abs(config.gamma - (config.p / 2 - 1)) > 1e-9:
        raise ValueError("phase_scan requires gamma = p/2 - 1")
    beta_max = max(config.beta_list)
    if beta_max <= 0:
        raise ValueError("phase_scan needs at least one positive beta")
    profile = _reference_profile(config, beta_max)

    def make_job(index, il, length, beta):
        n_points = config.points_for(il, length, beta_max)

        def job():
            cell = {"experiment": "phase_scan", "cell_index": index,
                    "length": float(length), "n_points": n_points,
                    "beta": float(beta)}
            rng = cell_rng(config.seed, index)
            try:
                params = config.params_for(beta, length)
                grid, samples, stats = _chain_cell(config, params, n_points, rng)
                manifold = SolitonManifold(profile, grid, 1.0, config.q)
                dist0 = manifold.reference_distance()
                mean_d, err_d, _ = _distance_stats(samples, manifold)
                local = np.array([lp_integral(Field.from_values(grid, v), 1.0,
                                              (-config.local_mass_halfwidth,
                                               config.local_mass_halfwidth))
                                  for v in samples])
                dens = stats.traces["mass"] / length
                cell.update(_clean({
                    "mean_distance": mean_d, "err_distance": err_d,
                    "order_param": 1.0 - mean_d / dist0,
                    "err_order_param": err_d / dist0,
                    "mean_local_mass": local.mean(),
                    "err_local_mass": batch_means_error(local),
                    "mean_mass_density": dens.mean(),
                    "err_mass_density": batch_means_error(dens),
                    "acceptance": stats.acceptance_rate,
                    "ess_potential": stats.ess["potential"],
                    "ess_mass": stats.ess["mass"],
                    "tainted": int(stats.tainted),
                    "step_size_final": stats.step_size,
                }))
            except Exception as exc:  # cell failure leaves other cells intact
                cell["error"] = f"{type(exc).__name__}: {exc}"
            return cell

        return job

    jobs = [make_job(i, il, length, beta)
            for i, (il, length, beta) in enumerate(
                (il, length, beta)
                for il, length in enumerate(config.length_list)
                for beta in config.beta_list)]
    cells = _run_jobs(jobs, threads)
    return ResultRecord("phase_scan", _config_echo(config), config.seed, cells)


def supercritical_concentration(config: ExperimentConfig, threads: int = 1) -> ResultRecord:
    """Distance-to-manifold distributions across L in the supercritical regime.

    Each L uses the physical rescale lam = L^{-(p-2-2gamma)/(6-p)}; the
    fraction of samples inside the strip is recorded for each delta.  beta=0
    columns act as controls measured with the same statistic.
    """
    if not config.gamma < config.p / 2 - 1:
        raise ValueError("supercritical_concentration requires gamma < p/2 - 1")
    beta_pos = [b for b in config.beta_list if b > 0]
    if not beta_pos:
        raise ValueError("needs at least one positive beta")
    profile = _reference_profile(config, max(beta_pos), points=4096)

    def make_job(index, il, length, beta):
        n_points = config.points_for(il, length, max(beta_pos))

        def job():
            cell = {"experiment": "supercritical_concentration",
                    "cell_index": index, "length": float(length),
                    "n_points": n_points, "beta": float(beta)}
            rng = cell_rng(config.seed, index)
            try:
                params = config.params_for(beta, length)
                lam = concentration_rescale(params)
                grid, samples, stats = _chain_cell(config, params, n_points, rng)
                manifold = SolitonManifold(profile, grid, lam, config.q)
                mean_d, err_d, dists = _distance_stats(samples, manifold)
                cell.update(_clean({
                    "rescale": lam,
                    "mean_distance": mean_d, "err_distance": err_d,
                    "acceptance": stats.acceptance_rate,
                    "ess_potential": stats.ess["potential"],
                    "tainted": int(stats.tainted),
                }))
                for delta in config.delta_list:
                    cell[f"frac_inside_{delta:g}"] = float((dists < delta).mean())
            except Exception as exc:
                cell["error"] = f"{type(exc).__name__}: {exc}"
            return cell

        return job

    jobs = [make_job(i, il, length, beta)
            for i, (il, length, beta) in enumerate(
                (il, length, beta)
                for il, length in enumerate(config.length_list)
                for beta in config.beta_list)]
    cells = _run_jobs(jobs, threads)
    return ResultRecord("supercritical_concentration", _config_echo(config),
                        config.seed, cells)


def chain_summary(config: ExperimentConfig, threads: int = 1) -> ResultRecord:
    """Plain sampling runs: chain diagnostics and mean observables per cell."""

    def make_job(index, il, length, beta):
        n_points = config.points_for(il, length)

        def job():
            cell = {"experiment": "sample", "cell_index": index,
                    "length": float(length), "n_points": n_points,
                    "beta": float(beta)}
            rng = cell_rng(config.seed, index)
            try:
                params = config.params_for(beta, length)
                grid, samples, stats = _chain_cell(config, params, n_points, rng)
                cell.update(_clean({
                    "mean_mass": stats.traces["mass"].mean(),
                    "err_mass": batch_means_error(stats.traces["mass"]),
                    "mean_potential": stats.traces["potential"].mean(),
                    "err_potential": batch_means_error(stats.traces["potential"]),
                    "acceptance": stats.acceptance_rate,
                    "ess_potential": stats.ess["potential"],
                    "ess_mass": stats.ess["mass"],
                    "step_size_final": stats.step_size,
                    "n_samples": samples.shape[0],
                    "tainted": int(stats.tainted),
                }))
            except Exception as exc:
                cell["error"] = f"{type(exc).__name__}: {exc}"
            return cell

        return job

    jobs = [make_job(i, il, length, beta)
            for i, (il, length, beta) in enumerate(
                (il, length, beta)
                for il, length in enumerate(config.length_list)
                for beta in config.beta_list)]
    cells = _run_jobs(jobs, threads)
    return ResultRecord("sample", _config_echo(config), config.seed, cells)


def ou_covariance(alpha: float, z: float) -> float:
    """Stationary covariance e^{-sqrt(alpha)|z|} / (2 sqrt(alpha))."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return float(np.exp(-np.sqrt(alpha) * abs(z)) / (2 * np.sqrt(alpha)))


def ou_limit_test(config: ExperimentConfig, threads: int = 1) -> ResultRecord:
    """Windowed two-point function against the exponential-kernel target.

    Valid in the weak-nonlinearity regimes (gamma > p/2-1 any beta, or the
    critical line with small beta) with N > 1/(2 sqrt(alpha)).  Also checks
    the vanishing pseudo-covariance E[u(x+z) u(x)].
    """
    if config.mass_density <= 1.0 / (2 * np.sqrt(config.alpha)):
        raise ValueError("needs N > 1/(2 sqrt(alpha)) for the free-field limit")
    if config.gamma < config.p / 2 - 1:
        raise ValueError("supercritical gamma: no free-field limit to test")

    def make_job(index, il, length, beta):
        n_points = config.points_for(il, length)

        def job():
            base = {"experiment": "ou_limit", "cell_index": index,
                    "length": float(length), "n_points": n_points,
                    "beta": float(beta)}
            rng = cell_rng(config.seed, index)
            rows = []
            try:
                params = config.params_for(beta, length)
                grid, samples, stats = _chain_cell(config, params, n_points, rng)
                win = (np.abs(grid.x) <= config.ou_window)
                for lag in config.lags:
                    m = int(round(lag / grid.dx))
                    rolled = np.roll(samples, -m, axis=1)
                    prod = rolled[:, win] * np.conj(samples[:, win])
                    pseudo = rolled[:, win] * samples[:, win]
                    cov_tr = prod.mean(axis=1)
                    ps_tr = pseudo.mean(axis=1)
                    target = ou_covariance(config.alpha, m * grid.dx)
                    rows.append(_clean({
                        **base, "lag": m * grid.dx,
                        "cov": cov_tr.real.mean(),
                        "cov_err": batch_means_error(cov_tr.real),
                        "target": target,
                        "rel_dev": abs(cov_tr.real.mean() - target) / target,
                        "pseudo_re": ps_tr.real.mean(),
                        "pseudo_im": ps_tr.imag.mean(),
                        "pseudo_re_err": batch_means_error(ps_tr.real),
                        "pseudo_im_err": batch_means_error(ps_tr.imag),
                        "acceptance": stats.acceptance_rate,
                        "tainted": int(stats.tainted)}))
            except Exception as exc:
                rows.append({**base, "error": f"{type(exc).__name__}: {exc}"})
            return rows

        return job

    jobs = [make_job(i, il, length, beta)
            for i, (il, length, beta) in enumerate(
                (il, length, beta)
                for il, length in enumerate(config.length_list)
                for beta in config.beta_list)]
    cells = [row for rows in _run_jobs(jobs, threads) for row in rows]
    return ResultRecord("ou_limit", _config_echo(config), config.seed, cells)


def fit_tail_slope(deviations: np.ndarray, interval: float, tail_grid) -> dict:
    """Least-squares slope of log empirical tail versus M/sqrt(|I|).

    Grid points with fewer than 20 exceedances are dropped (recorded); a fit
    needs at least two surviving points.
    """
    x_all = np.asarray(tail_grid, dtype=float)
    if x_all.size < 2:
        raise ValueError("tail grid of length < 2: degenerate fit")
    thresholds = x_all * np.sqrt(interval)
    counts = np.array([(deviations > t).sum() for t in thresholds])
    keep = counts >= 20
    dropped = [float(x) for x in x_all[~keep]]
    x = x_all[keep]
    if x.size < 2:
        raise ValueError("fewer than two tail points with >= 20 exceedances")
    logp = np.log(counts[keep] / deviations.size)
    design = np.vstack([x, np.ones_like(x)]).T
    coef, residuals, _, _ = np.linalg.lstsq(design, logp, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    rss = float(residuals[0]) if residuals.size else float(
        np.sum((logp - design @ coef) ** 2))
    if x.size > 2:
        sigma2 = rss / (x.size - 2)
        slope_se = float(np.sqrt(sigma2 / np.sum((x - x.mean()) ** 2)))
    else:
        slope_se = float("nan")
    return {"slope": slope, "intercept": intercept, "slope_se": slope_se,
            "fit_residual": rss, "n_points_used": int(x.size),
            "dropped": ",".join(f"{d:g}" for d in dropped)}


def ld_tail_experiment(config: ExperimentConfig) -> ResultRecord:
    """Tail-slope fits of the windowed-mass deviations for each interval."""
    length = config.length_list[0]
    n_points = config.points_for(0, length)
    grid = TorusGrid(length, n_points)
    cells = []
    for index, interval in enumerate(config.intervals):
        cell = {"experiment": "ld_tail", "cell_index": index,
                "length": float(length), "n_points": n_points,
                "interval": float(interval)}
        rng = cell_rng(config.seed, index)
        try:
            devs = mass_tail_samples(grid, config.alpha,
                                     (-interval / 2, interval / 2),
                                     config.tail_samples, rng)
            cell.update(_clean(fit_tail_slope(devs, interval, config.tail_grid)))
        except Exception as exc:
            cell["error"] = f"{type(exc).__name__}: {exc}"
        cells.append(cell)
    return ResultRecord("ld_tail", _config_echo(config), config.seed, cells)
