"""Monte Carlo error bars and effective sample sizes by batch means."""

from __future__ import annotations

import numpy as np

MIN_BATCHES = 20


def batch_means_error(trace: np.ndarray, n_batches: int = MIN_BATCHES) -> float:
    """Standard error of the mean of a (possibly correlated) scalar trace.

    Splits the trace into ``n_batches`` equal batches (dropping a remainder
    at the front) and uses the spread of batch means.  Returns nan for traces
    too short to batch.
    """
    x = np.asarray(trace, dtype=float)
    if n_batches < 2:
        raise ValueError("need at least 2 batches")
    m = x.size // n_batches
    if m < 1:
        return float("nan")
    x = x[x.size - m * n_batches:]
    means = x.reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def effective_sample_size(trace: np.ndarray, n_batches: int = MIN_BATCHES) -> float:
    """ESS = sample variance / (batch-means variance of the mean).

    Constant traces (e.g. the potential at beta = 0) are reported as
    perfectly informative: ESS = len(trace).
    """
    x = np.asarray(trace, dtype=float)
    if x.size == 0:
        return float("nan")
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    if var <= 1e-300:
        return float(x.size)
    se = batch_means_error(x, n_batches)
    if not np.isfinite(se):
        return float("nan")
    if se == 0.0:
        return float(x.size)
    return float(var / se**2)


def combined_error(*errors: float) -> float:
    """Quadrature combination of independent standard errors."""
    return float(np.sqrt(sum(e * e for e in errors)))
