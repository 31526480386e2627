import numpy as np
import pytest

from torusgibbs.diagnostics import (batch_means_error, combined_error,
                                    effective_sample_size)


def test_batch_means_iid(rng):
    x = rng.standard_normal(20_000)
    se = batch_means_error(x)
    # for iid data the batch-means error approximates std/sqrt(n)
    assert se == pytest.approx(x.std() / np.sqrt(x.size), rel=0.5)
    assert np.isnan(batch_means_error(np.arange(5.0)))
    with pytest.raises(ValueError):
        batch_means_error(x, n_batches=1)


def test_ess_iid_and_correlated(rng):
    x = rng.standard_normal(20_000)
    ess = effective_sample_size(x)
    assert 0.4 * x.size <= ess <= 2.5 * x.size
    # AR(1) with rho = 0.95: ESS ratio about (1-rho)/(1+rho) ~ 1/39
    rho = 0.95
    z = rng.standard_normal(40_000)
    y = np.empty_like(z)
    y[0] = z[0]
    for i in range(1, z.size):
        y[i] = rho * y[i - 1] + np.sqrt(1 - rho * rho) * z[i]
    ess_y = effective_sample_size(y)
    assert ess_y < 0.2 * y.size


def test_ess_degenerate_traces():
    assert np.isnan(effective_sample_size(np.array([])))
    assert effective_sample_size(np.full(500, 3.14)) == 500.0


def test_combined_error():
    assert combined_error(3.0, 4.0) == pytest.approx(5.0)
    assert combined_error(1.0) == 1.0
