import numpy as np
import pytest

from torusgibbs.experiments import (ExperimentConfig, ResultRecord, cell_rng,
                                    chain_summary, config_from_ini,
                                    fit_tail_slope, ld_tail_experiment,
                                    next_power_of_two, ou_covariance,
                                    ou_limit_test, phase_scan,
                                    supercritical_concentration)


def small_config(**kw):
    base = dict(tag="t", p=4.0, alpha=1.0, mass_density=1.0, gamma=0.0,
                beta_list=(0.0, 1.0), length_list=(8.0,), points_list=(128,),
                steps=2500, burn_in=500, thin=10, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(beta_list=())
    with pytest.raises(ValueError):
        small_config(steps=0)
    with pytest.raises(ValueError):
        small_config(points_list=(128, 256))


def test_config_from_ini(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("""
[experiment]
tag = demo
seed = 12

[params]
p = 4.0
gamma = 1.0
beta_list = 0, 0.5, 1.0
length_list = 16

[mcmc]
steps = 4000
burn_in = 800
""")
    cfg = config_from_ini(str(path))
    assert cfg.tag == "demo" and cfg.seed == 12
    assert cfg.beta_list == (0.0, 0.5, 1.0)
    assert cfg.length_list == (16.0,)
    assert cfg.steps == 4000

    bad = tmp_path / "bad.ini"
    bad.write_text("[params]\nbogus_key = 3\n")
    with pytest.raises(ValueError, match="params.bogus_key"):
        config_from_ini(str(bad))
    bad2 = tmp_path / "bad2.ini"
    bad2.write_text("[params]\nbeta_list = fast\n")
    with pytest.raises(ValueError, match="beta_list"):
        config_from_ini(str(bad2))
    with pytest.raises(ValueError):
        config_from_ini(str(tmp_path / "missing.ini"))


def test_cell_rng_deterministic():
    a = cell_rng(5, 3).standard_normal(4)
    b = cell_rng(5, 3).standard_normal(4)
    c = cell_rng(5, 4).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_next_power_of_two():
    assert next_power_of_two(8) == 8
    assert next_power_of_two(9) == 16
    assert next_power_of_two(1000) == 1024


def test_record_roundtrip_and_csv():
    rec = ResultRecord("demo", {"p": 4.0}, 3,
                       [{"cell_index": 0, "value": 1.0 / 3.0, "name": "a"},
                        {"cell_index": 1, "value": -1.2345678901234567e-8}])
    back = ResultRecord.from_json(rec.to_json())
    assert back.cells == rec.cells and back.config == rec.config
    csv_text = rec.to_csv()
    assert "\r" not in csv_text
    assert "0.33333333333333331" in csv_text  # 17 significant digits
    lines = csv_text.strip().split("\n")
    # leading comments embed the resolved config and seed (auditability)
    assert lines[0] == "# experiment: demo"
    assert lines[1] == "# seed: 3"
    assert '"p": 4.0' in lines[3]
    assert lines[4] == "cell_index,name,value"


def test_ou_covariance():
    assert ou_covariance(1.0, 0.0) == pytest.approx(0.5)
    assert ou_covariance(4.0, 0.0) == pytest.approx(0.25)
    assert ou_covariance(1.0, 1.5) == ou_covariance(1.0, -1.5)
    with pytest.raises(ValueError):
        ou_covariance(0.0, 1.0)


def test_fit_tail_slope(rng):
    devs = rng.exponential(scale=1.0, size=20_000)
    out = fit_tail_slope(devs, 1.0, np.linspace(0.2, 2.0, 8))
    assert out["slope"] == pytest.approx(-1.0, rel=0.1)
    assert out["slope_se"] >= 0 and out["n_points_used"] >= 2
    with pytest.raises(ValueError):
        fit_tail_slope(devs, 1.0, [0.5])
    # thresholds far out in the tail get dropped
    out2 = fit_tail_slope(devs, 1.0, [0.5, 1.0, 30.0])
    assert out2["dropped"] == "30"


def test_ld_tail_experiment():
    cfg = small_config(length_list=(64.0,), points_list=(512,),
                       intervals=(16.0, 32.0), tail_samples=4000,
                       tail_grid=(0.25, 0.5, 0.75, 1.0, 1.25))
    rec = ld_tail_experiment(cfg)
    assert len(rec.cells) == 2
    slopes = [c["slope"] for c in rec.cells]
    assert all(s < 0 for s in slopes)
    # doubling |I| keeps the slope collapse within 30%
    assert abs(slopes[1] - slopes[0]) <= 0.3 * abs(slopes[0])
    # degenerate grid is rejected per cell
    rec2 = ld_tail_experiment(small_config(length_list=(64.0,), points_list=(512,),
                                           intervals=(16.0,), tail_samples=500,
                                           tail_grid=(0.5,)))
    assert "error" in rec2.cells[0]


def test_phase_scan_small():
    cfg = small_config(gamma=1.0, beta_list=(0.0, 4.0), steps=3000, burn_in=1000)
    rec = phase_scan(cfg)
    assert len(rec.cells) == 2
    for cell in rec.cells:
        assert "order_param" in cell
        assert cell["mean_mass_density"] <= 1.0 + 1e-12
    assert rec.seed == 7
    # reruns and thread counts do not change the record
    assert phase_scan(cfg).to_json() == rec.to_json()
    assert phase_scan(cfg, threads=2).to_csv() == rec.to_csv()
    with pytest.raises(ValueError):
        phase_scan(small_config(gamma=0.5))
    with pytest.raises(ValueError):
        phase_scan(small_config(gamma=1.0, beta_list=(0.0,)))


def test_supercritical_concentration_small():
    cfg = small_config(gamma=0.0, beta_list=(0.0, 1.0), length_list=(8.0,),
                       points_list=(128,), steps=3000, burn_in=1000)
    rec = supercritical_concentration(cfg)
    assert len(rec.cells) == 2
    for cell in rec.cells:
        assert cell["frac_inside_0.1"] <= cell["frac_inside_0.2"] \
            <= cell["frac_inside_0.4"]
        assert cell["rescale"] == pytest.approx(1.0 / 8.0)
    # the free-field control never enters the tight strip
    control = next(c for c in rec.cells if c["beta"] == 0.0)
    assert control["frac_inside_0.1"] == 0.0
    with pytest.raises(ValueError):
        supercritical_concentration(small_config(gamma=1.0))


def test_phase_scan_control_matches_gff_baseline():
    # beta = 0 column of the scan vs direct free-field sampling of the same
    # local-mass observable (independent route)
    from torusgibbs.gff import sample_gff_block
    from torusgibbs.grid import SpectralWeights, TorusGrid

    m_half = 2.0
    cfg = small_config(gamma=1.0, beta_list=(0.0, 2.0), length_list=(16.0,),
                       points_list=(256,), steps=20_000, burn_in=4_000,
                       local_mass_halfwidth=m_half, seed=31)
    rec = phase_scan(cfg)
    cell = next(c for c in rec.cells if c["beta"] == 0.0)

    grid = TorusGrid(16.0, 256)
    w = SpectralWeights(1.0, grid)
    rng = np.random.default_rng(99)
    vals = sample_gff_block(grid, w, 3000, rng)
    ja, jb = grid.index_of(-m_half), grid.index_of(m_half)
    local = np.abs(vals[:, ja:jb]).sum(axis=1) * grid.dx
    keep = (np.sum(vals.real**2 + vals.imag**2, axis=1) * grid.dx) <= 16.0
    local = local[keep]
    se = np.hypot(local.std(ddof=1) / np.sqrt(local.size), cell["err_local_mass"])
    assert abs(cell["mean_local_mass"] - local.mean()) <= 3 * se


def test_cell_error_isolation():
    # impossible initialization (tiny cutoff) fails per cell, not globally
    cfg = small_config(gamma=0.0, beta_list=(1.0,), mass_density=1e-5,
                       length_list=(8.0,), points_list=(128,))
    rec = supercritical_concentration(cfg)
    assert all("error" in c for c in rec.cells)
    assert "ChainInitError" in rec.cells[0]["error"]


def test_ou_limit_small():
    cfg = small_config(gamma=2.0, beta_list=(1.0,), length_list=(16.0,),
                       points_list=(256,), steps=4000, burn_in=1000,
                       lags=(0.0, 1.0), ou_window=2.0)
    rec = ou_limit_test(cfg)
    assert len(rec.cells) == 2
    for cell in rec.cells:
        assert cell["target"] == pytest.approx(ou_covariance(1.0, cell["lag"]))
        assert np.isfinite(cell["cov"])
    with pytest.raises(ValueError):
        ou_limit_test(small_config(mass_density=0.3, gamma=2.0))
    with pytest.raises(ValueError):
        ou_limit_test(small_config(gamma=0.0))


def test_chain_summary_small():
    rec = chain_summary(small_config(gamma=1.0))
    assert len(rec.cells) == 2
    assert all("mean_mass" in c for c in rec.cells)
