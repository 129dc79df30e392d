import numpy as np
import pytest

from stadf import (NullDistribution, get_null_distribution, load_distribution,
                   save_distribution, simulate_null, wild_bootstrap_sadf)
from stadf.inference import (GSADF_GLS, GSADF_OLS, SADF_GLS, SADF_OLS,
                             _window_columns)


def _dist(draws, **kw):
    defaults = dict(family=SADF_GLS, r0=0.1, steps=500, replications=len(draws),
                    window_grid=300, seed=1)
    defaults.update(kw)
    return NullDistribution(draws=np.asarray(draws, dtype=float), **defaults)


def test_p_value_trivial_cases():
    d = _dist(np.arange(1000, dtype=float))
    assert d.p_value(-1.0) == 1.0
    assert d.p_value(2000.0) == 0.0
    q95 = d.quantile(0.95)
    assert d.p_value(q95) == pytest.approx(0.05, abs=0.002)


def test_p_value_nonincreasing():
    d = _dist(np.random.default_rng(0).standard_normal(5000))
    stats = np.linspace(-3, 3, 50)
    ps = [d.p_value(s) for s in stats]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_quantile_ordering():
    d = simulate_null(SADF_GLS, 0.1, steps=500, replications=2000, seed=3)
    assert d.critical_value(0.01) > d.critical_value(0.05) > d.critical_value(0.10)


def test_simulate_null_deterministic():
    a = simulate_null(SADF_GLS, 0.1, steps=500, replications=1500, seed=5)
    b = simulate_null(SADF_GLS, 0.1, steps=500, replications=1500, seed=5)
    c = simulate_null(SADF_GLS, 0.1, steps=500, replications=1500, seed=6)
    assert np.array_equal(a.draws, b.draws)
    assert not np.array_equal(a.draws, c.draws)


def test_generalized_family_dominates_forward_family():
    a = simulate_null(SADF_GLS, 0.2, steps=500, replications=3000, seed=7,
                      window_grid=100)
    g = simulate_null(GSADF_GLS, 0.2, steps=500, replications=3000, seed=7,
                      window_grid=100)
    assert g.critical_value(0.05) > a.critical_value(0.05)
    a = simulate_null(SADF_OLS, 0.2, steps=500, replications=2000, seed=8)
    g = simulate_null(GSADF_OLS, 0.2, steps=500, replications=2000, seed=8,
                      window_grid=100)
    assert g.critical_value(0.05) > a.critical_value(0.05)


def test_quantile_stability_across_independent_runs():
    a = simulate_null(SADF_GLS, 0.1, steps=600, replications=5000, seed=11)
    b = simulate_null(SADF_GLS, 0.1, steps=600, replications=10000, seed=12)
    assert abs(a.critical_value(0.05) - b.critical_value(0.05)) < 0.1


def test_window_columns_alignment():
    cols = _window_columns(2000, 0.1, 300)
    assert cols[0] == (30 * 2000) // 300
    assert cols[-1] == 2000
    assert len(cols) == 271


def test_cache_roundtrip(tmp_path):
    d = simulate_null(SADF_OLS, 0.15, steps=500, replications=1200, seed=21)
    path = tmp_path / "x.nulldist"
    save_distribution(path, d)
    back = load_distribution(path)
    assert back.family == d.family
    assert back.r0 == d.r0
    assert back.steps == d.steps
    assert back.replications == d.replications
    assert back.window_grid == d.window_grid
    assert back.seed == d.seed
    assert np.array_equal(back.draws, d.draws)


def test_get_null_distribution_uses_cache(tmp_path):
    kw = dict(family=SADF_GLS, r0=0.12, steps=500, replications=1500, seed=2,
              cache_dir=tmp_path)
    a = get_null_distribution(**kw)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    mtime = files[0].stat().st_mtime_ns
    b = get_null_distribution(**kw)
    assert files[0].stat().st_mtime_ns == mtime  # untouched: served from cache
    assert np.array_equal(a.draws, b.draws)
    c = get_null_distribution(force=True, **kw)
    assert np.array_equal(a.draws, c.draws)  # same seed, same draws


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.nulldist"
    path.write_bytes(b"not a cache file at all")
    with pytest.raises(ValueError):
        load_distribution(path)


# ---------------------------------------------------------------------------
# Wild bootstrap
# ---------------------------------------------------------------------------

def _walk(T, seed):
    rng = np.random.default_rng(seed)
    return np.concatenate([[0.0], np.cumsum(rng.standard_normal(T))])


def test_bootstrap_pvalue_formula_and_determinism():
    y = _walk(80, 1)
    res = wild_bootstrap_sadf(y, 0.2, B=99, seed=42)
    n_ge = np.sum(res.bootstrap_draws >= res.observed)
    assert res.p_value == pytest.approx((1 + n_ge) / 100.0)
    res2 = wild_bootstrap_sadf(y, 0.2, B=99, seed=42)
    assert np.array_equal(res.bootstrap_draws, res2.bootstrap_draws)
    res3 = wild_bootstrap_sadf(y, 0.2, B=99, seed=43)
    assert not np.array_equal(res.bootstrap_draws, res3.bootstrap_draws)


def test_bootstrap_scale_invariance():
    y = 100.0 + _walk(100, 9)
    a = wild_bootstrap_sadf(y, 0.15, B=99, seed=5)
    b = wild_bootstrap_sadf(4.0 * y, 0.15, B=99, seed=5)
    assert a.observed == b.observed
    assert a.p_value == b.p_value
    assert np.array_equal(a.bootstrap_draws, b.bootstrap_draws)


def test_bootstrap_constant_series_degenerate():
    res = wild_bootstrap_sadf(np.full(60, 3.0), 0.2, B=99, seed=0)
    assert res.degenerate
    assert res.p_value == 1.0


def test_bootstrap_rejects_explosive_path():
    rng = np.random.default_rng(123)
    y = [0.0]
    for t in range(1, 101):
        coef = 1.08 if 40 < t <= 70 else 1.0
        y.append(coef * y[-1] + rng.standard_normal())
    res = wild_bootstrap_sadf(np.asarray(y), B=199, seed=1)
    assert res.p_value <= 0.05


def test_bootstrap_minimum_replications():
    with pytest.raises(ValueError):
        wild_bootstrap_sadf(_walk(50, 2), B=50)
