import numpy as np
import pytest

from stadf import (GLS, OLS, DegenerateStatisticError, DegenerateWindowError,
                   TransformedSeries, adf_window, default_r0, estimate_profile,
                   gsadf, gstadf, profile_from_volatility, sadf, stadf,
                   tadf_window, VolatilitySpec)
from stadf.stats import sadf_max_batch
from stadf.series import floor_index


def _walk(T, seed, drift=0.0):
    rng = np.random.default_rng(seed)
    return np.concatenate([[0.0], np.cumsum(drift + rng.standard_normal(T))])


# ---------------------------------------------------------------------------
# Brute-force regression oracles (independent of the package internals)
# ---------------------------------------------------------------------------

def brute_adf(y, l, m, demeaning, lags=0):
    """Textbook regression route: build the design, solve, t-ratio."""
    z = y - y[0] if demeaning == GLS else y
    dy = np.diff(z)
    t = np.arange(l + 1 + lags, m + 1)
    dep = dy[t - 1]
    cols = [z[t - 1]]
    for j in range(1, lags + 1):
        cols.append(dy[t - j - 1])
    if demeaning == OLS:
        cols.append(np.ones_like(dep))
    X = np.column_stack(cols)
    beta, *_ = np.linalg.lstsq(X, dep, rcond=None)
    resid = dep - X @ beta
    sig2 = resid @ resid / (len(dep) - X.shape[1])
    cov = sig2 * np.linalg.inv(X.T @ X)
    return beta[0] / np.sqrt(cov[0, 0])


def brute_sup(y, n0, demeaning, lags=0, generalized=False):
    T = len(y) - 1
    best = None
    l_values = range(0, T - n0 + 1) if generalized else (0,)
    for l in l_values:
        for m in range(l + n0, T + 1):
            try:
                s = brute_adf(y, l, m, demeaning, lags)
            except np.linalg.LinAlgError:
                continue
            if not np.isfinite(s):
                continue
            if best is None or s > best[0]:
                best = (s, l, m)
    return best


def test_adf_window_matches_brute_force():
    y = np.array([1.0, 1.4, 0.9, 1.7, 2.1, 1.8, 2.5, 3.1, 2.7, 3.4, 4.0])
    for demeaning in (OLS, GLS):
        got = adf_window(y, 0.0, 1.0, demeaning)
        assert got == pytest.approx(brute_adf(y, 0, 10, demeaning), rel=1e-12)
    got = adf_window(y, 0.2, 1.0, GLS)
    assert got == pytest.approx(brute_adf(y, 2, 10, GLS), rel=1e-12)


def test_adf_window_with_lags_matches_brute_force():
    y = _walk(60, 4)
    for demeaning in (OLS, GLS):
        for lags in (1, 2):
            got = adf_window(y, 0.0, 1.0, demeaning, lags=lags)
            assert got == pytest.approx(brute_adf(y, 0, 60, demeaning, lags),
                                        rel=1e-10)


def test_gls_numerator_telescoping_identity():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(50).cumsum()
        yc = y - y[0]
        a, b = sorted(rng.integers(0, 50, size=2))
        if a == b:
            continue
        d = np.diff(yc)[a:b]
        lhs = 2.0 * np.sum(yc[a:b] * d)
        rhs = yc[b] ** 2 - yc[a] ** 2 - np.sum(d * d)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_explosive_deterministic_window_degenerate():
    # Demeaned series 0, 2, 4, 8, ...: on windows excluding t=1 the AR fit is
    # exact in floats, so the residual variance is identically zero.
    T = 19
    y = np.concatenate([[0.0], 2.0 ** np.arange(1, T + 1)])
    with pytest.raises(DegenerateWindowError):
        adf_window(y, 1.0 / T, 1.0, GLS)
    y_noisy = y.copy()
    y_noisy[10] += 0.5
    assert adf_window(y_noisy, 1.0 / T, 1.0, GLS) > 10.0


def test_adf_window_null_variance_mode():
    y = _walk(30, 8)
    yc = y - y[0]
    d = np.diff(yc)
    v = np.mean(d[:20] ** 2)
    expected = np.sum(yc[:20] * d[:20]) / np.sqrt(v * np.sum(yc[:20] ** 2))
    got = adf_window(y, 0.0, 20 / 30, GLS, variance="null")
    assert got == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        adf_window(y, 0.0, 1.0, OLS, variance="null")


def test_sadf_dominates_full_window_and_gsadf_dominates_sadf():
    for seed in range(10):
        y = _walk(80, seed)
        for demeaning in (OLS, GLS):
            s = sadf(y, 0.2, demeaning)
            assert s.statistic >= adf_window(y, 0.0, 1.0, demeaning) - 1e-12
            g = gsadf(y, 0.2, demeaning)
            assert g.statistic >= s.statistic - 1e-12


def test_sup_families_match_brute_force_enumeration():
    rng = np.random.default_rng(99)
    for case in range(12):
        T = int(rng.integers(30, 61))
        y = _walk(T, 1000 + case, drift=0.05 * rng.standard_normal())
        r0 = 0.15
        n0 = floor_index(r0, T)
        for demeaning in (OLS, GLS):
            res = sadf(y, r0, demeaning)
            ref = brute_sup(y, n0, demeaning)
            assert res.statistic == pytest.approx(ref[0], rel=1e-10)
            assert floor_index(res.r2, T) == ref[2]
            res = gsadf(y, r0, demeaning)
            ref = brute_sup(y, n0, demeaning, generalized=True)
            assert res.statistic == pytest.approx(ref[0], rel=1e-10)
            assert (floor_index(res.r1, T), floor_index(res.r2, T)) == ref[1:]


def test_sadf_with_lags_matches_brute_force():
    y = _walk(50, 123)
    res = sadf(y, 0.2, GLS, lags=1)
    ref = brute_sup(y, floor_index(0.2, 50), GLS, lags=1)
    assert res.statistic == pytest.approx(ref[0], rel=1e-10)


def test_sadf_all_windows_degenerate():
    with pytest.raises(DegenerateStatisticError):
        sadf(np.full(40, 2.0), 0.2, GLS)


def test_sadf_skips_degenerate_head():
    # GLS windows are degenerate while the demeaned series is still flat.
    y = np.concatenate([np.full(15, 1.0), 1.0 + _walk(25, 3)])
    res = sadf(y, 0.1, GLS)
    assert np.isfinite(res.statistic)
    assert res.diagnostics["skipped_windows"] > 0


def test_default_r0_formula():
    assert default_r0(200) == pytest.approx(0.01 + 1.8 / np.sqrt(200))


# ---------------------------------------------------------------------------
# Time-transformed statistics
# ---------------------------------------------------------------------------

def _identity_transform(y):
    return TransformedSeries(values=y - y[0],
                             index_map=np.arange(len(y)))


def test_tadf_straight_line_closed_form():
    T = 50
    trans = TransformedSeries(values=np.arange(T + 1, dtype=float),
                              index_map=np.arange(T + 1))
    for r2 in (0.3, 0.6, 1.0):
        m = floor_index(r2, T)
        num = m ** 2 - m
        den = 2.0 * np.sqrt(np.sum(np.arange(m) ** 2))
        assert tadf_window(trans, 1.0, 0.0, r2) == pytest.approx(num / den,
                                                                 rel=1e-12)


def test_tadf_scale_invariance_exact():
    y = _walk(60, 17)
    trans = _identity_transform(y)
    c = 2.0 ** 3
    scaled = TransformedSeries(values=c * trans.values, index_map=trans.index_map)
    for (r1, r2) in ((0.0, 0.5), (0.2, 0.9), (0.0, 1.0)):
        a = tadf_window(trans, 1.3, r1, r2)
        b = tadf_window(scaled, c * c * 1.3, r1, r2)
        assert a == b  # powers of two scale exactly


def test_identity_transform_reduces_to_gls_adf():
    # With the identity deformation and the window mean squared difference as
    # the variance, the transformed statistic equals the null-variance GLS
    # t-ratio via the telescoping identity.
    for seed in range(10):
        y = _walk(40, seed)
        trans = _identity_transform(y)
        d = np.diff(y)
        for (r1, r2) in ((0.0, 1.0), (0.0, 0.5), (0.25, 0.75)):
            l, m = floor_index(r1, 40), floor_index(r2, 40)
            v = np.mean(d[l:m] ** 2)
            got = tadf_window(trans, v, r1, r2)
            ref = adf_window(y, r1, r2, GLS, variance="null")
            assert got == pytest.approx(ref, rel=1e-10)


def test_tadf_window_errors():
    trans = TransformedSeries(values=np.zeros(30), index_map=np.arange(30))
    with pytest.raises(DegenerateWindowError):
        tadf_window(trans, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        tadf_window(_identity_transform(_walk(29, 1)), 1.0, 0.5, 0.5)


def test_stadf_known_profile_deterministic():
    y = _walk(100, 21)
    prof = profile_from_volatility(VolatilitySpec("constant"), 100)
    a = stadf(y, 0.1, profile=prof)
    b = stadf(y, 0.1, profile=prof)
    assert a.statistic == b.statistic
    assert a.diagnostics["omega_bar_sq"] == 1.0


def test_stadf_matches_window_enumeration():
    for seed in range(8):
        y = _walk(60, 300 + seed)
        res = stadf(y, 0.2)
        # rebuild the same transformed series and enumerate windows directly
        from stadf import fit, transform
        prof = estimate_profile(fit(y))
        trans = transform(y, prof)
        n0 = floor_index(0.2, 60)
        best = max((tadf_window(trans, prof.omega_bar_sq, 0.0, m / 60), m)
                   for m in range(n0, 61))
        assert res.statistic == pytest.approx(best[0], rel=1e-10)
        assert floor_index(res.r2, 60) == best[1]


def test_gstadf_matches_window_enumeration():
    y = _walk(45, 77)
    res = gstadf(y, 0.25)
    from stadf import fit, transform
    prof = estimate_profile(fit(y))
    trans = transform(y, prof)
    n0 = floor_index(0.25, 45)
    best = max((tadf_window(trans, prof.omega_bar_sq, l / 45, m / 45), l, m)
               for l in range(0, 45 - n0 + 1) for m in range(l + n0, 46))
    assert res.statistic == pytest.approx(best[0], rel=1e-10)
    assert res.statistic >= stadf(y, 0.25).statistic - 1e-12


def test_stadf_scale_invariant_end_to_end():
    y = 100.0 + _walk(120, 31)
    a = stadf(y, 0.1)
    b = stadf(4.0 * y, 0.1)
    assert a.statistic == b.statistic


def test_stadf_known_close_to_estimated_under_constant_vol():
    diffs = []
    for seed in range(40):
        y = _walk(200, 4000 + seed)
        known = stadf(y, 0.1, profile=profile_from_volatility(
            VolatilitySpec("constant"), 200))
        est = stadf(y, 0.1)
        diffs.append(abs(known.statistic - est.statistic))
    assert np.median(diffs) < 0.5


def test_stadf_median_statistic_monotone_in_delta1():
    from stadf import BubbleSpec, DgpSpec, simulate
    medians = []
    for delta1 in (0.0, 0.05, 0.1):
        stats = []
        for seed in range(80):
            spec = DgpSpec(bubble=BubbleSpec(delta1=delta1, tau1=0.4, tau2=0.6),
                           vol=VolatilitySpec("constant"), length=150,
                           seed=9000 + seed)
            stats.append(stadf(simulate(spec).values).statistic)
        medians.append(np.median(stats))
    assert medians[0] < medians[1] < medians[2]


def test_batch_sadf_matches_single_calls():
    paths = np.stack([_walk(60, 50 + i) for i in range(10)])
    for demeaning in (OLS, GLS):
        batch = sadf_max_batch(paths, 12, demeaning)
        for i in range(10):
            single = sadf(paths[i], 12 / 60, demeaning)
            assert batch[i] == pytest.approx(single.statistic, rel=1e-12)
