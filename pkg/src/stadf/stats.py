"""Subsample ADF statistics, their sup families, and time-transformed versions.

Window bounds are fractions (r1, r2) of the effective sample size T mapped
to integer indices l = floor(r1*T), m = floor(r2*T); the regression sample
is t = l+1..m.  Sup families enumerate windows at one-observation resolution
with minimum width floor(r0*T); degenerate windows are skipped inside a sup
(and counted), while a standalone window call raises.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateStatisticError, DegenerateWindowError, SeriesTooShortError
from .kernel import KernelSpec, fit as kernel_fit
from .series import as_values, floor_index
from .varprofile import TransformedSeries, VarianceProfile, estimate_profile, transform

OLS = "ols"
GLS = "gls"


def default_r0(T: int) -> float:
    """Minimum window fraction 0.01 + 1.8/sqrt(T)."""
    return 0.01 + 1.8 / math.sqrt(T)


@dataclass
class TestResult:
    """Outcome of one sup-family test."""

    family: str
    statistic: float
    r1: float
    r2: float
    demeaning: str
    p_value: Optional[float] = None
    decisions: Optional[dict] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def argmax_window(self) -> tuple:
        return (self.r1, self.r2)


# ---------------------------------------------------------------------------
# Single-window statistic (general lags; independent lstsq route)
# ---------------------------------------------------------------------------

def adf_window(series, r1: float, r2: float, demeaning: str = OLS, lags: int = 0,
               variance: str = "residual") -> float:
    """t-ratio of the lagged level in one subsample regression.

    OLS demeaning regresses dy_t on a constant, y_{t-1} and `lags` lagged
    differences; GLS demeaning drops the constant and uses the initial-value
    demeaned level.  variance="residual" (default) is the usual estimator
    RSS/(n-p); variance="null" (GLS, lags=0 only) imposes the null and uses
    the mean squared difference with no degrees-of-freedom correction.
    """
    if demeaning not in (OLS, GLS):
        raise ValueError(f"demeaning must be '{OLS}' or '{GLS}'")
    if lags < 0:
        raise ValueError("lags must be nonnegative")
    if variance not in ("residual", "null"):
        raise ValueError('variance must be "residual" or "null"')
    if variance == "null" and (demeaning != GLS or lags != 0):
        raise ValueError('variance="null" is defined for GLS demeaning with lags=0')
    values = as_values(series)
    T = len(values) - 1
    l = floor_index(r1, T)
    m = floor_index(r2, T)
    if not (0 <= l < m <= T):
        raise ValueError(f"invalid window [{r1}, {r2}] -> ({l}, {m}] for T={T}")
    n = m - l
    p = (2 if demeaning == OLS else 1) + lags
    if n < max(lags + 3, p + lags + 1):
        raise SeriesTooShortError(
            f"window of {n} observations too short for lags={lags} ({demeaning})"
        )
    y = values if demeaning == OLS else values - values[0]
    dy = np.diff(y)
    t = np.arange(l + 1 + lags, m + 1)
    dep = dy[t - 1]
    cols = [y[t - 1]]
    for j in range(1, lags + 1):
        cols.append(dy[t - j - 1])
    if demeaning == OLS:
        cols.append(np.ones_like(dep))
    X = np.column_stack(cols)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DegenerateWindowError(f"singular regressor matrix on window ({l}, {m}]")
    if variance == "null":
        sig2 = float(np.mean(dep * dep))
        sxx = float(np.dot(cols[0], cols[0]))
        if sig2 <= 0.0 or sxx <= 0.0:
            raise DegenerateWindowError(f"zero variance on window ({l}, {m}]")
        return float(np.dot(cols[0], dep) / math.sqrt(sig2 * sxx))
    beta, _, _, _ = np.linalg.lstsq(X, dep, rcond=None)
    resid = dep - X @ beta
    dof = len(dep) - X.shape[1]
    sig2 = float(resid @ resid) / dof
    if sig2 <= 0.0:
        raise DegenerateWindowError(
            f"zero residual variance on window ({l}, {m}] (perfect fit)"
        )
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(sig2 * xtx_inv[0, 0])
    return float(beta[0] / se)


# ---------------------------------------------------------------------------
# Vectorized lags=0 machinery shared by the sup families
# ---------------------------------------------------------------------------

def _cums(y: np.ndarray, demean_initial: bool):
    """Cumulative sums over t=1..T of the lags=0 regression building blocks."""
    z = y - y[0] if demean_initial else y
    x = z[:-1]
    d = np.diff(z)
    n = np.arange(1, len(d) + 1, dtype=float)
    return {
        "n": n,
        "Sx": np.cumsum(x),
        "Sd": np.cumsum(d),
        "Sxx": np.cumsum(x * x),
        "Sxd": np.cumsum(x * d),
        "Sdd": np.cumsum(d * d),
    }


def _take(c, key, l):
    """Window sums over (l, m] for all m > l, from the cumulative arrays."""
    arr = c[key]
    return arr[l:] - (arr[l - 1] if l > 0 else 0.0)


def _window_stats_from(c, l: int, demeaning: str, ddof_gls: int = 1):
    """t-statistics for windows (l, m], m = l+1..T; NaN marks degenerate ones."""
    n = c["n"][l:] - float(l)
    Sxx = _take(c, "Sxx", l)
    Sxd = _take(c, "Sxd", l)
    Sdd = _take(c, "Sdd", l)
    with np.errstate(divide="ignore", invalid="ignore"):
        if demeaning == GLS:
            sxx, sxd, sdd = Sxx, Sxd, Sdd
            dof = n - ddof_gls
        else:
            Sx = _take(c, "Sx", l)
            Sd = _take(c, "Sd", l)
            sxx = Sxx - Sx * Sx / n
            sxd = Sxd - Sx * Sd / n
            sdd = Sdd - Sd * Sd / n
            dof = n - 2
        bh = sxd / sxx
        rss = sdd - bh * sxd
        sig2 = rss / dof
        stat = sxd / np.sqrt(sig2 * sxx)
        stat = np.where((sxx > 0) & (sig2 > 0) & (dof > 0), stat, np.nan)
    return stat


def _sup_reduce(stats: np.ndarray, offset: int):
    """Max, argmax index (absolute m), and NaN count of a window-stat array."""
    finite = np.isfinite(stats)
    if not np.any(finite):
        return None
    k = int(np.nanargmax(np.where(finite, stats, -np.inf)))
    return float(stats[k]), offset + k, int(np.sum(~finite))


def sadf(series, r0: float = None, demeaning: str = OLS, lags: int = 0) -> TestResult:
    """Sup of forward-expanding window ADF statistics, windows (0, m], m >= floor(r0*T)."""
    values = as_values(series)
    T = len(values) - 1
    if r0 is None:
        r0 = default_r0(T)
    n0 = floor_index(r0, T)
    if n0 < lags + 3:
        raise SeriesTooShortError(
            f"minimum window floor(r0*T)={n0} too short for lags={lags}"
        )
    if lags == 0:
        c = _cums(values, demeaning == GLS)
        stats = _window_stats_from(c, 0, demeaning)[n0 - 1:]
        red = _sup_reduce(stats, n0)
    else:
        slow = _sup_slow(values, T, n0, demeaning, lags, generalized=False)
        red = None if slow is None else (slow[0], slow[2], slow[3])
    if red is None:
        raise DegenerateStatisticError("every window in the SADF grid was degenerate")
    stat, m, skipped = red
    return TestResult(
        family="SADF", statistic=stat, r1=0.0, r2=m / T, demeaning=demeaning,
        diagnostics={"skipped_windows": skipped, "r0": r0, "lags": lags},
    )


def gsadf(series, r0: float = None, demeaning: str = OLS, lags: int = 0) -> TestResult:
    """Sup over all windows (l, m] with m - l >= floor(r0*T)."""
    values = as_values(series)
    T = len(values) - 1
    if r0 is None:
        r0 = default_r0(T)
    n0 = floor_index(r0, T)
    if n0 < lags + 3:
        raise SeriesTooShortError(
            f"minimum window floor(r0*T)={n0} too short for lags={lags}"
        )
    if lags == 0:
        c = _cums(values, demeaning == GLS)
        best, skipped = None, 0
        for l in range(0, T - n0 + 1):
            stats = _window_stats_from(c, l, demeaning)[n0 - 1:]
            red = _sup_reduce(stats, l + n0)
            if red is None:
                skipped += len(stats)
                continue
            s, m, sk = red
            skipped += sk
            if best is None or s > best[0]:
                best = (s, l, m)
    else:
        slow = _sup_slow(values, T, n0, demeaning, lags, generalized=True)
        best = None if slow is None else (slow[0], slow[1], slow[2])
        skipped = 0 if slow is None else slow[3]
    if best is None:
        raise DegenerateStatisticError("every window in the GSADF grid was degenerate")
    stat, l, m = best
    return TestResult(
        family="GSADF", statistic=stat, r1=l / T, r2=m / T, demeaning=demeaning,
        diagnostics={"skipped_windows": skipped, "r0": r0, "lags": lags},
    )


def _sup_slow(values, T, n0, demeaning, lags, generalized):
    """Window enumeration through adf_window for lags > 0.

    Returns (statistic, l, m, skipped) or None when every window degenerates.
    """
    best = None
    skipped = 0
    l_range = range(0, T - n0 + 1) if generalized else (0,)
    for l in l_range:
        for m in range(l + n0, T + 1):
            try:
                s = adf_window(values, l / T, m / T, demeaning, lags)
            except DegenerateWindowError:
                skipped += 1
                continue
            if best is None or s > best[0]:
                best = (s, l, m)
    if best is None:
        return None
    return best[0], best[1], best[2], skipped


# ---------------------------------------------------------------------------
# Time-transformed statistics
# ---------------------------------------------------------------------------

def tadf_window(transformed: TransformedSeries, omega_bar_sq: float,
                r1: float, r2: float) -> float:
    """Time-transformed ADF statistic on the window (floor(r1*T), floor(r2*T)].

    Equals (yt_m^2 - yt_l^2 - w2*(m-l)) / (2*sqrt(w2)*sqrt(sum yt_{t-1}^2)),
    with the average innovation variance w2 fixed once for the whole sample.
    """
    if not (omega_bar_sq > 0):
        raise ValueError("omega_bar_sq must be positive")
    yt = transformed.values
    T = len(yt) - 1
    l = floor_index(r1, T)
    m = floor_index(r2, T)
    if not (0 <= l < m <= T):
        raise ValueError(f"invalid window [{r1}, {r2}] -> ({l}, {m}] for T={T}")
    ssq = float(np.dot(yt[l:m], yt[l:m]))
    if ssq <= 0.0:
        raise DegenerateWindowError(f"zero denominator on window ({l}, {m}]")
    num = yt[m] ** 2 - yt[l] ** 2 - omega_bar_sq * (m - l)
    return float(num / (2.0 * math.sqrt(omega_bar_sq) * math.sqrt(ssq)))


def _tadf_stat_grid(yt: np.ndarray, w2: float, l: int):
    """TADF stats for windows (l, m], m = l+1..T; NaN marks degenerate ones."""
    T = len(yt) - 1
    I = np.cumsum(yt[:-1] * yt[:-1])
    Il = I[l - 1] if l > 0 else 0.0
    m = np.arange(l + 1, T + 1, dtype=float)
    num = yt[l + 1:] ** 2 - yt[l] ** 2 - w2 * (m - l)
    den2 = I[l:] - Il
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = num / (2.0 * math.sqrt(w2) * np.sqrt(den2))
        stat = np.where(den2 > 0, stat, np.nan)
    return stat


def _prepare_transform(values, kernel, grid_size, bandwidth, profile, variance):
    diagnostics = {}
    if profile is None:
        kfit = kernel_fit(values, kernel, grid_size=grid_size, bandwidth=bandwidth)
        profile = estimate_profile(kfit, variance=variance)
        diagnostics.update(
            bandwidth=kfit.bandwidth,
            psi=kfit.psi,
            truncated_count=kfit.truncated_count,
            degenerate_kernel_windows=kfit.degenerate_windows,
        )
    diagnostics["omega_bar_sq"] = profile.omega_bar_sq
    return transform(values, profile), profile, diagnostics


def stadf(series, r0: float = None, *, kernel: KernelSpec = KernelSpec(),
          grid_size: int = 15, bandwidth: float = None,
          profile: VarianceProfile = None, variance: str = "untruncated") -> TestResult:
    """Sup time-transformed ADF statistic over forward-expanding windows.

    The feasible pipeline demeans by the initial value, fits the local AR
    deviation, estimates the variance profile from truncated residuals, time-
    deforms the series, and takes the sup of the transformed statistic.  Pass
    a known `profile` to bypass estimation.
    """
    values = as_values(series)
    T = len(values) - 1
    if T < 20:
        raise SeriesTooShortError(f"stadf needs T >= 20, got T={T}")
    if r0 is None:
        r0 = default_r0(T)
    n0 = floor_index(r0, T)
    if n0 < 1:
        raise ValueError("floor(r0*T) must be at least 1")
    trans, profile, diagnostics = _prepare_transform(
        values, kernel, grid_size, bandwidth, profile, variance)
    stats = _tadf_stat_grid(trans.values, profile.omega_bar_sq, 0)[n0 - 1:]
    red = _sup_reduce(stats, n0)
    if red is None:
        raise DegenerateStatisticError("every window in the STADF grid was degenerate")
    stat, m, skipped = red
    diagnostics.update(skipped_windows=skipped, r0=r0)
    return TestResult(family="STADF", statistic=stat, r1=0.0, r2=m / T,
                      demeaning=GLS, diagnostics=diagnostics)


def gstadf(series, r0: float = None, *, kernel: KernelSpec = KernelSpec(),
           grid_size: int = 15, bandwidth: float = None,
           profile: VarianceProfile = None, variance: str = "untruncated") -> TestResult:
    """Sup time-transformed ADF statistic over all windows of width >= floor(r0*T)."""
    values = as_values(series)
    T = len(values) - 1
    if T < 20:
        raise SeriesTooShortError(f"gstadf needs T >= 20, got T={T}")
    if r0 is None:
        r0 = default_r0(T)
    n0 = floor_index(r0, T)
    if n0 < 1:
        raise ValueError("floor(r0*T) must be at least 1")
    trans, profile, diagnostics = _prepare_transform(
        values, kernel, grid_size, bandwidth, profile, variance)
    best, skipped = None, 0
    for l in range(0, T - n0 + 1):
        stats = _tadf_stat_grid(trans.values, profile.omega_bar_sq, l)[n0 - 1:]
        red = _sup_reduce(stats, l + n0)
        if red is None:
            skipped += len(stats)
            continue
        s, m, sk = red
        skipped += sk
        if best is None or s > best[0]:
            best = (s, l, m)
    if best is None:
        raise DegenerateStatisticError("every window in the GSTADF grid was degenerate")
    stat, l, m = best
    diagnostics.update(skipped_windows=skipped, r0=r0)
    return TestResult(family="GSTADF", statistic=stat, r1=l / T, r2=m / T,
                      demeaning=GLS, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Batched SADF maxima (bootstrap and null-distribution workloads)
# ---------------------------------------------------------------------------

def sadf_max_batch(Y: np.ndarray, n0: int, demeaning: str, cols: np.ndarray = None):
    """Row-wise SADF maxima of paths Y (B, T+1), windows (0, m].

    `cols` optionally restricts the window ends to specific m values (used by
    the null-distribution grids); by default every m >= n0 enters.  Rows with
    no valid window yield NaN.
    """
    Y = np.asarray(Y, dtype=float)
    if demeaning == GLS:
        Z = Y - Y[:, :1]
    else:
        Z = Y
    x = Z[:, :-1]
    d = np.diff(Z, axis=1)
    n = np.arange(1, Y.shape[1], dtype=float)
    Sxx = np.cumsum(x * x, axis=1)
    Sxd = np.cumsum(x * d, axis=1)
    Sdd = np.cumsum(d * d, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if demeaning == GLS:
            sxx, sxd, sdd = Sxx, Sxd, Sdd
            dof = n - 1
        else:
            Sx = np.cumsum(x, axis=1)
            Sd = np.cumsum(d, axis=1)
            sxx = Sxx - Sx * Sx / n
            sxd = Sxd - Sx * Sd / n
            sdd = Sdd - Sd * Sd / n
            dof = n - 2
        bh = sxd / sxx
        rss = sdd - bh * sxd
        sig2 = rss / dof
        stat = sxd / np.sqrt(sig2 * sxx)
        stat = np.where((sxx > 0) & (sig2 > 0) & (dof > 0), stat, np.nan)
    if cols is not None:
        stat = stat[:, cols - 1]
    else:
        stat = stat[:, n0 - 1:]
    with np.errstate(all="ignore"):
        out = np.full(stat.shape[0], np.nan)
        finite = np.any(np.isfinite(stat), axis=1)
        out[finite] = np.nanmax(stat[finite], axis=1)
    return out
