"""Null distributions of the sup statistics, and the wild-bootstrap comparator.

GLS families simulate the homoskedastic limit functional

    [W(r2)^2 - W(r1)^2 - (r2 - r1)] / (2 sqrt(int_{r1}^{r2} W^2))

on an N-step Brownian path, taking the sup over a window grid of resolution
`window_grid` (endpoints floor(j*N/M)); the default M = 300 reproduces the
published sup critical values for the initial-value-demeaned test (a fully
fine grid converges to larger quantiles).  OLS families apply the
finite-sample SADF/GSADF machinery to simulated standard random walks of
length N.  Draws are cached on disk as a flat little-endian float64 array
behind a small header.
"""

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import as_values
from .stats import OLS, TestResult, sadf, sadf_max_batch

SADF_GLS = "sadf_gls"
GSADF_GLS = "gsadf_gls"
SADF_OLS = "sadf_ols"
GSADF_OLS = "gsadf_ols"
FAMILIES = (SADF_GLS, GSADF_GLS, SADF_OLS, GSADF_OLS)

CACHE_ENV = "STADF_CACHE_DIR"
_MAGIC = b"STADFND1"
_BATCH = 4096


@dataclass
class NullDistribution:
    """Sorted simulated draws of one sup-family null distribution."""

    family: str
    r0: float
    draws: np.ndarray
    steps: int
    replications: int
    window_grid: int
    seed: int

    def __post_init__(self):
        self.draws = np.sort(np.asarray(self.draws, dtype=float))

    def quantile(self, q) -> float:
        return float(np.quantile(self.draws, q))

    def critical_value(self, level: float) -> float:
        """Right-tail critical value at significance `level`."""
        if not (0.0 < level < 1.0):
            raise ValueError("level must lie in (0, 1)")
        return self.quantile(1.0 - level)

    def p_value(self, statistic: float) -> float:
        """Right-tail empirical p-value #{draws >= statistic} / R."""
        idx = np.searchsorted(self.draws, statistic, side="left")
        return float((len(self.draws) - idx) / len(self.draws))


def p_value(dist: NullDistribution, statistic: float) -> float:
    return dist.p_value(statistic)


def _grid_points(steps: int, window_grid: int):
    """Grid resolution M and the path index of each grid point j = 0..M."""
    M = min(window_grid, steps)
    return M, (np.arange(0, M + 1) * steps) // M


def _window_columns(steps: int, r0: float, window_grid: int) -> np.ndarray:
    """Window endpoints floor(j*N/M) for grid points j = floor(r0*M)..M."""
    M, points = _grid_points(steps, window_grid)
    j0 = max(int(math.floor(r0 * M)), 1)
    return np.unique(points[j0:])


def _simulate_gls(family, r0, steps, replications, seed, window_grid):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    M, points = _grid_points(steps, window_grid)
    j0 = max(int(math.floor(r0 * M)), 1)
    out = np.empty(replications)
    done = 0
    while done < replications:
        b = min(_BATCH, replications - done)
        z = rng.standard_normal((b, steps)) / math.sqrt(steps)
        W = np.cumsum(z, axis=1)
        # W2[:, k] = W_k^2 and I[:, k] = sum_{j=1..k} W_{j-1}^2, k = 0..N
        W2 = np.concatenate([np.zeros((b, 1)), W * W], axis=1)
        I = np.concatenate([np.zeros((b, 1)), np.cumsum(W2[:, :-1], axis=1)], axis=1)
        if family == SADF_GLS:
            ends = points[j0:]
            with np.errstate(divide="ignore", invalid="ignore"):
                stat = (W2[:, ends] - ends / steps) / (2.0 * np.sqrt(I[:, ends] / steps))
            out[done:done + b] = np.nanmax(stat, axis=1)
        else:
            best = np.full(b, -np.inf)
            for i in range(0, M - j0 + 1):
                l = points[i]
                ends = points[i + j0:]
                num = W2[:, ends] - W2[:, l:l + 1] - (ends - l) / steps
                den2 = I[:, ends] - I[:, l:l + 1]
                with np.errstate(divide="ignore", invalid="ignore"):
                    stat = num / (2.0 * np.sqrt(den2 / steps))
                    stat = np.where(den2 > 0, stat, -np.inf)
                best = np.maximum(best, stat.max(axis=1))
            out[done:done + b] = best
        done += b
    return out


def _simulate_ols(family, r0, steps, replications, seed, window_grid):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = np.empty(replications)
    done = 0
    if family == SADF_OLS:
        n0 = max(int(math.floor(r0 * steps)), 3)
        while done < replications:
            b = min(_BATCH // 2, replications - done)
            e = rng.standard_normal((b, steps))
            Y = np.concatenate([np.zeros((b, 1)), np.cumsum(e, axis=1)], axis=1)
            out[done:done + b] = sadf_max_batch(Y, n0, OLS)
            done += b
        return out
    # GSADF_OLS: windows restricted to the M-resolution grid to bound cost.
    M, points = _grid_points(steps, window_grid)
    j0 = max(int(math.floor(r0 * M)), 1)
    while done < replications:
        b = min(1024, replications - done)
        e = rng.standard_normal((b, steps))
        y = np.cumsum(e, axis=1)
        x = np.concatenate([np.zeros((b, 1)), y[:, :-1]], axis=1)
        # S*[:, k] holds the sum over t = 1..k; column 0 is the empty sum.
        cum = {}
        for key, arr in (("x", x), ("d", e), ("xx", x * x), ("xd", x * e), ("dd", e * e)):
            cum[key] = np.concatenate([np.zeros((b, 1)), np.cumsum(arr, axis=1)], axis=1)
        best = np.full(b, -np.inf)
        for i in range(0, M - j0 + 1):
            l = points[i]
            ends = points[i + j0:]
            n = (ends - l).astype(float)

            def win(key, l=l, ends=ends):
                return cum[key][:, ends] - cum[key][:, l:l + 1]

            with np.errstate(divide="ignore", invalid="ignore"):
                sxx = win("xx") - win("x") ** 2 / n
                sxd = win("xd") - win("x") * win("d") / n
                sdd = win("dd") - win("d") ** 2 / n
                bh = sxd / sxx
                rss = sdd - bh * sxd
                sig2 = rss / (n - 2)
                stat = sxd / np.sqrt(sig2 * sxx)
                stat = np.where((sxx > 0) & (sig2 > 0), stat, -np.inf)
            best = np.maximum(best, stat.max(axis=1))
        out[done:done + b] = best
        done += b
    return out


def simulate_null(family: str, r0: float, steps: int = 2000,
                  replications: int = 100000, seed: int = 783201,
                  window_grid: int = 300) -> NullDistribution:
    """Simulate a sup-family null distribution.

    Results depend only on (family, r0, steps, replications, seed,
    window_grid) and are bit-reproducible.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if steps < 500:
        raise ValueError("steps must be at least 500")
    if replications < 1000:
        raise ValueError("replications must be at least 1000")
    if not (0.0 < r0 < 1.0):
        raise ValueError("r0 must lie in (0, 1)")
    if family in (SADF_GLS, GSADF_GLS):
        draws = _simulate_gls(family, r0, steps, replications, seed, window_grid)
    else:
        draws = _simulate_ols(family, r0, steps, replications, seed, window_grid)
    return NullDistribution(family=family, r0=r0, draws=draws, steps=steps,
                            replications=replications, window_grid=window_grid,
                            seed=seed)


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------

def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "stadf"


def _cache_name(family, r0, steps, replications, seed, window_grid) -> str:
    return f"{family}_r0{r0:.6g}_N{steps}_M{window_grid}_R{replications}_s{seed}.nulldist"


def save_distribution(path, dist: NullDistribution) -> None:
    """Header (magic, family, r0, N, M, R, seed) + little-endian float64 draws."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fam = dist.family.encode()
    header = _MAGIC + struct.pack(
        "<B16sdIIIQ", len(fam), fam.ljust(16, b"\0"), dist.r0, dist.steps,
        dist.window_grid, dist.replications, dist.seed)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(dist.draws.astype("<f8").tobytes())
    os.replace(tmp, path)


def load_distribution(path) -> NullDistribution:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path} is not a null-distribution cache file")
        raw = fh.read(struct.calcsize("<B16sdIIIQ"))
        nfam, fam, r0, steps, window_grid, replications, seed = struct.unpack(
            "<B16sdIIIQ", raw)
        draws = np.frombuffer(fh.read(), dtype="<f8")
    if len(draws) != replications:
        raise ValueError(f"{path}: expected {replications} draws, found {len(draws)}")
    return NullDistribution(family=fam[:nfam].decode(), r0=r0, draws=draws.copy(),
                            steps=steps, replications=replications,
                            window_grid=window_grid, seed=seed)


def get_null_distribution(family: str, r0: float, steps: int = 2000,
                          replications: int = 100000, seed: int = 783201,
                          window_grid: int = 300, cache_dir=None,
                          force: bool = False) -> NullDistribution:
    """Load from cache or simulate and cache.  `force` re-simulates."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache_dir / _cache_name(family, r0, steps, replications, seed, window_grid)
    if path.exists() and not force:
        dist = load_distribution(path)
        if (dist.family == family and dist.steps == steps
                and dist.replications == replications and dist.seed == seed
                and dist.window_grid == window_grid
                and abs(dist.r0 - r0) < 1e-12):
            return dist
    dist = simulate_null(family, r0, steps, replications, seed, window_grid)
    save_distribution(path, dist)
    return dist


# ---------------------------------------------------------------------------
# Wild bootstrap
# ---------------------------------------------------------------------------

@dataclass
class BootstrapResult:
    """Observed statistic, bootstrap draws, and the +1-corrected p-value."""

    observed: float
    bootstrap_draws: np.ndarray
    p_value: float
    degenerate: bool = False
    result: TestResult = None


def wild_bootstrap_sadf(series, r0: float = None, B: int = 199, seed: int = 0,
                        demeaning: str = OLS, lags: int = 0) -> BootstrapResult:
    """Wild-bootstrap SADF p-value.

    Bootstrap paths cumulate w_t * dy_t with w_t i.i.d. standard normal; each
    replicate recomputes the sup statistic, so the cost is (B+1) SADF
    evaluations.  A constant input (dy identically zero) is degenerate and
    reports p = 1.
    """
    if B < 99:
        raise ValueError("B must be at least 99")
    values = as_values(series)
    T = len(values) - 1
    if r0 is None:
        r0 = 0.01 + 1.8 / math.sqrt(T)
    dy = np.diff(values)
    if np.all(dy == 0.0):
        return BootstrapResult(observed=float("nan"), bootstrap_draws=np.full(B, np.nan),
                               p_value=1.0, degenerate=True)
    observed = sadf(values, r0, demeaning, lags)
    n0 = max(int(math.floor(r0 * T)), lags + 3)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    draws = np.empty(B)
    for b in range(B):
        w = rng.standard_normal(T)
        path = np.concatenate([[0.0], np.cumsum(w * dy)])
        draws[b] = sadf_max_batch(path[None, :], n0, demeaning)[0]
    finite = np.isfinite(draws)
    n_ge = int(np.sum(draws[finite] >= observed.statistic))
    pval = (1.0 + n_ge) / (B + 1.0)
    return BootstrapResult(observed=observed.statistic, bootstrap_draws=draws,
                           p_value=pval, degenerate=False, result=observed)
