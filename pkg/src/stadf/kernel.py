"""Kernel local least squares for the time-varying AR(1) deviation.

For the initial-value-demeaned series ycheck_i = y_i - y_0, the estimate at
each t = 1..T is

    delta_hat_t = sum_i G_h((i-t)/T) ycheck_{i-1} d ycheck_i
                / sum_i G_h((i-t)/T) ycheck_{i-1}^2,

with G_h(s) = (1/h) G(s/h) and G supported on [-1, 1].  The bandwidth is
chosen by leave-one-out cross-validation on a log-spaced grid, and residuals
are truncated at psi = sigma_bar * T^(1/7) where sigma_bar is the largest
rolling-window standard deviation of the raw residuals.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateThresholdError
from .series import as_values, require_length


class KernelKind(str, Enum):
    UNIFORM = "uniform"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel on [-1, 1]: uniform, or the (unnormalized) truncated Gaussian."""

    kind: KernelKind = KernelKind.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))

    def weights(self, T: int, h: float) -> np.ndarray:
        """Weights G_h(d/T) for integer offsets d = -b..b, b = min(floor(T*h), T)."""
        if h <= 0:
            raise ValueError("bandwidth must be positive")
        b = min(int(math.floor(T * h)), T)
        d = np.arange(-b, b + 1, dtype=float)
        u = d / (T * h)
        if self.kind is KernelKind.UNIFORM:
            g = np.ones_like(u)
        else:
            g = np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
        return g / h

    def weight_at_zero(self, h: float) -> float:
        g0 = 1.0 if self.kind is KernelKind.UNIFORM else 1.0 / math.sqrt(2.0 * math.pi)
        return g0 / h


@dataclass
class LocalFitResult:
    """Everything produced by the local fit, in estimation order."""

    delta_hat: np.ndarray
    residuals: np.ndarray
    truncated_residuals: np.ndarray
    bandwidth: float
    psi: float
    kernel: KernelSpec = field(default_factory=KernelSpec)
    degenerate_windows: int = 0
    psi_fallback: bool = False

    @property
    def truncated_count(self) -> int:
        return int(np.sum((self.truncated_residuals == 0.0) & (self.residuals != 0.0)))


def _lag_and_diff(values: np.ndarray):
    return values[:-1], np.diff(values)  # x_t = y_{t-1}, d_t = dy_t, t = 1..T


def _window_sums(x: np.ndarray, d: np.ndarray, w: np.ndarray):
    """num_t = sum_i w_{i-t} x_i d_i and den_t likewise for x_i^2, t = 1..T."""
    b = (len(w) - 1) // 2
    num = np.convolve(x * d, w)[b: b + len(x)]
    den = np.convolve(x * x, w)[b: b + len(x)]
    return num, den


def local_delta(series, kernel: KernelSpec = KernelSpec(), h: float = None) -> np.ndarray:
    """Local least-squares estimates delta_hat_t, t = 1..T.

    Regresses the first differences on the lagged levels of the series as
    given (through the origin); the estimation pipeline passes the
    initial-value-demeaned series.  Windows whose denominator is zero (all
    in-window lagged values zero) yield delta_hat_t = 0; `fit` reports their
    count.
    """
    values = as_values(series)
    require_length(values, 4, "local_delta")
    if h is None:
        raise ValueError("bandwidth h is required; use select_bandwidth or fit")
    if not (0 < h):
        raise ValueError("bandwidth must be positive")
    T = len(values) - 1
    x, d = _lag_and_diff(values)
    w = kernel.weights(T, h)
    num, den = _window_sums(x, d, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(den > 0, num / den, 0.0)
    return delta


def cross_validation_score(series, kernel: KernelSpec, h: float) -> float:
    """Leave-one-out criterion sum_t (d_t - delta_hat_t^(-t) x_t)^2.

    delta_hat_t^(-t) removes the i = t summand from both sums of the local
    estimator; a window left empty by the removal predicts zero.
    """
    values = as_values(series)
    T = len(values) - 1
    x, d = _lag_and_diff(values)
    w = kernel.weights(T, h)
    num, den = _window_sums(x, d, w)
    w0 = kernel.weight_at_zero(h)
    num_l = num - w0 * x * d
    den_l = den - w0 * x * x
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_l = np.where(den_l > 0, num_l / den_l, 0.0)
    resid = d - delta_l * x
    return float(np.dot(resid, resid))


def select_bandwidth(series, kernel: KernelSpec = KernelSpec(), grid_size: int = 15,
                     bounds: tuple = (-0.5, -0.3)) -> float:
    """Leave-one-out cross-validated bandwidth on a log-spaced grid.

    The grid spans [T**bounds[0], T**bounds[1]]; ties break toward the
    smallest h.  If every candidate is degenerate the largest grid value is
    returned with a warning.
    """
    values = as_values(series)
    require_length(values, 11, "select_bandwidth")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    T = len(values) - 1
    grid = np.geomspace(T ** bounds[0], T ** bounds[1], grid_size)
    scores = np.full(grid_size, np.inf)
    for k, h in enumerate(grid):
        score = cross_validation_score(values, kernel, h)
        if np.isfinite(score):
            scores[k] = score
    if not np.any(np.isfinite(scores)):
        warnings.warn("all bandwidth candidates degenerate; using largest grid value")
        return float(grid[-1])
    return float(grid[int(np.argmin(scores))])


def _rolling_stds(resid: np.ndarray, width: int) -> np.ndarray:
    """Sample std (ddof=1) over windows resid[s-1 : s-1+width], s = 1..len-width+1."""
    n = len(resid)
    c1 = np.concatenate([[0.0], np.cumsum(resid)])
    c2 = np.concatenate([[0.0], np.cumsum(resid * resid)])
    s1 = c1[width:] - c1[:n - width + 1]
    s2 = c2[width:] - c2[:n - width + 1]
    var = (s2 - s1 * s1 / width) / (width - 1)
    return np.sqrt(np.maximum(var, 0.0))


def truncation_threshold(series, residuals, exponent: float = 1.0 / 7.0) -> float:
    """psi = sigma_bar * T**exponent from rolling residual standard deviations.

    sigma_bar is the maximum over start points s = 1..floor(0.9T) of the
    sample standard deviation of residuals t = s..s+floor(0.1T) (inclusive).
    For T < 20 a single whole-sample window is used instead (with a warning).
    """
    values = as_values(series)
    resid = np.asarray(residuals, dtype=float)
    T = len(values) - 1
    if len(resid) != T:
        raise ValueError(f"expected {T} residuals, got {len(resid)}")
    if T < 20:
        warnings.warn(f"T={T} < 20: truncation threshold falls back to the "
                      "whole-sample residual standard deviation")
        sbar = float(np.std(resid, ddof=1))
    else:
        width = int(math.floor(0.1 * T)) + 1
        smax = int(math.floor(0.9 * T))
        sds = _rolling_stds(resid, width)[:smax]
        sbar = float(sds.max())
    if sbar == 0.0 and np.any(resid != 0.0):
        raise DegenerateThresholdError(
            "all rolling residual standard deviations are zero while residuals "
            "are not; truncation threshold undefined"
        )
    return sbar * T ** exponent


def fit(series, kernel: KernelSpec = KernelSpec(), grid_size: int = 15,
        bandwidth: float = None, cv_bounds: tuple = (-0.5, -0.3),
        psi_exponent: float = 1.0 / 7.0) -> LocalFitResult:
    """Demeaning, bandwidth selection, local fit, residuals, and truncation.

    The input is demeaned by its initial value before estimation.  Pass
    `bandwidth` to skip cross-validation.
    """
    values = as_values(series)
    require_length(values, 11, "fit")
    T = len(values) - 1
    yc = values - values[0]
    h = bandwidth if bandwidth is not None else select_bandwidth(
        yc, kernel, grid_size, cv_bounds)
    x, d = _lag_and_diff(yc)
    w = kernel.weights(T, h)
    num, den = _window_sums(x, d, w)
    degenerate = int(np.sum(den <= 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(den > 0, num / den, 0.0)
    resid = d - delta * x
    with warnings.catch_warnings():
        if T < 20:
            warnings.simplefilter("ignore")
        psi = truncation_threshold(yc, resid, psi_exponent)
    truncated = np.where(np.abs(resid) < psi, resid, 0.0)
    return LocalFitResult(
        delta_hat=delta,
        residuals=resid,
        truncated_residuals=truncated,
        bandwidth=float(h),
        psi=float(psi),
        kernel=kernel,
        degenerate_windows=degenerate,
        psi_fallback=T < 20,
    )
