"""Variance profile estimation, inversion, and the time deformation.

The estimated profile is the normalized cumulative sum of squared truncated
residuals with linear interpolation between the knots s = t/T,

    eta_hat(s) = [ sum_{t<=floor(sT)} e*_t^2 + (sT - floor(sT)) e*_{floor(sT)+1}^2 ]
               / sum_t e*_t^2 .

Its generalized inverse g_hat(s) = inf{u : eta_hat(u) >= s} drives the time
deformation y_tilde_t = y_{floor(g_hat(t/T) T)} - y_0, which equalizes the
variance of the increments.
"""

from dataclasses import dataclass

import numpy as np

from .dgp import VolatilitySpec, VolatilityKind, cumulative_squared_volatility
from .errors import DegenerateProfileError
from .kernel import LocalFitResult
from .series import as_values


@dataclass(frozen=True)
class VarianceProfile:
    """Piecewise-linear nondecreasing profile with eta(0)=0, eta(1)=1.

    Knots are stored in index units: knots_x in [0, T] against knots_eta in
    [0, 1].  omega_bar_sq is the average innovation variance estimate that
    accompanies the profile.
    """

    knots_x: np.ndarray
    knots_eta: np.ndarray
    omega_bar_sq: float
    source_length: int

    def __post_init__(self):
        kx = np.asarray(self.knots_x, dtype=float)
        ke = np.asarray(self.knots_eta, dtype=float)
        object.__setattr__(self, "knots_x", kx)
        object.__setattr__(self, "knots_eta", ke)
        if kx.shape != ke.shape or kx.ndim != 1 or len(kx) < 2:
            raise ValueError("knots_x and knots_eta must be 1-D of equal length >= 2")
        if kx[0] != 0.0 or kx[-1] != self.source_length:
            raise ValueError("knots_x must span [0, T]")
        if ke[0] != 0.0 or ke[-1] != 1.0:
            raise ValueError("knots_eta must start at 0 and end at 1")
        if np.any(np.diff(kx) < 0) or np.any(np.diff(ke) < 0):
            raise ValueError("profile knots must be nondecreasing")
        if not (self.omega_bar_sq > 0):
            raise ValueError("omega_bar_sq must be positive")

    @property
    def T(self) -> int:
        return self.source_length

    def eta(self, s):
        """eta_hat(s) for scalar or array s in [0, 1] (linear interpolation)."""
        s = np.asarray(s, dtype=float)
        out = np.interp(s * self.source_length, self.knots_x, self.knots_eta)
        return out if out.ndim else float(out)

    def inverse_scaled(self, s: float) -> float:
        """inf{x in [0, T] : eta_hat(x/T) >= s}, in index units.

        Flat segments at height s invert to their left edge.  A target
        within relative 1e-9 of a knot height snaps to the knot position, so
        that the homoskedastic profile inverts to the identity exactly
        despite rounding in the cumulative sums.
        """
        if not (0.0 <= s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        ke = self.knots_eta
        kx = self.knots_x
        j = int(np.searchsorted(ke, s, side="left"))
        if j == 0:
            return float(kx[0])
        if ke[j] == s:
            return float(kx[j])
        theta = (s - ke[j - 1]) / (ke[j] - ke[j - 1])
        if theta > 1.0 - 1e-9:
            return float(kx[j])
        return float(kx[j - 1] + theta * (kx[j] - kx[j - 1]))

    def inverse(self, s: float) -> float:
        """g_hat(s) = inf{u : eta_hat(u) >= s} as a fraction of [0, 1]."""
        return self.inverse_scaled(s) / self.source_length


def estimate_profile(fit: LocalFitResult, variance: str = "untruncated") -> VarianceProfile:
    """Profile from a local fit's truncated residuals.

    variance selects the average-innovation-variance estimate:
      - "untruncated" (default): (1/T) sum e_t^2 over the raw residuals;
      - "truncated": (1/T) sum e*_t^2 over the truncated residuals.
    The profile itself always uses the truncated residuals.
    """
    if variance not in ("untruncated", "truncated"):
        raise ValueError('variance must be "untruncated" or "truncated"')
    sq = fit.truncated_residuals.astype(float) ** 2
    T = len(sq)
    cums = np.cumsum(sq)
    total = cums[-1]
    if total <= 0.0:
        raise DegenerateProfileError("all truncated squared residuals are zero")
    if variance == "truncated":
        omega_bar_sq = total / T
    else:
        omega_bar_sq = float(np.mean(fit.residuals.astype(float) ** 2))
    knots_eta = np.concatenate([[0.0], cums]) / total
    knots_eta[-1] = 1.0
    knots_x = np.arange(T + 1, dtype=float)
    return VarianceProfile(knots_x, knots_eta, float(omega_bar_sq), T)


def inverse_profile(profile: VarianceProfile, s: float) -> float:
    """g_hat(s) as a fraction; see VarianceProfile.inverse."""
    return profile.inverse(s)


def profile_from_volatility(vol: VolatilitySpec, T: int) -> VarianceProfile:
    """Exact profile of a volatility specification (known-profile mode).

    Knots sit at t/T plus the spec's break dates, with eta computed from the
    closed-form cumulative squared volatility; omega_bar_sq is the true
    average innovation variance.  The single- and double-shift profiles are
    exactly piecewise linear; smooth kinds are interpolated between knots.
    """
    if T < 1:
        raise ValueError("T must be positive")
    xs = set(range(T + 1))
    breaks = []
    if vol.kind is VolatilityKind.SINGLE_SHIFT:
        breaks = [vol.tau_sigma * T]
    elif vol.kind is VolatilityKind.DOUBLE_SHIFT:
        breaks = [0.4 * T, 0.6 * T]
    knots_x = np.array(sorted(xs.union(b for b in breaks if 0.0 < b < T)), dtype=float)
    cum = cumulative_squared_volatility(vol, knots_x / T)
    total = cumulative_squared_volatility(vol, 1.0)
    knots_eta = np.asarray(cum, dtype=float) / total
    knots_eta[0] = 0.0
    knots_eta[-1] = 1.0
    return VarianceProfile(knots_x, knots_eta, float(total), T)


@dataclass(frozen=True)
class TransformedSeries:
    """Time-deformed series y_tilde_0..y_tilde_T plus the source indices."""

    values: np.ndarray
    index_map: np.ndarray

    @property
    def T(self) -> int:
        return len(self.values) - 1


def transform(series, profile: VarianceProfile) -> TransformedSeries:
    """y_tilde_t = y_{floor(g_hat(t/T) T)} - y_0, t = 0..T.

    Requires the profile to have been built for the same sample size.  When
    the profile is flat at its right end (trailing zeroed residuals), the inf
    rule maps t = T to the left edge of the flat segment.
    """
    values = as_values(series)
    T = len(values) - 1
    if profile.source_length != T:
        raise ValueError(
            f"profile was built for T={profile.source_length}, series has T={T}"
        )
    idx = np.empty(T + 1, dtype=int)
    for t in range(T + 1):
        idx[t] = int(np.floor(profile.inverse_scaled(t / T)))
    idx = np.clip(idx, 0, T)
    return TransformedSeries(values=values[idx] - values[0], index_map=idx)
