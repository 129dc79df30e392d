"""Synthetic bubble processes under deterministic time-varying volatility.

The generating process is a unit-root recursion with one optional explosive
regime and a subsequent collapsing regime,

    y_t = mu + u_t,
    u_t = u_{t-1} + eps_t                 t <= floor(tau1*T)
        = (1+delta1) u_{t-1} + eps_t      floor(tau1*T) < t <= floor(tau2*T)
        = (1-delta2) u_{t-1} + eps_t      floor(tau2*T) < t <= floor(tau3*T)
        = u_{t-1} + eps_t                 t >  floor(tau3*T)

with eps_t = omega(t/T) * e_t, e_t i.i.d. standard normal and u_0 = e_0.
"""

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import InvalidSpecError
from .series import TimeSeries, floor_index


class VolatilityKind(str, Enum):
    CONSTANT = "constant"
    SINGLE_SHIFT = "single_shift"
    DOUBLE_SHIFT = "double_shift"
    LOGISTIC = "logistic"
    TRENDING = "trending"


@dataclass(frozen=True)
class VolatilitySpec:
    """Deterministic volatility path omega(s), s in [0, 1].

    kind selects the functional form; sigma0/sigma1 are the two volatility
    levels, tau_sigma the break date (single shift only).
    """

    kind: VolatilityKind = VolatilityKind.CONSTANT
    sigma0: float = 1.0
    sigma1: float = 1.0
    tau_sigma: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", VolatilityKind(self.kind))
        if not (self.sigma0 > 0):
            raise InvalidSpecError(f"sigma0 must be positive, got {self.sigma0}")
        if self.kind is not VolatilityKind.CONSTANT and not (self.sigma1 > 0):
            raise InvalidSpecError(f"sigma1 must be positive, got {self.sigma1}")
        if self.kind is VolatilityKind.SINGLE_SHIFT and not (0.0 <= self.tau_sigma <= 1.0):
            raise InvalidSpecError(f"tau_sigma must lie in [0,1], got {self.tau_sigma}")

    @property
    def ratio(self) -> float:
        """sigma1 / sigma0 (1 for constant volatility)."""
        if self.kind is VolatilityKind.CONSTANT:
            return 1.0
        return self.sigma1 / self.sigma0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VolatilitySpec":
        known = {"kind", "sigma0", "sigma1", "tau_sigma"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpecError(f"unknown volatility keys: {sorted(unknown)}")
        return cls(**d)


def volatility_at(vol: VolatilitySpec, s):
    """Evaluate omega(s) for scalar or array s in [0, 1]."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("s must lie in [0, 1]")
    d = vol.sigma1 - vol.sigma0
    if vol.kind is VolatilityKind.CONSTANT:
        out = np.full_like(s, vol.sigma0)
    elif vol.kind is VolatilityKind.SINGLE_SHIFT:
        out = vol.sigma0 + d * (s > vol.tau_sigma)
    elif vol.kind is VolatilityKind.DOUBLE_SHIFT:
        out = vol.sigma0 + d * ((s > 0.4) & (s <= 0.6))
    elif vol.kind is VolatilityKind.LOGISTIC:
        out = vol.sigma0 + d / (1.0 + np.exp(-50.0 * (s - 0.5)))
    elif vol.kind is VolatilityKind.TRENDING:
        out = vol.sigma0 + d * s
    else:  # pragma: no cover
        raise InvalidSpecError(f"unknown volatility kind {vol.kind}")
    return out if out.ndim else float(out)


def _softplus(x):
    return np.logaddexp(0.0, x)


def cumulative_squared_volatility(vol: VolatilitySpec, s):
    """Closed-form integral of omega(r)^2 over [0, s].

    Exact for all kinds; the logistic form uses the analytic antiderivatives
    of the logistic function and its square.
    """
    s = np.asarray(s, dtype=float)
    a, b = vol.sigma0, vol.sigma1
    d = b - a
    if vol.kind is VolatilityKind.CONSTANT:
        out = a * a * s
    elif vol.kind is VolatilityKind.SINGLE_SHIFT:
        t = vol.tau_sigma
        out = a * a * np.minimum(s, t) + b * b * np.maximum(s - t, 0.0)
    elif vol.kind is VolatilityKind.DOUBLE_SHIFT:
        inside = np.maximum(np.minimum(s, 0.6) - 0.4, 0.0)
        out = a * a * (s - inside) + b * b * inside
    elif vol.kind is VolatilityKind.TRENDING:
        out = a * a * s + a * d * s * s + d * d * s ** 3 / 3.0
    elif vol.kind is VolatilityKind.LOGISTIC:
        # omega = a + d*L with L(s) = logistic(50(s - 1/2)).
        # int L  = (softplus(x) - softplus(x0)) / 50 with x = 50(s - 1/2)
        # int L^2 = int L - (L(s) - L(0)) / 50   since L^2 = L - L'/50
        x = 50.0 * (s - 0.5)
        x0 = -25.0
        int_l = (_softplus(x) - _softplus(x0)) / 50.0
        lam = 1.0 / (1.0 + np.exp(-x))
        lam0 = 1.0 / (1.0 + np.exp(-x0))
        int_l2 = int_l - (lam - lam0) / 50.0
        out = a * a * s + 2.0 * a * d * int_l + d * d * int_l2
    else:  # pragma: no cover
        raise InvalidSpecError(f"unknown volatility kind {vol.kind}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BubbleSpec:
    """Dates and magnitudes of the explosive and collapsing regimes.

    The null hypothesis is delta1 = delta2 = 0 (the date fields are then
    irrelevant).  tau3 defaults to tau2, i.e. no collapsing regime.
    """

    delta1: float = 0.0
    delta2: float = 0.0
    tau1: float = 0.4
    tau2: float = 0.6
    tau3: Optional[float] = None
    mu: float = 0.0

    def __post_init__(self):
        if self.delta1 < 0 or self.delta2 < 0:
            raise InvalidSpecError("delta1 and delta2 must be nonnegative")
        if self.tau3 is None:
            object.__setattr__(self, "tau3", self.tau2)
        if self.delta1 > 0:
            if not (0.0 <= self.tau1 < self.tau2 <= self.tau3 <= 1.0):
                raise InvalidSpecError(
                    "need 0 <= tau1 < tau2 <= tau3 <= 1 when delta1 > 0, got "
                    f"tau1={self.tau1}, tau2={self.tau2}, tau3={self.tau3}"
                )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BubbleSpec":
        known = {"delta1", "delta2", "tau1", "tau2", "tau3", "mu"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpecError(f"unknown bubble keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class DgpSpec:
    """Complete description of one simulated path."""

    bubble: BubbleSpec
    vol: VolatilitySpec
    length: int
    seed: int

    def __post_init__(self):
        if self.length < 2:
            raise InvalidSpecError("length must be at least 2")
        if not (0 <= self.seed < 2 ** 64):
            raise InvalidSpecError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "bubble": self.bubble.to_dict(),
            "vol": self.vol.to_dict(),
            "length": self.length,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DgpSpec":
        known = {"bubble", "vol", "length", "seed"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpecError(f"unknown dgp keys: {sorted(unknown)}")
        return cls(
            bubble=BubbleSpec.from_dict(d["bubble"]),
            vol=VolatilitySpec.from_dict(d["vol"]),
            length=d["length"],
            seed=d["seed"],
        )


@dataclass(frozen=True)
class SimulatedPath:
    """A simulated series plus everything needed to replay the recursion."""

    series: TimeSeries
    innovations: np.ndarray    # eps_1..eps_T (volatility applied)
    coefficients: np.ndarray   # AR coefficient used at t = 1..T
    u0: float


def regime_coefficients(bubble: BubbleSpec, T: int) -> np.ndarray:
    """AR(1) coefficient in effect at each t = 1..T."""
    t1 = floor_index(bubble.tau1, T)
    t2 = floor_index(bubble.tau2, T)
    t3 = floor_index(bubble.tau3, T)
    coef = np.ones(T)
    if bubble.delta1 > 0:
        coef[t1:t2] = 1.0 + bubble.delta1          # t in (t1, t2]
    if bubble.delta2 > 0:
        coef[t2:t3] = 1.0 - bubble.delta2          # t in (t2, t3]
    return coef


NormalSampler = Callable[[np.random.Generator, int], np.ndarray]


def _standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n)


def simulate_details(spec: DgpSpec, sampler: NormalSampler = _standard_normal) -> SimulatedPath:
    """Simulate one path, returning innovations and regime coefficients too.

    The generator draws e_0..e_T in a single block; u_0 = e_0.  A custom
    `sampler(rng, n)` may replace the standard-normal draw (it must return n
    variates with unit conditional variance for the theory to apply).
    """
    T = spec.length
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    e = sampler(rng, T + 1)
    sig = volatility_at(spec.vol, np.arange(1, T + 1) / T)
    eps = np.asarray(sig * e[1:], dtype=float)
    coef = regime_coefficients(spec.bubble, T)
    u = np.empty(T + 1)
    u[0] = e[0]
    for t in range(1, T + 1):
        u[t] = coef[t - 1] * u[t - 1] + eps[t - 1]
    y = spec.bubble.mu + u
    return SimulatedPath(series=TimeSeries(y), innovations=eps, coefficients=coef, u0=float(e[0]))


def simulate(spec: DgpSpec, sampler: NormalSampler = _standard_normal) -> TimeSeries:
    """Simulate one path from the spec; identical seeds give identical output."""
    return simulate_details(spec, sampler).series


def replication_seed_sequence(master_seed: int, cell_key: int, replication: int,
                              stream: int = 0) -> np.random.SeedSequence:
    """Derived seed for replication r of a Monte Carlo cell.

    Streams are split by (master_seed, cell_key, replication, stream), so
    adding grid cells or replications never perturbs existing draws.  Stream
    0 is the path itself; nonzero streams are auxiliary randomness (e.g.
    bootstrap multipliers).
    """
    return np.random.SeedSequence([master_seed, cell_key, replication, stream])
