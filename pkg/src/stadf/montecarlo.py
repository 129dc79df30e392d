"""Rejection-frequency experiments over DGP grids, and timing benchmarks.

Each grid cell (volatility spec, delta1, T) simulates `replications` paths
with seeds derived from (master_seed, cell_key, r); all selected tests are
applied to the same paths.  Asymptotic tests compare against cached null
distributions; the bootstrap test rejects when p <= level (exact whenever
(B+1)*level is an integer).
"""

import csv
import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .dgp import (BubbleSpec, DgpSpec, VolatilitySpec, replication_seed_sequence,
                  simulate)
from .errors import ConfigError, InvalidSpecError, StadfError
from .inference import (GSADF_GLS, GSADF_OLS, SADF_GLS, SADF_OLS,
                        get_null_distribution, wild_bootstrap_sadf)
from .stats import OLS, default_r0, gsadf, gstadf, sadf, stadf

TESTS = ("SADF", "SADF_b", "GSADF", "STADF", "GSTADF")

_TEST_FAMILY = {
    "SADF": SADF_OLS,
    "GSADF": GSADF_OLS,
    "STADF": SADF_GLS,
    "GSTADF": GSADF_GLS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid definition for one rejection-frequency experiment."""

    name: str
    T_list: Tuple[int, ...]
    delta1_grid: Tuple[float, ...]
    vol_specs: Tuple[Tuple[str, VolatilitySpec], ...]
    tests: Tuple[str, ...]
    replications: int = 500
    level: float = 0.05
    r0: object = "formula"          # "formula" or a fixed fraction
    bootstrap_b: int = 199
    master_seed: int = 20240401
    tau1: float = 0.4
    tau2: float = 0.6
    null_steps: int = 2000
    null_replications: int = 100000
    null_window_grid: int = 300
    null_seed: int = 783201

    def __post_init__(self):
        if self.replications < 100:
            raise ConfigError("replications must be at least 100")
        if not (0.0 < self.level < 1.0):
            raise ConfigError("level must lie in (0, 1)")
        if not self.tests:
            raise ConfigError("tests must be non-empty")
        for t in self.tests:
            if t not in TESTS:
                raise ConfigError(f"unknown test {t!r}; choose from {TESTS}")
        if not self.T_list or not self.delta1_grid or not self.vol_specs:
            raise ConfigError("T_list, delta1_grid and volatility specs must be non-empty")

    def r0_for(self, T: int) -> float:
        if self.r0 == "formula":
            return default_r0(T)
        return float(self.r0)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"name", "T", "delta1", "tests", "replications", "level", "r0",
                 "bootstrap_b", "master_seed", "bubble", "volatility",
                 "null_distribution"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("T", "delta1", "tests", "volatility"):
            if key not in d:
                raise ConfigError(f"missing config key {key!r}")
        vols = []
        for entry in d["volatility"]:
            entry = dict(entry)
            label = entry.pop("label", None)
            try:
                spec = VolatilitySpec.from_dict(entry)
            except InvalidSpecError as exc:
                raise ConfigError(str(exc)) from exc
            vols.append((label or spec.kind.value, spec))
        bubble = d.get("bubble", {})
        bad = set(bubble) - {"tau1", "tau2"}
        if bad:
            raise ConfigError(f"unknown bubble keys: {sorted(bad)}")
        nd = d.get("null_distribution", {})
        bad = set(nd) - {"steps", "replications", "window_grid", "seed"}
        if bad:
            raise ConfigError(f"unknown null_distribution keys: {sorted(bad)}")
        r0 = d.get("r0", "formula")
        if r0 != "formula":
            r0 = float(r0)
        return cls(
            name=d.get("name", "experiment"),
            T_list=tuple(int(t) for t in d["T"]),
            delta1_grid=tuple(float(x) for x in d["delta1"]),
            vol_specs=tuple(vols),
            tests=tuple(d["tests"]),
            replications=int(d.get("replications", 500)),
            level=float(d.get("level", 0.05)),
            r0=r0,
            bootstrap_b=int(d.get("bootstrap_b", 199)),
            master_seed=int(d.get("master_seed", 20240401)),
            tau1=float(bubble.get("tau1", 0.4)),
            tau2=float(bubble.get("tau2", 0.6)),
            null_steps=int(nd.get("steps", 2000)),
            null_replications=int(nd.get("replications", 100000)),
            null_window_grid=int(nd.get("window_grid", 300)),
            null_seed=int(nd.get("seed", 783201)),
        )


@dataclass
class CellResult:
    vol_label: str
    sigma_ratio: float
    delta1: float
    T: int
    test: str
    rejections: int
    replications: int
    failures: int

    @property
    def frequency(self) -> float:
        n = self.replications - self.failures
        return self.rejections / n if n > 0 else float("nan")

    @property
    def valid(self) -> bool:
        return self.failures < 0.01 * self.replications


@dataclass
class RejectionTable:
    """Rejection frequencies for every (volatility, delta1, T, test) cell."""

    rows: List[CellResult]
    config: ExperimentConfig
    runtime_seconds: float = 0.0

    def cell(self, vol_label: str, delta1: float, T: int, test: str) -> CellResult:
        for row in self.rows:
            if (row.vol_label == vol_label and row.T == T and row.test == test
                    and math.isclose(row.delta1, delta1)):
                return row
        raise KeyError((vol_label, delta1, T, test))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["volatility", "sigma1_over_sigma0", "delta1", "T",
                             "test", "rejections", "replications", "failures",
                             "frequency"])
            for r in self.rows:
                writer.writerow([r.vol_label, repr(float(r.sigma_ratio)),
                                 repr(float(r.delta1)), r.T, r.test,
                                 r.rejections, r.replications, r.failures,
                                 repr(float(r.frequency))])

    def to_text(self) -> str:
        """Fixed-width table: one block per (volatility, T), tests as columns."""
        tests = list(self.config.tests)
        lines = []
        header = f"{'sigma1/sigma0':>14} {'delta1':>7} " + " ".join(
            f"{t:>8}" for t in tests)
        for label, vol in self.config.vol_specs:
            for T in self.config.T_list:
                lines.append(f"-- {label}  T={T}  "
                             f"(level {self.config.level}, "
                             f"{self.config.replications} replications)")
                lines.append(header)
                for d1 in self.config.delta1_grid:
                    cells = [self.cell(label, d1, T, t) for t in tests]
                    vals = " ".join(f"{c.frequency:>8.3f}" for c in cells)
                    lines.append(f"{vol.ratio:>14.3f} {d1:>7.2f} {vals}")
                lines.append("")
        return "\n".join(lines)


def cell_key(vol_label: str, sigma_ratio: float, delta1: float, T: int) -> int:
    """Stable 63-bit key of a grid cell (test-independent: paths are shared)."""
    desc = f"{vol_label}|{sigma_ratio:.12g}|{delta1:.12g}|{T}"
    digest = hashlib.sha256(desc.encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _null_dists_for(config: ExperimentConfig, cache_dir, force=False):
    dists = {}
    for test in config.tests:
        fam = _TEST_FAMILY.get(test)
        if fam is None:
            continue
        for T in config.T_list:
            key = (test, T)
            dists[key] = get_null_distribution(
                fam, config.r0_for(T), steps=config.null_steps,
                replications=config.null_replications, seed=config.null_seed,
                window_grid=config.null_window_grid, cache_dir=cache_dir,
                force=force)
    return dists


def _run_cell(config: ExperimentConfig, label: str, vol: VolatilitySpec,
              delta1: float, T: int, dists: dict) -> List[CellResult]:
    key = cell_key(label, vol.ratio, delta1, T)
    r0 = config.r0_for(T)
    bubble = BubbleSpec(delta1=delta1, tau1=config.tau1, tau2=config.tau2)
    crit = {t: dists[(t, T)].critical_value(config.level)
            for t in config.tests if t != "SADF_b"}
    rejections = {t: 0 for t in config.tests}
    failures = {t: 0 for t in config.tests}
    for r in range(config.replications):
        seed_seq = replication_seed_sequence(config.master_seed, key, r)
        rng = np.random.default_rng(seed_seq)
        spec = DgpSpec(bubble=bubble, vol=vol, length=T,
                       seed=int(rng.integers(2 ** 63)))
        y = simulate(spec).values
        for test in config.tests:
            try:
                if test == "SADF":
                    reject = sadf(y, r0, OLS).statistic > crit[test]
                elif test == "GSADF":
                    reject = gsadf(y, r0, OLS).statistic > crit[test]
                elif test == "STADF":
                    reject = stadf(y, r0).statistic > crit[test]
                elif test == "GSTADF":
                    reject = gstadf(y, r0).statistic > crit[test]
                else:  # SADF_b
                    boot_seed = replication_seed_sequence(
                        config.master_seed, key, r, stream=1)
                    boot = wild_bootstrap_sadf(
                        y, r0, B=config.bootstrap_b,
                        seed=int(np.random.default_rng(boot_seed).integers(2 ** 63)),
                        demeaning=OLS)
                    reject = boot.p_value <= config.level
            except StadfError:
                failures[test] += 1
                continue
            if reject:
                rejections[test] += 1
    return [CellResult(vol_label=label, sigma_ratio=vol.ratio, delta1=delta1,
                       T=T, test=t, rejections=rejections[t],
                       replications=config.replications, failures=failures[t])
            for t in config.tests]


def run_experiment(config: ExperimentConfig, cache_dir=None, threads: int = 1,
                   force_null: bool = False) -> RejectionTable:
    """Run every grid cell; identical configs produce identical tables."""
    t0 = time.perf_counter()
    dists = _null_dists_for(config, cache_dir, force_null)
    cells = [(label, vol, d1, T)
             for label, vol in config.vol_specs
             for T in config.T_list
             for d1 in config.delta1_grid]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda c: _run_cell(config, c[0], c[1], c[2], c[3], dists), cells))
    else:
        results = [_run_cell(config, label, vol, d1, T, dists)
                   for label, vol, d1, T in cells]
    rows = [row for cell_rows in results for row in cell_rows]
    return RejectionTable(rows=rows, config=config,
                          runtime_seconds=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Statistical invariants of a rejection table
# ---------------------------------------------------------------------------

def _binomial_se(p: float, n: int) -> float:
    p = min(max(p, 1.0 / n), 1.0 - 1.0 / n)
    return math.sqrt(p * (1.0 - p) / n)


def check_power_monotonicity(table: RejectionTable, se_mult: float = 2.0) -> List[str]:
    """Violations of: frequency nondecreasing in delta1 within each (vol, T, test)."""
    violations = []
    cfg = table.config
    deltas = sorted(cfg.delta1_grid)
    for label, _ in cfg.vol_specs:
        for T in cfg.T_list:
            for test in cfg.tests:
                freqs = [table.cell(label, d, T, test).frequency for d in deltas]
                for a, b, da, db in zip(freqs, freqs[1:], deltas, deltas[1:]):
                    slack = se_mult * (_binomial_se(a, cfg.replications)
                                       + _binomial_se(b, cfg.replications))
                    if b < a - slack:
                        violations.append(
                            f"{label} T={T} {test}: freq({db})={b:.3f} < "
                            f"freq({da})={a:.3f} - {slack:.3f}")
    return violations


def check_T_consistency(table: RejectionTable, delta1: float = None,
                        se_mult: float = 2.0) -> List[str]:
    """Violations of: frequency at (delta1_max, T_max) >= at (delta1_max, T_min)."""
    violations = []
    cfg = table.config
    if delta1 is None:
        delta1 = max(cfg.delta1_grid)
    if delta1 == 0 or len(cfg.T_list) < 2:
        return violations
    T_lo, T_hi = min(cfg.T_list), max(cfg.T_list)
    for label, _ in cfg.vol_specs:
        for test in cfg.tests:
            lo = table.cell(label, delta1, T_lo, test).frequency
            hi = table.cell(label, delta1, T_hi, test).frequency
            slack = se_mult * (_binomial_se(lo, cfg.replications)
                               + _binomial_se(hi, cfg.replications))
            if hi < lo - slack:
                violations.append(
                    f"{label} {test}: freq(T={T_hi})={hi:.3f} < "
                    f"freq(T={T_lo})={lo:.3f} - {slack:.3f}")
    return violations


# ---------------------------------------------------------------------------
# Timing benchmarks
# ---------------------------------------------------------------------------

@dataclass
class TimingRow:
    T: int
    test: str
    median_seconds: float
    repetitions: int


def run_timing(T_list: Sequence[int], tests: Sequence[str] = ("SADF", "STADF", "SADF_b"),
               repetitions: int = 20, bootstrap_b: int = 199,
               seed: int = 7, r0: object = "formula") -> List[TimingRow]:
    """Median wall-clock time per test on pure random-walk inputs."""
    for t in tests:
        if t not in TESTS:
            raise ConfigError(f"unknown test {t!r}")
    rows = []
    root = np.random.SeedSequence(seed)
    for T in T_list:
        r0_T = default_r0(T) if r0 == "formula" else float(r0)
        paths = []
        for child in root.spawn(repetitions):
            rng = np.random.default_rng(child)
            paths.append(np.concatenate([[0.0], np.cumsum(rng.standard_normal(T))]))
        for test in tests:
            times = []
            for i, y in enumerate(paths):
                start = time.perf_counter()
                if test == "SADF":
                    sadf(y, r0_T, OLS)
                elif test == "GSADF":
                    gsadf(y, r0_T, OLS)
                elif test == "STADF":
                    stadf(y, r0_T)
                elif test == "GSTADF":
                    gstadf(y, r0_T)
                else:
                    wild_bootstrap_sadf(y, r0_T, B=bootstrap_b, seed=i, demeaning=OLS)
                times.append(time.perf_counter() - start)
            rows.append(TimingRow(T=T, test=test,
                                  median_seconds=float(np.median(times)),
                                  repetitions=repetitions))
    return rows


def timing_to_csv(rows: List[TimingRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "test", "median_seconds", "repetitions"])
        for r in rows:
            writer.writerow([r.T, r.test, repr(float(r.median_seconds)),
                             r.repetitions])
