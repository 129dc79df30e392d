"""Command-line front end: `test` on CSV data, `simulate` for experiment
grids, `critvals` for null-distribution quantiles.

Exit codes: 0 success, 2 parse/usage failure (CSV or config), 3 precondition
failure (series too short, invalid specification), 4 degenerate statistic.
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import (ConfigError, CsvParseError, DegenerateProfileError,
                     DegenerateStatisticError, DegenerateThresholdError,
                     DegenerateWindowError, InvalidSpecError, SeriesTooShortError,
                     StadfError)
from .inference import (FAMILIES, GSADF_GLS, GSADF_OLS, SADF_GLS, SADF_OLS,
                        default_cache_dir, get_null_distribution, wild_bootstrap_sadf)
from .kernel import KernelSpec, fit as kernel_fit
from .montecarlo import (ExperimentConfig, run_experiment, run_timing, timing_to_csv)
from .series import TimeSeries
from .stats import OLS, gsadf, gstadf, sadf, stadf
from .varprofile import estimate_profile

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_DEGENERATE = 4

_TEST_CHOICES = ("SADF", "GSADF", "SADF_b", "STADF", "GSTADF")
_ASYMPTOTIC_FAMILY = {"SADF": SADF_OLS, "GSADF": GSADF_OLS,
                      "STADF": SADF_GLS, "GSTADF": GSADF_GLS}


def read_series_csv(path, value_col: str, date_col: str = None) -> TimeSeries:
    """Parse a headered CSV into a TimeSeries; errors carry line numbers."""
    values, labels = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CsvParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file (header row required)", line=1)
        header = [h.strip() for h in header]
        if value_col not in header:
            raise CsvParseError(
                f"{path}: value column {value_col!r} not in header {header}", line=1)
        vi = header.index(value_col)
        di = header.index(date_col) if date_col else None
        if date_col and date_col not in header:
            raise CsvParseError(
                f"{path}: date column {date_col!r} not in header {header}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if vi >= len(row):
                raise CsvParseError(f"{path}: line {lineno}: missing value column",
                                    line=lineno)
            cell = row[vi].strip()
            try:
                x = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"{path}: line {lineno}: cannot parse {cell!r} as a number",
                    line=lineno)
            if not math.isfinite(x):
                raise CsvParseError(
                    f"{path}: line {lineno}: non-finite value {cell!r}", line=lineno)
            values.append(x)
            labels.append(row[di].strip() if di is not None else str(lineno - 2))
    if len(values) < 20:
        raise SeriesTooShortError(
            f"{path}: need at least 20 observations, got {len(values)}")
    return TimeSeries(np.asarray(values), labels=labels)


def _fmt(x) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def _write_report_csv(path, rows):
    cols = ["test", "statistic", "p_value", "r1", "r2",
            "window_start", "window_end"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in rows:
            writer.writerow([r["test"], _fmt(r["statistic"]), _fmt(r["p_value"]),
                             _fmt(r["r1"]), _fmt(r["r2"]),
                             r["window_start"], r["window_end"]])


def _write_profile_csv(path, profile):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "eta"])
        T = profile.source_length
        for x, e in zip(profile.knots_x, profile.knots_eta):
            writer.writerow([_fmt(x / T), _fmt(e)])


def cmd_test(args) -> int:
    series = read_series_csv(args.input, args.value_col, args.date_col)
    values = series.values
    if args.log:
        if np.any(values <= 0):
            raise InvalidSpecError("--log requires strictly positive values")
        values = np.log(values)
    tests = [t.strip() for t in args.tests.split(",") if t.strip()]
    for t in tests:
        if t not in _TEST_CHOICES:
            raise ConfigError(f"unknown test {t!r}; choose from {_TEST_CHOICES}")
    if not tests:
        raise ConfigError("no tests selected")
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    for f in formats:
        if f not in ("csv", "json", "svg"):
            raise ConfigError(f"unknown output format {f!r}")

    kfit = kernel_fit(values, KernelSpec())
    profile = estimate_profile(kfit)
    needs = {t for t in tests if t in _ASYMPTOTIC_FAMILY}
    dists = {t: get_null_distribution(
        _ASYMPTOTIC_FAMILY[t], args.r0, steps=args.null_steps,
        replications=args.null_reps, seed=args.null_seed,
        window_grid=args.null_window_grid, force=args.force) for t in needs}

    rows = []
    for t in tests:
        if t == "SADF":
            res = sadf(values, args.r0, OLS)
            pval = dists[t].p_value(res.statistic)
        elif t == "GSADF":
            res = gsadf(values, args.r0, OLS)
            pval = dists[t].p_value(res.statistic)
        elif t == "STADF":
            res = stadf(values, args.r0, profile=profile)
            pval = dists[t].p_value(res.statistic)
        elif t == "GSTADF":
            res = gstadf(values, args.r0, profile=profile)
            pval = dists[t].p_value(res.statistic)
        else:
            boot = wild_bootstrap_sadf(values, args.r0, B=args.B, seed=args.seed,
                                       demeaning=OLS)
            res = boot.result
            pval = boot.p_value
            if boot.degenerate:
                raise DegenerateStatisticError("bootstrap input is constant")
        res.p_value = pval
        T = series.T
        rows.append({
            "test": t, "statistic": res.statistic, "p_value": pval,
            "r1": res.r1, "r2": res.r2,
            "window_start": series.label_at(int(round(res.r1 * T))),
            "window_end": series.label_at(int(round(res.r2 * T))),
        })

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        _write_report_csv(out / "report.csv", rows)
        written.append(out / "report.csv")
        _write_profile_csv(out / "variance_profile.csv", profile)
        written.append(out / "variance_profile.csv")
    if "json" in formats:
        payload = {
            "input": str(args.input),
            "r0": args.r0,
            "observations": len(series.values),
            "bootstrap_b": args.B,
            "seed": args.seed,
            "null_distribution": {"steps": args.null_steps,
                                  "replications": args.null_reps,
                                  "window_grid": args.null_window_grid,
                                  "seed": args.null_seed},
            "bandwidth": kfit.bandwidth,
            "psi": kfit.psi,
            "omega_bar_sq": profile.omega_bar_sq,
            "results": rows,
        }
        (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        written.append(out / "report.json")
    if "svg" in formats:
        from .plotting import plot_series_with_profile
        written += plot_series_with_profile(
            series, profile, out / "figure", formats=("svg",),
            title=Path(args.input).stem)
    for t, row in zip(tests, rows):
        print(f"{row['test']:>8}  statistic {row['statistic']:10.4f}  "
              f"p-value {row['p_value']:.4f}  window [{row['window_start']}, "
              f"{row['window_end']}]")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def load_experiment_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot open {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise CsvParseError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return ExperimentConfig.from_dict(raw)


def cmd_simulate(args) -> int:
    config = load_experiment_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.timing:
        tests = [t for t in config.tests if t in ("SADF", "STADF", "SADF_b")]
        rows = run_timing(config.T_list, tests or ("SADF", "STADF", "SADF_b"),
                          repetitions=args.timing_reps,
                          bootstrap_b=config.bootstrap_b, r0=config.r0)
        timing_to_csv(rows, out / "timing.csv")
        from .plotting import plot_timing
        plot_timing(rows, out / "timing")
        for r in rows:
            print(f"T={r.T:>5}  {r.test:>7}  median {r.median_seconds:.4f}s")
        print(f"wrote {out / 'timing.csv'}")
        return EXIT_OK
    table = run_experiment(config, threads=args.threads, force_null=args.force)
    table.to_csv(out / "rejection_table.csv")
    (out / "rejection_table.txt").write_text(table.to_text())
    from .plotting import plot_rejection_curves
    plot_rejection_curves(table, out / "power_curves")
    print(table.to_text())
    print(f"wrote {out / 'rejection_table.csv'} "
          f"({table.runtime_seconds:.1f}s, {len(table.rows)} cells)")
    return EXIT_OK


def cmd_critvals(args) -> int:
    cache = default_cache_dir()
    from .inference import _cache_name
    path = cache / _cache_name(args.family, args.r0, args.steps, args.reps,
                               args.seed, args.window_grid)
    hit = path.exists() and not args.force
    dist = get_null_distribution(args.family, args.r0, steps=args.steps,
                                 replications=args.reps, seed=args.seed,
                                 window_grid=args.window_grid, force=args.force)
    source = "cache hit" if hit else "simulated"
    print(f"{args.family}  r0={args.r0}  N={args.steps}  M={args.window_grid}  "
          f"R={args.reps}  seed={args.seed}  [{source}]")
    for level in (0.10, 0.05, 0.01):
        print(f"  {int(level * 100):>2}%  {dist.critical_value(level):.4f}")
    print(f"cache file {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stadf",
        description="Explosive-episode (bubble) tests robust to nonstationary "
                    "volatility: SADF/GSADF, their time-transformed versions, "
                    "and a wild-bootstrap comparator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run tests on a CSV series")
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--value-col", default="value", help="value column name")
    p.add_argument("--date-col", default=None, help="optional date column name")
    p.add_argument("--tests", default="SADF,SADF_b,STADF",
                   help=f"comma list from {','.join(_TEST_CHOICES)}")
    p.add_argument("--r0", type=float, default=0.1, help="minimum window fraction")
    p.add_argument("--B", type=int, default=999, help="bootstrap replications")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.add_argument("--log", action="store_true", help="test log levels")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", default="csv,svg", help="outputs: csv,json,svg")
    p.add_argument("--null-steps", type=int, default=2000)
    p.add_argument("--null-reps", type=int, default=100000)
    p.add_argument("--null-window-grid", type=int, default=300)
    p.add_argument("--null-seed", type=int, default=783201)
    p.add_argument("--force", action="store_true",
                   help="re-simulate null distributions, ignoring the cache")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="run a rejection-frequency experiment")
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--timing", action="store_true", help="timing benchmark mode")
    p.add_argument("--timing-reps", type=int, default=20)
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads across grid cells")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("critvals", help="simulate/print null critical values")
    p.add_argument("--family", default=SADF_GLS, choices=FAMILIES)
    p.add_argument("--r0", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--window-grid", type=int, default=300)
    p.add_argument("--seed", type=int, default=783201)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_critvals)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CsvParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SeriesTooShortError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (DegenerateWindowError, DegenerateThresholdError,
            DegenerateProfileError, DegenerateStatisticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except StadfError as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
