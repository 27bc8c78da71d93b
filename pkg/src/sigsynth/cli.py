"""Command-line front end: ``sigsynth generate`` and ``sigsynth benchmark``.

Both subcommands take a TOML config path followed by optional
``section.key=value`` overrides. Exit codes: 0 success, 2 invalid config or
parameters, 3 numerical failure during a run. See README.md for the schema.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import benchmark as bench
from .diagnostics import export_quantiles, export_trace
from .fileio import read_two_column, write_signal_csv, write_ssig
from .optim import LossConfig
from .pipeline import run
from .sigcore import (
    ExactPdf,
    InconsistentSpectrumError,
    InvalidArgumentError,
    Mode,
    NumericalFailure,
    RangePenalty,
    RunConfig,
    TargetAutocorrelation,
    TraceEntry,
)
from .spectral import MetricConfig, psd_to_autocorr

__all__ = ["main", "parse_target", "cmd_generate", "cmd_benchmark", "ConfigError"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_REQUIRED = object()


class ConfigError(Exception):
    """Invalid configuration; the message already carries file/line context."""


class Config:
    """Parsed TOML plus enough of the source text to point at offending lines."""

    def __init__(self, data: dict, path: Path | None = None, text: str = "",
                 overrides: dict | None = None):
        self.data = data
        self.path = path
        self.text = text
        self.overrides = overrides or {}
        self.base_dir = path.parent if path is not None else Path(".")

    @classmethod
    def load(cls, path, overrides=()) -> "Config":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            m = re.search(r"line (\d+)", str(exc))
            where = f"{path}:{m.group(1)}" if m else str(path)
            raise ConfigError(f"{where}: malformed config: {exc}") from exc
        applied = {}
        for item in overrides:
            key, sep, raw = item.partition("=")
            if not sep or "." not in key:
                raise ConfigError(f"override {item!r}: expected section.key=value")
            section, name = key.strip().split(".", 1)
            try:
                value = tomllib.loads(f"v = {raw}")["v"]
            except tomllib.TOMLDecodeError:
                value = raw
            data.setdefault(section, {})[name] = value
            applied[(section, name)] = item
        return cls(data, path, text, applied)

    def where(self, section: str, key: str | None = None) -> str:
        if (section, key) in self.overrides:
            return f"override {self.overrides[(section, key)]!r}"
        name = str(self.path) if self.path else "<config>"
        line = self._line_of(section, key)
        return f"{name}:{line}" if line else name

    def _line_of(self, section: str, key: str | None) -> int | None:
        current = None
        header_line = None
        for lineno, raw in enumerate(self.text.splitlines(), 1):
            s = raw.strip()
            h = re.match(r"\[\s*([^\]]+?)\s*\]", s)
            if h:
                current = h.group(1)
                if current == section:
                    header_line = lineno
                continue
            if current == section and key and re.match(rf"{re.escape(key)}\s*=", s):
                return lineno
        return header_line

    def section(self, name: str, required: bool = True) -> dict:
        sec = self.data.get(name)
        if sec is None:
            if required:
                raise ConfigError(f"{self.where(name)}: missing required section [{name}]")
            return {}
        if not isinstance(sec, dict):
            raise ConfigError(f"{self.where(name)}: [{name}] must be a table")
        return sec

    def get(self, section: str, key: str, kind=float, default=_REQUIRED, check=None,
            what: str = ""):
        sec = self.data.get(section, {})
        if key not in sec:
            if default is _REQUIRED:
                raise ConfigError(f"{self.where(section)}: missing required key {section}.{key}")
            return default
        value = sec[key]
        try:
            if kind is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise TypeError
            elif kind is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise TypeError
                value = float(value)
            elif kind is bool:
                if not isinstance(value, bool):
                    raise TypeError
            elif kind is str:
                if not isinstance(value, str):
                    raise TypeError
            elif kind is list:
                if not isinstance(value, list):
                    raise TypeError
        except TypeError:
            raise ConfigError(
                f"{self.where(section, key)}: {section}.{key} must be {kind.__name__}, "
                f"got {value!r}"
            ) from None
        if check is not None and not check(value):
            raise ConfigError(f"{self.where(section, key)}: {section}.{key} {what} (got {value!r})")
        return value

    def path_value(self, section: str, key: str, default=_REQUIRED) -> Path | None:
        raw = self.get(section, key, str, default)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p


# -- targets and PDFs --------------------------------------------------------

def parse_target(section: dict | Config, base_dir=".") -> TargetAutocorrelation:
    """Build the target autocorrelation from a ``[target]`` table.

    ``kind`` is one of ``exp_decay`` (power, tau, m), ``damped_cosine``
    (power, tau, freq in cycles/sample, m), ``autocorr_file`` (path to
    ``lag,value`` rows with lags 0..m-1) or ``psd_file`` (path to
    ``bin,value`` rows with bins 0..N-1, plus m and optional ``onesided``).
    """
    cfg = section if isinstance(section, Config) else Config({"target": dict(section)})
    if not isinstance(section, Config):
        cfg.base_dir = Path(base_dir)
    cfg.section("target")
    kind = cfg.get("target", "kind", str)
    pos = dict(check=lambda v: v > 0, what="must be positive")
    try:
        if kind in ("exp_decay", "damped_cosine"):
            power = cfg.get("target", "power", float, **pos)
            tau = cfg.get("target", "tau", float, **pos)
            m = cfg.get("target", "m", int, check=lambda v: v >= 1, what="must be >= 1")
            k = np.arange(m)
            values = power * np.exp(-k / tau)
            if kind == "damped_cosine":
                freq = cfg.get("target", "freq", float)
                values = values * np.cos(2 * np.pi * freq * k)
            return TargetAutocorrelation(values)
        if kind == "autocorr_file":
            lags, values = read_two_column(cfg.path_value("target", "path"))
            if not np.array_equal(lags, np.arange(lags.size)):
                raise ConfigError(f"{cfg.where('target', 'path')}: autocorrelation lags must be "
                                  "0, 1, ..., m-1 in order")
            m = cfg.get("target", "m", int, default=lags.size,
                        check=lambda v: 1 <= v <= lags.size, what="must be in 1..rows")
            return TargetAutocorrelation(values[:m])
        if kind == "psd_file":
            bins, values = read_two_column(cfg.path_value("target", "path"))
            if not np.array_equal(bins, np.arange(bins.size)):
                raise ConfigError(f"{cfg.where('target', 'path')}: PSD bins must be "
                                  "0, 1, ..., N-1 in order")
            m = cfg.get("target", "m", int, check=lambda v: v >= 1, what="must be >= 1")
            onesided = cfg.get("target", "onesided", bool, default=False)
            return psd_to_autocorr(values, m, onesided=onesided)
    except (InvalidArgumentError, InconsistentSpectrumError) as exc:
        raise ConfigError(f"{cfg.where('target')}: invalid target: {exc}") from exc
    raise ConfigError(f"{cfg.where('target', 'kind')}: unknown target kind {kind!r} "
                      "(exp_decay, damped_cosine, autocorr_file, psd_file)")


def _parse_pdf(cfg: Config, name: str = "pdf"):
    """Returns ``(exact_pdf_or_None, lower, upper)``."""
    cfg.section(name)
    kind = cfg.get(name, "kind", str)
    try:
        if kind == "range":
            lower = cfg.get(name, "lower", float)
            upper = cfg.get(name, "upper", float)
            if not lower < upper:
                raise ConfigError(f"{cfg.where(name, 'upper')}: need {name}.lower < {name}.upper")
            return None, lower, upper
        if kind == "uniform":
            lower = cfg.get(name, "lower", float)
            upper = cfg.get(name, "upper", float)
            points = cfg.get(name, "grid_size", int, default=1001)
            return ExactPdf.uniform(lower, upper, points), lower, upper
        if kind == "tabulated":
            grid, dens = read_two_column(cfg.path_value(name, "path"))
            if grid.size < 2 or np.any(np.diff(grid) <= 0):
                raise ConfigError(f"{cfg.where(name, 'path')}: PDF grid must be strictly "
                                  "increasing with at least two points")
            if np.any(dens < 0):
                raise InvalidArgumentError("density must be nonnegative")
            points = cfg.get(name, "grid_size", int, default=grid.size)
            uniform = np.linspace(grid[0], grid[-1], points)
            pdf = ExactPdf(grid[0], grid[-1], np.interp(uniform, grid, dens))
            return pdf, grid[0], grid[-1]
    except InvalidArgumentError as exc:
        raise ConfigError(f"{cfg.where(name)}: invalid PDF: {exc}") from exc
    raise ConfigError(f"{cfg.where(name, 'kind')}: unknown pdf kind {kind!r} "
                      "(range, uniform, tabulated)")


def _loss(cfg: Config, lower: float, upper: float, m: int) -> LossConfig:
    weight = cfg.get("loss", "penalty_weight", float, default=1.0, check=lambda v: v > 0,
                     what="must be positive")
    lag_weights = None
    wpath = cfg.path_value("loss", "lag_weights", default=None)
    if wpath is not None:
        lags, w = read_two_column(wpath)
        if not np.array_equal(lags, np.arange(m)):
            raise ConfigError(f"{cfg.where('loss', 'lag_weights')}: need one weight per lag 0..{m-1}")
        lag_weights = w
    try:
        return LossConfig(MetricConfig(lag_weights), RangePenalty(lower, upper, weight))
    except InvalidArgumentError as exc:
        raise ConfigError(f"{cfg.where('loss')}: {exc}") from exc


def _run_config(cfg: Config, mode: str | None = None, seed: int | None = None,
                n_check: int | None = None) -> RunConfig:
    g = cfg.get
    kw = dict(
        mode=mode or g("run", "mode", str, check=lambda v: v in {m.value for m in Mode},
                        what="must be interchange, optimize or combined"),
        steps=g("run", "steps", int, default=None, check=lambda v: v >= 0, what="must be >= 0"),
        time_budget=g("run", "time_budget", float, default=None, check=lambda v: v > 0,
                      what="must be positive"),
        rng_seed=seed if seed is not None else g(
            "run", "seed", int, default=0, check=lambda v: 0 <= v < 2**64,
            what="must be an unsigned 64-bit integer"),
        swaps_per_gradient_step=g("run", "swaps_per_gradient_step", int, default=1,
                                  check=lambda v: v >= 0, what="must be >= 0"),
        trace_interval=g("run", "trace_interval", int, default=100, check=lambda v: v >= 1,
                         what="must be >= 1"),
        init_sigma=g("run", "init_sigma", float, default=None, check=lambda v: v > 0,
                     what="must be positive"),
        init_from_pdf=g("run", "init_from_pdf", bool, default=False),
        resync_interval=g("run", "resync_interval", int, default=10**6, check=lambda v: v >= 1,
                          what="must be >= 1"),
        stationarity_windows=g("run", "stationarity_windows", int, default=16,
                               check=lambda v: v >= 2, what="must be >= 2"),
        learning_rate=g("optimizer", "learning_rate", float, default=1e-3,
                        check=lambda v: v > 0, what="must be positive"),
        beta1=g("optimizer", "beta1", float, default=0.9, check=lambda v: 0 <= v < 1,
                what="must be in [0, 1)"),
        beta2=g("optimizer", "beta2", float, default=0.999, check=lambda v: 0 <= v < 1,
                what="must be in [0, 1)"),
        eps=g("optimizer", "eps", float, default=1e-8, check=lambda v: v > 0,
              what="must be positive"),
    )
    if kw["steps"] is None and kw["time_budget"] is None:
        raise ConfigError(f"{cfg.where('run')}: set run.steps, run.time_budget, or both")
    if n_check is not None and n_check < 2 * kw["stationarity_windows"]:
        raise ConfigError(f"{cfg.where('run', 'stationarity_windows')}: n must be at least "
                          "2 * run.stationarity_windows")
    return RunConfig(**kw)


def _outputs(cfg: Config) -> dict:
    out = {k: cfg.path_value("output", k, default=None)
           for k in ("signal_csv", "signal_bin", "trace", "quantiles")}
    out["timestamps"] = cfg.get("output", "timestamps", str, default="wall",
                                check=lambda v: v in ("wall", "none"), what="must be wall or none")
    return out


def _strip_times(trace):
    nan = float("nan")
    return [TraceEntry(nan, e.step, e.metric_d, e.total_loss) for e in trace]


def _summary_lines(report, n: int, m: int) -> list[str]:
    st = report.stationarity
    rows = [
        ("mode", report.mode.value),
        ("n", n),
        ("m", m),
        ("steps", report.steps_run),
        ("final_metric", repr(report.final_metric)),
        ("vaf_percent", repr(report.vaf_percent)),
        ("stationarity_mean_deviation", repr(st.mean_deviation) if st else "nan"),
        ("stationarity_power_ratio_deviation", repr(st.power_ratio_deviation) if st else "nan"),
        ("accepted_swaps", report.accepted_swaps),
        ("proposed_swaps", report.proposed_swaps),
        ("elapsed_seconds", f"{report.total_seconds:.6f}"),
    ]
    return [f"{k}: {v}" for k, v in rows]


# -- subcommands -------------------------------------------------------------

def _prepare(cfg: Config, mode_override=None, seed=None, n_override=None):
    cfg.section("run")
    n = n_override if n_override is not None else cfg.get(
        "run", "n", int, check=lambda v: v >= 2, what="must be an integer >= 2")
    target = parse_target(cfg)
    if target.m > n:
        raise ConfigError(f"{cfg.where('target')}: lag count m={target.m} exceeds run.n={n}")
    runcfg = _run_config(cfg, mode_override, seed, n)
    return n, target, runcfg


def cmd_generate(config_path, overrides=(), dump_initial=None, out=None) -> int:
    """Run one generation from a config file; returns the process exit code."""
    out = out or sys.stdout
    try:
        cfg = Config.load(config_path, overrides)
        n, target, runcfg = _prepare(cfg)
        pdf, lower, upper = _parse_pdf(cfg)
        if runcfg.mode is Mode.INTERCHANGE and pdf is None:
            raise ConfigError(f"{cfg.where('pdf', 'kind')}: interchange mode needs an exact PDF "
                              "(pdf.kind = uniform or tabulated)")
        loss = _loss(cfg, lower, upper, target.m)
        outputs = _outputs(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = run(target, n, runcfg, loss=loss, pdf=pdf)
        if not np.all(np.isfinite(report.final_signal)):
            raise NumericalFailure("final signal contains non-finite values")
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    trace = report.trace if outputs["timestamps"] == "wall" else _strip_times(report.trace)
    try:
        for key in ("signal_csv", "signal_bin", "trace", "quantiles"):
            if outputs[key]:
                outputs[key].parent.mkdir(parents=True, exist_ok=True)
        if outputs["signal_csv"]:
            write_signal_csv(report.final_signal, outputs["signal_csv"])
        if outputs["signal_bin"]:
            write_ssig(report.final_signal, outputs["signal_bin"])
        if outputs["trace"]:
            export_trace(trace, outputs["trace"])
        if outputs["quantiles"]:
            export_quantiles(report.final_signal, outputs["quantiles"])
        if dump_initial:
            write_signal_csv(report.initial_signal, dump_initial)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("\n".join(_summary_lines(report, n, target.m)), file=out)
    return EXIT_OK


def _benchmark_runs(cfg: Config, outdir: Path, out, err) -> list[dict]:
    b = cfg.section("benchmark")
    modes = cfg.get("benchmark", "modes", list)
    for mode in modes:
        if mode not in {m.value for m in Mode}:
            raise ConfigError(f"{cfg.where('benchmark', 'modes')}: unknown mode {mode!r}")
    seeds = cfg.get("benchmark", "seeds", list, default=[cfg.get("run", "seed", int, default=0)])
    sizes = cfg.get("benchmark", "n", list, default=None)
    if sizes is None:
        sizes = [cfg.get("run", "n", int, check=lambda v: v >= 2, what="must be >= 2")]
    thresholds = [float(t) for t in cfg.get("benchmark", "thresholds", list, default=[])]
    if "time_budget" in b:
        cfg.data.setdefault("run", {})["time_budget"] = cfg.get("benchmark", "time_budget", float)
    pdf, lower, upper = _parse_pdf(cfg)
    exact = pdf
    if "interchange_pdf" in cfg.data:
        exact, _, _ = _parse_pdf(cfg, "interchange_pdf")
    if exact is None and "interchange" in modes:
        # Bounds only: the interchange baseline samples uniformly on the range.
        exact = ExactPdf.uniform(lower, upper)

    rows = []
    for n in sizes:
        n_cfg, target, _ = _prepare(cfg, modes[0], n_override=int(n))
        loss = _loss(cfg, lower, upper, target.m)
        for mode in modes:
            for seed in seeds:
                runcfg = _run_config(cfg, mode, int(seed), n_cfg)
                report = run(target, n_cfg, runcfg, loss=loss, pdf=exact)
                export_trace(report, outdir / f"trace_{mode}_n{n_cfg}_seed{seed}.csv")
                row = dict(mode=mode, n=n_cfg, seed=int(seed), steps=report.steps_run,
                           final_metric=report.final_metric, vaf_percent=report.vaf_percent,
                           seconds=report.total_seconds)
                for t in thresholds:
                    row[f"time_to_{t:g}"] = bench.time_to_threshold(report.trace, t)
                rows.append(row)
                print(f"  {mode:12s} n={n_cfg:<8d} seed={seed:<4d} D={report.final_metric:.3e} "
                      f"vaf={report.vaf_percent:.4f}% steps={report.steps_run}", file=err)
    return rows


def _scaling(cfg: Config, outdir: Path, err) -> dict:
    sizes = [int(v) for v in cfg.get("scaling", "sizes", list)]
    m = cfg.get("scaling", "m", int, default=512, check=lambda v: v >= 1, what="must be >= 1")
    repeats = cfg.get("scaling", "gradient_repeats", int, default=20, check=lambda v: v >= 1,
                      what="must be >= 1")
    proposals = cfg.get("scaling", "swap_proposals", int, default=200_000,
                        check=lambda v: v >= 1, what="must be >= 1")
    if min(sizes) < m or len(sizes) < 2:
        raise ConfigError(f"{cfg.where('scaling', 'sizes')}: need >= 2 sizes, each >= m")
    grad_t = [bench.time_gradient_step(n, m, repeats) for n in sizes]
    swap_t = [bench.time_swap_proposals(n, m, proposals) for n in sizes]
    with (outdir / "scaling.csv").open("w") as fh:
        fh.write("n,gradient_step_seconds,swap_proposal_seconds\n")
        for n, g, s in zip(sizes, grad_t, swap_t):
            fh.write(f"{n},{g!r},{s!r}\n")
    res = dict(gradient_slope=bench.loglog_slope(sizes, grad_t),
               swap_slope=bench.loglog_slope(sizes, swap_t),
               swap_spread=max(swap_t) / min(swap_t))
    print(f"{'n':>10s} {'grad step [s]':>14s} {'swap [s]':>12s}", file=err)
    for n, g, s in zip(sizes, grad_t, swap_t):
        print(f"{n:>10d} {g:>14.3e} {s:>12.3e}", file=err)
    return res


def cmd_benchmark(config_path, overrides=(), out=None, err=None) -> int:
    """Head-to-head mode comparison and/or scaling sweep; returns the exit code."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        cfg = Config.load(config_path, overrides)
        if "benchmark" not in cfg.data and "scaling" not in cfg.data:
            raise ConfigError(f"{cfg.where('benchmark')}: need a [benchmark] or [scaling] section")
        outdir = cfg.path_value("output", "dir", default=".")
        outdir.mkdir(parents=True, exist_ok=True)
        rows, scaling = [], None
        if "benchmark" in cfg.data:
            rows = _benchmark_runs(cfg, outdir, out, err)
        if "scaling" in cfg.data:
            scaling = _scaling(cfg, outdir, err)
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=err)
        return EXIT_NUMERIC
    except (InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG

    if rows:
        cols = list(rows[0])
        with (outdir / "summary.csv").open("w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c])
                                  for c in cols) + "\n")
        print(f"\n{'mode':12s} {'n':>8s} {'seed':>5s} {'final D':>11s} {'VAF %':>10s}", file=err)
        for r in rows:
            print(f"{r['mode']:12s} {r['n']:>8d} {r['seed']:>5d} {r['final_metric']:>11.3e} "
                  f"{r['vaf_percent']:>10.5f}", file=err)
        print(f"rows: {len(rows)}", file=out)
    if scaling:
        for k, v in scaling.items():
            print(f"{k}: {v!r}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sigsynth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", help="generate one signal")
    gen.add_argument("config")
    gen.add_argument("overrides", nargs="*", metavar="section.key=value")
    gen.add_argument("--dump-initial", help=argparse.SUPPRESS)
    bm = sub.add_parser("benchmark", help="compare modes and measure scaling")
    bm.add_argument("config")
    bm.add_argument("overrides", nargs="*", metavar="section.key=value")
    args = parser.parse_args(argv)
    if args.command == "generate":
        return cmd_generate(args.config, args.overrides, args.dump_initial)
    return cmd_benchmark(args.config, args.overrides)


if __name__ == "__main__":
    sys.exit(main())
