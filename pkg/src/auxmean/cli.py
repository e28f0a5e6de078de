"""Command line front end: ``auxmean reproduce | analytic | mc``.

Exit codes: 0 success, 2 configuration error, 3 data error. Errors are also
written to stderr as a single JSON record.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import analytic, report
from .errors import (
    ConfigError,
    DegenerateVariance,
    DivisorNearZero,
    EmptyPopulation,
    InvalidDesign,
    ParseError,
    TargetInfeasible,
)
from .estimators import ESTIMATOR_NAMES, EstimatorSpec, Family
from .montecarlo import McConfig, generate_synthetic, standard_estimators, validate_first_order
from .sampling import MomentSummary, design_params, read_population_csv, summarize

log = logging.getLogger("auxmean")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3
MODES = ("analytic", "montecarlo", "reproduce-paper")
_MODE_ALIASES = {"reproduce": "reproduce-paper", "mc": "montecarlo"}
SUMMARY_KEYS = ("N", "n", "ybar", "xbar", "cy", "cx", "rho", "beta2x")
# optional exact scale terms; when present they override the ones implied by the CVs
_EXACT_KEYS = ("sy", "sx", "syx")


@dataclass
class RunConfig:
    """Validated run settings. ``summary`` is the inline ``key=value,...`` string."""

    mode: str
    population: str | None = None
    summary: str | None = None
    n: int | None = None
    estimators: list = field(default_factory=lambda: ["all"])
    lambdas: list = field(default_factory=lambda: [1.0, 0.0])
    a: float | None = None
    b: float | None = None
    reps: int = 10_000
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    full_precision: bool = False
    exact: bool = False

    def validate(self) -> None:
        problems = []
        self.mode = _MODE_ALIASES.get(self.mode, self.mode)
        if self.mode not in MODES:
            problems.append(("mode", f"must be one of {MODES}"))
        sources = [s for s in (self.population, self.summary) if s]
        if self.mode == "reproduce-paper":
            if sources:
                problems.append(("population", "reproduce mode takes no population input"))
        elif len(sources) != 1:
            problems.append(("population", "give exactly one of --population or --summary"))
        if self.population and self.n is None:
            problems.append(("n", "--n is required with --population"))
        if self.summary:
            try:
                parse_summary(self.summary)
            except ConfigError as e:
                problems.extend(e.problems)
        if self.mode == "montecarlo" and int(self.reps) < 1:
            problems.append(("replications", f"must be >= 1, got {self.reps}"))
        if self.format not in ("csv", "markdown"):
            problems.append(("format", "must be csv or markdown"))
        if (self.a is None) != (self.b is None):
            problems.append(("a", "--a and --b must be given together"))
        if self.a is not None and self.b is not None and self.a == 0 and self.b == 0:
            problems.append(("a", "a and b cannot both be zero"))
        known = set(report.GROUPS) if self.mode != "montecarlo" else set(ESTIMATOR_NAMES)
        bad = [e for e in self.estimators if e != "all" and e not in known]
        if bad:
            problems.append(("estimators", f"unknown {bad}; choose from all, {', '.join(sorted(known))}"))
        if problems:
            raise ConfigError(problems)


def parse_summary(text: str) -> tuple[MomentSummary, object]:
    """``N=..,n=..,ybar=..,xbar=..,cy=..,cx=..,rho=..,beta2x=..`` or ``published:1|2``.

    ``beta2x`` defaults to 3. ``sy``, ``sx`` and ``syx`` may be added together
    to pin the scale terms bit-for-bit.
    """
    text = text.strip()
    if text.startswith("published:"):
        try:
            return report.published_population(int(text.split(":", 1)[1]))
        except (KeyError, ValueError):
            raise ConfigError([("summary", f"unknown published population {text!r}")]) from None
    vals, problems = {}, []
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in SUMMARY_KEYS + _EXACT_KEYS:
            problems.append(("summary", f"bad entry {part!r}"))
            continue
        try:
            vals[key] = float(val)
        except ValueError:
            problems.append(("summary", f"{key}: not a number: {val!r}"))
    missing = [k for k in SUMMARY_KEYS if k not in vals and k != "beta2x"]
    partial = [k for k in _EXACT_KEYS if k not in vals]
    if 0 < len(partial) < len(_EXACT_KEYS):
        problems.append(("summary", f"sy, sx and syx go together; missing {', '.join(partial)}"))
    if missing:
        problems.append(("summary", f"missing {', '.join(missing)}"))
    if problems:
        raise ConfigError(problems)
    try:
        m = MomentSummary.from_coefficients(
            vals["ybar"], vals["xbar"], vals["cy"], vals["cx"], vals["rho"], vals.get("beta2x", 3.0)
        )
        if "sy" in vals:
            m = replace(m, sy=vals["sy"], sx=vals["sx"], syx=vals["syx"])
        d = design_params(vals["N"], vals["n"])
    except (ValueError, InvalidDesign) as e:
        raise ConfigError([("summary", str(e))]) from None
    return m, d


def format_summary(m: MomentSummary, N: int, n: int) -> str:
    """Inline summary string that round-trips through :func:`parse_summary` exactly."""
    return (
        f"N={N},n={n},ybar={m.ybar!r},xbar={m.xbar!r},cy={m.cy!r},cx={m.cx!r},"
        f"rho={m.rho!r},beta2x={m.beta2x!r},sy={m.sy!r},sx={m.sx!r},syx={m.syx!r}"
    )


def _transforms(cfg: RunConfig):
    if cfg.a is None:
        return None
    return {"custom": (repr(float(cfg.a)), repr(float(cfg.b)))}


def _groups(cfg: RunConfig):
    return report.GROUPS if "all" in cfg.estimators else tuple(cfg.estimators)


def _emit_tables(tables, cfg: RunConfig) -> str:
    if cfg.format == "markdown":
        return report.tables_to_markdown(tables)
    return report.tables_to_csv(tables, cfg.full_precision)


def _mc_specs(cfg: RunConfig, m, d):
    if "all" in cfg.estimators:
        return standard_estimators(m, d.n, d.N)
    a = 1.0 if cfg.a is None else cfg.a
    b = 0.0 if cfg.b is None else cfg.b
    lam = cfg.lambdas[0] if cfg.lambdas else 1.0
    specs = []
    for name in cfg.estimators:
        fam = Family(name)
        if fam in (Family.PROPOSED, Family.GUPTA_SHABBIR):
            specs.append(analytic.optimal_spec(fam, m, d, lam=lam, a=a, b=b, label=f"{name}_opt"))
        elif fam in (Family.KADILAR_CINGI_I, Family.KADILAR_CINGI_II) and cfg.a is None:
            specs.append(EstimatorSpec(fam, variant_index=1))
        else:
            specs.append(EstimatorSpec(fam, a=a, b=b))
    return specs


def run(cfg: RunConfig) -> str:
    """Execute a validated config and return the report text."""
    cfg.validate()
    if cfg.mode == "reproduce-paper":
        return _emit_tables(report.reproduce_tables(), cfg)

    if cfg.population:
        frame = read_population_csv(cfg.population)
        m = summarize(frame)
        try:
            d = design_params(frame.N, cfg.n)
        except InvalidDesign as e:
            raise ConfigError([("n", str(e))]) from None
        label = Path(cfg.population).stem
    else:
        m, d = parse_summary(cfg.summary)
        frame = None
        label = "inline"

    if cfg.mode == "analytic":
        table = report.pre_table(m, d, cfg.lambdas, _transforms(cfg), _groups(cfg), population=label)
        return _emit_tables([table], cfg)

    if frame is None:
        frame = generate_synthetic(d.N, m, seed=cfg.seed)
        m = summarize(frame)
        log.info("generated synthetic population of %d units", frame.N)
    mc = McConfig(
        replications=int(cfg.reps),
        n=d.n,
        seed=cfg.seed,
        estimators=_mc_specs(cfg, m, d),
        exact_mode=cfg.exact,
    )
    table = validate_first_order(frame, mc, m)
    if cfg.format == "markdown":
        return report.validation_to_markdown(table)
    return report.validation_to_csv(table, cfg.full_precision)


def _floats(text):
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _names(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


_CONVERT = {
    "n": int,
    "reps": int,
    "seed": int,
    "a": float,
    "b": float,
    "lambdas": _floats,
    "estimators": _names,
    "full_precision": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on"),
    "exact": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on"),
}
_ALIASES = {"lambda": "lambdas", "replications": "reps"}


def read_config_file(path) -> dict:
    """``key = value`` lines (an optional ``[run]`` header is allowed).

    Keys are the long flag names: population, summary, n, estimators,
    lambda, a, b, reps, seed, format, out, full_precision, exact.
    """
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    section = cp["run"] if cp.has_section("run") else cp[cp.sections()[0]]
    valid = {f.name for f in fields(RunConfig)} - {"mode"}
    out, problems = {}, []
    for key, raw in section.items():
        key = _ALIASES.get(key, key)
        if key not in valid:
            problems.append((key, "unknown config key"))
            continue
        try:
            out[key] = _CONVERT.get(key, str)(raw)
        except ValueError:
            problems.append((key, f"bad value {raw!r}"))
    if problems:
        raise ConfigError(problems)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="auxmean", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--format", choices=["csv", "markdown"], default=None)
    common.add_argument("--out", help="write report here instead of stdout")
    common.add_argument("--full-precision", action="store_true", default=None)
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--population", help="CSV file with header y,x")
    data.add_argument("--summary", help="N=..,n=..,ybar=..,xbar=..,cy=..,cx=..,rho=..,beta2x=.. or published:1|2")
    data.add_argument("--n", type=int, help="sample size (with --population)")
    data.add_argument("--estimators", type=_names, help="comma-separated names or 'all'")
    data.add_argument("--lambda", dest="lambdas", type=_floats, help="comma-separated λ values")
    data.add_argument("--a", type=float)
    data.add_argument("--b", type=float)
    data.add_argument("--seed", type=int)

    sub.add_parser("reproduce", parents=[common], help="recompute the published PRE tables")
    sub.add_parser("analytic", parents=[common, data], help="first-order PRE table for a population")
    mc = sub.add_parser("mc", parents=[common, data], help="Monte Carlo check of the first-order MSEs")
    mc.add_argument("--reps", type=int)
    mc.add_argument("--exact", action="store_true", default=None, help="enumerate all samples")
    return p


def _error(kind: str, exc: Exception, fields_=()):
    record = {"status": "error", "kind": kind, "message": str(exc), "fields": list(fields_)}
    print(json.dumps(record, ensure_ascii=False), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        values = read_config_file(args.config) if getattr(args, "config", None) else {}
        for f in fields(RunConfig):
            v = getattr(args, f.name, None)
            if v is not None:
                values[f.name] = v
        values["mode"] = args.command
        cfg = RunConfig(**values)
        text = run(cfg)
    except ConfigError as e:
        _error("config", e, e.fields)
        return EXIT_CONFIG
    except (ParseError, EmptyPopulation, DegenerateVariance, TargetInfeasible, DivisorNearZero, OSError) as e:
        _error("data", e)
        return EXIT_DATA
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
