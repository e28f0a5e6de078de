"""PRE tables in the layout of the published efficiency table, plus CSV/markdown I/O.

Rows of a :class:`PreTable` are grouped by estimator family and indexed by
the transformation constants ``(a, b)`` and λ. Every PRE is relative to the
mean-per-unit estimator.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from . import analytic
from .sampling import DesignParams, MomentSummary, design_params

TOL_PRE = 1e-3
TOL_WEIGHT = 1e-3

# Published population constants: (N, n, Ȳ, X̄, C_y, C_x, ρ, β₂(x)).
POPULATIONS = {
    1: (200, 50, 500.0, 25.0, 15.0, 2.0, 0.90, 50.0),
    2: (278, 30, 39.068, 25.111, 1.445, 1.620, 0.721, 38.890),
}


def published_population(k: int) -> tuple[MomentSummary, DesignParams]:
    N, n, Y, X, cy, cx, rho, b2 = POPULATIONS[k]
    return MomentSummary.from_coefficients(Y, X, cy, cx, rho, b2), design_params(N, n)


# name -> (a expression, b expression)
TRANSFORMS = {
    "a1_b0": ("1", "0"),
    "a1_bcx": ("1", "C_x"),
    "a1_bb2": ("1", "β₂(x)"),
    "ab2_bcx": ("β₂(x)", "C_x"),
    "acx_bb2": ("C_x", "β₂(x)"),
}

GROUPS = ("mean", "ratio", "singh_tailor", "kadilar_cingi", "regression", "gupta_shabbir", "proposed")

_SYMBOLS = {
    "ratio_a1_b0": "ȳ_CR (classical ratio / Bahl-Tuteja at λ=0)",
    "ratio_a1_bcx": "ȳ_SD",
    "ratio_a1_bb2": "ȳ_SK",
    "ratio_ab2_bcx": "ȳ_US1",
    "ratio_acx_bb2": "ȳ_US2",
}

# (label, λ) -> (population 1, population 2) as printed; None where blank.
PRINTED = {
    ("mean", 1.0): (100.0, 100.0),
    ("mean", 0.0): (100.0, 100.0),
    ("ratio_a1_b0", 1.0): (128.571, 156.190),
    ("ratio_a1_b0", 0.0): (113.065, 197.667),
    ("ratio_a1_bcx", 1.0): (126.100, 169.350),
    ("ratio_a1_bcx", 0.0): (112.019, 193.066),
    ("ratio_a1_bb2", 1.0): (108.463, 178.829),
    ("ratio_a1_bb2", 0.0): (104.113, 136.757),
    ("ratio_ab2_bcx", 1.0): (128.517, 156.553),
    ("ratio_ab2_bcx", 0.0): (113.043, 197.550),
    ("ratio_acx_bb2", 1.0): (113.065, 199.197),
    ("ratio_acx_bb2", 0.0): (106.257, 149.504),
    ("singh_tailor", 1.0): (127.404, 162.289),
    ("singh_tailor", 0.0): (112.573, 195.631),
    ("kci_a1_b0", 1.0): (481.283, 57.570),
    ("kci_a1_b0", 0.0): (514.286, 125.884),
    ("kci_a1_bcx", 1.0): (487.231, 62.920),
    ("kci_a1_bcx", 0.0): (515.968, 132.022),
    ("kci_a1_bb2", 1.0): (520.900, 148.446),
    ("kci_a1_bb2", 0.0): (524.951, 189.204),
    ("kci_ab2_bcx", 1.0): (481.415, 57.707),
    ("kci_ab2_bcx", 0.0): (514.323, 126.049),
    ("kci_acx_bb2", 1.0): (514.286, 123.659),
    ("kci_acx_bb2", 0.0): (523.258, 177.845),
    ("regression", None): (526.316, 208.264),
    ("gupta_shabbir", None): (863.816, 214.473),
    ("proposed", 1.0): (863.816, 214.473),
    ("proposed", 0.0): (863.816, 214.473),
}

# (name, λ) -> (population 1, population 2)
PRINTED_WEIGHTS = {
    ("q10", 1.0): (0.610, 0.971),
    ("q20", 1.0): (70.689, -0.540),
}

# (label, λ, population) -> note
DOCUMENTED_MISMATCHES = {
    ("kci_acx_bb2", 0.0, 1): "printed 523.258; exact value 523.2558 (last digits misprinted)",
    ("q20", 1.0, 1): "printed 70.689; direct evaluation gives 70.0685 (suspected digit transposition)",
}


@dataclass(frozen=True)
class PreRow:
    label: str
    description: str
    a: str
    b: str
    lam: float | None
    pre: float
    printed: float | None = None
    status: str = ""


@dataclass(frozen=True)
class WeightCell:
    name: str
    lam: float
    value: float
    printed: float | None = None
    status: str = ""


@dataclass
class PreTable:
    population: str
    rows: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    baseline: str = "mean"

    def row(self, label: str, lam: float | None = None) -> PreRow:
        for r in self.rows:
            if r.label == label and (lam is None or r.lam == lam):
                return r
        raise KeyError((label, lam))

    def weight(self, name: str, lam: float) -> WeightCell:
        for w in self.weights:
            if w.name == name and w.lam == lam:
                return w
        raise KeyError((name, lam))


def _const(expr: str, m: MomentSummary) -> float:
    named = {"C_x": m.cx, "β₂(x)": m.beta2x, "beta2x": m.beta2x, "ρ": m.rho, "rho": m.rho}
    return named[expr] if expr in named else float(expr)


def pre_table(
    m: MomentSummary,
    d: DesignParams,
    lambdas=(1.0, 0.0),
    transforms: dict | None = None,
    groups=GROUPS,
    population: str = "",
) -> PreTable:
    """PRE of each estimator row against the mean-per-unit estimator.

    Rows are the ratio-type member ``q1=1, q2=0`` of the proposed family for
    each ``(a, b)``, the Singh-Tailor row ``(a, b) = (1, ρ)``, the
    Kadilar-Cingi rows (weights ``1`` and the regression slope), the
    regression and Gupta-Shabbir minima, and the proposed minimum, each at
    every λ where λ applies. ``transforms`` maps a row suffix to
    ``(a, b)`` written as numbers or one of ``C_x``, ``β₂(x)``, ``ρ``.
    """
    transforms = TRANSFORMS if transforms is None else transforms
    unknown = set(groups) - set(GROUPS)
    if unknown:
        raise ValueError(f"unknown estimator groups: {sorted(unknown)}")
    base = analytic.mse_mean(m, d)
    lambdas = [float(v) for v in lambdas]
    rows: list[PreRow] = []

    def add(label, desc, a, b, lam, mse):
        rows.append(PreRow(label, desc, a, b, lam, analytic.pre(base, mse)))

    def theta(a, b):
        return analytic.theta_of(_const(a, m), _const(b, m), m.xbar)

    if "mean" in groups:
        for lam in lambdas:
            add("mean", "ȳ (mean per unit, baseline)", "", "", lam, base)
    if "ratio" in groups:
        for key, (a, b) in transforms.items():
            label = f"ratio_{key}"
            for lam in lambdas:
                mse = analytic.mse_proposed_general(1.0, 0.0, lam, theta(a, b), m, d)
                add(label, _SYMBOLS.get(label, "ratio-type, q1=1, q2=0"), a, b, lam, mse)
    if "singh_tailor" in groups:
        for lam in lambdas:
            mse = analytic.mse_proposed_general(1.0, 0.0, lam, theta("1", "ρ"), m, d)
            add("singh_tailor", "ȳ_ST", "1", "ρ", lam, mse)
    if "kadilar_cingi" in groups:
        for key, (a, b) in transforms.items():
            for lam in lambdas:
                mse = analytic.kc_mse(theta(a, b) * (1 + lam) / 2, m, d)
                add(f"kci_{key}", "ȳ_KCI, q2 = S_yx/S_x²", a, b, lam, mse)
    if "regression" in groups:
        add("regression", "ȳ_reg", "", "", None, analytic.mse_regression_family(m, d))
    if "gupta_shabbir" in groups:
        add("gupta_shabbir", "ȳ_GS at optimum weights", "", "", None, analytic.msemin_proposed(m, d))
    if "proposed" in groups:
        for lam in lambdas:
            w = analytic.optimum_weights(lam, 1.0, m, d)
            mse = analytic.mse_proposed_general(w.q10, w.q20, lam, 1.0, m, d)
            add("proposed", "ȳ_λ at optimum weights (a=1, b=0)", "1", "0", lam, mse)

    weights = []
    if "proposed" in groups:
        for lam in lambdas:
            w = analytic.optimum_weights(lam, 1.0, m, d)
            weights.append(WeightCell("q10", lam, w.q10))
            weights.append(WeightCell("q20", lam, w.q20))
    return PreTable(population=population, rows=rows, weights=weights)


def _status(value, printed, tol, key):
    if printed is None:
        return ""
    if abs(value - printed) <= tol + 1e-12:
        return "match"
    return "mismatch-documented" if key in DOCUMENTED_MISMATCHES else "mismatch"


def reproduce_tables() -> tuple[PreTable, PreTable]:
    """Recompute the published PRE grid from the published population constants.

    Each cell carries the printed value and a match flag at ±0.001
    (±0.001 for the weights, which are printed to three decimals).
    """
    out = []
    for k in (1, 2):
        m, d = published_population(k)
        t = pre_table(m, d, population=f"population_{k}")
        rows = []
        for r in t.rows:
            p = PRINTED.get((r.label, r.lam))
            printed = None if p is None else p[k - 1]
            rows.append(
                PreRow(r.label, r.description, r.a, r.b, r.lam, r.pre, printed,
                       _status(r.pre, printed, TOL_PRE, (r.label, r.lam, k)))
            )
        weights = []
        for w in t.weights:
            p = PRINTED_WEIGHTS.get((w.name, w.lam))
            printed = None if p is None else p[k - 1]
            weights.append(
                WeightCell(w.name, w.lam, w.value, printed,
                           _status(w.value, printed, TOL_WEIGHT, (w.name, w.lam, k)))
            )
        out.append(PreTable(t.population, rows, weights))
    return out[0], out[1]


def mismatch_note(label: str, lam, population: int) -> str:
    return DOCUMENTED_MISMATCHES.get((label, lam, population), "")


# --------------------------------------------------------------------------
# serialization

CSV_COLUMNS = ["population", "kind", "label", "description", "a", "b", "lambda", "value", "printed", "status"]


def _fmt(v, digits, full):
    if v is None:
        return ""
    if full:
        return repr(float(v))
    return f"{v:.{digits}f}"


def _fmt_lam(lam):
    return "" if lam is None else repr(float(lam))


def tables_to_csv(tables, full_precision: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for t in tables:
        for r in t.rows:
            w.writerow([t.population, "pre", r.label, r.description, r.a, r.b, _fmt_lam(r.lam),
                        _fmt(r.pre, 3, full_precision), _fmt(r.printed, 3, full_precision), r.status])
        for c in t.weights:
            w.writerow([t.population, "weight", c.name, "", "", "", _fmt_lam(c.lam),
                        _fmt(c.value, 6, full_precision), _fmt(c.printed, 3, full_precision), c.status])
    return buf.getvalue()


def tables_from_csv(text: str) -> list[PreTable]:
    """Inverse of :func:`tables_to_csv`; population order is preserved."""
    tables: dict[str, PreTable] = {}
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    for rec in reader:
        t = tables.setdefault(rec["population"], PreTable(rec["population"]))
        lam = float(rec["lambda"]) if rec["lambda"] else None
        printed = float(rec["printed"]) if rec["printed"] else None
        if rec["kind"] == "pre":
            t.rows.append(PreRow(rec["label"], rec["description"], rec["a"], rec["b"], lam,
                                 float(rec["value"]), printed, rec["status"]))
        elif rec["kind"] == "weight":
            t.weights.append(WeightCell(rec["label"], lam, float(rec["value"]), printed, rec["status"]))
        else:
            raise ValueError(f"unknown row kind {rec['kind']!r}")
    return list(tables.values())


def tables_to_markdown(tables) -> str:
    lines = []
    for t in tables:
        lams = []
        for r in t.rows:
            if r.lam is not None and r.lam not in lams:
                lams.append(r.lam)
        lines.append(f"### {t.population or 'population'} (PRE vs {t.baseline})")
        lines.append("")
        head = ["estimator", "a", "b"] + [f"λ={lam:g}" for lam in lams or [None]] + ["flags"]
        lines.append("| " + " | ".join(head) + " |")
        lines.append("|" + "---|" * len(head))
        seen = []
        for r in t.rows:
            if r.label in seen:
                continue
            seen.append(r.label)
            same = {x.lam: x for x in t.rows if x.label == r.label}
            cols = lams or [None]
            cells, flags = [], []
            for i, lam in enumerate(cols):
                hit = same.get(lam) or (same.get(None) if i == 0 else None)
                if hit is None:
                    cells.append("--")
                    continue
                cells.append(f"{hit.pre:.3f}")
                if hit.status and hit.status != "match":
                    flags.append(f"{hit.status} (printed {hit.printed:.3f})")
            lines.append("| " + " | ".join([r.label, r.a, r.b] + cells + ["; ".join(flags)]) + " |")
        if t.weights:
            lines.append("")
            lines.append("| weight | λ | value | printed | status |")
            lines.append("|---|---|---|---|---|")
            for c in t.weights:
                printed = "" if c.printed is None else f"{c.printed:.3f}"
                lines.append(f"| {c.name} | {c.lam:g} | {c.value:.6f} | {printed} | {c.status} |")
        lines.append("")
    return "\n".join(lines)



MC_NOTE = (
    "Monte Carlo tolerances (5% relative MSE agreement, ordering agreement) are "
    "package policy; no simulation protocol is prescribed by the source method."
)


def _g(v, full):
    return repr(float(v)) if full else f"{v:.6g}"


def validation_to_csv(table, full_precision: bool = False) -> str:
    """Three blank-line separated CSV blocks: results, orderings, margins."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["estimator", "family", "draws", "failed_draws", "emp_mean", "emp_bias",
                "emp_mse", "emp_mse_se", "analytic_mse", "rel_deviation"])
    for r in table.results:
        w.writerow([r.estimator.name, r.estimator.family.value, r.draws, r.failed_draws,
                    _g(r.emp_mean, full_precision), _g(r.emp_bias, full_precision),
                    _g(r.emp_mse, full_precision), _g(r.emp_mse_se, full_precision),
                    _g(r.analytic_mse, full_precision), _g(r.rel_deviation, full_precision)])
    buf.write("\n")
    w.writerow(["first", "second", "analytic_first_larger", "empirical_first_larger", "agrees"])
    for o in table.orderings:
        w.writerow([o.first, o.second, o.analytic_first_larger, o.empirical_first_larger, o.agrees])
    buf.write("\n")
    w.writerow(["comparison", "against", "margin", "holds"])
    for mg in table.margins:
        w.writerow([mg.comparison, mg.against, _g(mg.margin, full_precision), mg.holds])
    return buf.getvalue()


def validation_to_markdown(table) -> str:
    lines = ["### Monte Carlo vs first-order MSE", "",
             "| estimator | draws | failed | emp MSE | s.e. | analytic MSE | rel. dev. | emp bias |",
             "|---|---|---|---|---|---|---|---|"]
    for r in table.results:
        lines.append(
            f"| {r.estimator.name} | {r.draws} | {r.failed_draws} | {r.emp_mse:.6g} | "
            f"{r.emp_mse_se:.3g} | {r.analytic_mse:.6g} | {r.rel_deviation:+.4f} | {r.emp_bias:.4g} |"
        )
    lines += ["", f"Ordering agreement: {'all pairs agree' if table.ordering_matches else 'DISAGREEMENT'}", ""]
    lines += ["| first | second | analytic larger | empirical larger | agrees |", "|---|---|---|---|---|"]
    for o in table.orderings:
        lines.append(f"| {o.first} | {o.second} | {o.analytic_first_larger} | "
                     f"{o.empirical_first_larger} | {o.agrees} |")
    lines += ["", "| comparison | against | margin | holds |", "|---|---|---|---|"]
    for mg in table.margins:
        lines.append(f"| {mg.comparison} | {mg.against} | {mg.margin:.6g} | {mg.holds} |")
    lines += ["", f"_{MC_NOTE}_", ""]
    return "\n".join(lines)
