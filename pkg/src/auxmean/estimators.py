"""Point estimators of the population mean that use a known auxiliary mean.

Every family is written once as a vectorized function of the sample
statistics ``(ybar_s, xbar_s, slope)`` so the same code serves single draws
(:func:`estimate_point`) and batched Monte Carlo replications
(:func:`evaluate`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivisorNearZero
from .sampling import MomentSummary, SampleDraw

DEFAULT_EPS = 1e-12


class Family(str, enum.Enum):
    MEAN = "mean"
    RATIO = "ratio"
    SINGH_TAILOR = "singh_tailor"
    KHOSNEVISAN = "khosnevisan"
    BAHL_TUTEJA = "bahl_tuteja"
    SINGH_EXP = "singh_exp"
    KADILAR_CINGI_I = "kadilar_cingi_1"
    KADILAR_CINGI_II = "kadilar_cingi_2"
    GUPTA_SHABBIR = "gupta_shabbir"
    REGRESSION = "regression"
    PROPOSED = "proposed"


DESCRIPTIONS = {
    Family.MEAN: "ȳ (mean per unit)",
    Family.RATIO: "ȳ·X̄/x̄ (classical ratio)",
    Family.SINGH_TAILOR: "ȳ·(X̄+ρ)/(x̄+ρ)",
    Family.KHOSNEVISAN: "ȳ·[(aX̄+b)/(α(ax̄+b)+(1−α)(aX̄+b))]^g",
    Family.BAHL_TUTEJA: "ȳ·exp[(X̄−x̄)/(X̄+x̄)]",
    Family.SINGH_EXP: "ȳ·exp[(aX̄−ax̄)/(aX̄+ax̄+2b)]",
    Family.KADILAR_CINGI_I: "[ȳ+b̂(X̄−x̄)]·γ_i",
    Family.KADILAR_CINGI_II: "[ȳ+b̂(X̄−x̄)]·ψ_i",
    Family.GUPTA_SHABBIR: "[w1·ȳ+w2(X̄−x̄)]·(aX̄+b)/(ax̄+b)",
    Family.REGRESSION: "ȳ+b̂(X̄−x̄)",
    Family.PROPOSED: "[q1·ȳ+q2(X̄−x̄)]·[λ(aX̄+b)/(ax̄+b)+(1−λ)exp{(aX̄−ax̄)/(aX̄+ax̄+2b)}]",
}


@dataclass(frozen=True)
class AuxKnowledge:
    """Known population quantities of the auxiliary variable."""

    xbar_pop: float
    cx: float
    rho: float
    beta2x: float

    @classmethod
    def from_summary(cls, m: MomentSummary) -> "AuxKnowledge":
        return cls(xbar_pop=m.xbar, cx=m.cx, rho=m.rho, beta2x=m.beta2x)


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator family plus its constants.

    Fields a family does not use are ignored:

    * ``mean``, ``ratio``, ``singh_tailor``, ``bahl_tuteja``, ``regression``: none.
    * ``khosnevisan``: ``a``, ``b``, ``g``, ``alpha``.
    * ``singh_exp``: ``a``, ``b``.
    * ``kadilar_cingi_1`` / ``kadilar_cingi_2``: ``variant_index`` (1..5), or
      ``a``, ``b`` directly when ``variant_index`` is None.
    * ``gupta_shabbir``: ``w1``, ``w2``, ``a``, ``b``.
    * ``proposed``: ``q1``, ``q2``, ``lam``, ``a``, ``b``.
    """

    family: Family
    a: float = 1.0
    b: float = 0.0
    g: float = 1.0
    alpha: float = 1.0
    lam: float = 1.0
    q1: float = 1.0
    q2: float = 0.0
    w1: float = 1.0
    w2: float = 0.0
    variant_index: int | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.variant_index is not None and self.variant_index not in range(1, 6):
            raise ValueError(f"variant_index must be 1..5, got {self.variant_index}")

    @property
    def name(self) -> str:
        return self.label or self.family.value

    def with_(self, **kw) -> "EstimatorSpec":
        return replace(self, **kw)


def variant_constants(family: Family, index: int, aux: AuxKnowledge) -> tuple[float, float]:
    """``(a, b)`` pair behind the ``index``-th multiplier of a Kadilar-Cingi class."""
    cx, rho, b2 = aux.cx, aux.rho, aux.beta2x
    if family == Family.KADILAR_CINGI_I:
        table = {1: (1.0, 0.0), 2: (1.0, cx), 3: (1.0, b2), 4: (b2, cx), 5: (cx, b2)}
    elif family == Family.KADILAR_CINGI_II:
        table = {1: (1.0, rho), 2: (cx, rho), 3: (rho, cx), 4: (b2, rho), 5: (rho, b2)}
    else:
        raise ValueError(f"{family} has no variant multipliers")
    return table[index]


class _Guard:
    """Collects per-element failures instead of raising, for batched use."""

    def __init__(self, shape, eps):
        self.bad = np.zeros(shape, dtype=bool)
        self.eps = eps

    def denom(self, value, scale):
        value = np.asarray(value, dtype=float)
        mag = np.abs(value)
        # an exact zero always trips, even when the population scale is zero
        self.bad |= ~((mag >= self.eps * abs(scale)) & (mag > 0))
        return np.where(self.bad, 1.0, value)


def _affine_ratio(a, b, X, xbar, guard):
    top = a * X + b
    return top / guard.denom(a * xbar + b, top)


def _exp_factor(a, b, X, xbar, guard):
    den = guard.denom(a * X + a * xbar + 2 * b, a * X + b)
    return np.exp((a * X - a * xbar) / den)


def _evaluate(spec, ybar, xbar, slope, aux, eps):
    ybar = np.asarray(ybar, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    slope = np.asarray(slope, dtype=float)
    shape = np.broadcast(ybar, xbar, slope).shape
    guard = _Guard(shape, eps)
    X = aux.xbar_pop
    fam = spec.family
    a, b = spec.a, spec.b

    if fam == Family.MEAN:
        est = ybar + 0.0 * xbar
    elif fam == Family.RATIO:
        est = ybar * (X / guard.denom(xbar, X))
    elif fam == Family.SINGH_TAILOR:
        est = ybar * ((X + aux.rho) / guard.denom(xbar + aux.rho, X + aux.rho))
    elif fam == Family.KHOSNEVISAN:
        top = a * X + b
        den = guard.denom(spec.alpha * (a * xbar + b) + (1 - spec.alpha) * top, top)
        with np.errstate(invalid="ignore"):
            est = ybar * (top / den) ** spec.g
    elif fam == Family.BAHL_TUTEJA:
        est = ybar * np.exp((X - xbar) / guard.denom(X + xbar, X))
    elif fam == Family.SINGH_EXP:
        top = a * X + b
        bot = a * xbar + b
        est = ybar * np.exp((top - bot) / guard.denom(top + bot, top))
    elif fam in (Family.KADILAR_CINGI_I, Family.KADILAR_CINGI_II):
        if spec.variant_index is not None:
            a, b = variant_constants(fam, spec.variant_index, aux)
        guard.bad |= ~np.isfinite(slope)
        reg = ybar + np.where(np.isfinite(slope), slope, 0.0) * (X - xbar)
        est = reg * _affine_ratio(a, b, X, xbar, guard)
    elif fam == Family.GUPTA_SHABBIR:
        est = (spec.w1 * ybar + spec.w2 * (X - xbar)) * _affine_ratio(a, b, X, xbar, guard)
    elif fam == Family.REGRESSION:
        guard.bad |= ~np.isfinite(slope)
        est = ybar + np.where(np.isfinite(slope), slope, 0.0) * (X - xbar)
    elif fam == Family.PROPOSED:
        lam = spec.lam
        if lam == 1:
            factor = _affine_ratio(a, b, X, xbar, guard)
        elif lam == 0:
            factor = _exp_factor(a, b, X, xbar, guard)
        else:
            factor = lam * _affine_ratio(a, b, X, xbar, guard) + (1 - lam) * _exp_factor(
                a, b, X, xbar, guard
            )
        est = (spec.q1 * ybar + spec.q2 * (X - xbar)) * factor
    else:  # pragma: no cover
        raise ValueError(f"unknown family {fam}")
    est = np.broadcast_to(est, shape)
    return est, guard.bad | ~np.isfinite(est)


def evaluate(
    spec: EstimatorSpec,
    ybar_s,
    xbar_s,
    slope,
    aux: AuxKnowledge,
    eps: float = DEFAULT_EPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched evaluation.

    Returns ``(estimates, failed)``; ``estimates`` holds NaN wherever ``failed``
    is True (a denominator guard tripped or the result is not finite).
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        est, bad = _evaluate(spec, ybar_s, xbar_s, slope, aux, eps)
    return np.where(bad, np.nan, est), bad


def estimate_point(
    spec: EstimatorSpec, draw: SampleDraw, aux: AuxKnowledge, eps: float = DEFAULT_EPS
) -> float:
    """Point estimate of Ȳ from one sample.

    Raises
    ------
    DivisorNearZero
        If a family-specific denominator is numerically zero for this draw,
        or the sample slope is undefined for the regression-type families.
    """
    est, bad = _evaluate(spec, draw.ybar_s, draw.xbar_s, draw.b, aux, eps)
    if bool(bad):
        raise DivisorNearZero(f"{spec.name}: unusable sample (x̄_s={draw.xbar_s})")
    return float(est)


def transformation_factor(
    family: Family,
    variant_index: int | None,
    xbar_s: float,
    aux: AuxKnowledge,
    a: float = 1.0,
    b: float = 0.0,
    eps: float = DEFAULT_EPS,
) -> float:
    """The γ_i / ψ_i multiplier ``(aX̄ + b)/(a x̄_s + b)`` at a sample mean.

    With ``variant_index`` set, ``(a, b)`` come from the family's variant list;
    otherwise the given ``a``, ``b`` are used.
    """
    family = Family(family)
    if variant_index is not None:
        a, b = variant_constants(family, variant_index, aux)
    top = a * aux.xbar_pop + b
    den = a * xbar_s + b
    if not abs(den) >= eps * abs(top) or top == 0:
        raise DivisorNearZero(f"a·x̄+b = {den} is numerically zero")
    return top / den


ESTIMATOR_NAMES = [f.value for f in Family]


def named_spec(name: str, **kw) -> EstimatorSpec:
    """Spec for a stable string name, e.g. ``named_spec("proposed", lam=0)``."""
    try:
        fam = Family(name)
    except ValueError:
        raise ValueError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATOR_NAMES)}") from None
    return EstimatorSpec(family=fam, **kw)

