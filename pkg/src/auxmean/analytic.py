"""Closed-form first-order MSEs, optimum weights, PRE and efficiency margins.

All functions take a :class:`~auxmean.sampling.MomentSummary` ``m`` and a
:class:`~auxmean.sampling.DesignParams` ``d``. MSEs are in squared y-units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivisorNearZero, EtaUndefined, ZeroMse
from .estimators import EstimatorSpec, Family, AuxKnowledge, variant_constants
from .sampling import DesignParams, MomentSummary


def theta_of(a: float, b: float, xbar: float) -> float:
    """θ = aX̄ / (aX̄ + b)."""
    den = a * xbar + b
    if den == 0:
        raise DivisorNearZero(f"aX̄ + b = 0 for a={a}, b={b}")
    return a * xbar / den


@dataclass(frozen=True)
class TransformConstants:
    theta: float
    eta: float
    gamma_star: float
    psi_star: float

    def __post_init__(self):
        for k in ("theta", "eta", "gamma_star", "psi_star"):
            if not math.isfinite(getattr(self, k)):
                raise DivisorNearZero(f"{k} is not finite")


def starred_constant(variant: str | int, index: int, m: MomentSummary) -> float:
    """γ_i* (variant I) or ψ_i* (variant II), evaluated at x̄ = X̄.

    Each starred constant is θ for the ``(a, b)`` behind the matching
    multiplier, e.g. γ_5* = X̄C_x/(X̄C_x + β₂(x)).
    """
    fam = Family.KADILAR_CINGI_I if str(variant).upper() in ("I", "1") else Family.KADILAR_CINGI_II
    a, b = variant_constants(fam, index, AuxKnowledge.from_summary(m))
    return theta_of(a, b, m.xbar)


def transform_constants(a: float, b: float, index: int, m: MomentSummary) -> TransformConstants:
    return TransformConstants(
        theta=theta_of(a, b, m.xbar),
        eta=eta_of(m),
        gamma_star=starred_constant("I", index, m),
        psi_star=starred_constant("II", index, m),
    )


def eta_of(m: MomentSummary) -> float:
    """η = X̄ / (X̄ + ρ)."""
    if m.xbar + m.rho == 0:
        raise EtaUndefined("X̄ + ρ = 0")
    return m.xbar / (m.xbar + m.rho)


def _scale(m, d):
    return d.f1 * m.ybar**2


def mse_mean(m: MomentSummary, d: DesignParams) -> float:
    return _scale(m, d) * m.cy**2


def mse_ratio(m: MomentSummary, d: DesignParams) -> float:
    return _scale(m, d) * (m.cy**2 + m.cx**2 - 2 * m.rho * m.cy * m.cx)


def theta_family_mse(form: str, theta: float, m: MomentSummary, d: DesignParams) -> float:
    """First-order MSE of ȳ·t(x̄) where t is the ratio or exponential transform with θ.

    ratio:       f1 Ȳ² (C_y² + θ²C_x² − 2θρC_yC_x)
    exponential: f1 Ȳ² (C_y² + θ²C_x²/4 − θρC_yC_x)
    """
    cy, cx, r = m.cy, m.cx, m.rho
    if form == "ratio":
        inner = cy**2 + theta**2 * cx**2 - 2 * theta * r * cy * cx
    elif form == "exponential":
        inner = cy**2 + theta**2 * cx**2 / 4 - theta * r * cy * cx
    else:
        raise ValueError(f"form must be 'ratio' or 'exponential', got {form!r}")
    return _scale(m, d) * inner


def mse_singh_tailor(m: MomentSummary, d: DesignParams) -> float:
    return theta_family_mse("ratio", eta_of(m), m, d)


def mse_bahl_tuteja(m: MomentSummary, d: DesignParams) -> float:
    return _scale(m, d) * (m.cy**2 + m.cx**2 / 4 - m.rho * m.cy * m.cx)


def mse_regression_family(m: MomentSummary, d: DesignParams) -> float:
    """Shared minimum of the regression, Khosnevisan and Singh exponential estimators."""
    return _scale(m, d) * m.cy**2 * (1 - m.rho**2)


def kc_mse(k: float, m: MomentSummary, d: DesignParams, form: str = "ratio") -> float:
    """f1 Ȳ² (k²C_x² + C_y²(1−ρ²)); ``form="exponential"`` uses k²C_x²/4."""
    kk = k**2 * m.cx**2
    if form == "exponential":
        kk /= 4
    elif form != "ratio":
        raise ValueError(f"form must be 'ratio' or 'exponential', got {form!r}")
    return _scale(m, d) * (kk + m.cy**2 * (1 - m.rho**2))


def mse_kadilar_cingi(variant: str | int, index: int, m: MomentSummary, d: DesignParams) -> float:
    return kc_mse(starred_constant(variant, index, m), m, d)


def mse_proposed_general(
    q1: float,
    q2: float,
    lam: float,
    theta: float,
    m: MomentSummary,
    d: DesignParams,
    theta_free_cross_term: bool = False,
) -> float:
    """First-order MSE of the proposed family at arbitrary weights.

    ``theta_free_cross_term=True`` drops θ from the ``(1+λ)ρC_yC_x`` term of the
    q1² bracket. The two readings agree at θ = 1; only the default one is
    stationary at :func:`optimum_weights` for θ ≠ 1.
    """
    Y, X, cy, cx, r, f1 = m.ybar, m.xbar, m.cy, m.cx, m.rho, d.f1
    t_cross = 1.0 if theta_free_cross_term else theta
    bracket = cy**2 + theta**2 * cx**2 * (1 + lam) ** 2 / 4 - (1 + lam) * t_cross * r * cy * cx
    return Y**2 * (q1 - 1) ** 2 + f1 * (
        q1**2 * Y**2 * bracket
        + q2**2 * X**2 * cx**2
        - 2 * q1 * q2 * Y * X * cx * (r * cy - (1 + lam) / 2 * theta * cx)
    )


@dataclass(frozen=True)
class OptimumWeights:
    q10: float
    q20: float
    lam: float
    theta: float


def _shrinkage(m, d):
    return d.f1 * m.cy**2 * (1 - m.rho**2)


def optimum_weights(lam: float, theta: float, m: MomentSummary, d: DesignParams) -> OptimumWeights:
    """Weights minimising :func:`mse_proposed_general` for fixed λ and θ."""
    xcx = m.xbar * m.cx
    if abs(xcx) < 1e-300:
        raise DivisorNearZero("X̄·C_x is zero")
    q10 = 1.0 / (1.0 + _shrinkage(m, d))
    q20 = q10 * (m.ybar / xcx) * (m.rho * m.cy - (1 + lam) / 2 * theta * m.cx)
    return OptimumWeights(q10=q10, q20=q20, lam=lam, theta=theta)


def msemin_proposed(m: MomentSummary, d: DesignParams) -> float:
    """Minimum MSE of the proposed (and Gupta-Shabbir) family; free of λ, a, b."""
    return mse_regression_family(m, d) / (1.0 + _shrinkage(m, d))


def pre(mse_reference: float, mse_estimator: float) -> float:
    """Percent relative efficiency, 100·reference/estimator."""
    if mse_estimator == 0:
        if mse_reference == 0:
            return 100.0
        raise ZeroMse("estimator MSE is zero")
    if mse_reference == mse_estimator:
        return 100.0
    return 100.0 * mse_reference / mse_estimator


@dataclass(frozen=True)
class MseReport:
    estimator: EstimatorSpec
    mse: float
    is_minimized: bool = False


def analytic_mse(spec: EstimatorSpec, m: MomentSummary, d: DesignParams) -> MseReport:
    """First-order MSE of ``spec`` at its own constants.

    Regression-slope families use the first-order equivalence of the sample
    slope with the population slope.
    """
    fam = spec.family
    if fam == Family.MEAN:
        v = mse_mean(m, d)
    elif fam == Family.RATIO:
        v = mse_ratio(m, d)
    elif fam == Family.SINGH_TAILOR:
        v = mse_singh_tailor(m, d)
    elif fam == Family.BAHL_TUTEJA:
        v = mse_bahl_tuteja(m, d)
    elif fam == Family.REGRESSION:
        return MseReport(spec, mse_regression_family(m, d), is_minimized=True)
    elif fam == Family.KHOSNEVISAN:
        # ȳ(1 + αθe₁)^(−g) ≈ ȳ(1 − gαθe₁)
        v = theta_family_mse("ratio", spec.g * spec.alpha * theta_of(spec.a, spec.b, m.xbar), m, d)
    elif fam == Family.SINGH_EXP:
        v = theta_family_mse("exponential", theta_of(spec.a, spec.b, m.xbar), m, d)
    elif fam in (Family.KADILAR_CINGI_I, Family.KADILAR_CINGI_II):
        if spec.variant_index is not None:
            a, b = variant_constants(fam, spec.variant_index, AuxKnowledge.from_summary(m))
        else:
            a, b = spec.a, spec.b
        v = kc_mse(theta_of(a, b, m.xbar), m, d)
    elif fam == Family.GUPTA_SHABBIR:
        v = mse_proposed_general(spec.w1, spec.w2, 1.0, theta_of(spec.a, spec.b, m.xbar), m, d)
    elif fam == Family.PROPOSED:
        v = mse_proposed_general(spec.q1, spec.q2, spec.lam, theta_of(spec.a, spec.b, m.xbar), m, d)
    else:  # pragma: no cover
        raise ValueError(f"unknown family {fam}")
    return MseReport(spec, max(v, 0.0))


_MINIMIZED = {
    Family.REGRESSION: mse_regression_family,
    Family.KHOSNEVISAN: mse_regression_family,
    Family.SINGH_EXP: mse_regression_family,
    Family.GUPTA_SHABBIR: msemin_proposed,
    Family.PROPOSED: msemin_proposed,
}


def minimum_mse(family: str | Family, m: MomentSummary, d: DesignParams) -> MseReport:
    """MSE of ``family`` with its optimal internal constants substituted."""
    family = Family(family)
    if family not in _MINIMIZED:
        raise ValueError(f"{family.value} has no tunable constants")
    return MseReport(EstimatorSpec(family), _MINIMIZED[family](m, d), is_minimized=True)


def optimal_spec(
    family: str | Family,
    m: MomentSummary,
    d: DesignParams,
    lam: float = 1.0,
    a: float = 1.0,
    b: float = 0.0,
    label: str = "",
) -> EstimatorSpec:
    """Proposed or Gupta-Shabbir spec carrying the optimum weights for ``(λ, a, b)``."""
    family = Family(family)
    if family == Family.GUPTA_SHABBIR:
        lam = 1.0
    w = optimum_weights(lam, theta_of(a, b, m.xbar), m, d)
    if family == Family.PROPOSED:
        return EstimatorSpec(Family.PROPOSED, a=a, b=b, lam=lam, q1=w.q10, q2=w.q20, label=label)
    if family == Family.GUPTA_SHABBIR:
        return EstimatorSpec(Family.GUPTA_SHABBIR, a=a, b=b, w1=w.q10, w2=w.q20, label=label)
    raise ValueError(f"{family.value} has no optimum weights")


@dataclass(frozen=True)
class Margin:
    comparison: str
    against: str
    margin: float
    holds: bool


def efficiency_margins(m: MomentSummary, d: DesignParams, index: int = 1) -> list[Margin]:
    """The seven comparisons of the proposed minimum MSE against other estimators.

    Each margin is a quantity with the sign of MSE(other) − min MSE(proposed):
    the plain difference against the ratio and exponential estimators, and a
    positive multiple of it elsewhere (the factor ``1 + f1C_y²(1−ρ²)`` is
    cleared from the denominator). ``index`` picks the Kadilar-Cingi multiplier.
    The Gupta-Shabbir margin is identically zero.
    """
    f1, Y, cy, cx, r = d.f1, m.ybar, m.cy, m.cx, m.rho
    D = f1 * cy**2 * (1 - r**2)
    mmin_inner = cy**2 * (1 - r**2) / (1 + D)
    g = starred_constant("I", index, m)
    p = starred_constant("II", index, m)
    tail = (f1 * Y * cy**2 * (1 - r**2)) ** 2
    out = [
        ("vs_mean", "mean", f1 * cy**2 * (1 - r**2) + r**2),
        ("vs_ratio", "ratio", f1 * Y**2 * ((cy**2 + cx**2 - 2 * r * cy * cx) - mmin_inner)),
        ("vs_exponential", "bahl_tuteja", f1 * Y**2 * ((cy**2 + cx**2 / 4 - r * cy * cx) - mmin_inner)),
        ("vs_kadilar_cingi_1", "kadilar_cingi_1", f1 * Y**2 * g**2 * cx**2 * (1 + D) + tail),
        ("vs_kadilar_cingi_2", "kadilar_cingi_2", f1 * Y**2 * p**2 * cx**2 * (1 + D) + tail),
        ("vs_regression", "regression", tail),
        ("vs_gupta_shabbir", "gupta_shabbir", 0.0),
    ]
    return [Margin(c, who, v, v >= 0) for c, who, v in out]
