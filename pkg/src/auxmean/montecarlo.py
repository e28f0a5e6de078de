"""Replicated SRSWOR simulation and exact enumeration against the analytic MSEs.

Replications are processed in fixed-size blocks. Block ``j`` draws from its
own generator seeded by ``SeedSequence(seed, spawn_key=(j,))``, so a result
never depends on the order in which blocks are run. Per-block partial sums are
merged with :func:`math.fsum`, which is exactly rounded and therefore
independent of merge order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

from . import analytic
from .errors import InvalidDesign, TargetInfeasible
from .estimators import DEFAULT_EPS, AuxKnowledge, EstimatorSpec, Family, evaluate
from .sampling import (
    ENUMERATION_CAP,
    MomentSummary,
    PopulationFrame,
    design_params,
    enumerate_index_matrix,
    partial_fisher_yates,
    sample_slope,
    summarize,
)

BLOCK_SIZE = 4096
EXACT_CHUNK = 65536


@dataclass(frozen=True)
class McConfig:
    replications: int
    n: int
    seed: int
    estimators: tuple
    exact_mode: bool = False
    block_size: int = BLOCK_SIZE
    eps: float = DEFAULT_EPS
    cap: int = ENUMERATION_CAP

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if int(self.replications) < 1:
            raise InvalidDesign(f"replications must be >= 1, got {self.replications}")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")


@dataclass
class _Moments:
    """Mergeable sums for one estimator."""

    s1: list = field(default_factory=list)
    s2: list = field(default_factory=list)
    s4: list = field(default_factory=list)
    count: int = 0
    failed: int = 0

    def add(self, est: np.ndarray, bad: np.ndarray, target: float):
        ok = est[~bad]
        err2 = (ok - target) ** 2
        self.s1.append(float(np.sum(ok)))
        self.s2.append(float(np.sum(err2)))
        self.s4.append(float(np.sum(err2 * err2)))
        self.count += int(ok.size)
        self.failed += int(bad.sum())

    def merge(self, other: "_Moments") -> "_Moments":
        return _Moments(
            self.s1 + other.s1,
            self.s2 + other.s2,
            self.s4 + other.s4,
            self.count + other.count,
            self.failed + other.failed,
        )


@dataclass(frozen=True)
class EmpiricalResult:
    estimator: EstimatorSpec
    emp_mean: float
    emp_mse: float
    emp_bias: float
    analytic_mse: float
    rel_deviation: float
    failed_draws: int
    draws: int
    emp_mse_se: float


def _finish(spec, acc: _Moments, ybar_pop: float, analytic_mse: float) -> EmpiricalResult:
    if acc.count == 0:
        nan = math.nan
        return EmpiricalResult(spec, nan, nan, nan, analytic_mse, nan, acc.failed, 0, nan)
    k = acc.count
    mean = math.fsum(acc.s1) / k
    mse = math.fsum(acc.s2) / k
    m4 = math.fsum(acc.s4) / k
    se = math.sqrt(max(m4 - mse**2, 0.0) / k)
    if analytic_mse == 0:
        rel = 0.0 if mse == 0 else math.inf
    else:
        rel = (mse - analytic_mse) / analytic_mse
    return EmpiricalResult(spec, mean, mse, mean - ybar_pop, analytic_mse, rel, acc.failed, k, se)


def _block_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(j,))))


def _index_batches(frame: PopulationFrame, cfg: McConfig):
    N = frame.N
    if cfg.exact_mode:
        idx = enumerate_index_matrix(N, cfg.n, cfg.cap)
        for start in range(0, idx.shape[0], EXACT_CHUNK):
            yield idx[start : start + EXACT_CHUNK]
        return
    R = int(cfg.replications)
    nblocks = -(-R // cfg.block_size)
    for j in range(nblocks):
        size = min(cfg.block_size, R - j * cfg.block_size)
        yield partial_fisher_yates(_block_rng(cfg.seed, j), N, cfg.n, size)


def sample_statistics(frame: PopulationFrame, idx: np.ndarray):
    """Per-row sample means and slope for an ``(R, n)`` index array."""
    ys = frame.y[idx]
    xs = frame.x[idx]
    return ys.mean(axis=1), xs.mean(axis=1), sample_slope(ys, xs)


def per_draw_estimates(frame: PopulationFrame, cfg: McConfig, aux: AuxKnowledge | None = None):
    """Estimates of every configured estimator on every draw, shape ``(k, R)``.

    Draws are shared across estimators. Intended for small runs and tests.
    """
    aux = aux or AuxKnowledge.from_summary(summarize(frame))
    rows = [[] for _ in cfg.estimators]
    for idx in _index_batches(frame, cfg):
        ybar, xbar, slope = sample_statistics(frame, idx)
        for k, spec in enumerate(cfg.estimators):
            rows[k].append(evaluate(spec, ybar, xbar, slope, aux, cfg.eps)[0])
    return np.array([np.concatenate(r) for r in rows])


def run_mc(
    frame: PopulationFrame, cfg: McConfig, summary: MomentSummary | None = None
) -> list[EmpiricalResult]:
    """Empirical mean, bias and MSE of each estimator over SRSWOR draws.

    All estimators see the same draws. Draws on which an estimator's
    denominator guard trips are excluded for that estimator only and counted
    in ``failed_draws``. In exact mode every ``n``-subset is visited once and
    ``replications`` is ignored.
    """
    d = design_params(frame.N, cfg.n)
    m = summary or summarize(frame)
    aux = AuxKnowledge.from_summary(m)
    accs = [_Moments() for _ in cfg.estimators]
    for idx in _index_batches(frame, cfg):
        ybar, xbar, slope = sample_statistics(frame, idx)
        for acc, spec in zip(accs, cfg.estimators):
            est, bad = evaluate(spec, ybar, xbar, slope, aux, cfg.eps)
            acc.add(est, bad, m.ybar)
    return [
        _finish(spec, acc, m.ybar, analytic.analytic_mse(spec, m, d).mse)
        for spec, acc in zip(cfg.estimators, accs)
    ]


# --------------------------------------------------------------------------
# synthetic populations


def _pearson(u, v):
    du = u - u.mean()
    dv = v - v.mean()
    return float(du @ dv / math.sqrt((du @ du) * (dv @ dv)))


def generate_synthetic(
    nunits: int,
    target: MomentSummary,
    marginal: str = "gaussian-copula-lognormal-x",
    seed: int = 0,
    max_attempts: int = 25,
    rho_tol: float = 0.03,
) -> PopulationFrame:
    """Population of ``nunits`` units with approximately the target moments.

    ``x`` is lognormal and ``y`` Gaussian, coupled through a Gaussian copula.
    The copula correlation is solved on the drawn normals so the realized ρ
    hits the target when attainable. Both columns are then rescaled affinely,
    which fixes Ȳ, X̄, C_y and C_x exactly and leaves ρ unchanged. An attempt
    is rejected if ρ misses by more than ``rho_tol`` or the rescaled ``x`` is
    not strictly positive.
    """
    if marginal != "gaussian-copula-lognormal-x":
        raise ValueError(f"unsupported marginal {marginal!r}")
    if nunits < 3:
        raise TargetInfeasible("need at least 3 units")
    if not (target.cy > 0 and target.cx > 0 and target.ybar > 0 and target.xbar > 0):
        raise TargetInfeasible("target requires positive means and CVs")
    if not abs(target.rho) < 1:
        raise TargetInfeasible("target requires |rho| < 1")

    children = np.random.SeedSequence(seed).spawn(max_attempts)
    for attempt, child in enumerate(children):
        rng = np.random.default_rng(child)
        z1, z2 = rng.standard_normal((2, nunits))
        shape = math.sqrt(math.log1p((target.cx * 1.1 * 1.1**attempt) ** 2))
        lx = np.exp(shape * z2)

        def yraw(r):
            return r * z2 + math.sqrt(1 - r * r) * z1

        def gap(r):
            return _pearson(yraw(r), lx) - target.rho

        lo, hi = -0.999999, 0.999999
        glo, ghi = gap(lo), gap(hi)
        if glo * ghi <= 0:
            r = brentq(gap, lo, hi, xtol=1e-14)
        else:
            r = lo if abs(glo) < abs(ghi) else hi
        yr = yraw(r)
        if abs(_pearson(yr, lx) - target.rho) > rho_tol:
            continue
        sd_lx = lx.std(ddof=1)
        x = target.xbar + (lx - lx.mean()) * (target.cx * target.xbar / sd_lx)
        if x.min() <= 0:
            continue
        y = target.ybar + (yr - yr.mean()) * (target.cy * target.ybar / yr.std(ddof=1))
        return PopulationFrame(y=y, x=x)
    raise TargetInfeasible(
        f"no population matched the target after {max_attempts} attempts "
        f"(rho={target.rho}, cx={target.cx})"
    )


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class OrderingCheck:
    first: str
    second: str
    analytic_first_larger: bool
    empirical_first_larger: bool

    @property
    def agrees(self) -> bool:
        return self.analytic_first_larger == self.empirical_first_larger


@dataclass(frozen=True)
class ValidationTable:
    results: list
    orderings: list
    margins: list

    @property
    def ordering_matches(self) -> bool:
        return all(o.agrees for o in self.orderings)


def validate_first_order(
    frame: PopulationFrame, cfg: McConfig, summary: MomentSummary | None = None
) -> ValidationTable:
    """Empirical vs analytic MSEs, pairwise ordering agreement and efficiency margins."""
    m = summary or summarize(frame)
    d = design_params(frame.N, cfg.n)
    results = run_mc(frame, cfg, m)
    orderings = [
        OrderingCheck(
            u.estimator.name,
            v.estimator.name,
            u.analytic_mse > v.analytic_mse,
            u.emp_mse > v.emp_mse,
        )
        for u, v in combinations(results, 2)
    ]
    return ValidationTable(results, orderings, analytic.efficiency_margins(m, d))


def standard_estimators(m: MomentSummary, n: int, N: int) -> list[EstimatorSpec]:
    """Mean, ratio, Bahl-Tuteja, regression and the proposed estimator at its optimum."""
    d = design_params(N, n)
    return [
        EstimatorSpec(Family.MEAN),
        EstimatorSpec(Family.RATIO),
        EstimatorSpec(Family.BAHL_TUTEJA),
        EstimatorSpec(Family.REGRESSION),
        analytic.optimal_spec(Family.PROPOSED, m, d, lam=1.0, label="proposed_opt"),
    ]


@dataclass(frozen=True)
class BreakdownRow:
    cy: float
    cx: float
    estimator: str
    analytic_mse: float
    emp_mse: float
    rel_deviation: float


def first_order_breakdown(
    cy_values=(0.1, 15.0),
    cx_values=(0.25, 0.5, 1.0, 1.5, 2.0),
    N: int = 200,
    n: int = 50,
    ybar: float = 500.0,
    xbar: float = 25.0,
    rho: float = 0.5,
    replications: int = 50_000,
    seed: int = 0,
) -> list[BreakdownRow]:
    """Relative error of the first-order MSEs over a grid of C_y and C_x.

    The design mimics a 200-unit population sampled at ``n = 50``. Since y
    enters every estimator linearly, the error is driven by the skew of x:
    it barely moves with C_y and grows steadily with C_x. ρ defaults to 0.5
    because a Gaussian-copula population cannot correlate much more strongly
    with a lognormal auxiliary of C_x = 2.
    """
    rows = []
    for cy in cy_values:
        for cx in cx_values:
            target = MomentSummary.from_coefficients(ybar, xbar, cy, cx, rho, 3.0)
            frame = generate_synthetic(N, target, seed=seed)
            m = summarize(frame)
            specs = standard_estimators(m, n, N)
            cfg = McConfig(replications=replications, n=n, seed=seed, estimators=specs)
            for r in run_mc(frame, cfg, m):
                rows.append(
                    BreakdownRow(cy, cx, r.estimator.name, r.analytic_mse, r.emp_mse, r.rel_deviation)
                )
    return rows
