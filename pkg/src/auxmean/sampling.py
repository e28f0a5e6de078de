"""Population model, SRSWOR design constants, sampling and exact enumeration.

Conventions
-----------
* ``sy``, ``sx`` and ``syx`` use divisor ``N - 1`` so that
  ``Var(ybar_s) = f1 * sy**2`` holds exactly under SRSWOR.
* ``beta2x`` is the non-excess kurtosis ``m4 / m2**2`` with divisor-``N``
  central moments.
* Random draws use a partial Fisher-Yates shuffle of the index array driven by
  a seeded :class:`numpy.random.Generator` (PCG64).
"""

from __future__ import annotations

import csv
import itertools
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    DegenerateVariance,
    EmptyPopulation,
    InvalidDesign,
    ParseError,
    TooManySamples,
)

ENUMERATION_CAP = 10**6
_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PopulationFrame:
    """Finite population of paired ``(y, x)`` values, identified by index."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = _frozen(self.y).ravel()
        x = _frozen(self.x).ravel()
        if y.shape != x.shape:
            raise ValueError(f"y and x lengths differ ({y.size} != {x.size})")
        if y.size < 2:
            raise ValueError("a population needs at least 2 units")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise ValueError("population values must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_pairs(cls, units) -> "PopulationFrame":
        units = list(units)
        return cls(y=[u[0] for u in units], x=[u[1] for u in units])

    @property
    def N(self) -> int:
        return int(self.y.size)

    @property
    def units(self) -> list[tuple[float, float]]:
        return list(zip(self.y.tolist(), self.x.tolist()))

    def scaled(self, cy: float = 1.0, cx: float = 1.0) -> "PopulationFrame":
        return PopulationFrame(y=self.y * cy, x=self.x * cx)


@dataclass(frozen=True)
class DesignParams:
    N: int
    n: int
    f: float
    f1: float


def design_params(N: int, n: int) -> DesignParams:
    """SRSWOR constants ``f = n/N`` and ``f1 = (1 - f)/n``."""
    if int(N) != N or int(n) != n:
        raise InvalidDesign(f"N and n must be integers, got N={N}, n={n}")
    N, n = int(N), int(n)
    if n < 1 or n > N:
        raise InvalidDesign(f"need 1 <= n <= N, got N={N}, n={n}")
    f = n / N
    # exact zero for the census case
    f1 = 0.0 if n == N else (1.0 - f) / n
    return DesignParams(N=N, n=n, f=f, f1=f1)


@dataclass(frozen=True)
class MomentSummary:
    """Population parameters consumed by every MSE formula."""

    ybar: float
    xbar: float
    sy: float
    sx: float
    syx: float
    cy: float
    cx: float
    rho: float
    beta2x: float

    def __post_init__(self):
        if not -1.0 - 1e-12 <= self.rho <= 1.0 + 1e-12:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.beta2x < 1.0 - 1e-12:
            raise ValueError(f"beta2x must be >= 1, got {self.beta2x}")

    @classmethod
    def from_coefficients(
        cls,
        ybar: float,
        xbar: float,
        cy: float,
        cx: float,
        rho: float,
        beta2x: float,
    ) -> "MomentSummary":
        """Build a summary from means, CVs, correlation and kurtosis (Table-1 style)."""
        sy = cy * ybar
        sx = cx * xbar
        return cls(
            ybar=float(ybar),
            xbar=float(xbar),
            sy=float(sy),
            sx=float(sx),
            syx=float(rho * sy * sx),
            cy=float(cy),
            cx=float(cx),
            rho=float(rho),
            beta2x=float(beta2x),
        )


def summarize(frame: PopulationFrame) -> MomentSummary:
    """Exact population moments of ``frame``.

    Raises
    ------
    DegenerateVariance
        If either variable is constant.
    """
    y, x = frame.y, frame.x
    ybar = float(y.mean())
    xbar = float(x.mean())
    dy = y - ybar
    dx = x - xbar
    N = frame.N
    syy = float(dy @ dy) / (N - 1)
    sxx = float(dx @ dx) / (N - 1)
    syx = float(dy @ dx) / (N - 1)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("zero variance in y or x; correlation undefined")
    sy = math.sqrt(syy)
    sx = math.sqrt(sxx)
    rho = max(-1.0, min(1.0, syx / (sy * sx)))
    m2 = float(dx @ dx) / N
    m4 = float(np.mean(dx**4))
    return MomentSummary(
        ybar=ybar,
        xbar=xbar,
        sy=sy,
        sx=sx,
        syx=syx,
        cy=sy / ybar if ybar != 0 else math.nan,
        cx=sx / xbar if xbar != 0 else math.nan,
        rho=rho,
        beta2x=m4 / m2**2,
    )


@dataclass(frozen=True, eq=False)
class SampleDraw:
    indices: frozenset
    ybar_s: float
    xbar_s: float
    b: float
    order: tuple = field(default=(), repr=False)

    def __eq__(self, other):
        if not isinstance(other, SampleDraw):
            return NotImplemented
        return (
            self.indices == other.indices
            and self.order == other.order
            and _same(self.ybar_s, other.ybar_s)
            and _same(self.xbar_s, other.xbar_s)
            and _same(self.b, other.b)
        )

    __hash__ = None


def _same(u, v):
    return u == v or (math.isnan(u) and math.isnan(v))


def sample_slope(ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Least-squares slope ``s_yx / s_x**2`` along the last axis; NaN when undefined."""
    ys = np.asarray(ys, dtype=float)
    xs = np.asarray(xs, dtype=float)
    dx = xs - xs.mean(axis=-1, keepdims=True)
    dy = ys - ys.mean(axis=-1, keepdims=True)
    sxx = np.sum(dx * dx, axis=-1)
    sxy = np.sum(dx * dy, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sxx > 0, sxy / np.where(sxx > 0, sxx, 1.0), np.nan)


def _make_draw(frame: PopulationFrame, idx: np.ndarray) -> SampleDraw:
    ys = frame.y[idx]
    xs = frame.x[idx]
    return SampleDraw(
        indices=frozenset(int(i) for i in idx),
        ybar_s=float(ys.mean()),
        xbar_s=float(xs.mean()),
        b=float(sample_slope(ys, xs)),
        order=tuple(int(i) for i in idx),
    )


def partial_fisher_yates(rng: np.random.Generator, N: int, n: int, size: int) -> np.ndarray:
    """``size`` independent SRSWOR index sets, shape ``(size, n)``.

    Row ``r`` is the first ``n`` slots of a Fisher-Yates shuffle of
    ``range(N)`` stopped after ``n`` swaps.
    """
    perm = np.tile(np.arange(N, dtype=np.int64), (size, 1))
    rows = np.arange(size)
    for k in range(n):
        j = k + rng.integers(0, N - k, size=size)
        tmp = perm[rows, k].copy()
        perm[rows, k] = perm[rows, j]
        perm[rows, j] = tmp
    return perm[:, :n]


def draw_srswor(frame: PopulationFrame, n: int, seed: int) -> SampleDraw:
    """One SRSWOR sample of size ``n``, deterministic in ``(frame, n, seed)``."""
    design_params(frame.N, n)
    rng = np.random.default_rng(seed)
    idx = partial_fisher_yates(rng, frame.N, n, 1)[0]
    return _make_draw(frame, idx)


def _check_cap(N: int, n: int, cap: int) -> int:
    design_params(N, n)
    count = math.comb(N, n)
    if count > cap:
        raise TooManySamples(f"C({N}, {n}) = {count} exceeds the cap of {cap}")
    return count


def enumerate_all_samples(
    frame: PopulationFrame, n: int, cap: int = ENUMERATION_CAP
) -> Iterator[SampleDraw]:
    """Yield every size-``n`` subset exactly once, in lexicographic order."""
    _check_cap(frame.N, n, cap)
    for combo in itertools.combinations(range(frame.N), n):
        yield _make_draw(frame, np.array(combo, dtype=np.int64))


def enumerate_index_matrix(N: int, n: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All size-``n`` subsets as an ``(C(N, n), n)`` index array."""
    count = _check_cap(N, n, cap)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(N), n)),
        dtype=np.int64,
        count=count * n,
    )
    return flat.reshape(count, n)


def read_population_csv(path) -> PopulationFrame:
    """Parse a ``y,x`` CSV file into a frame.

    Rows are numbered from 1 for the first data row. NaN and infinite
    tokens are rejected.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyPopulation(f"{path}: file is empty")
        header = [h.strip().lower() for h in header]
        if header != ["y", "x"]:
            raise ParseError(f"{path}: header must be 'y,x', got {','.join(header)!r}", row=0)
        ys, xs = [], []
        for k, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 2:
                raise ParseError(f"{path}: row {k}: expected 2 fields, got {len(rec)}", row=k)
            vals = []
            for col, tok in zip(("y", "x"), rec):
                tok = tok.strip()
                if tok.lower().lstrip("+-") in ("nan", "inf", "infinity"):
                    raise ParseError(
                        f"{path}: row {k}, column {col}: non-finite value {tok!r}", row=k, column=col
                    )
                if not _NUMBER.fullmatch(tok):
                    raise ParseError(
                        f"{path}: row {k}, column {col}: not a number: {tok!r}", row=k, column=col
                    )
                v = float(tok)
                if not math.isfinite(v):
                    raise ParseError(
                        f"{path}: row {k}, column {col}: non-finite value {tok!r}", row=k, column=col
                    )
                vals.append(v)
            ys.append(vals[0])
            xs.append(vals[1])
    if not ys:
        raise EmptyPopulation(f"{path}: no data rows")
    if len(ys) < 2:
        raise ParseError(f"{path}: a population needs at least 2 units", row=1)
    return PopulationFrame(y=ys, x=xs)


def write_population_csv(frame: PopulationFrame, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "x"])
        for yv, xv in frame.units:
            w.writerow([repr(yv), repr(xv)])
