"""Compensation-identity checks, the tangent-line bound and the choice of ``t``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import zeta

from ..errors import InvalidArgument
from ..markov import MarkovMeasure, rng_stream
from ..shift import FactorCode, ShiftSpace, sofic_presentation
from .entropy import relative_entropy_bracket
from .potential import Potential, label_space
from .pressure import integrate, pressure_sft, pressure_sofic

__all__ = [
    "CompensationReport",
    "TSelection",
    "phi_family",
    "pair_sum",
    "parse_grid",
    "compensation_check",
    "relative_pressure_bound",
    "tangent_bound",
    "select_t",
]

MAX_GRID_MEMBERS = 20000


def parse_grid(spec: str) -> np.ndarray:
    """``"lo:hi:count"`` or a comma list of values."""
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            return np.linspace(float(lo), float(hi), int(count))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise InvalidArgument(f"cannot parse grid {spec!r}; use lo:hi:count or a,b,c") from None


def phi_family(code: FactorCode, grid=(-2.0, -1.0, 0.0, 1.0, 2.0), ranges=(1, 2),
               n_random: int = 50, seed: int = 0) -> list[tuple[str, Potential]]:
    """Grid potentials of the given ranges on Y plus seeded random range-2 tables.

    Returns ``(description, potential)`` pairs.
    """
    ys = label_space(code)
    grid = [float(g) for g in grid]
    out = []
    for k in ranges:
        n_words = ys.size ** k
        if len(grid) ** n_words > MAX_GRID_MEMBERS:
            raise InvalidArgument(f"range-{k} grid has {len(grid)}^{n_words} members; coarsen it")
        for vals in itertools.product(grid, repeat=n_words):
            out.append((f"grid range {k} {list(vals)}", Potential(ys, k, vals)))
    rng = rng_stream(seed, "phi_family")
    for i in range(n_random):
        vals = rng.uniform(-2.0, 2.0, size=ys.size ** 2)
        out.append((f"random range 2 #{i}", Potential(ys, 2, vals)))
    return out


@dataclass
class CompensationReport:
    """Pressure gaps ``P_X(f + phi o pi) - P_Y(phi)`` over a tested family."""

    max_gap: float
    W_estimate: float
    tested_family: str
    tol: float
    gaps: list[tuple[str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.tol

    def to_json(self, include_gaps: bool = True) -> dict:
        out = {"max_gap": self.max_gap, "W_estimate": self.W_estimate,
               "tested_family": self.tested_family, "tol": self.tol, "pass": self.passed,
               "count": len(self.gaps)}
        if include_gaps:
            out["gaps"] = [{"phi": d, "gap": g} for d, g in self.gaps]
        return out


def compensation_check(space: ShiftSpace, code: FactorCode, f: Potential,
                       family: Sequence[tuple[str, Potential]] | None = None,
                       tol: float = 1e-9) -> CompensationReport:
    """Compare both sides of the compensation identity on each tested ``phi``."""
    if family is None:
        family = phi_family(code)
    if not family:
        raise InvalidArgument("empty phi family")
    pres = sofic_presentation(space, code)
    gaps = []
    for desc, phi in family:
        lhs = pressure_sft(space, f + phi.compose(code, space))
        rhs = pressure_sofic(pres, phi)
        gaps.append((desc, lhs - rhs))
    diffs = np.array([g for _, g in gaps])
    return CompensationReport(
        max_gap=float(np.abs(diffs).max()),
        W_estimate=float(diffs.max()),
        tested_family=f"within tested family of {len(gaps)} locally constant potentials",
        tol=tol,
        gaps=gaps,
    )


def relative_pressure_bound(m: MarkovMeasure, code: FactorCode, f: Potential, n: int = 8) -> float:
    """Upper bound on ``h(m | m o pi^-1) + integral f dm``.

    A compensation function makes this non-positive for every invariant ``m``.
    """
    return relative_entropy_bracket(m, code, n).upper + integrate(m, f)


def tangent_bound(p_seq, a_seq) -> tuple[float, float]:
    """``(sum p_n log(a_n/p_n), log sum a_n)``; the first never exceeds the second."""
    p = np.asarray(p_seq, dtype=float)
    a = np.asarray(a_seq, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise InvalidArgument("p and a must be equal-length sequences")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidArgument("p must be a probability vector")
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise InvalidArgument("a must be finite and positive")
    nz = p > 0
    lhs = float(np.sum(p[nz] * (np.log(a[nz]) - np.log(p[nz]))))
    return lhs, float(np.log(a.sum()))


@dataclass(frozen=True)
class TSelection:
    t: float
    bound: float
    certified: bool

    def __float__(self) -> float:
        return self.t


def pair_sum(t: float, multiplicity: str = "n2-1") -> float:
    """``sum_{n2 >= 2} m(n2) n2^-t`` with ``m = n2 - 1`` or ``m = 1``."""
    # Hurwitz zeta from 2 avoids cancelling against the n = 1 term
    if multiplicity == "n2-1":
        return math.inf if t <= 2 else float(zeta(t - 1, 2) - zeta(t, 2))
    if multiplicity == "1":
        return math.inf if t <= 1 else float(zeta(t, 2))
    raise InvalidArgument(f"unknown multiplicity {multiplicity!r}")


def select_t(space: ShiftSpace, code: FactorCode, epsilon: float, t_min: float = 2.0,
             ratio: float = 1.01, t_max: float = 64.0, multiplicity: str = "n2-1") -> TSelection:
    """Smallest grid value ``t = t_min * ratio^j`` (j >= 1) with ``log(d S(t)) <= -epsilon``.

    ``d = |A(X)|^3`` counts the symbol triples under three consecutive pins
    and ``S(t)`` is :func:`pair_sum`.  If no grid value up to ``t_max``
    qualifies, ``t_max`` is returned uncertified.
    """
    code.check_domain(space)
    if ratio <= 1 or t_min <= 0:
        raise InvalidArgument("need ratio > 1 and t_min > 0")
    d = space.size ** 3
    t = t_min
    while True:
        t = t * ratio
        if t > t_max:
            return TSelection(t_max, math.log(d * pair_sum(t_max, multiplicity)), False)
        s = pair_sum(t, multiplicity)
        if math.isfinite(s) and s > 0:
            bound = math.log(d * s)
            if bound <= -epsilon:
                return TSelection(t, bound, True)
