"""The explicit Dini-type compensation candidate, its variations, and p-Dini verdicts.

The candidate is ``f(x) = g(n(x))`` with ``g(n) = -t log(n+2)/(n+2)`` and
``f = 0`` where ``n(x)`` is infinite.  On finite windows of radius ``L`` it
is approximated by the range ``2L+1`` table ``f_L``.

``|g|`` increases from ``n = 0`` to ``n = 1`` and decreases afterwards, so
for ``n >= 1`` the variation is bounded by ``tau(n) = t log(n+2)/(n+2)`` and
``var_0`` by ``tau(1)``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gamma, gammaincc

from ..errors import InvalidArgument
from ..factor import Minimality, MPWOrder
from ..shift import FactorCode, ShiftSpace, word_array
from .potential import Potential

__all__ = [
    "g_value",
    "tail_model",
    "dini_potential",
    "VariationSequence",
    "variation",
    "variation_sequence",
    "DiniVerdict",
    "DiniReport",
    "p_dini_report",
    "tail_integral",
]


def g_value(n: int, t: float) -> float:
    """``-t log(n+2)/(n+2)``, the value of the candidate at radius ``n``."""
    return -t * math.log(n + 2) / (n + 2)


def tail_model(n: int, t: float) -> float:
    """Upper envelope of ``var_n`` for the candidate with parameter ``t``."""
    m = max(n, 1)
    return t * math.log(m + 2) / (m + 2)


def dini_potential(space: ShiftSpace, code: FactorCode, order: MPWOrder, t: float, L: int,
                   oracle: Minimality | None = None) -> Potential:
    """Range ``2L+1`` table of the candidate, centred on the middle coordinate.

    A window whose central sub-windows stay minimal up to its full size gets
    0; otherwise the exact radius ``n`` from :func:`n_of` gives ``g(n)``.
    """
    if t <= 0:
        raise InvalidArgument("t must be positive")
    if L < 1:
        raise InvalidArgument("L must be at least 1")
    oracle = oracle or Minimality(space, code, order)
    words = word_array(space, 2 * L + 1)
    vals = np.empty(len(words))
    for i, w in enumerate(words):
        nv = _n_of_idx(oracle, w, L)
        vals[i] = g_value(nv, t) if nv is not None else 0.0
    return Potential(space, 2 * L + 1, vals, offset=L, tail_t=float(t))


def _n_of_idx(oracle: Minimality, w: np.ndarray, center: int) -> int | None:
    """Exact radius at ``center`` or ``None`` if the window stays minimal to its edge."""
    idx = tuple(int(i) for i in w)
    r = 0
    while center - r - 1 >= 0 and center + r + 1 < len(idx):
        if not oracle.is_minimal(idx[center - r - 1:center + r + 2]):
            return r
        r += 1
    return None


@dataclass(frozen=True)
class VariationSequence:
    """``values[n] = var_n`` for ``n = 0..N``.

    ``complete`` marks a locally constant potential whose variations vanish
    beyond ``N``.  ``tail_t`` attaches the envelope :func:`tail_model`;
    ``lower_t`` attaches the minorant ``tail_model(n+1)``, recorded only
    after the computed values were checked against it.
    """

    values: tuple[float, ...]
    complete: bool = False
    tail_t: float | None = None
    lower_t: float | None = None

    def __post_init__(self):
        v = self.values
        if any(x < -1e-12 for x in v):
            raise InvalidArgument("variations are nonnegative")
        if any(b > a + 1e-12 for a, b in zip(v, v[1:])):
            raise InvalidArgument("variations are non-increasing")

    def tail(self, n: int) -> float | None:
        return None if self.tail_t is None else tail_model(n, self.tail_t)

    def lower(self, n: int) -> float | None:
        return None if self.lower_t is None else tail_model(n + 1, self.lower_t)


def variation(f: Potential, n: int) -> float:
    """Largest oscillation of ``f`` over points agreeing on ``[-n, n]``."""
    cols = [c for c in range(f.k) if -n <= c - f.offset <= n]
    if len(cols) == f.k:
        return 0.0
    sub = f.words[:, cols]
    _, inv = np.unique(sub, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    groups = inv.max() + 1
    hi = np.full(groups, -np.inf)
    lo = np.full(groups, np.inf)
    np.maximum.at(hi, inv, f.values)
    np.minimum.at(lo, inv, f.values)
    return float((hi - lo).max())


def variation_sequence(family: Potential | Sequence[Potential], N: int) -> VariationSequence:
    """Variations ``var_0 .. var_N`` computed on the widest member of ``family``.

    For a family carrying a tail parameter only the radii the widest window
    resolves (``n <= L - 2`` for range ``2L+1``) are reported; the tail model
    covers the rest.  The model and the minorant are checked on those values.
    """
    members = [family] if isinstance(family, Potential) else list(family)
    if not members:
        raise InvalidArgument("empty potential family")
    if N < 0:
        raise InvalidArgument("N must be nonnegative")
    f = max(members, key=lambda p: p.k)
    if f.tail_t is None:
        vals = tuple(variation(f, n) for n in range(N + 1))
        return VariationSequence(vals, complete=N >= f.k - 1)
    last = min(N, f.offset - 2, f.k - f.offset - 3)
    if last < 0:
        raise InvalidArgument("window too narrow to resolve any variation; use L >= 2")
    vals = tuple(variation(f, n) for n in range(last + 1))
    t = f.tail_t
    tail_t = t
    if any(v > tail_model(n, t) + 1e-12 for n, v in enumerate(vals)):
        warnings.warn("computed variations exceed the tail model; model dropped", stacklevel=2)
        tail_t = None
    lower_ok = all(v >= tail_model(n + 1, t) - 1e-12 for n, v in enumerate(vals))
    return VariationSequence(vals, tail_t=tail_t, lower_t=t if lower_ok else None)


class DiniVerdict(str, enum.Enum):
    CONVERGENT = "ConvergentCertified"
    DIVERGENT = "DivergentCertified"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class DiniReport:
    p: float
    verdict: DiniVerdict
    partial_sum: float
    tail_bound: float | None
    terms: int

    def to_json(self) -> dict:
        return {"p": self.p, "verdict": self.verdict.value, "partial_sum": self.partial_sum,
                "tail_bound": self.tail_bound, "terms": self.terms}


def tail_integral(N: int, t: float, p: float) -> float:
    """``integral_N^inf (t log(x+2)/(x+2))^p dx`` for ``p > 1`` and ``N >= 1``.

    With ``u = log(x+2)`` this is ``t^p Gamma(p+1, (p-1) log(N+2)) / (p-1)^(p+1)``.
    """
    if p <= 1:
        return math.inf
    if N < 1:
        raise InvalidArgument("the envelope is decreasing only from N = 1")
    a = (p - 1) * math.log(N + 2)
    return float(t ** p * gammaincc(p + 1, a) * gamma(p + 1) / (p - 1) ** (p + 1))


def p_dini_report(v: VariationSequence, p: float) -> DiniReport:
    """Decide whether ``sum_n var_n^p`` converges.

    Convergence is certified by the computed partial sum plus an integral
    bound on the envelope beyond the last computed term.  Divergence at
    ``p <= 1`` is certified by the minorant, whose p-th powers are not
    summable there.
    """
    if p < 1:
        raise InvalidArgument("p must be at least 1")
    partial = float(sum(x ** p for x in v.values))
    N = len(v.values) - 1
    # variations never increase, so a zero term makes the rest vanish
    if v.complete or v.values[-1] == 0.0:
        return DiniReport(p, DiniVerdict.CONVERGENT, partial, 0.0, len(v.values))
    if v.tail_t is not None and p > 1:
        # terms n > N are bounded by the envelope, decreasing on [max(N,1), inf)
        start = max(N, 1)
        extra = sum(tail_model(n, v.tail_t) ** p for n in range(N + 1, start + 1))
        tail = tail_integral(start, v.tail_t, p) + extra
        return DiniReport(p, DiniVerdict.CONVERGENT, partial, tail, len(v.values))
    if v.lower_t is not None and p <= 1:
        return DiniReport(p, DiniVerdict.DIVERGENT, partial, None, len(v.values))
    return DiniReport(p, DiniVerdict.UNDETERMINED, partial, None, len(v.values))
