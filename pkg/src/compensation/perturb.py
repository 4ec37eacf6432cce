"""Monte Carlo experiments: marker processes, marked swaps, d-bar joinings, entropy gains.

A marker sequence ``s`` is a factor of an i.i.d. Bernoulli(p) sequence
``omega``: ``s_i = 1`` exactly when ``omega_i = 1`` and the ``n - 1``
preceding coordinates of ``omega`` are 0.  Ones in ``s`` are therefore at
least ``n`` apart.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateSample, InvalidArgument, PreconditionViolation
from .markov import MarkovMeasure, markov_entropy, rng_stream
from .shift import FactorCode, ShiftSpace, Word, apply_code, as_word
from .thermo.potential import Potential

__all__ = [
    "MarkerProcess",
    "SwapMap",
    "DbarResult",
    "EntropyEstimate",
    "TradeoffReport",
    "KacAbramovReport",
    "marker_from_omega",
    "sample_marker",
    "apply_swap",
    "undo_swap",
    "dbar_exact",
    "dbar_marker_vs_bernoulli",
    "empirical_entropy",
    "ergodic_average",
    "tradeoff_experiment",
    "kac_abramov_check",
]


@dataclass(frozen=True)
class MarkerProcess:
    p: float
    n: int
    seed: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise InvalidArgument("marker probability must lie in (0, 1)")
        if self.n < 1:
            raise InvalidArgument("marker gap must be at least 1")

    @property
    def density(self) -> float:
        return self.p * (1 - self.p) ** (self.n - 1)


def marker_from_omega(omega: np.ndarray, n: int) -> np.ndarray:
    """Markers of ``omega[n-1:]``; the first ``n - 1`` entries only serve as history."""
    omega = np.asarray(omega, dtype=np.int8)
    if len(omega) < n:
        raise InvalidArgument("omega shorter than the marker window")
    c = np.concatenate([[0], np.cumsum(omega, dtype=np.int64)])
    i = np.arange(n - 1, len(omega))
    before = c[i] - c[i - n + 1]
    return ((omega[i] == 1) & (before == 0)).astype(np.int8)


def sample_marker(mp: MarkerProcess, length: int, replicate: int = 0) -> np.ndarray:
    if length < mp.n:
        raise InvalidArgument("length must be at least the marker gap")
    rng = rng_stream(mp.seed, "marker", replicate)
    omega = (rng.random(length + mp.n - 1) < mp.p).astype(np.int8)
    return marker_from_omega(omega, mp.n)


@dataclass(frozen=True)
class SwapMap:
    u: Word
    v: Word

    def __post_init__(self):
        if len(self.u) != len(self.v) or len(self.u) == 0:
            raise InvalidArgument("u and v must be nonempty and of equal length")
        if self.u[0] != self.v[0] or self.u[-1] != self.v[-1]:
            raise InvalidArgument("u and v must share endpoints")

    @classmethod
    def build(cls, space: ShiftSpace, code: FactorCode, u, v) -> "SwapMap":
        u, v = space.decode(space.require_allowed(u)), space.decode(space.require_allowed(v))
        if apply_code(code, u) != apply_code(code, v):
            raise InvalidArgument("u and v must have the same image")
        return cls(u, v)


def _occurrences(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Boolean array: ``x[i:i+len(w)] == w`` (False where it would overrun)."""
    out = np.zeros(len(x), dtype=bool)
    if len(x) < len(w):
        return out
    out[:len(x) - len(w) + 1] = np.all(sliding_window_view(x, len(w)) == w, axis=1)
    return out


def _swap(x: np.ndarray, s: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    s = np.asarray(s)
    if len(s) != len(x):
        raise InvalidArgument("marker and word lengths differ")
    ones = np.flatnonzero(s)
    if len(ones) > 1 and np.diff(ones).min() < len(src):
        raise InvalidArgument("marker gaps must be at least |u|")
    pos = np.flatnonzero((s == 1) & _occurrences(x, src))
    out = x.copy()
    for j in range(len(src)):
        out[pos + j] = dst[j]
    return out


def apply_swap(space: ShiftSpace, x, s, sm: SwapMap) -> np.ndarray:
    """Replace the occurrences of ``u`` starting at marked positions by ``v``.

    ``x`` is a word or an index array; the result is an index array.
    """
    x = _as_indices(space, x)
    return _swap(x, s, np.array(space.encode(sm.u)), np.array(space.encode(sm.v)))


def undo_swap(space: ShiftSpace, x, s, sm: SwapMap) -> np.ndarray:
    x = _as_indices(space, x)
    return _swap(x, s, np.array(space.encode(sm.v)), np.array(space.encode(sm.u)))


def _as_indices(space: ShiftSpace, x) -> np.ndarray:
    if isinstance(x, np.ndarray) and x.dtype.kind in "iu":
        return x.astype(np.int64)
    return np.array(space.encode(as_word(x, space.alphabet)), dtype=np.int64)


# -- d-bar -------------------------------------------------------------------------

def dbar_exact(p: float, n: int) -> float:
    """``P(s_0 != omega_0) = p (1 - (1-p)^(n-1))`` under the marker joining."""
    return p * (1 - (1 - p) ** (n - 1))


@dataclass(frozen=True)
class DbarResult:
    p: float
    n: int
    samples: int
    exact: float
    estimate: float
    stderr: float
    bound: float
    omega_rate: float
    marker_rate: float

    def within(self, z: float = 3.0) -> bool:
        return abs(self.estimate - self.exact) <= z * max(self.stderr, 1e-300) or (
            self.exact == 0 and self.estimate == 0)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def dbar_marker_vs_bernoulli(p: float, n: int, samples: int, seed: int) -> DbarResult:
    """Mismatch rate of the coupling ``(omega, psi(omega))`` against its exact value.

    Each sample is an independent window of ``n`` Bernoulli coordinates, so
    the estimate is a binomial proportion.
    """
    if samples < 1000:
        raise InvalidArgument("need at least 1000 samples")
    if not 0 <= p < 1 or n < 1:
        raise InvalidArgument("need 0 <= p < 1 and n >= 1")
    rng = rng_stream(seed, "dbar", n)
    omega = rng.random((samples, n)) < p
    last = omega[:, -1]
    marker = last & ~omega[:, :-1].any(axis=1)
    mismatch = last != marker
    q = mismatch.mean()
    return DbarResult(
        p=p, n=n, samples=samples,
        exact=dbar_exact(p, n),
        estimate=float(q),
        stderr=float(math.sqrt(max(q * (1 - q), 1.0 / samples) / samples)),
        bound=(n - 1) * p * p,
        omega_rate=float(last.mean()),
        marker_rate=float(marker.mean()),
    )


# -- entropy estimation ------------------------------------------------------------

@dataclass(frozen=True)
class EntropyEstimate:
    estimate: float
    stderr: float
    sparse: bool

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def _block_codes(x: np.ndarray, k: int, base: int) -> np.ndarray:
    codes = np.zeros(len(x) - k + 1, dtype=np.int64)
    for j in range(k):
        codes = codes * base + x[j:len(x) - k + 1 + j]
    return codes


def _conditional_counts(x: np.ndarray, k: int, base: int) -> np.ndarray:
    """Counts of ``(k+1)``-words as a ``(base^k, base)`` array (context, next)."""
    codes = _block_codes(np.asarray(x, dtype=np.int64), k + 1, base)
    return np.bincount(codes, minlength=base ** (k + 1)).reshape(base ** k, base)


def _h_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    ctx = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    ratio = np.where(nz, counts / np.where(ctx > 0, ctx, 1), 1.0)
    return float(-(counts[nz] * np.log(ratio[nz])).sum() / total)


def empirical_entropy(samples: Sequence[np.ndarray], k: int, base: int | None = None,
                      batches: int = 20, min_count: int = 5) -> EntropyEstimate:
    """Plug-in ``H(X_0 | X_{-k}..X_{-1})`` from pooled counts.

    The standard error comes from batch means (one batch per sample when
    there are at least two samples, otherwise ``batches`` contiguous
    pieces).  When a context was seen fewer than ``min_count`` times the
    estimate is flagged ``sparse`` and the error is widened by the
    Miller-Madow bias term.
    """
    if k < 0:
        raise InvalidArgument("k must be nonnegative")
    seqs = [np.asarray(s, dtype=np.int64) for s in samples]
    if not seqs or any(len(s) <= k for s in seqs):
        raise InvalidArgument("every sample must be longer than k")
    if base is None:
        base = int(max(s.max() for s in seqs)) + 1
    if len(seqs) == 1:
        pieces = np.array_split(seqs[0], batches)
        pieces = [p for p in pieces if len(p) > k]
    else:
        pieces = seqs
    counts = [_conditional_counts(p, k, base) for p in pieces]
    pooled = sum(counts)
    est = _h_from_counts(pooled)
    if len(pieces) > 1:
        per = np.array([_h_from_counts(c) for c in counts])
        stderr = float(per.std(ddof=1) / math.sqrt(len(per)))
    else:
        stderr = math.inf
    ctx = pooled.sum(axis=1)
    seen = ctx > 0
    sparse = bool(np.any(ctx[seen] < min_count))
    if sparse:
        cells = int((pooled > 0).sum()) - int(seen.sum())
        stderr += cells / (2 * pooled.sum())
    return EntropyEstimate(est, stderr, sparse)


def ergodic_average(x: np.ndarray, f: Potential) -> float:
    """Mean of ``f`` over all complete windows of ``x``."""
    x = np.asarray(x, dtype=np.int64)
    if len(x) < f.k:
        raise InvalidArgument("sequence shorter than the potential's range")
    codes = _block_codes(x, f.k, f.space.size)
    table = np.full(f.space.size ** f.k, np.nan)
    table[f._sorted_codes] = f.values
    vals = table[codes]
    if np.isnan(vals).any():
        raise InvalidArgument("sequence contains a word outside the potential's table")
    return float(vals.mean())


# -- tradeoff experiment -------------------------------------------------------------

def _mean_se(v: np.ndarray) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    if len(v) < 2:
        return float(v.mean()), math.inf
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


@dataclass
class TradeoffReport:
    """Per-``p`` entropy gains and integral changes, one replicate per seed.

    ``gain[k]`` and ``change`` are ``(len(p_grid), len(seeds))`` arrays;
    ``k`` runs over the conditioning depths that were measured.
    """

    p_grid: list[float]
    seeds: list[int]
    length: int
    gain: dict[int, np.ndarray]
    change: np.ndarray
    swaps: np.ndarray
    depth: int = 2
    fit: dict[str, float] = field(default_factory=dict)

    def entropy_gain(self, k: int | None = None) -> list[tuple[float, float]]:
        return [_mean_se(row) for row in self.gain[self.depth if k is None else k]]

    def integral_change(self) -> list[tuple[float, float]]:
        return [_mean_se(row) for row in self.change]

    def ratio(self, i: int, keep: np.ndarray | None = None, k: int | None = None) -> float:
        g = self.gain[self.depth if k is None else k][i]
        c = self.change[i]
        if keep is not None:
            g, c = g[keep], c[keep]
        return float(g.mean() / c.mean()) if c.mean() > 0 else math.inf

    def ratio_difference(self, i: int, j: int, k: int | None = None) -> tuple[float, float]:
        """``ratio(i) - ratio(j)`` with a leave-one-seed-out jackknife standard error."""
        d = self.ratio(i, k=k) - self.ratio(j, k=k)
        s = len(self.seeds)
        if s < 2:
            return d, math.inf
        reps = []
        for drop in range(s):
            keep = np.arange(s) != drop
            reps.append(self.ratio(i, keep, k) - self.ratio(j, keep, k))
        reps = np.array(reps)
        se = math.sqrt((s - 1) / s * ((reps - reps.mean()) ** 2).sum())
        return d, se

    def monotone_ratio(self, z: float = 3.0, k: int | None = None) -> list[dict]:
        """Compare consecutive grid points, smaller ``p`` first; each needs a larger ratio."""
        order = sorted(range(len(self.p_grid)), key=lambda i: self.p_grid[i])
        out = []
        for small, big in zip(order, order[1:]):
            d, se = self.ratio_difference(small, big, k)
            out.append({"p_small": self.p_grid[small], "p_big": self.p_grid[big],
                        "difference": d, "stderr": se, "ok": d > z * se})
        return out

    def gains_positive(self, z: float = 3.0, k: int | None = None) -> list[bool]:
        return [m > z * se for m, se in self.entropy_gain(k)]

    def rows(self) -> list[dict]:
        out = []
        for i, p in enumerate(self.p_grid):
            for j, seed in enumerate(self.seeds):
                row = {"p": p, "seed": seed, "swaps": int(self.swaps[i, j]),
                       "integral_change": float(self.change[i, j])}
                for k in sorted(self.gain):
                    row[f"entropy_gain_k{k}"] = float(self.gain[k][i, j])
                out.append(row)
        return out

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()

    def to_json(self) -> dict:
        summary = []
        for i, p in enumerate(self.p_grid):
            entry = {"p": p, "integral_change": self.integral_change()[i],
                     "ratio": self.ratio(i)}
            for k in sorted(self.gain):
                entry[f"entropy_gain_k{k}"] = self.entropy_gain(k)[i]
            summary.append(entry)
        return {"p_grid": self.p_grid, "seeds": self.seeds, "length": self.length,
                "depth": self.depth, "summary": summary, "fit": self.fit,
                "monotone_ratio": self.monotone_ratio()}


def tradeoff_experiment(space: ShiftSpace, code: FactorCode, base: MarkovMeasure, sm: SwapMap,
                        f: Potential, p_grid: Sequence[float], length: int,
                        seeds: Sequence[int], depths: Sequence[int] = (1, 2),
                        depth: int = 2) -> TradeoffReport:
    """Entropy gain and integral change from marked ``u -> v`` swaps.

    Per seed one base trajectory and one uniform field are drawn; every
    ``p`` thresholds the same field, so the grid points share randomness.
    Markers have gap ``|u|``.
    """
    if base.space != space or f.space != space:
        raise InvalidArgument("base measure and potential must live on the given space")
    if depth not in depths:
        raise InvalidArgument("the primary depth must be among the measured depths")
    p_grid = [float(p) for p in p_grid]
    if any(not 0 <= p < 1 for p in p_grid):
        raise InvalidArgument("marker probabilities must lie in [0, 1)")
    gap = len(sm.u)
    u = np.array(space.encode(sm.u))
    seeds = [int(s) for s in seeds]
    gain = {k: np.zeros((len(p_grid), len(seeds))) for k in depths}
    change = np.zeros((len(p_grid), len(seeds)))
    swaps = np.zeros((len(p_grid), len(seeds)), dtype=np.int64)
    k_sym = space.size
    for j, seed in enumerate(seeds):
        x = base.sample(length, rng_stream(seed, "tradeoff-base"))
        occ = _occurrences(x, u)
        if not occ.any():
            raise DegenerateSample(f"u never occurs in the base sample for seed {seed}")
        field_ = rng_stream(seed, "tradeoff-marker").random(length + gap - 1)
        h_x = {k: empirical_entropy([x], k, base=k_sym).estimate for k in depths}
        a_x = ergodic_average(x, f)
        for i, p in enumerate(p_grid):
            if p == 0:
                continue
            s = marker_from_omega((field_ < p).astype(np.int8), gap)
            xb = _swap(x, s, u, np.array(space.encode(sm.v)))
            swaps[i, j] = int(((s == 1) & occ).sum())
            for k in depths:
                gain[k][i, j] = empirical_entropy([xb], k, base=k_sym).estimate - h_x[k]
            change[i, j] = abs(ergodic_average(xb, f) - a_x)
    report = TradeoffReport(p_grid, seeds, length, gain, change, swaps, depth)
    ps = np.array(p_grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        basis1 = np.where(ps > 0, ps * np.log(1 / np.where(ps > 0, ps, 1)), 0.0)
    g = np.array([m for m, _ in report.entropy_gain()])
    c = np.array([m for m, _ in report.integral_change()])
    report.fit = {
        "c1_plogp": float(basis1 @ g / (basis1 @ basis1)) if basis1.any() else 0.0,
        "c2_p": float(ps @ c / (ps @ ps)) if ps.any() else 0.0,
    }
    return report


# -- Kac and Abramov -----------------------------------------------------------------

@dataclass(frozen=True)
class KacAbramovReport:
    cylinder: str
    measure: float
    visits: int
    mean_return: float
    kac_stderr: float
    induced_entropy: float
    abramov_value: float
    abramov_stderr: float
    entropy: float

    @property
    def kac_expected(self) -> float:
        return 1.0 / self.measure

    def kac_ok(self, z: float = 3.0) -> bool:
        return abs(self.mean_return - self.kac_expected) <= z * self.kac_stderr

    def abramov_ok(self, z: float = 3.0) -> bool:
        return abs(self.abramov_value - self.entropy) <= z * self.abramov_stderr

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out.update(kac_expected=self.kac_expected, kac_ok=self.kac_ok(), abramov_ok=self.abramov_ok())
        return out


def kac_abramov_check(m: MarkovMeasure, cylinder, length: int, seed: int,
                      batches: int = 20) -> KacAbramovReport:
    """Empirical Kac and Abramov identities for returns to ``cylinder``.

    The induced entropy is the mean surprisal of the excursions (the
    stretch from one visit to the next) under empirical transition
    frequencies.  It estimates the induced entropy when visits are renewal
    times, e.g. for a single-symbol cylinder of a Markov chain.
    """
    space = m.space
    c = space.decode(space.require_allowed(cylinder))
    mu = m.probability(c)
    if mu <= 0:
        raise PreconditionViolation("cylinder has measure zero")
    x = m.sample(length, rng_stream(seed, "kac_abramov"))
    visits = np.flatnonzero(_occurrences(x, np.array(space.encode(c))))
    if len(visits) < 3:
        raise DegenerateSample("cylinder visited fewer than three times")
    gaps = np.diff(visits)
    # batch means guard against correlation between successive returns
    chunks = [b for b in np.array_split(gaps, min(batches, len(gaps))) if len(b)]
    means = np.array([b.mean() for b in chunks])
    mean_return = float(gaps.mean())
    kac_se = float(means.std(ddof=1) / math.sqrt(len(means))) if len(means) > 1 else math.inf

    # each excursion is scored by its log-likelihood under the empirical
    # transition frequencies, counting the step back into the cylinder
    lo, hi = int(visits[0]), int(visits[-1])
    src, dst = x[lo:hi], x[lo + 1:hi + 1]
    k = space.size
    counts = np.bincount(src * k + dst, minlength=k * k).reshape(k, k).astype(float)
    rows = counts.sum(axis=1, keepdims=True)
    logp = np.log(np.where(counts > 0, counts, 1.0) / np.where(rows > 0, rows, 1.0))
    surprisal = -np.add.reduceat(logp[src, dst], visits[:-1] - lo)
    h_ind = float(surprisal.mean())
    h_se = float(surprisal.std(ddof=1) / math.sqrt(len(surprisal)))
    return KacAbramovReport(
        cylinder=str(c), measure=mu, visits=len(visits), mean_return=mean_return,
        kac_stderr=kac_se, induced_entropy=h_ind, abramov_value=h_ind * mu,
        abramov_stderr=h_se * mu, entropy=markov_entropy(m),
    )
