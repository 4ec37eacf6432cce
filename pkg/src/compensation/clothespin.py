"""Clothespinning of finite windows, the radius n(x), and induced return statistics.

All positions are window indices (0 = first symbol of the window).  Points
are replaced by finite windows, so every result says whether the window was
large enough to certify it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass

from .errors import DegenerateSample, InvalidArgument
from .factor import Minimality, MPWOrder
from .markov import MarkovMeasure, rng_stream
from .shift import FactorCode, ShiftSpace, Word

__all__ = [
    "PinSequence",
    "NValue",
    "ReturnStatistics",
    "pin_process",
    "all_pinnings",
    "n_of",
    "count_pinnings",
    "pinning_classes",
    "pin_word_counts",
    "return_statistics",
]


@dataclass(frozen=True)
class PinSequence:
    """Pins placed on ``window`` by the process started at ``pins[0]``.

    ``truncated`` is set when the process found at least one pin and then ran
    into the right edge of the window, so further pins may exist beyond it.
    A window that is minimal from the start onwards terminates the process
    (the finite analogue of a point of the MPW subshift).
    """

    window: Word
    pins: tuple[int, ...]
    truncated: bool


@dataclass(frozen=True)
class NValue:
    value: int
    exact: bool


def _oracle(space, code, order, oracle):
    return oracle if oracle is not None else Minimality(space, code, order)


def _pins_from_reach(reach: list[int], start: int) -> tuple[int, ...]:
    n = len(reach)
    pins = [start]
    p = start
    while reach[p] < n - 1:
        p = reach[p]
        pins.append(p)
    return tuple(pins)


def pin_process(space: ShiftSpace, code: FactorCode, order: MPWOrder, w, start: int,
                oracle: Minimality | None = None) -> PinSequence:
    """Run the pinning recurrence on the window ``w`` from ``start``.

    The next pin after ``p`` is the least ``i > p`` with ``w[p..i+1]``
    non-minimal.
    """
    idx = space.require_allowed(w)
    if not 0 <= start < len(idx):
        raise InvalidArgument("start must lie inside the window")
    reach = _oracle(space, code, order, oracle).reach(idx)
    pins = _pins_from_reach(reach, start)
    return PinSequence(space.decode(idx), pins, len(pins) > 1)


def all_pinnings(space: ShiftSpace, code: FactorCode, order: MPWOrder, w,
                 oracle: Minimality | None = None) -> list[PinSequence]:
    """Pin sequences from every start position of the window."""
    idx = space.require_allowed(w)
    reach = _oracle(space, code, order, oracle).reach(idx)
    word = space.decode(idx)
    out = []
    for s in range(len(idx)):
        pins = _pins_from_reach(reach, s)
        out.append(PinSequence(word, pins, len(pins) > 1))
    return out


def n_of(space: ShiftSpace, code: FactorCode, order: MPWOrder, w, center: int,
         oracle: Minimality | None = None) -> NValue:
    """Largest radius r with ``w[center-r .. center+r]`` minimal.

    Exact when the next larger central window fits and is non-minimal;
    otherwise the value is a lower bound limited by the window.
    """
    idx = space.require_allowed(w)
    if not 0 <= center < len(idx):
        raise InvalidArgument("center must lie inside the window")
    oracle = _oracle(space, code, order, oracle)
    r = 0
    while center - r - 1 >= 0 and center + r + 1 < len(idx):
        if not oracle.is_minimal(idx[center - r - 1:center + r + 2]):
            return NValue(r, True)
        r += 1
    return NValue(r, False)


def pinning_classes(space: ShiftSpace, code: FactorCode, order: MPWOrder, w,
                    observe: int | None = None,
                    oracle: Minimality | None = None) -> set[tuple[int, ...]]:
    """Distinct pin sets seen from position ``observe`` onwards.

    Processes start at every position left of ``observe`` (standing in for
    starts far to the left); two of them that share a pin agree from there
    on, so the surviving classes are the window analogue of the distinct
    clothespinning sequences.
    """
    idx = space.require_allowed(w)
    n = len(idx)
    m = n // 2 if observe is None else observe
    if not 0 <= m < n:
        raise InvalidArgument("observe must lie inside the window")
    reach = _oracle(space, code, order, oracle).reach(idx)
    starts = range(m) if m > 0 else range(1)
    return {tuple(p for p in _pins_from_reach(reach, s) if p >= m) for s in starts}


def count_pinnings(space: ShiftSpace, code: FactorCode, order: MPWOrder, w,
                   observe: int | None = None, oracle: Minimality | None = None) -> int:
    """Number of distinct pinning classes observed from ``observe`` (default: the middle)."""
    return len(pinning_classes(space, code, order, w, observe, oracle))


def pin_word_counts(classes: set[tuple[int, ...]], origin: int, length: int) -> Counter:
    """For each 0/1 word v of ``length``, how many classes show v at ``origin``."""
    out: Counter = Counter()
    for pins in classes:
        marks = set(pins)
        out["".join("1" if origin + i in marks else "0" for i in range(length))] += 1
    return out


@dataclass
class ReturnStatistics:
    """Counts of consecutive pin triples ``(n1, n2, a, b, c)``.

    ``n1`` and ``n2`` are the offsets of the next two pins, ``a, b, c`` the
    symbols under the three pins.
    """

    counts: dict[tuple[int, int, str, str, str], int]
    total: int
    pins: int = 0
    length: int = 0
    first_pin: int = 0
    last_pin: int = 0

    def marginal(self) -> Counter:
        out: Counter = Counter()
        for (n1, n2, *_), c in self.counts.items():
            out[(n1, n2)] += c
        return out

    def first_gaps(self) -> Counter:
        out: Counter = Counter()
        for (n1, *_), c in self.counts.items():
            out[n1] += c
        return out

    def kac(self) -> dict:
        """Mean first return to a pin against the reciprocal pin density."""
        gaps = self.first_gaps()
        n = sum(gaps.values())
        mean = sum(g * c for g, c in gaps.items()) / n
        var = sum(c * (g - mean) ** 2 for g, c in gaps.items()) / max(n - 1, 1)
        return {
            "mean_return": mean,
            "stderr": math.sqrt(var / n),
            "inverse_density": self.length / self.pins,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n1", "n2", "a", "b", "c", "count"])
        for key in sorted(self.counts):
            writer.writerow([*key, self.counts[key]])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "pins": self.pins,
            "length": self.length,
            "rows": [{"n1": k[0], "n2": k[1], "a": k[2], "b": k[3], "c": k[4], "count": v}
                     for k, v in sorted(self.counts.items())],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def return_statistics(space: ShiftSpace, code: FactorCode, order: MPWOrder,
                      sampler: MarkovMeasure, length: int, seed: int,
                      oracle: Minimality | None = None) -> ReturnStatistics:
    """Pin a sampled trajectory from its left edge and tabulate pin triples.

    The pinning started at the left edge is used as the canonical one; its
    artificial first pin is discarded.
    """
    if sampler.space != space:
        raise InvalidArgument("sampler must live on the given space")
    rng = rng_stream(seed, "return_statistics")
    x = tuple(int(i) for i in sampler.sample(length, rng))
    reach = _oracle(space, code, order, oracle).reach(x)
    # the start pin is an artefact of the left edge
    pins = _pins_from_reach(reach, 0)[1:]
    if len(pins) < 3:
        raise DegenerateSample("fewer than three pins in the sampled trajectory")
    names = space.alphabet
    counts: Counter = Counter()
    for k in range(len(pins) - 2):
        p0, p1, p2 = pins[k], pins[k + 1], pins[k + 2]
        counts[(p1 - p0, p2 - p0, names[x[p0]], names[x[p1]], names[x[p2]])] += 1
    return ReturnStatistics(dict(counts), sum(counts.values()), len(pins), length,
                            pins[0], pins[-1])
