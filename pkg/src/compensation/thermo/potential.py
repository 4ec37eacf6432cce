"""Locally constant potentials stored as tables on allowed k-words."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

from ..errors import InvalidArgument
from ..shift import FactorCode, ShiftSpace, Word, as_word, word_array

__all__ = ["Potential", "label_space"]


def label_space(code: FactorCode) -> ShiftSpace:
    """The full shift on the code's labels, used as the carrier of potentials on Y.

    Tables over it cover every word of Y (and possibly some that never occur).
    """
    return ShiftSpace.full(code.labels)


def _codes(words: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(len(words), dtype=np.int64)
    for c in range(words.shape[1]):
        out = out * base + words[:, c]
    return out


@dataclass(frozen=True, eq=False)
class Potential:
    """A function of the coordinates ``x[-offset] .. x[k-1-offset]``.

    ``values[i]`` belongs to row ``i`` of ``word_array(space, k)``.
    ``tail_t``, when set, records that the potential is a member of a
    family whose variations obey ``var_n <= tail_t * log(n+2)/(n+2)``.
    """

    space: ShiftSpace
    k: int
    values: np.ndarray
    offset: int = 0
    tail_t: float | None = field(default=None)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgument("potential range must be at least 1")
        if not 0 <= self.offset < self.k:
            raise InvalidArgument("offset must lie inside the window")
        v = np.array(self.values, dtype=float).reshape(-1)
        if len(v) != len(self.words):
            raise InvalidArgument(f"expected {len(self.words)} values, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("potential values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def words(self) -> np.ndarray:
        return word_array(self.space, self.k)

    @cached_property
    def _sorted_codes(self) -> np.ndarray:
        # word_array rows are lexicographic, so their codes are already sorted
        return _codes(self.words, self.space.size)

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, space: ShiftSpace, c: float = 0.0, k: int = 1) -> "Potential":
        return cls(space, k, np.full(len(word_array(space, k)), float(c)))

    @classmethod
    def from_function(cls, space: ShiftSpace, k: int, fn: Callable[[Word], float],
                      offset: int = 0) -> "Potential":
        words = word_array(space, k)
        return cls(space, k, [fn(space.decode(w)) for w in words], offset)

    @classmethod
    def from_table(cls, space: ShiftSpace, k: int, table: Mapping, offset: int = 0,
                   default: float | None = None) -> "Potential":
        """Build from ``{word: value}``; every allowed k-word needs an entry unless ``default`` is given."""
        lookup = {}
        for key, val in table.items():
            idx = space.encode(as_word(key, space.alphabet))
            if len(idx) != k:
                raise InvalidArgument(f"table word {key!r} does not have length {k}")
            lookup[idx] = float(val)
        words = word_array(space, k)
        vals = []
        for w in words:
            key = tuple(int(i) for i in w)
            if key in lookup:
                vals.append(lookup[key])
            elif default is not None:
                vals.append(float(default))
            else:
                raise InvalidArgument(f"table misses allowed word {str(space.decode(key))!r}")
        return cls(space, k, vals, offset)

    @classmethod
    def symbol(cls, space: ShiftSpace, values: Mapping[str, float]) -> "Potential":
        """Range-1 potential ``f(x) = values[x_0]`` (missing symbols get 0)."""
        return cls(space, 1, [float(values.get(s, 0.0)) for s in space.alphabet])

    # evaluation ---------------------------------------------------------------
    def lookup(self, words: np.ndarray) -> np.ndarray:
        """Values on the rows of an ``(m, k)`` index array of allowed words."""
        words = np.asarray(words, dtype=np.int64).reshape(-1, self.k)
        codes = _codes(words, self.space.size)
        pos = np.searchsorted(self._sorted_codes, codes)
        pos = np.minimum(pos, len(self._sorted_codes) - 1)
        if np.any(self._sorted_codes[pos] != codes):
            raise InvalidArgument("word outside the potential's table")
        return self.values[pos]

    def __call__(self, word) -> float:
        idx = self.space.require_allowed(word)
        return float(self.lookup(np.array([idx]))[0])

    def table(self) -> dict[str, float]:
        return {str(self.space.decode(w)): float(v) for w, v in zip(self.words, self.values)}

    # algebra ------------------------------------------------------------------
    def extend(self, k: int, offset: int) -> "Potential":
        """The same function written on a larger window ``(k, offset)``."""
        start = offset - self.offset
        if start < 0 or start + self.k > k:
            raise InvalidArgument("target window does not contain the potential's window")
        words = word_array(self.space, k)
        vals = self.lookup(words[:, start:start + self.k])
        return Potential(self.space, k, vals, offset, self.tail_t)

    def _common(self, other: "Potential") -> tuple[int, int]:
        left = max(self.offset, other.offset)
        right = max(self.k - self.offset, other.k - other.offset)
        return left + right, left

    def __add__(self, other) -> "Potential":
        if isinstance(other, Potential):
            if other.space != self.space:
                raise InvalidArgument("potentials live on different spaces")
            k, off = self._common(other)
            a, b = self.extend(k, off), other.extend(k, off)
            return Potential(self.space, k, a.values + b.values, off)
        return Potential(self.space, self.k, self.values + float(other), self.offset, self.tail_t)

    __radd__ = __add__

    def __mul__(self, c: float) -> "Potential":
        return Potential(self.space, self.k, self.values * float(c), self.offset)

    __rmul__ = __mul__

    def __neg__(self) -> "Potential":
        return self * -1.0

    def compose(self, code: FactorCode, domain: ShiftSpace) -> "Potential":
        """``self`` pulled back along a 1-block code, as a potential on ``domain``."""
        lab = code.label_indices(domain)
        names = code.labels
        mapped = np.array([self.space.index[names[i]] for i in range(len(names))], dtype=np.int64)
        words = word_array(domain, self.k)
        return Potential(domain, self.k, self.lookup(mapped[lab[words]]), self.offset)

    def recode(self, recoded: ShiftSpace) -> "Potential":
        """Lift to a higher-block recoding of ``self.space`` (range shrinks accordingly)."""
        if not recoded.blocks:
            raise InvalidArgument("target is not a higher-block recoding")
        n = len(recoded.blocks[0])
        m = max(1, self.k - n + 1)
        words = word_array(recoded, m)
        blocks = np.array([[self.space.index[s] for s in b] for b in recoded.blocks], dtype=np.int64)
        # unfold each m-word of blocks into its (m+n-1)-word over the base
        base = np.hstack([blocks[words[:, 0]]] + [blocks[words[:, c]][:, -1:] for c in range(1, m)])
        return Potential(recoded, m, self.lookup(base[:, :self.k]), 0)

    # io -----------------------------------------------------------------------
    def to_json(self) -> dict:
        out = {"range": self.k, "table": self.table()}
        if self.offset:
            out["offset"] = self.offset
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, space: ShiftSpace, data: Mapping) -> "Potential":
        try:
            k = int(data["range"])
            table = data["table"]
        except (KeyError, TypeError, ValueError):
            raise InvalidArgument("potential JSON needs 'range' and 'table'") from None
        return cls.from_table(space, k, table, int(data.get("offset", 0)))
