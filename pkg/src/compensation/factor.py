"""Diamonds, MPW-minimal words, fiber counts and swap pairs for 1-block codes.

Minimality of a word is decided without enumerating its class: a backward
pass computes, for every position, the set of symbols from which the word's
image and final symbol can still be completed, and a forward pass checks
that the word always takes the smallest feasible successor in the MPW order.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, PreconditionViolation, RequiresIrreducible
from .shift import (
    FactorCode,
    ShiftSpace,
    Word,
    as_word,
    is_irreducible,
    recode_higher_block,
    word_array,
)

__all__ = [
    "Diamond",
    "MPWOrder",
    "FactorType",
    "SwapPair",
    "SubshiftApprox",
    "Minimality",
    "find_diamond",
    "classify_factor",
    "is_mpw_minimal",
    "mpw_forbidden",
    "fiber_count",
    "relative_entropy_profile",
    "find_swap_pair",
]


@dataclass(frozen=True)
class Diamond:
    u: Word
    v: Word

    def __post_init__(self):
        if len(self.u) != len(self.v) or self.u == self.v:
            raise InvalidArgument("diamond words must be distinct and of equal length")
        if self.u[0] != self.v[0] or self.u[-1] != self.v[-1]:
            raise InvalidArgument("diamond words must share endpoints")

    def __len__(self):
        return len(self.u)


@dataclass(frozen=True)
class MPWOrder:
    """A strict total order on the alphabet, smallest first."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidArgument("order lists a symbol twice")

    @classmethod
    def default(cls, space: ShiftSpace) -> "MPWOrder":
        return cls(space.alphabet)

    def check(self, space: ShiftSpace) -> None:
        missing = [s for s in space.alphabet if s not in self.symbols]
        if missing:
            raise InvalidArgument(f"order omits symbol {missing[0]!r}")

    def rank(self, space: ShiftSpace) -> np.ndarray:
        """Array mapping symbol index to its rank in the order."""
        self.check(space)
        pos = {s: r for r, s in enumerate(s for s in self.symbols if s in space.index)}
        return np.array([pos[s] for s in space.alphabet], dtype=np.int64)


class FactorType(str, enum.Enum):
    FINITE_TO_ONE = "FiniteToOne"
    INFINITE_TO_ONE = "InfiniteToOne"


@dataclass(frozen=True)
class SwapPair:
    u: Word
    v: Word
    verified_length: int


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Minimality:
    """MPW-minimality queries for a fixed (space, code, order).

    All word arguments are tuples of symbol *indices* of ``space``.  Answers
    are memoized per word.
    """

    def __init__(self, space: ShiftSpace, code: FactorCode, order: MPWOrder | None = None):
        order = order or MPWOrder.default(space)
        self.space, self.code, self.order = space, code, order
        rank = order.rank(space)
        self.rank = rank
        self.unrank = np.argsort(rank)
        k = space.size
        adj = space.adjacency
        # bitsets indexed by rank, so the lowest set bit is the order-minimum
        self.succ = [0] * k
        self.pred = [0] * k
        for i in range(k):
            for j in np.flatnonzero(adj[i]):
                self.succ[rank[i]] |= 1 << int(rank[j])
                self.pred[rank[j]] |= 1 << int(rank[i])
        labels = code.label_indices(space)
        self.label_of_rank = [int(labels[self.unrank[r]]) for r in range(k)]
        self.label_mask = [0] * len(code.labels)
        for r in range(k):
            self.label_mask[self.label_of_rank[r]] |= 1 << r
        self._pred_cache: dict[int, int] = {}
        self._memo: dict[tuple[int, ...], bool] = {}

    def _pred_of(self, mask: int) -> int:
        out = self._pred_cache.get(mask)
        if out is None:
            out = 0
            for r in _bits(mask):
                out |= self.pred[r]
            self._pred_cache[mask] = out
        return out

    def _feasible(self, ranks: Sequence[int]) -> list[int]:
        n = len(ranks)
        feas = [0] * n
        feas[-1] = 1 << ranks[-1]
        for i in range(n - 2, -1, -1):
            feas[i] = self.label_mask[self.label_of_rank[ranks[i]]] & self._pred_of(feas[i + 1])
        return feas

    def is_minimal(self, word: Sequence[int]) -> bool:
        word = tuple(word)
        if len(word) <= 2:
            return True
        hit = self._memo.get(word)
        if hit is not None:
            return hit
        ranks = [int(self.rank[i]) for i in word]
        feas = self._feasible(ranks)
        ok = True
        for i in range(1, len(ranks)):
            cand = self.succ[ranks[i - 1]] & feas[i]
            if (cand & -cand) != 1 << ranks[i]:
                ok = False
                break
        if len(word) <= 24:
            self._memo[word] = ok
        return ok

    def lexmin(self, word: Sequence[int]) -> tuple[int, ...]:
        """The MPW-smallest word with the same length, endpoints and image."""
        ranks = [int(self.rank[i]) for i in word]
        feas = self._feasible(ranks)
        out = [ranks[0]]
        for i in range(1, len(ranks)):
            cand = self.succ[out[-1]] & feas[i]
            out.append((cand & -cand).bit_length() - 1)
        return tuple(int(self.unrank[r]) for r in out)

    def reach(self, word: Sequence[int]) -> list[int]:
        """``reach[i]`` is the largest j with ``word[i..j]`` minimal.

        Minimal words are closed under taking subwords, so reach is
        non-decreasing and a two-pointer sweep suffices.
        """
        word = tuple(word)
        n = len(word)
        out = [0] * n
        j = 0
        for i in range(n):
            j = max(j, min(i + 1, n - 1))
            while j + 1 < n and self.is_minimal(word[i:j + 2]):
                j += 1
            out[i] = j
        return out

    def class_words(self, word: Sequence[int]) -> list[tuple[int, ...]]:
        """Every allowed word sharing length, endpoints and image with ``word`` (exponential)."""
        ranks = [int(self.rank[i]) for i in word]
        feas = self._feasible(ranks)
        out: list[tuple[int, ...]] = []

        def extend(prefix: list[int]):
            i = len(prefix)
            if i == len(ranks):
                out.append(tuple(int(self.unrank[r]) for r in prefix))
                return
            for r in _bits(self.succ[prefix[-1]] & feas[i]):
                extend(prefix + [r])

        extend([ranks[0]])
        return out


def find_diamond(space: ShiftSpace, code: FactorCode, max_len: int) -> Diamond | None:
    """A shortest diamond of length at most ``max_len``, searched in the pair graph.

    Among shortest diamonds the one whose interleaved symbol pairs are
    lexicographically smallest (with ``u < v``) is returned.
    """
    if max_len < 2:
        raise InvalidArgument("max_len must be at least 2")
    lab = code.label_indices(space)
    adj = space.adjacency
    k = space.size
    layer: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
    for s in range(k):
        for t in range(k):
            for t2 in range(t + 1, k):
                if adj[s, t] and adj[s, t2] and lab[t] == lab[t2]:
                    layer.setdefault((t, t2), ((s, s), (t, t2)))
    length = 2
    while layer and length < max_len:
        length += 1
        nxt: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
        for (a, b), path in sorted(layer.items(), key=lambda kv: kv[1]):
            for t in np.flatnonzero(adj[a]):
                for t2 in np.flatnonzero(adj[b]):
                    if lab[t] != lab[t2]:
                        continue
                    if t == t2:
                        full = path + ((int(t), int(t2)),)
                        u = space.decode(p[0] for p in full)
                        v = space.decode(p[1] for p in full)
                        return Diamond(u, v)
                    nxt.setdefault((int(t), int(t2)), path + ((int(t), int(t2)),))
        layer = nxt
    return None


def classify_factor(space: ShiftSpace, code: FactorCode) -> FactorType:
    """Infinite-to-one iff a diamond exists; the pair graph bounds its length."""
    if not is_irreducible(space):
        raise RequiresIrreducible("classification needs an irreducible space")
    found = find_diamond(space, code, space.size ** 2 + 1)
    return FactorType.INFINITE_TO_ONE if found is not None else FactorType.FINITE_TO_ONE


def is_mpw_minimal(space: ShiftSpace, code: FactorCode, order: MPWOrder, w) -> bool:
    """Whether ``w`` is the smallest word of its (length, endpoints, image) class."""
    idx = space.require_allowed(w)
    if not idx:
        raise InvalidArgument("empty word")
    return Minimality(space, code, order).is_minimal(idx)


def mpw_forbidden(space: ShiftSpace, code: FactorCode, order: MPWOrder, L: int,
                  oracle: Minimality | None = None) -> list[Word]:
    """Non-minimal words of length at most L all of whose proper subwords are minimal.

    These form a minimal forbidden list for the length-L approximation of
    the MPW subshift.
    """
    if L < 3:
        raise InvalidArgument("L must be at least 3")
    oracle = oracle or Minimality(space, code, order)
    adj = space.adjacency
    minimal = {(i, j) for i in range(space.size) for j in range(space.size) if adj[i, j]}
    out: list[tuple[int, ...]] = []
    for n in range(3, L + 1):
        grown = set()
        for w in minimal:
            for j in np.flatnonzero(adj[w[-1]]):
                cand = w + (int(j),)
                if cand[1:] not in minimal:
                    continue
                if oracle.is_minimal(cand):
                    grown.add(cand)
                else:
                    out.append(cand)
        minimal = grown
    out.sort(key=lambda w: (len(w), w))
    return [space.decode(w) for w in out]


def fiber_count(space: ShiftSpace, code: FactorCode, y) -> int:
    """Number of allowed words of X mapping onto the word ``y``."""
    y = as_word(y, code.labels)
    if not len(y):
        return 1
    masks = code.label_masks(space)
    if any(s not in masks for s in y):
        return 0
    adj = space.adjacency.astype(object)
    member = [np.array([masks[s] >> i & 1 for i in range(space.size)], dtype=object) for s in y]
    vec = member[0].copy()
    for m in member[1:]:
        vec = vec.dot(adj) * m
    return int(sum(vec))


def relative_entropy_profile(space: ShiftSpace, code: FactorCode, y) -> float:
    """``log |preimages of y| / |y|``; its limsup along a point is the fiber entropy."""
    y = as_word(y, code.labels)
    if not len(y):
        raise InvalidArgument("empty word")
    count = fiber_count(space, code, y)
    if count == 0:
        raise InvalidArgument(f"{y} is not in the language of the image")
    return math.log(count) / len(y)


@dataclass(frozen=True)
class SubshiftApprox:
    """The subshift of ``base`` avoiding a finite list of words."""

    base: ShiftSpace
    forbidden: tuple[Word, ...]

    def __post_init__(self):
        words = tuple(as_word(w, self.base.alphabet) for w in self.forbidden)
        for w in words:
            if not self.base.is_allowed(w):
                raise InvalidArgument(f"forbidden word {w} is not allowed in the base space")
        object.__setattr__(self, "forbidden", words)

    @cached_property
    def _forbidden_idx(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.base.encode(w) for w in self.forbidden)

    @property
    def is_proper(self) -> bool:
        return bool(self.forbidden)

    def avoids(self, word) -> bool:
        """Whether a word (symbols or index tuple) contains no forbidden word."""
        if isinstance(word, (Word, str)):
            word = self.base.encode(as_word(word, self.base.alphabet))
        word = tuple(word)
        for f in self._forbidden_idx:
            m = len(f)
            for i in range(len(word) - m + 1):
                if word[i:i + m] == f:
                    return False
        return True

    @cached_property
    def block_length(self) -> int:
        return max([1] + [len(w) - 1 for w in self.forbidden])

    @cached_property
    def as_shift(self) -> ShiftSpace:
        """The approximation as an essential vertex shift on blocks of ``block_length``."""
        blocks = recode_higher_block(self.base, self.block_length)
        edges = []
        for s, t in blocks.transitions:
            a = self.base.encode(blocks.blocks[blocks.index[s]])
            b = self.base.encode(blocks.blocks[blocks.index[t]])
            if self.avoids(a + b[-1:]):
                edges.append((s, t))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                return ShiftSpace(blocks.alphabet, frozenset(edges), blocks=blocks.blocks)
            except InvalidArgument:
                raise PreconditionViolation("the approximation contains no bi-infinite point") from None

    def words(self, n: int) -> set[tuple[int, ...]]:
        """Index words of length n occurring in points of the approximation."""
        z = self.as_shift
        b = self.block_length
        span = max(1, n - b + 1)
        out = set()
        for row in word_array(z, span):
            full = self.base.encode(z.blocks[row[0]]) + tuple(
                self.base.index[z.blocks[r][-1]] for r in row[1:])
            for i in range(len(full) - n + 1):
                out.add(full[i:i + n])
        return out


def _class_candidates(oracle: Minimality, u: tuple[int, ...]):
    return [w for w in oracle.class_words(u) if w != u]


def find_swap_pair(space: ShiftSpace, code: FactorCode, z: SubshiftApprox, max_len: int,
                   context_len: int) -> SwapPair | None:
    """Shortest pair (u, v) with u in Z, v outside Z, equal endpoints and image,
    such that every Z-context s u t turns into a word s v t with exactly one v.

    The context condition is checked exhaustively for ``|s| = |t| = context_len``,
    which covers all shorter contexts.  ``None`` means nothing was found within
    ``max_len``; it is not a proof of non-existence.
    """
    if not z.is_proper:
        raise PreconditionViolation("Z forbids nothing, so it is not a proper subshift")
    if z.base != space:
        raise InvalidArgument("Z must be a subshift of the given space")
    lab = code.label_indices(space)
    for n in range(1, context_len + 1):
        img_z = {tuple(lab[list(w)]) for w in z.words(n)}
        img_x = {tuple(lab[row]) for row in word_array(space, n)}
        if img_z != img_x:
            raise PreconditionViolation(f"pi(Z) misses an image word of length {n}")
    oracle = Minimality(space, code, MPWOrder.default(space))
    for n in range(3, max_len + 1):
        z_words = sorted(z.words(n))
        long_words = z.words(n + 2 * context_len)
        for u in z_words:
            for v in _class_candidates(oracle, u):
                if z.avoids(v):
                    continue
                if _unique_occurrence(u, v, long_words, context_len):
                    return SwapPair(space.decode(u), space.decode(v), context_len)
    return None


def _unique_occurrence(u, v, long_words, c) -> bool:
    n = len(u)
    for w in long_words:
        if w[c:c + n] != u:
            continue
        swapped = w[:c] + v + w[c + n:]
        hits = sum(1 for i in range(len(swapped) - n + 1) if swapped[i:i + n] == v)
        if hits != 1:
            return False
    return True
