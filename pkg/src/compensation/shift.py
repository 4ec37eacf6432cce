"""Vertex shifts of finite type, words, 1-block codes and sofic presentations.

A :class:`ShiftSpace` is a 1-step SFT given by an alphabet and a set of
allowed length-2 words.  Symbols are strings.  Words are tuples of symbols
with an integer origin, so a word doubles as a cylinder ``[w]_i``.

Internally most algorithms work with symbol *indices* (position in the
declared alphabet) and with Python ints used as bitsets over those indices.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "Word",
    "ShiftSpace",
    "FactorCode",
    "SoficPresentation",
    "recode_higher_block",
    "is_irreducible",
    "enumerate_words",
    "word_array",
    "apply_code",
    "sofic_presentation",
]


def _render(symbols: Sequence[str]) -> str:
    if all(len(s) == 1 for s in symbols):
        return "".join(symbols)
    return " ".join(symbols)


@dataclass(frozen=True)
class Word:
    """A finite word ``symbols`` whose first coordinate sits at ``origin``."""

    symbols: tuple[str, ...]
    origin: int = 0

    def __post_init__(self):
        if not isinstance(self.symbols, tuple):
            object.__setattr__(self, "symbols", tuple(self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __getitem__(self, key):
        if isinstance(key, slice):
            start, _, step = key.indices(len(self.symbols))
            if step != 1:
                raise InvalidArgument("words only support contiguous slices")
            return Word(self.symbols[key], self.origin + start)
        return self.symbols[key]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.symbols + tuple(other), self.origin)

    def __str__(self) -> str:
        return _render(self.symbols)

    def shifted(self, k: int) -> "Word":
        return Word(self.symbols, self.origin + k)

    @property
    def end(self) -> int:
        """Coordinate of the last symbol."""
        return self.origin + len(self.symbols) - 1


def as_word(value, alphabet: Iterable[str] | None = None) -> Word:
    """Coerce a string, sequence or :class:`Word` into a :class:`Word`.

    Strings are split into characters when every symbol of ``alphabet`` is a
    single character (or no alphabet is given), and on whitespace otherwise.
    """
    if isinstance(value, Word):
        return value
    if isinstance(value, str):
        if alphabet is not None and any(len(s) != 1 for s in alphabet):
            return Word(tuple(value.split()))
        return Word(tuple(value))
    return Word(tuple(value))


@dataclass(frozen=True)
class ShiftSpace:
    """A 1-step shift of finite type on a finite ordered alphabet.

    Symbols that cannot occur in any bi-infinite point (no predecessor or no
    successor, iterated) are trimmed at construction; the removed symbols are
    kept in ``trimmed`` and a :class:`UserWarning` is emitted.
    """

    alphabet: tuple[str, ...]
    transitions: frozenset[tuple[str, str]]
    trimmed: tuple[str, ...] = field(default=(), compare=False)
    blocks: tuple[tuple[str, ...], ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        alphabet = tuple(str(s) for s in self.alphabet)
        if not alphabet:
            raise InvalidArgument("alphabet must be nonempty")
        if len(set(alphabet)) != len(alphabet):
            raise InvalidArgument("alphabet has repeated symbols")
        known = set(alphabet)
        edges = set()
        for pair in self.transitions:
            s, t = (str(x) for x in pair)
            if s not in known or t not in known:
                bad = s if s not in known else t
                raise InvalidArgument(f"transition ({s}, {t}) uses unknown symbol {bad!r}")
            edges.add((s, t))

        keep = list(alphabet)
        removed: list[str] = []
        while True:
            alive = set(keep)
            has_out = {s for s, t in edges if s in alive and t in alive}
            has_in = {t for s, t in edges if s in alive and t in alive}
            dead = [s for s in keep if s not in has_out or s not in has_in]
            if not dead:
                break
            removed.extend(dead)
            keep = [s for s in keep if s not in dead]
        if not keep:
            raise InvalidArgument("no symbol survives trimming to the essential graph")
        if removed:
            warnings.warn(f"trimmed stranded symbols {removed}", UserWarning, stacklevel=3)
        alive = set(keep)
        blocks = self.blocks
        if blocks is not None and removed:
            blocks = tuple(b for s, b in zip(alphabet, blocks) if s in alive)
        object.__setattr__(self, "alphabet", tuple(keep))
        object.__setattr__(self, "transitions",
                           frozenset((s, t) for s, t in edges if s in alive and t in alive))
        object.__setattr__(self, "trimmed", tuple(self.trimmed) + tuple(removed))
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def full(cls, alphabet: Iterable[str]) -> "ShiftSpace":
        alphabet = tuple(str(s) for s in alphabet)
        return cls(alphabet, frozenset((s, t) for s in alphabet for t in alphabet))

    @classmethod
    def from_forbidden_pairs(cls, alphabet: Iterable[str], forbidden: Iterable[str | tuple]) -> "ShiftSpace":
        """Build the space allowing every pair except those in ``forbidden``."""
        alphabet = tuple(str(s) for s in alphabet)
        bad = {tuple(as_word(f, alphabet)) for f in forbidden}
        return cls(alphabet, frozenset((s, t) for s in alphabet for t in alphabet if (s, t) not in bad))

    # -- derived data -------------------------------------------------------

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.alphabet)}

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.size, self.size), dtype=bool)
        for s, t in self.transitions:
            a[self.index[s], self.index[t]] = True
        a.setflags(write=False)
        return a

    @cached_property
    def succ_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << int(j) for j in np.flatnonzero(row)) for row in self.adjacency)

    @cached_property
    def pred_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << int(i) for i in np.flatnonzero(col)) for col in self.adjacency.T)

    def parse(self, text) -> Word:
        return as_word(text, self.alphabet)

    def encode(self, word) -> tuple[int, ...]:
        """Symbol indices of ``word``; unknown symbols raise InvalidArgument."""
        w = self.parse(word)
        try:
            return tuple(self.index[s] for s in w)
        except KeyError as exc:
            raise InvalidArgument(f"symbol {exc.args[0]!r} is not in the alphabet") from None

    def decode(self, indices: Iterable[int], origin: int = 0) -> Word:
        return Word(tuple(self.alphabet[int(i)] for i in indices), origin)

    def is_allowed(self, word) -> bool:
        try:
            idx = self.encode(word)
        except InvalidArgument:
            return False
        adj = self.adjacency
        return all(adj[i, j] for i, j in zip(idx, idx[1:]))

    def require_allowed(self, word) -> tuple[int, ...]:
        idx = self.encode(word)
        adj = self.adjacency
        for k, (i, j) in enumerate(zip(idx, idx[1:])):
            if not adj[i, j]:
                raise InvalidArgument(
                    f"word {self.parse(word)} has forbidden transition "
                    f"{self.alphabet[i]}{self.alphabet[j]} at offset {k}")
        return idx


def _block_name(symbols: Sequence[str]) -> str:
    if all(len(s) == 1 for s in symbols):
        return "".join(symbols)
    return "|".join(symbols)


def recode_higher_block(space: ShiftSpace, n: int) -> ShiftSpace:
    """The n-block presentation of ``space``.

    Symbols are the allowed n-words (named by concatenation) and transitions
    are the overlapping pairs, i.e. the allowed (n+1)-words.  The original
    symbol tuple of each block symbol is kept in ``blocks``.
    """
    if n < 1:
        raise InvalidArgument("block length must be at least 1")
    words = word_array(space, n)
    base = space.blocks
    names, tuples = [], []
    for row in words:
        syms = tuple(space.alphabet[i] for i in row)
        names.append(_block_name(syms))
        if base is None:
            tuples.append(syms)
        else:
            tuples.append(tuple(s for i in row for s in base[i][:1]) + base[row[-1]][1:])
    if n == 1:
        return ShiftSpace(tuple(names), frozenset(
            (names[i], names[j]) for i, j in zip(*np.nonzero(space.adjacency))), blocks=tuple(tuples))
    position = {tuple(row): k for k, row in enumerate(words.tolist())}
    adj = space.adjacency
    edges = set()
    for k, row in enumerate(words.tolist()):
        tail = tuple(row[1:])
        for j in np.flatnonzero(adj[row[-1]]):
            nxt = position.get(tail + (int(j),))
            if nxt is not None:
                edges.add((names[k], names[nxt]))
    return ShiftSpace(tuple(names), frozenset(edges), blocks=tuple(tuples))


def _reach(masks: Sequence[int], start: int) -> int:
    seen = 1 << start
    frontier = [start]
    while frontier:
        i = frontier.pop()
        new = masks[i] & ~seen
        seen |= new
        while new:
            low = new & -new
            frontier.append(low.bit_length() - 1)
            new ^= low
    return seen


def is_irreducible(space: ShiftSpace) -> bool:
    """True iff the transition graph is strongly connected."""
    everything = (1 << space.size) - 1
    return (_reach(space.succ_masks, 0) == everything
            and _reach(space.pred_masks, 0) == everything)


def word_array(space: ShiftSpace, n: int) -> np.ndarray:
    """All allowed n-words as an ``(count, n)`` index array in lexicographic order."""
    if n < 1:
        raise InvalidArgument("word length must be at least 1")
    words = np.arange(space.size, dtype=np.int64)[:, None]
    adj = space.adjacency
    for _ in range(n - 1):
        last = words[:, -1]
        parts = []
        for j in range(space.size):
            keep = words[adj[last, j]]
            if len(keep):
                parts.append(np.hstack([keep, np.full((len(keep), 1), j, dtype=np.int64)]))
        words = np.vstack(parts)
        words = words[np.lexsort(words.T[::-1])]
    return words


def enumerate_words(space: ShiftSpace, n: int) -> list[Word]:
    """Allowed n-words in lexicographic order of the declared alphabet."""
    return [space.decode(row) for row in word_array(space, n)]


@dataclass(frozen=True)
class FactorCode:
    """A 1-block code given by a symbol-to-label map.

    ``labels`` is the target alphabet in order of first appearance.
    """

    labeling: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "labeling", {str(k): str(v) for k, v in dict(self.labeling).items()})

    def __hash__(self):
        return hash(tuple(self.labeling.items()))

    @classmethod
    def identity(cls, space: ShiftSpace) -> "FactorCode":
        return cls({s: s for s in space.alphabet})

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.labeling.values()))

    def check_domain(self, space: ShiftSpace) -> None:
        for s in space.alphabet:
            if s not in self.labeling:
                raise InvalidArgument(f"code has no label for symbol {s!r}")

    def label_indices(self, space: ShiftSpace) -> np.ndarray:
        """Array mapping symbol index to label index."""
        self.check_domain(space)
        pos = {y: k for k, y in enumerate(self.labels)}
        return np.array([pos[self.labeling[s]] for s in space.alphabet], dtype=np.int64)

    def label_masks(self, space: ShiftSpace) -> dict[str, int]:
        """Bitset of symbol indices carrying each label."""
        self.check_domain(space)
        masks = {y: 0 for y in self.labels}
        for i, s in enumerate(space.alphabet):
            masks[self.labeling[s]] |= 1 << i
        return masks

    def on_blocks(self, recoded: ShiftSpace) -> "FactorCode":
        """The induced code on a higher-block space: a block maps to the label of its first symbol."""
        if recoded.blocks is None:
            raise InvalidArgument("space carries no block structure")
        return FactorCode({name: self.labeling[b[0]] for name, b in zip(recoded.alphabet, recoded.blocks)})


def apply_code(code: FactorCode, w) -> Word:
    """Symbol-wise image of ``w``; keeps length and origin."""
    w = as_word(w, code.labeling.keys())
    try:
        return Word(tuple(code.labeling[s] for s in w), w.origin)
    except KeyError as exc:
        raise InvalidArgument(f"symbol {exc.args[0]!r} is outside the code's domain") from None


@dataclass(frozen=True)
class SoficPresentation:
    """A right-resolving labeled graph.

    ``states`` holds, for each state, the symbol subsets of X that were
    merged into it (follower-equivalent subsets).  ``edges`` maps
    ``(state, label)`` to the target state.
    """

    states: tuple[tuple[frozenset[str], ...], ...]
    labels: tuple[str, ...]
    edges: Mapping[tuple[int, str], int]
    initial: int = 0

    def __hash__(self):
        return hash((self.states, self.labels, tuple(sorted(self.edges.items()))))

    @property
    def size(self) -> int:
        return len(self.states)

    def step(self, state: int | None, label: str) -> int | None:
        if state is None:
            return None
        return self.edges.get((state, label))

    def follow(self, state: int | None, word: Iterable[str]) -> int | None:
        for y in word:
            state = self.step(state, y)
        return state

    def accepts(self, word) -> bool:
        return self.follow(self.initial, as_word(word, self.labels)) is not None

    def label_words(self, n: int) -> set[tuple[str, ...]]:
        """Labels of all length-n paths (from any state)."""
        layer = {((), s) for s in range(self.size)}
        for _ in range(n):
            layer = {(w + (y,), t) for w, s in layer for y in self.labels
                     if (t := self.edges.get((s, y))) is not None}
        return {w for w, _ in layer}

    def adjacency_counts(self) -> np.ndarray:
        m = np.zeros((self.size, self.size))
        for (s, _), t in self.edges.items():
            m[s, t] += 1
        return m

    def terminal_components(self) -> list[frozenset[int]]:
        from scipy.sparse.csgraph import connected_components

        count, comp = connected_components(self.adjacency_counts() > 0, connection="strong")
        out = []
        for c in range(count):
            members = frozenset(int(i) for i in np.flatnonzero(comp == c))
            leaves = any(t not in members for (s, _), t in self.edges.items() if s in members)
            has_cycle = any(t in members for (s, _), t in self.edges.items() if s in members)
            if not leaves and has_cycle:
                out.append(members)
        return out

    def core(self) -> "SoficPresentation":
        """Restriction to the terminal strongly connected component."""
        comps = self.terminal_components()
        if len(comps) != 1:
            raise InvalidArgument(f"presentation has {len(comps)} terminal components")
        keep = sorted(comps[0])
        renum = {old: new for new, old in enumerate(keep)}
        edges = {(renum[s], y): renum[t] for (s, y), t in self.edges.items() if s in renum}
        return SoficPresentation(tuple(self.states[i] for i in keep), self.labels, edges, 0)


def _mask_to_set(space: ShiftSpace, mask: int) -> frozenset[str]:
    return frozenset(s for i, s in enumerate(space.alphabet) if mask >> i & 1)


def sofic_presentation(space: ShiftSpace, code: FactorCode) -> SoficPresentation:
    """Right-resolving presentation of the image of ``space`` under ``code``.

    Subset construction from the full alphabet, followed by merging of
    subsets with equal follower sets (partition refinement).
    """
    succ = space.succ_masks
    label_mask = code.label_masks(space)
    labels = code.labels

    def step(mask: int, y: str) -> int:
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= succ[low.bit_length() - 1]
            m ^= low
        return out & label_mask[y]

    full = (1 << space.size) - 1
    order = [full]
    seen = {full: 0}
    delta: dict[tuple[int, str], int] = {}
    queue = deque([full])
    while queue:
        m = queue.popleft()
        for y in labels:
            t = step(m, y)
            if not t:
                continue
            if t not in seen:
                seen[t] = len(order)
                order.append(t)
                queue.append(t)
            delta[(seen[m], y)] = seen[t]

    # Moore refinement; a missing edge behaves like a transition to a dead state.
    block = [0] * len(order)
    while True:
        sigs = {}
        new = []
        for s in range(len(order)):
            sig = (block[s],) + tuple(block[delta[(s, y)]] if (s, y) in delta else -1 for y in labels)
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == len(set(block)):
            block = new
            break
        block = new

    # renumber blocks in discovery order so the initial state is 0
    renum: dict[int, int] = {}
    for b in block:
        renum.setdefault(b, len(renum))
    members: list[list[frozenset[str]]] = [[] for _ in renum]
    for s, b in enumerate(block):
        members[renum[b]].append(_mask_to_set(space, order[s]))
    edges = {(renum[block[s]], y): renum[block[t]] for (s, y), t in delta.items()}
    return SoficPresentation(tuple(tuple(m) for m in members), labels, edges, 0)
