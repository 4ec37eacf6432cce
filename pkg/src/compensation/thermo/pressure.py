"""Topological pressure on SFTs and sofic images, and Markov equilibrium states."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidArgument, RequiresIrreducible
from ..markov import MarkovMeasure
from ..shift import ShiftSpace, SoficPresentation, is_irreducible, recode_higher_block, word_array
from .perron import PerronResult, perron
from .potential import Potential

__all__ = [
    "TransferMatrix",
    "transfer_matrix",
    "pressure_sft",
    "pressure_sofic",
    "equilibrium_markov",
    "integrate",
]


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Weighted transition matrix on the allowed ``(k-1)``-blocks (symbols when k <= 2).

    ``space`` is the space whose symbols index the matrix: the input space
    when the potential has range at most 2, otherwise its higher-block
    recoding.
    """

    space: ShiftSpace
    matrix: np.ndarray


def transfer_matrix(space: ShiftSpace, f: Potential) -> TransferMatrix:
    if f.space != space:
        raise InvalidArgument("potential lives on a different space")
    adj = space.adjacency
    if f.k == 1:
        return TransferMatrix(space, adj * np.exp(f.values)[:, None])
    if f.k == 2:
        b = np.zeros((space.size, space.size))
        w = f.words
        b[w[:, 0], w[:, 1]] = np.exp(f.values)
        return TransferMatrix(space, b)
    # edge weight is f on the k-word spelled by source block plus the target's last symbol
    blocks = recode_higher_block(space, f.k - 1)
    lifted = f.recode(blocks)
    b = np.zeros((blocks.size, blocks.size))
    w = lifted.words
    b[w[:, 0], w[:, 1]] = np.exp(lifted.values)
    return TransferMatrix(blocks, b)


def _solve(space: ShiftSpace, f: Potential, left: bool = True) -> tuple[TransferMatrix, PerronResult]:
    if not is_irreducible(space):
        raise RequiresIrreducible("pressure needs an irreducible space")
    tm = transfer_matrix(space, f)
    return tm, perron(tm.matrix, left=left)


def pressure_sft(space: ShiftSpace, f: Potential) -> float:
    """``log`` of the Perron root of the weighted transfer matrix."""
    _, res = _solve(space, f, left=False)
    return float(np.log(res.value))


@lru_cache(maxsize=32)
def _core(presentation: SoficPresentation) -> SoficPresentation:
    return presentation.core()


@lru_cache(maxsize=32)
def _presentation_paths(pres: SoficPresentation, m: int) -> tuple[tuple[int, tuple[str, ...]], ...]:
    """Paths of ``m`` edges as ``(start, labels)``; right-resolving, so labels fix the path."""
    paths = [(s, ()) for s in range(pres.size)]
    for _ in range(m):
        paths = [(s, w + (y,)) for s, w in paths for y in pres.labels
                 if pres.follow(s, w + (y,)) is not None]
    return tuple(paths)


def pressure_sofic(presentation: SoficPresentation, phi: Potential) -> float:
    """Pressure of ``phi`` on the shift presented by the irreducible core of ``presentation``.

    ``phi`` is a potential on a full shift whose alphabet contains the labels.
    A right-resolving presentation is finite-to-one on paths, so the label
    weighted path graph has the same pressure.
    """
    pres = _core(presentation)
    idx = phi.space.index
    if any(y not in idx for y in pres.labels):
        raise InvalidArgument("potential alphabet does not cover the labels")
    k = phi.k
    if k == 1:
        vals = np.exp(phi.values)
        b = np.zeros((pres.size, pres.size))
        for (s, y), t in pres.edges.items():
            b[s, t] += vals[idx[y]]
        return float(np.log(perron(b, left=False).value))
    paths = _presentation_paths(pres, k - 1)
    pos = {p: i for i, p in enumerate(paths)}
    b = np.zeros((len(paths), len(paths)))
    for i, (s, w) in enumerate(paths):
        end = pres.follow(s, w)
        first = pres.step(s, w[0])
        for y in pres.labels:
            if pres.step(end, y) is None:
                continue
            j = pos[(first, w[1:] + (y,))]
            b[i, j] += np.exp(phi.lookup(np.array([[idx[c] for c in w + (y,)]]))[0])
    return float(np.log(perron(b, left=False).value))


def equilibrium_markov(space: ShiftSpace, f: Potential) -> MarkovMeasure:
    """Equilibrium state of a locally constant potential.

    For range at most 2 it is a Markov measure on ``space``; otherwise it is
    returned as a Markov measure on the ``(k-1)``-block recoding.
    """
    tm, res = _solve(space, f)
    b, r, l, lam = tm.matrix, res.right, res.left, res.value
    P = b * r[None, :] / (lam * r[:, None])
    pi = l * r
    pi = pi / pi.sum()
    P = P / P.sum(axis=1, keepdims=True)
    return MarkovMeasure(tm.space, P, pi)


def integrate(m: MarkovMeasure, f: Potential) -> float:
    """``sum_w m([w]) f(w)`` over the allowed k-words of ``f``.

    ``m`` may live on ``f.space`` or on a higher-block recoding of it.
    """
    if m.space != f.space:
        if not m.space.blocks:
            raise InvalidArgument("measure and potential live on different spaces")
        f = f.recode(m.space)
    words = word_array(m.space, f.k)
    return float(m.word_probabilities(words) @ f.lookup(words))
