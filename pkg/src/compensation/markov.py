"""Stationary Markov measures on vertex shifts, and seeded sampling."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidArgument
from .shift import ShiftSpace

__all__ = ["MarkovMeasure", "markov_entropy", "rng_stream", "stationary_vector"]

ATOL = 1e-12


def rng_stream(seed: int, experiment: str = "", replicate: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, experiment, replicate)``."""
    key = [int(seed) & 0xFFFFFFFF, zlib.crc32(experiment.encode()), int(replicate)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def stationary_vector(transition: np.ndarray) -> np.ndarray:
    k = transition.shape[0]
    lhs = np.vstack([transition.T - np.eye(k), np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.where(pi < 0, 0.0, pi)
    return pi / pi.sum()


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """A stationary Markov chain on the symbols of ``space``."""

    space: ShiftSpace
    transition: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        P = np.array(self.transition, dtype=float)
        pi = np.array(self.stationary, dtype=float)
        k = self.space.size
        if P.shape != (k, k) or pi.shape != (k,):
            raise InvalidArgument("transition/stationary shapes do not match the alphabet")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1) > ATOL):
            raise InvalidArgument("transition matrix must be row-stochastic")
        if np.any(P[~self.space.adjacency] != 0):
            raise InvalidArgument("transition puts mass on a forbidden pair")
        if np.any(pi < 0) or abs(pi.sum() - 1) > ATOL:
            raise InvalidArgument("stationary vector must be a probability vector")
        if np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise InvalidArgument("stationary vector is not invariant")
        P.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_transition(cls, space: ShiftSpace, transition) -> "MarkovMeasure":
        P = np.asarray(transition, dtype=float)
        P = P / P.sum(axis=1, keepdims=True)
        return cls(space, P, stationary_vector(P))

    @classmethod
    def from_weights(cls, space: ShiftSpace, weights: Mapping[str, float]) -> "MarkovMeasure":
        """Next symbol drawn proportionally to ``weights`` among allowed successors.

        On a full shift this is the Bernoulli measure with these weights.
        Rows with no weighted successor fall back to uniform over successors.
        """
        w = np.array([float(weights.get(s, 0.0)) for s in space.alphabet])
        if np.any(w < 0) or w.sum() <= 0:
            raise InvalidArgument("weights must be nonnegative with positive total")
        adj = space.adjacency.astype(float)
        P = adj * w
        empty = P.sum(axis=1) == 0
        P[empty] = adj[empty]
        return cls.from_transition(space, P)

    @classmethod
    def random(cls, space: ShiftSpace, rng: np.random.Generator, support=None) -> "MarkovMeasure":
        """Dirichlet-random chain; ``support`` restricts targets to a symbol subset."""
        adj = space.adjacency.astype(float)
        if support is not None:
            keep = np.array([s in set(support) for s in space.alphabet], dtype=float)
            adj = adj * keep
        P = np.zeros_like(adj)
        for i in range(space.size):
            idx = np.flatnonzero(adj[i])
            if len(idx) == 0:
                idx = np.flatnonzero(space.adjacency[i])
            P[i, idx] = rng.dirichlet(np.ones(len(idx)))
        return cls.from_transition(space, P)

    @property
    def is_iid(self) -> bool:
        return bool(np.all(np.abs(self.transition - self.transition[0]) < 1e-15))

    def probability(self, word) -> float:
        idx = self.space.encode(word)
        if not idx:
            return 1.0
        p = self.stationary[idx[0]]
        for i, j in zip(idx, idx[1:]):
            p *= self.transition[i, j]
        return float(p)

    def word_probabilities(self, words: np.ndarray) -> np.ndarray:
        """Probabilities of the rows of an index-word array."""
        p = self.stationary[words[:, 0]].copy()
        for c in range(1, words.shape[1]):
            p *= self.transition[words[:, c - 1], words[:, c]]
        return p

    def sample(self, length: int, rng: np.random.Generator) -> np.ndarray:
        """A stationary trajectory of symbol indices."""
        k = self.space.size
        if self.is_iid:
            return rng.choice(k, size=length, p=self.transition[0])
        cum = np.cumsum(self.transition, axis=1)
        cum[:, -1] = 1.0
        u = rng.random(length)
        # next-state lookup per current state, so the sequential loop only indexes
        table = [np.minimum(np.searchsorted(cum[i], u, side="right"), k - 1).tolist() for i in range(k)]
        out = [0] * length
        x = int(rng.choice(k, p=self.stationary))
        out[0] = x
        for i in range(1, length):
            x = table[x][i]
            out[i] = x
        return np.asarray(out, dtype=np.int64)


def markov_entropy(m: MarkovMeasure) -> float:
    """Entropy rate ``-sum_i pi_i sum_j P_ij log P_ij``."""
    P = m.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-(m.stationary @ terms.sum(axis=1)))
