"""Entropy of the image of a Markov measure under a 1-block code.

The image of a Markov chain is a hidden Markov process; its entropy rate is
bracketed by conditional block entropies:

    H(Y_0 | Y_{-n..-1}, X_{-n-1})  <=  h(nu)  <=  H(Y_0 | Y_{-n..-1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from ..markov import MarkovMeasure, markov_entropy
from ..shift import FactorCode

__all__ = ["EntropyBracket", "pushforward_entropy_bracket", "relative_entropy_bracket", "shannon"]


def shannon(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class EntropyBracket:
    lower: float
    upper: float

    def __iter__(self):
        return iter((self.lower, self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _joint_layers(m: MarkovMeasure, code: FactorCode, n: int):
    """Yield, for word lengths 1..n+1, arrays ``J[w, s, j]``.

    ``J[w, s, j] = P(X_{-1} = s, Y_0..Y_{l-1} = w, X_{l-1} = j)`` over the
    image words ``w`` of positive probability, i.e. the chain is started one
    step before the image block so ``s`` plays the role of ``X_{-n-1}``.
    """
    lab = code.label_indices(m.space)
    nlab = len(code.labels)
    P, pi = m.transition, m.stationary
    masks = [(lab == y).astype(float) for y in range(nlab)]
    start = pi[:, None] * P  # (s, j)
    layer = np.stack([start * masks[y][None, :] for y in range(nlab)])
    layer = layer[layer.sum(axis=(1, 2)) > 0]
    yield layer
    for _ in range(n):
        nxt = layer @ P  # (w, s, j)
        layer = np.concatenate([nxt * masks[y][None, None, :] for y in range(nlab)])
        layer = layer[layer.reshape(len(layer), -1).sum(axis=1) > 0]
        yield layer


def _block_entropies(m: MarkovMeasure, code: FactorCode, n: int) -> tuple[float, float, float, float]:
    layers = list(_joint_layers(m, code, n))
    short, full = layers[n - 1], layers[n]
    h_y_short = shannon(short.sum(axis=(1, 2)))
    h_y_full = shannon(full.sum(axis=(1, 2)))
    h_xy_short = shannon(short.sum(axis=2))
    h_xy_full = shannon(full.sum(axis=2))
    return h_y_short, h_y_full, h_xy_short, h_xy_full


def pushforward_entropy_bracket(m: MarkovMeasure, code: FactorCode, n: int) -> EntropyBracket:
    """Lower and upper bounds on the entropy rate of the image process.

    ``upper = H(Y_0 | Y_{-n..-1})`` and ``lower = H(Y_0 | Y_{-n..-1}, X_{-n-1})``.
    The upper bound is non-increasing and the lower bound non-decreasing in
    ``n``; both converge to the image entropy rate.
    """
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    code.check_domain(m.space)
    hy_n, hy_n1, hxy_n, hxy_n1 = _block_entropies(m, code, n)
    upper = hy_n1 - hy_n
    lower = hxy_n1 - hxy_n
    # conditioning reduces entropy; clamp rounding noise only
    lower = min(lower, upper)
    return EntropyBracket(lower, upper)


def relative_entropy_bracket(m: MarkovMeasure, code: FactorCode, n: int) -> EntropyBracket:
    """Bracket for ``h(m) - h(m o code^-1)``."""
    b = pushforward_entropy_bracket(m, code, n)
    h = markov_entropy(m)
    return EntropyBracket(h - b.upper, h - b.lower)
