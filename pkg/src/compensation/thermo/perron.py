"""Perron root and eigenvectors of irreducible nonnegative matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InvalidArgument

__all__ = ["PerronResult", "perron"]


@dataclass(frozen=True)
class PerronResult:
    value: float
    right: np.ndarray
    left: np.ndarray
    lower: float
    upper: float
    iterations: int


def _warm_start(a: np.ndarray) -> np.ndarray:
    if a.shape[0] > 1500:
        return np.ones(a.shape[0])
    vals, vecs = np.linalg.eig(a)
    v = np.abs(np.real(vecs[:, np.argmax(np.real(vals))]))
    # a positive start keeps the Collatz-Wielandt quotients defined
    return np.maximum(v, 1e-15 * v.max())


def _power(a: np.ndarray, rtol: float, max_iter: int) -> tuple[np.ndarray, float, float, int]:
    """Power iteration on ``a + I`` (primitive when ``a`` is irreducible).

    Stops when the Collatz-Wielandt quotients ``(Ax)_i / x_i`` agree to
    ``rtol``; their min and max bracket the Perron root.
    """
    n = a.shape[0]
    shifted = a + np.eye(n)
    x = _warm_start(a)
    x = x / np.linalg.norm(x)
    lo = hi = float("nan")
    for it in range(1, max_iter + 1):
        y = shifted @ x
        if np.any(y <= 0):
            raise InvalidArgument("matrix is not irreducible")
        q = y / x
        lo, hi = float(q.min()) - 1.0, float(q.max()) - 1.0
        x = y / np.linalg.norm(y)
        if hi - lo <= rtol * max(abs(hi), 1e-300):
            return x, lo, hi, it
    return x, lo, hi, max_iter


def perron(a, rtol: float = 1e-12, max_iter: int = 10**6, left: bool = True) -> PerronResult:
    """Perron root of a nonnegative irreducible matrix with its eigenvectors.

    A dense eigensolver supplies the starting vector and power iteration
    refines it until the Collatz-Wielandt bracket closes.  The right vector
    is normalised to unit sum and the left vector (skipped when ``left`` is
    false) so that ``left @ right == 1``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidArgument("expected a nonempty square matrix")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise InvalidArgument("matrix must be finite and nonnegative")
    scale = a.max()
    n_comp, _ = connected_components(csr_matrix(a > 0), directed=True, connection="strong")
    if scale <= 0 or n_comp > 1:
        raise InvalidArgument("matrix is not irreducible")
    # rescale so the unit shift is comparable to the matrix entries
    r, lo, hi, it_r = _power(a / scale, rtol, max_iter)
    r = r / r.sum()
    if left:
        l, _, _, it_l = _power(a.T / scale, rtol, max_iter)
        l = l / (l @ r)
    else:
        l, it_l = np.full_like(r, np.nan), 0
    value = 0.5 * (lo + hi) * scale
    return PerronResult(value, r, l, lo * scale, hi * scale, max(it_r, it_l))
