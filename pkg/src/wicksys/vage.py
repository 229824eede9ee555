"""The constant ``A(q) = sum_alpha (2N)^(-q alpha)`` of the Wick norm inequality.

The multi-index sum factorizes into the Euler product
``prod_j (1 - (2j)^-q)^-1``, which is what is evaluated here.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_CHUNK = 1 << 20
_MAX_FACTORS = 1 << 27


class DivergenceError(ValueError):
    """The defining series does not converge (``q <= 1``)."""


def _log_partial(q: float, start: int, stop: int) -> float:
    """``-sum_{start <= j < stop} log(1 - (2j)^-q)``, accumulated in chunks."""
    total = 0.0
    for lo in range(start, stop, _CHUNK):
        j = np.arange(lo, min(stop, lo + _CHUNK), dtype=float)
        total += float(-np.sum(np.log1p(-((2.0 * j) ** -q))))
    return total


def _tail_bounds(q: float, n: int) -> tuple[float, float]:
    """Bounds on ``-sum_{j > n} log(1 - x_j)`` with ``x_j = (2j)^-q``.

    Uses ``x <= -log(1-x) <= x + x^2`` (valid for ``x <= 1/2``) and the
    integral comparison ``int_{n+1}^inf <= sum_{j>n} <= int_n^inf``.
    """
    c = 2.0 ** -q
    lo = c * (n + 1) ** (1 - q) / (q - 1)
    hi = c * n ** (1 - q) / (q - 1) + c * c * n ** (1 - 2 * q) / (2 * q - 1)
    return lo, hi


@lru_cache(maxsize=256)
def vage_bounds(q: float, tol: float = 1e-12) -> tuple[float, float]:
    """Rigorous enclosure ``lo <= A(q) <= hi`` with ``hi - lo <= tol``."""
    if not q > 1:
        raise DivergenceError(f"A(q) diverges for q = {q} <= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = 64
    log_p = _log_partial(q, 1, n + 1)
    while True:
        t_lo, t_hi = _tail_bounds(q, n)
        lo, hi = math.exp(log_p + t_lo), math.exp(log_p + t_hi)
        if hi - lo <= tol:
            return lo, hi
        if 2 * n > _MAX_FACTORS:
            raise DivergenceError(f"cannot reach tol={tol} for q={q} within {_MAX_FACTORS} factors")
        log_p += _log_partial(q, n + 1, 2 * n + 1)
        n *= 2


def vage_constant(q: float, tol: float = 1e-12) -> float:
    """``A(q)`` to absolute accuracy ``tol``.

    Returns the upper end of a rigorous enclosure, so it never underestimates
    the constant; bounds built on it stay valid.
    """
    return vage_bounds(float(q), float(tol))[1]


def vage_partial_products(q: float, n: int) -> np.ndarray:
    """The first ``n`` partial Euler products; increasing toward ``A(q)``."""
    j = np.arange(1, n + 1, dtype=float)
    return np.exp(np.cumsum(-np.log1p(-((2.0 * j) ** -q))))


def vage_direct_sum(q: float, J: int, D: int) -> float:
    """``sum (2N)^(-q alpha)`` over the box ``support <= J, |alpha| <= D``.

    Independent of the product formula; a lower bound for ``A(q)``.
    """
    from .multiindex import TruncationPolicy

    basis = TruncationPolicy(J, D).basis()
    return float(np.sum(basis.weights(-q)))
