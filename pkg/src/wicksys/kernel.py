"""The reproducing kernel ``K_k(z, w) = sum z^alpha conj(w)^alpha (2N)^(k alpha)``."""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np

from .multiindex import TruncationPolicy


class DivergenceWarning(RuntimeWarning):
    pass


def _ratios(z, w, k) -> np.ndarray:
    """Per-variable ratios ``z_j conj(w_j) (2j)^k`` over the common length."""
    n = max(len(z), len(w))
    zz = np.zeros(n, dtype=np.complex128)
    ww = np.zeros(n, dtype=np.complex128)
    zz[: len(z)] = z
    ww[: len(w)] = w
    j = np.arange(1, n + 1, dtype=float)
    return zz * ww.conj() * (2.0 * j) ** k


def membership_Kk(z: Sequence[complex], k: float, policy: TruncationPolicy | None = None, tol: float = 1e-12) -> bool:
    """Whether ``z`` lies in the domain ``K_k`` (all coordinates of ``z`` counted).

    The defining sum factorizes into one geometric series per variable, so the
    test is ``|z_j|^2 (2j)^k <= 1 - tol`` for every ``j``. ``policy`` is accepted
    for signature symmetry; coordinates beyond ``policy.J`` are still checked.
    """
    if len(z) == 0:
        return True
    r = np.abs(_ratios(z, z, k))
    return bool(np.all(r <= 1.0 - tol))


def kernel_K(
    z: Sequence[complex],
    w: Sequence[complex],
    k: float,
    policy: TruncationPolicy | None = None,
) -> complex:
    """Evaluate ``K_k(z, w)``.

    With ``policy=None`` the closed product ``prod_j 1/(1 - z_j conj(w_j) (2j)^k)``
    is returned, which is exact for points with finitely many coordinates.
    With a policy, the finite sum over the policy slice is returned.
    """
    if policy is None:
        r = _ratios(z, w, k)
        if np.any(np.abs(r) >= 1.0):
            warnings.warn("kernel series diverges at this pair of points", DivergenceWarning, stacklevel=2)
            return complex("nan")
        return complex(np.prod(1.0 / (1.0 - r)))
    return complex(_truncated(z, w, k, policy))


def _truncated(z, w, k, policy: TruncationPolicy) -> complex:
    # sum over |alpha| <= D on variables 1..J of prod r_j^{alpha_j}: complete
    # homogeneous symmetric polynomials h_d(r_1..r_J), built variable by variable
    J, D = policy.max_var, policy.max_degree
    r = np.zeros(J, dtype=np.complex128)
    rr = _ratios(z, w, k)[:J]
    r[: len(rr)] = rr
    h = np.zeros(D + 1, dtype=np.complex128)
    h[0] = 1.0
    for rj in r:
        # h_new[d] = sum_{a<=d} rj^a h[d-a] = h[d] + rj h_new[d-1]
        for d in range(1, D + 1):
            h[d] = h[d] + rj * h[d - 1]
    return complex(h.sum())


def kernel_tail(z, w, k, policy: TruncationPolicy) -> float:
    """``|K_k(z, w) - truncated sum|``; the truncation error of the policy slice."""
    exact = kernel_K(z, w, k)
    return abs(exact - kernel_K(z, w, k, policy))


def kernel_K_checked(z, w, k, policy: TruncationPolicy, tol: float = 1e-12) -> tuple[complex, float]:
    """Truncated value plus tail estimate; warns when either point is outside ``K_k``."""
    if not (membership_Kk(z, k, policy, tol) and membership_Kk(w, k, policy, tol)):
        warnings.warn("point outside K_k; truncated kernel is not a convergent approximation",
                      DivergenceWarning, stacklevel=2)
        return kernel_K(z, w, k, policy), float("inf")
    return kernel_K(z, w, k, policy), kernel_tail(z, w, k, policy)


def gram_matrix(points: Sequence[Sequence[complex]], k: float, policy: TruncationPolicy | None = None) -> np.ndarray:
    n = len(points)
    G = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            G[i, j] = kernel_K(points[i], points[j], k, policy)
            G[j, i] = G[i, j].conjugate()
    return G


def sample_admissible(rng: np.random.Generator, n_points: int, J: int, k: float, radius: float = 0.9) -> list[np.ndarray]:
    """Random points with ``|z_j|^2 (2j)^k <= radius^2`` in each coordinate."""
    j = np.arange(1, J + 1, dtype=float)
    rmax = radius * (2.0 * j) ** (-k / 2.0)
    out = []
    for _ in range(n_points):
        mod = rmax * np.sqrt(rng.uniform(0.0, 1.0, J))
        arg = rng.uniform(0.0, 2 * np.pi, J)
        out.append(mod * np.exp(1j * arg))
    return out
