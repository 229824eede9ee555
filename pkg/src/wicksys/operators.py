"""The Wick multiplier ``T_h : u -> h (Wick) u`` on a truncated Kondratiev space.

Matrices act on weighted-orthonormal coordinates ``u_alpha (2N)^(-k alpha / 2)``,
so the Euclidean norm of a coordinate vector is the ``|| . ||_k`` norm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, TextIO

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401  (registers sp.linalg)

from .chaos import ChaosExpansion, norm_k
from .multiindex import BasisEnumeration, MultiIndex, PolicyError, TruncationPolicy, weight
from .vage import vage_constant

logger = logging.getLogger(__name__)

DENSE_MAX = 4096
SVD_MAX = 512
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


class OrderError(ValueError):
    """Weight orders violate ``k > l + 1``."""


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message}; best bracket {bracket}")
        self.bracket = bracket


def check_orders(k: float, l: float) -> None:
    if not k > l + 1:
        raise OrderError(f"need k > l + 1, got k={k}, l={l}")


def to_weighted(u: ChaosExpansion, k: float, basis: BasisEnumeration) -> np.ndarray:
    return u.to_dense(basis) * np.sqrt(basis.weights(-k))


def from_weighted(vec: np.ndarray, k: float, basis: BasisEnumeration, truncation_loss: bool = False) -> ChaosExpansion:
    return ChaosExpansion.from_dense(np.asarray(vec) / np.sqrt(basis.weights(-k)), basis, truncation_loss)


@dataclass(frozen=True, eq=False)
class MultiplierMatrix:
    """Matrix of ``T_h`` on the weighted basis ``e_alpha = H_alpha (2N)^(k alpha / 2)``.

    ``entries`` is a dense array for ``B <= DENSE_MAX`` and a CSR matrix above.
    """

    k: float
    basis: BasisEnumeration
    entries: np.ndarray | sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    def toarray(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else np.asarray(self.entries)

    def __matmul__(self, vec):
        return self.entries @ vec

    def apply(self, u: ChaosExpansion) -> ChaosExpansion:
        """``h (Wick) u`` restricted to the slice, through the matrix."""
        return from_weighted(self.entries @ to_weighted(u, self.k, self.basis), self.k, self.basis)

    def adjoint(self) -> np.ndarray | sp.csr_matrix:
        return self.entries.conj().T


def assemble(h: ChaosExpansion, k: float, policy: TruncationPolicy) -> MultiplierMatrix:
    """``entries[gamma, beta] = h_{gamma-beta} (2N)^(-k (gamma-beta) / 2)``."""
    for alpha in h.terms:
        if not policy.contains(alpha):
            raise PolicyError(f"multiplier term {alpha!r} does not fit {policy}")
    basis = policy.basis()
    B = len(basis)
    rows, cols, vals = [], [], []
    table = basis.add_table
    for delta, c in h.terms.items():
        d = basis.index(delta)
        cw = c * np.sqrt(weight(delta, -k))
        beta = np.flatnonzero(table[d] >= 0)
        rows.append(table[d, beta])
        cols.append(beta)
        vals.append(np.full(beta.size, cw, dtype=np.complex128))
    if rows:
        r, c_, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c_ = np.zeros(0, dtype=np.intp)
        v = np.zeros(0, dtype=np.complex128)
    coo = sp.coo_matrix((v, (r, c_)), shape=(B, B))
    entries = coo.tocsr() if B > DENSE_MAX else coo.toarray()
    return MultiplierMatrix(k, basis, entries)


class NormEstimate(NamedTuple):
    value: float
    iterations: int
    method: str
    vector: np.ndarray


def _power_iteration(
    apply: Callable[[np.ndarray], np.ndarray],
    apply_adj: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float,
    max_iter: int,
    seed: int = 0,
) -> NormEstimate:
    """Largest singular value by power iteration on ``A* A``.

    Stops when successive Rayleigh quotients differ by ``<= tol`` relative.
    Raises :class:`NonConvergenceError` carrying the last estimate as the lower end.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    prev = -1.0
    for it in range(1, max_iter + 1):
        y = apply(x)
        rq = float(np.vdot(y, y).real)
        sigma = np.sqrt(rq)
        if sigma == 0.0:
            return NormEstimate(0.0, it, "power", x)
        if prev >= 0 and abs(rq - prev) <= tol * rq:
            return NormEstimate(sigma, it, "power", x)
        prev = rq
        x = apply_adj(y)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return NormEstimate(sigma, it, "power", x)
        x /= nx
    raise NonConvergenceError(f"power iteration did not converge in {max_iter} iterations", (float(sigma), float("inf")))


def operator_norm(
    m: MultiplierMatrix | np.ndarray,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    method: str = "auto",
) -> float:
    """Largest singular value of the truncated matrix.

    ``method="auto"`` runs power iteration and falls back to a dense SVD when
    it does not converge and the matrix has at most ``SVD_MAX`` rows.
    """
    return operator_norm_estimate(m, tol, max_iter, method).value


def operator_norm_estimate(m, tol=POWER_TOL, max_iter=POWER_MAX_ITER, method="auto") -> NormEstimate:
    A = m.entries if isinstance(m, MultiplierMatrix) else m
    n = A.shape[1]
    if n == 0:
        return NormEstimate(0.0, 0, "empty", np.zeros(0))
    if method == "svd":
        return _svd_estimate(A)
    try:
        return _power_iteration(lambda x: A @ x, lambda y: A.conj().T @ y, n, tol, max_iter)
    except NonConvergenceError as exc:
        if method == "auto" and A.shape[0] <= SVD_MAX:
            logger.info("power iteration stalled; dense SVD fallback on %s matrix", A.shape)
            return _svd_estimate(A)
        frob = float(sp.linalg.norm(A)) if sp.issparse(A) else float(np.linalg.norm(A))
        raise NonConvergenceError("power iteration did not converge", (exc.bracket[0], frob)) from None


def _svd_estimate(A) -> NormEstimate:
    dense = A.toarray() if sp.issparse(A) else np.asarray(A)
    _, s, vh = np.linalg.svd(dense)
    return NormEstimate(float(s[0]), 0, "svd", vh[0].conj())


def adjoint_apply(h: ChaosExpansion, v: ChaosExpansion, k: float) -> ChaosExpansion:
    """``T_h^* v`` in ``H_k``: ``(T_h^* v)_beta = sum_delta conj(h_delta) v_{beta+delta} (2N)^(-k delta)``.

    The result lives on ``v``'s policy (``beta <= beta + delta`` stays inside it).
    """
    acc: dict[MultiIndex, complex] = {}
    for gamma, vg in v.terms.items():
        for delta, hd in h.terms.items():
            if delta <= gamma:
                beta = gamma - delta
                acc[beta] = acc.get(beta, 0j) + hd.conjugate() * vg * weight(delta, -k)
    return ChaosExpansion(acc, v.policy)


def vage_upper_bound(h: ChaosExpansion, k: float, l: float, tol: float = 1e-12) -> float:
    """``A(k - l) ||h||_l``, an upper bound on ``||T_h||`` over the whole space."""
    check_orders(k, l)
    nh = norm_k(h, l)
    if nh == 0.0:
        return 0.0
    return vage_constant(k - l, tol) * nh


def multiplier_norm_upper(h: ChaosExpansion, k: float, l: float | None, tol: float = 1e-12) -> float:
    """Upper bound on ``||T_h||`` sharpened on the deterministic part.

    ``||T_h|| <= |h_0| + A(k-l) ||h - h_0||_l`` (triangle inequality; the
    deterministic part is a scaled identity), and never more than the plain
    Våge bound. With ``l=None`` only deterministic ``h`` has a finite bound.
    """
    c0 = abs(h.mean)
    rest = h - ChaosExpansion.constant(h.mean, h.policy)
    if not rest.terms:
        return c0
    if l is None:
        return float("inf")
    split = c0 + vage_upper_bound(rest, k, l, tol)
    return min(split, vage_upper_bound(h, k, l, tol))


def dump_matrix(m: MultiplierMatrix, fh: TextIO, fmt: str = "dense") -> None:
    """Write ``m`` as text: header ``# B k J D``, then rows or ``i j re im`` triples."""
    B = m.shape[0]
    p = m.basis.policy
    fh.write(f"# B={B} k={m.k} J={p.max_var} D={p.max_degree} format={fmt}\n")
    if fmt == "dense":
        A = m.toarray()
        for row in A:
            fh.write(" ".join(f"{float(v.real)!r}{float(v.imag):+.17g}j" for v in row) + "\n")
    elif fmt == "coo":
        coo = sp.coo_matrix(m.entries)
        for i, j, v in sorted(zip(coo.row, coo.col, coo.data)):
            fh.write(f"{int(i)} {int(j)} {float(v.real)!r} {float(v.imag)!r}\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
