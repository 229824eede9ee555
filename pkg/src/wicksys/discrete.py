"""Discrete-time random linear systems ``y_n = sum_m h_{n-m} (Wick) u_m``.

Simulation, the explicit double-sum oracle, generalized transfer functions,
and the BIBO / l1-l2 / dissipativity certifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from ._parallel import pmap
from .chaos import ChaosExpansion, hermite_transform_eval, norm_k, wick_product
from .kernel import kernel_K, membership_Kk
from .multiindex import ZERO, MultiIndex, PolicyError, TruncationPolicy
from .operators import (
    SVD_MAX,
    NonConvergenceError,
    _power_iteration,
    adjoint_apply,
    assemble,
    check_orders,
    from_weighted,
    multiplier_norm_upper,
    operator_norm_estimate,
    vage_upper_bound,
)
from .report import CERTIFIED, INCONCLUSIVE, REFUTED, StabilityReport
from .vage import vage_constant

TOEPLITZ_DENSE_MAX = 2048
TOEPLITZ_MAX = 1 << 18


class SizeCapError(ValueError):
    """The requested block Toeplitz truncation is too large."""


class InadmissiblePointError(ValueError):
    pass


class NeumannDivergenceError(ArithmeticError):
    pass


# signals


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Finitely supported sequence ``n -> ChaosExpansion`` on one policy."""

    samples: Mapping[int, ChaosExpansion]
    policy: TruncationPolicy
    truncation_loss: bool = False

    def __post_init__(self):
        clean = {}
        loss = self.truncation_loss
        for n, x in sorted(self.samples.items()):
            x = x.with_policy(self.policy) if x.policy != self.policy else x
            loss = loss or x.truncation_loss
            if x.terms:
                clean[int(n)] = x
        object.__setattr__(self, "samples", clean)
        object.__setattr__(self, "truncation_loss", loss)

    @classmethod
    def from_list(cls, values: Sequence[ChaosExpansion], start: int = 0, policy: TruncationPolicy | None = None):
        if policy is None:
            policy = _join_policies(values)
        return cls({start + i: v for i, v in enumerate(values)}, policy)

    @classmethod
    def impulse(cls, value: ChaosExpansion, at: int = 0) -> "DiscreteSignal":
        return cls({at: value}, value.policy)

    @classmethod
    def zero(cls, policy: TruncationPolicy) -> "DiscreteSignal":
        return cls({}, policy)

    def __getitem__(self, n: int) -> ChaosExpansion:
        return self.samples.get(n) or ChaosExpansion.zero(self.policy)

    def __len__(self) -> int:
        return len(self.samples)

    def is_empty(self) -> bool:
        return not self.samples

    @property
    def support(self) -> tuple[int, int] | None:
        if not self.samples:
            return None
        keys = list(self.samples)
        return keys[0], keys[-1]

    def is_causal(self) -> bool:
        return self.is_empty() or self.support[0] >= 0

    def is_deterministic(self) -> bool:
        return all(x.is_deterministic() for x in self.samples.values())

    def shift(self, steps: int) -> "DiscreteSignal":
        return DiscreteSignal({n + steps: x for n, x in self.samples.items()}, self.policy, self.truncation_loss)

    def restrict(self, lo: int | None = None, hi: int | None = None) -> "DiscreteSignal":
        keep = {n: x for n, x in self.samples.items() if (lo is None or n >= lo) and (hi is None or n <= hi)}
        return DiscreteSignal(keep, self.policy, self.truncation_loss)

    def with_policy(self, policy: TruncationPolicy) -> "DiscreteSignal":
        return DiscreteSignal(dict(self.samples), policy, self.truncation_loss)

    def norms(self, k: float) -> dict[int, float]:
        return {n: norm_k(x, k) for n, x in self.samples.items()}

    def to_dense(self, lo: int | None = None, hi: int | None = None) -> tuple[int, np.ndarray]:
        """``(start, array)`` with one row per time step on the policy basis."""
        basis = self.policy.basis()
        sup = self.support
        if lo is None:
            lo = sup[0] if sup else 0
        if hi is None:
            hi = sup[1] if sup else lo - 1
        out = np.zeros((max(hi - lo + 1, 0), len(basis)), dtype=np.complex128)
        for n, x in self.samples.items():
            if lo <= n <= hi:
                out[n - lo] = x.to_dense(basis)
        return lo, out

    @classmethod
    def from_dense(cls, start: int, arr: np.ndarray, policy: TruncationPolicy, truncation_loss: bool = False):
        basis = policy.basis()
        samples = {start + i: ChaosExpansion.from_dense(row, basis) for i, row in enumerate(arr) if row.any()}
        return cls(samples, policy, truncation_loss)

    def equals(self, other: "DiscreteSignal", rtol: float = 0.0, atol: float = 0.0) -> bool:
        for n in set(self.samples) | set(other.samples):
            if not self[n].equals(other[n], rtol, atol):
                return False
        return True

    def to_json(self) -> dict:
        return {str(n): x.to_json() for n, x in self.samples.items()}

    @classmethod
    def from_json(cls, obj: Mapping, policy: TruncationPolicy | None = None) -> "DiscreteSignal":
        samples = {int(n): ChaosExpansion.from_json(v) for n, v in obj.items()}
        if policy is None:
            policy = _join_policies(samples.values())
        return cls(samples, policy)


def _join_policies(values: Iterable[ChaosExpansion]) -> TruncationPolicy:
    policy = None
    for v in values:
        policy = v.policy if policy is None else policy.join(v.policy)
    if policy is None:
        raise ValueError("cannot infer a policy from an empty signal")
    return policy


# simulation


def wick_convolve(h: DiscreteSignal, u: DiscreteSignal, causal: bool = False, kernels=None) -> DiscreteSignal:
    """``y_n = sum_m h_{n-m} (Wick) u_m`` on the joined policy.

    ``causal=True`` keeps only ``n, m >= 0`` and ``m <= n``. Products that leave
    the policy are dropped and flagged on the result.
    """
    kernels = kernels or _backend
    policy = h.policy.join(u.policy)
    if causal:
        h, u = h.restrict(lo=0), u.restrict(lo=0)
    h, u = h.with_policy(policy), u.with_policy(policy)
    if h.is_empty() or u.is_empty():
        return DiscreteSignal({}, policy, h.truncation_loss or u.truncation_loss)
    h0, hd = h.to_dense()
    u0, ud = u.to_dense()
    y, lost = kernels.wick_convolve_dense(hd, ud, policy.basis().add_table)
    return DiscreteSignal.from_dense(h0 + u0, y, policy, lost or h.truncation_loss or u.truncation_loss)


def double_convolution_oracle(h: DiscreteSignal, u: DiscreteSignal, causal: bool = False) -> DiscreteSignal:
    """Term-by-term ``y_alpha(n) = sum_m sum_{beta <= alpha} h_{alpha-beta}(n-m) u_beta(m)``.

    Independent of :func:`wick_product` and of the kernels; used as an oracle.
    """
    policy = h.policy.join(u.policy)
    if causal:
        h, u = h.restrict(lo=0), u.restrict(lo=0)
    if h.is_empty() or u.is_empty():
        return DiscreteSignal({}, policy)
    (h_lo, h_hi), (u_lo, u_hi) = h.support, u.support
    out = {}
    for n in range(h_lo + u_lo, h_hi + u_hi + 1):
        coeffs = {}
        for alpha in policy.basis():
            total = 0j
            for m in range(u_lo, u_hi + 1):
                hn, um = h.samples.get(n - m), u.samples.get(m)
                if hn is None or um is None:
                    continue
                for beta, ub in um.terms.items():
                    if beta <= alpha:
                        total += hn.terms.get(alpha - beta, 0j) * ub
            if total != 0:
                coeffs[alpha] = total
        out[n] = ChaosExpansion(coeffs, policy)
    return DiscreteSignal(out, policy)


# transfer functions


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """``H(zeta, z) = sum_n zeta^n I(h_n)(z)`` with finitely many coefficients."""

    coeffs: Mapping[int, ChaosExpansion]
    causal: bool = True

    def __post_init__(self):
        if self.causal and any(n < 0 for n, c in self.coeffs.items() if c.terms):
            raise ValueError("causal transfer function has coefficients at negative times")

    @classmethod
    def from_signal(cls, h: DiscreteSignal) -> "TransferFunction":
        return cls(dict(h.samples), causal=h.is_causal())

    @classmethod
    def constant(cls, c: complex, policy: TruncationPolicy) -> "TransferFunction":
        return cls({0: ChaosExpansion.constant(c, policy)})

    def __call__(self, zeta: complex, z: Sequence[complex]) -> complex:
        return transfer_eval(self, zeta, z)

    def coeff(self, n: int, policy: TruncationPolicy) -> ChaosExpansion:
        return self.coeffs.get(n) or ChaosExpansion.zero(policy)

    @property
    def policy(self) -> TruncationPolicy:
        return _join_policies(self.coeffs.values())


def transfer_eval(H: TransferFunction, zeta: complex, z: Sequence[complex]) -> complex:
    """``sum_n zeta^n I(h_n)(z)``; at ``z = 0`` this is the nonrandom part."""
    z = tuple(z)
    total = 0j
    for n, hn in H.coeffs.items():
        if hn.terms:
            total += zeta**n * hermite_transform_eval(hn, z + (0.0,) * max(0, hn.max_var - len(z)))
    return total


def signal_transform(x: DiscreteSignal, zeta: complex, z: Sequence[complex]) -> complex:
    """``x_hat(zeta, z) = sum_n I(x_n)(z) zeta^n``."""
    return transfer_eval(TransferFunction(dict(x.samples), causal=False), zeta, z)


# certifiers


def _report_params(k, l, policy, **extra) -> dict:
    out = {"k": k, "l": l, "policy": policy.to_json() if policy else None}
    out.update(extra)
    return out


def bibo_sufficient(
    h: DiscreteSignal, k: float, l: float, tol: float = 1e-12, refine: bool = False, bound: float | None = None
) -> StabilityReport:
    """Upper bound ``sum_n A(k-l) ||h_n||_l`` on the BIBO constant.

    ``refine=True`` uses the sharper per-tap bound that is exact on
    deterministic taps. Certified when finite (and ``<= bound`` if given).
    """
    check_orders(k, l)
    per_tap = multiplier_norm_upper if refine else vage_upper_bound
    upper = math.fsum(per_tap(x, k, l, tol) for x in h.samples.values())
    ok = math.isfinite(upper) and (bound is None or upper <= bound)
    return StabilityReport(
        "bibo",
        CERTIFIED if ok else INCONCLUSIVE,
        upper_bound=upper,
        parameters=_report_params(k, l, h.policy, tol=tol, refine=refine, bound=bound),
        details={"vage_constant": vage_constant(k - l, tol), "taps": len(h)},
        vacuous=h.is_empty(),
    )


def default_probes(h: DiscreteSignal, k: float, n_random: int = 8, seed: int = 0, max_basis: int = 256):
    """Unit probes in ``H_k``: basis elements, seeded random vectors, and the
    top left singular vector of each tap's multiplier matrix."""
    policy = h.policy
    basis = policy.basis()
    B = len(basis)
    w = np.sqrt(basis.weights(-k))
    probes = []
    for i in range(min(B, max_basis)):
        vec = np.zeros(B, dtype=np.complex128)
        vec[i] = 1.0
        probes.append(vec)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        vec = rng.standard_normal(B) + 1j * rng.standard_normal(B)
        probes.append(vec / np.linalg.norm(vec))
    for x in h.samples.values():
        M = assemble(x, k, policy).entries
        est = operator_norm_estimate(M.conj().T, method="svd" if B <= SVD_MAX else "auto")
        if est.value > 0:
            probes.append(est.vector / np.linalg.norm(est.vector))
    return [ChaosExpansion.from_dense(p / w, basis) for p in probes]


def _adjoint_norms(h: DiscreteSignal, v: ChaosExpansion, k: float) -> dict[int, float]:
    return {n: norm_k(adjoint_apply(x, v, k), k) for n, x in h.samples.items()}


def bibo_probe(
    h: DiscreteSignal,
    k: float,
    probes: Sequence[ChaosExpansion] | None = None,
    n_random: int = 8,
    seed: int = 0,
    bound: float | None = None,
) -> StabilityReport:
    """Lower bound ``max_v sum_n ||T_{h_n}^* v||_k`` over unit probes ``v``.

    The witness is the input ``u_m = T^*_{h_{-m}} v / ||.||`` which makes the
    output at time 0 reach the bound. Refuted only when a ``bound`` is given
    and exceeded.
    """
    if probes is None:
        probes = default_probes(h, k, n_random, seed) if not h.is_empty() else []
    best, best_v, best_terms = 0.0, None, {}
    for v in probes:
        nv = norm_k(v, k)
        if nv == 0:
            continue
        v = v * (1.0 / nv)
        terms = _adjoint_norms(h, v, k)
        total = math.fsum(terms.values())
        if total > best or best_v is None:
            best, best_v, best_terms = total, v, terms
    witness = None
    if best_v is not None:
        u = {}
        for n, x in h.samples.items():
            if best_terms[n] > 0:
                u[-n] = adjoint_apply(x, best_v, k) * (1.0 / best_terms[n])
        witness = {
            "output_time": 0,
            "probe": best_v.to_json(),
            "input": DiscreteSignal(u, h.policy).to_json(),
        }
    verdict = REFUTED if bound is not None and best > bound else INCONCLUSIVE
    return StabilityReport(
        "bibo",
        verdict,
        lower_bound=best,
        witness=witness,
        parameters=_report_params(k, None, h.policy, probes=len(probes), seed=seed, bound=bound),
        vacuous=h.is_empty(),
    )


def certify_bibo(h, k, l, tol=1e-12, n_random=8, seed=0, bound=None) -> StabilityReport:
    """Probe lower bound and sharpened Våge upper bound in one report."""
    up = bibo_sufficient(h, k, l, tol, refine=True, bound=bound)
    lo = bibo_probe(h, k, n_random=n_random, seed=seed)
    if bound is not None and lo.lower_bound > bound:
        verdict = REFUTED
    else:
        verdict = up.verdict
    return StabilityReport(
        "bibo",
        verdict,
        lower_bound=lo.lower_bound,
        upper_bound=up.upper_bound,
        witness=lo.witness,
        parameters=_report_params(k, l, h.policy, tol=tol, probes_random=n_random, seed=seed, bound=bound),
        details={
            "vage_upper_bound": bibo_sufficient(h, k, l, tol).upper_bound,
            "vage_constant": vage_constant(k - l, tol),
            "sum_abs_mean": math.fsum(abs(x.mean) for x in h.samples.values()),
        },
        vacuous=h.is_empty(),
    )


def l1l2_certify(h: DiscreteSignal, k: float, l: float, tol: float = 1e-12, bound: float | None = None) -> StabilityReport:
    """``M = A(k-l) (sum_n ||h_n||_l^2)^(1/2)`` bounds ``(sum ||y_n||_k^2)^(1/2) / sum ||u_n||_k``.

    The impulse input ``u = 1 at n = 0`` gives the lower bound
    ``(sum ||h_n||_k^2)^(1/2)``.
    """
    check_orders(k, l)
    if not h.is_causal():
        raise ValueError("l1-l2 certification needs a causal impulse response")
    h2_l = math.sqrt(math.fsum(norm_k(x, l) ** 2 for x in h.samples.values()))
    h2_k = math.sqrt(math.fsum(norm_k(x, k) ** 2 for x in h.samples.values()))
    A = vage_constant(k - l, tol)
    upper = A * h2_l
    ok = bound is None or upper <= bound
    if bound is not None and h2_k > bound:
        verdict = REFUTED
    else:
        verdict = CERTIFIED if ok else INCONCLUSIVE
    return StabilityReport(
        "l1l2",
        verdict,
        lower_bound=h2_k,
        upper_bound=upper,
        witness={"input": DiscreteSignal.impulse(ChaosExpansion.constant(1.0, h.policy)).to_json()},
        parameters=_report_params(k, l, h.policy, tol=tol, bound=bound),
        details={"h2_norm": h2_l, "h2_norm_k": h2_k, "vage_constant": A},
        vacuous=h.is_empty(),
    )


def block_toeplitz(h: DiscreteSignal, k: float, policy: TruncationPolicy, n_time: int) -> np.ndarray:
    """Dense lower-triangular block Toeplitz matrix with blocks ``assemble(h_n)``."""
    B = len(policy.basis())
    blocks = {n: assemble(x, k, policy).toarray() for n, x in h.samples.items() if 0 <= n < n_time}
    T = np.zeros((n_time * B, n_time * B), dtype=np.complex128)
    for n, blk in blocks.items():
        for m in range(n_time - n):
            T[(m + n) * B:(m + n + 1) * B, m * B:(m + 1) * B] = blk
    return T


def _toeplitz_sigma(h, k, policy, n_time, tol, kernels=None):
    """Largest singular value of the truncated block Toeplitz operator and its
    right singular vector, dense for small sizes, kernel-driven power iteration above."""
    kernels = kernels or _backend
    B = len(policy.basis())
    dim = n_time * B
    if dim <= TOEPLITZ_DENSE_MAX:
        T = block_toeplitz(h, k, policy, n_time)
        _, s, vh = np.linalg.svd(T)
        return float(s[0]), vh[0].conj(), "svd"
    basis = policy.basis()
    w = np.sqrt(basis.weights(-k))
    _, hd = h.restrict(0, n_time - 1).to_dense(0, n_time - 1)
    hw = hd * w
    table = basis.add_table

    def apply(x):
        y, _ = kernels.wick_convolve_dense(hw, x.reshape(n_time, B), table)
        return y[:n_time].ravel()

    def apply_adj(y):
        return kernels.wick_correlate_dense(hw, y.reshape(n_time, B), table, n_time).ravel()

    est = _power_iteration(apply, apply_adj, dim, tol=min(tol, 1e-10), max_iter=100_000)
    return est.value, est.vector, "power"


def dissipativity_check(
    h: DiscreteSignal,
    k: float,
    policy: TruncationPolicy | None = None,
    n_time: int = 64,
    tol: float = 1e-9,
    l: float | None = None,
    vage_tol: float = 1e-12,
) -> StabilityReport:
    """Is the block Toeplitz operator of Wick multipliers a contraction?

    Refuted (with a witness input) when the truncated ``sigma_max`` exceeds
    ``1 + tol``; certified when the upper bound ``sum_n ||T_{h_n}||`` is at
    most 1; inconclusive otherwise.
    """
    if not h.is_causal():
        raise ValueError("dissipativity needs a causal impulse response")
    policy = policy or h.policy
    if l is not None:
        check_orders(k, l)
    B = len(policy.basis())
    if n_time * B > TOEPLITZ_MAX:
        raise SizeCapError(f"block Toeplitz dimension {n_time * B} exceeds {TOEPLITZ_MAX}")
    hp = h.with_policy(policy)
    upper = math.fsum(pmap(lambda x: multiplier_norm_upper(x, k, l, vage_tol), hp.samples.values()))
    try:
        sigma, vec, method = _toeplitz_sigma(hp, k, policy, n_time, tol)
    except NonConvergenceError as exc:
        sigma, vec, method = exc.bracket[0], None, "power-unconverged"
    witness = None
    if sigma > 1 + tol and vec is not None:
        basis = policy.basis()
        rows = vec.reshape(n_time, B)
        u = DiscreteSignal(
            {m: from_weighted(rows[m], k, basis) for m in range(n_time) if np.any(np.abs(rows[m]) > 0)}, policy
        )
        y = wick_convolve(hp, u, causal=True).restrict(hi=n_time - 1)
        e_in = sum(v**2 for v in u.norms(k).values())
        e_out = sum(v**2 for v in y.norms(k).values())
        witness = {"input": u.to_json(), "energy_ratio": e_out / e_in}
        verdict = REFUTED
    elif upper <= 1.0:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    return StabilityReport(
        "dissipative",
        verdict,
        lower_bound=sigma,
        upper_bound=upper,
        witness=witness,
        parameters=_report_params(k, l, policy, n_time=n_time, tol=tol),
        details={"sigma_max": sigma, "method": method, "multiplier_norm_sum": upper},
        vacuous=hp.is_empty(),
    )


# kernels and realizations


def _check_points(points, k, kernel):
    for zeta, z in points:
        if kernel == "disk" and not abs(zeta) < 1:
            raise InadmissiblePointError(f"|zeta| = {abs(zeta)} is not < 1")
        if kernel == "halfplane" and not complex(zeta).imag > 0:
            raise InadmissiblePointError(f"lambda = {zeta} is not in the upper half-plane")
        if not membership_Kk(z, k):
            raise InadmissiblePointError(f"z = {z} is not in K_{k}")


def schur_gram_matrix(
    H, points: Sequence[tuple[complex, Sequence[complex]]], k: float,
    policy: TruncationPolicy | None = None, kernel: str = "disk",
) -> np.ndarray:
    """``G_ij = (1 - H_i conj(H_j)) K_k(z_i, z_j) / (1 - zeta_i conj(zeta_j))``.

    ``kernel="halfplane"`` swaps the Szegő factor for ``1 / (-i (lambda_i - conj(lambda_j)))``.
    ``H`` is a :class:`TransferFunction` or any callable ``(zeta, z) -> complex``.
    """
    if kernel not in ("disk", "halfplane"):
        raise ValueError(f"unknown kernel {kernel!r}")
    _check_points(points, k, kernel)
    vals = [H(zeta, z) for zeta, z in points]
    n = len(points)
    G = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            zi, zj = points[i][0], points[j][0]
            if kernel == "disk":
                time_k = 1.0 / (1.0 - zi * np.conj(zj))
            else:
                time_k = 1.0 / (-1j * (zi - np.conj(zj)))
            g = (1.0 - vals[i] * np.conj(vals[j])) * kernel_K(points[i][1], points[j][1], k, policy) * time_k
            G[i, j] = g
            G[j, i] = np.conj(g)
    return G


def schur_kernel_gram(H, points, k, policy=None, kernel="disk") -> float:
    """Smallest eigenvalue of :func:`schur_gram_matrix`; markedly negative refutes
    the contractive-multiplier property."""
    G = schur_gram_matrix(H, points, k, policy, kernel)
    return float(np.linalg.eigvalsh(G)[0])


def sample_schur_points(rng: np.random.Generator, n: int, J: int, k: float, radius: float = 0.9, kernel="disk"):
    from .kernel import sample_admissible

    zs = sample_admissible(rng, n, J, k, radius)
    if kernel == "disk":
        zeta = radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    else:
        zeta = rng.normal(size=n) + 1j * rng.uniform(0.1, 2.0, n)
    return list(zip(zeta, zs))


def _oracle_product(s: ChaosExpansion, x: ChaosExpansion, policy: TruncationPolicy) -> ChaosExpansion:
    # explicit double sum over the slice, independent of wick_product
    out = {}
    for alpha in policy.basis():
        total = 0j
        for beta, xb in x.terms.items():
            if beta <= alpha:
                total += s.terms.get(alpha - beta, 0j) * xb
        if total:
            out[alpha] = total
    return ChaosExpansion(out, policy)


class CoisometricRealization:
    """Backward-shift realization ``S = D + zeta C (I - zeta A)^-1 B``.

    States are truncated ``zeta``-series ``f = [f_0, ..., f_{N-1}]`` of chaos
    expansions: ``A`` drops ``f_0`` and shifts down, ``B x`` is
    ``(S - S(0)) / zeta`` times ``x``, ``C`` reads ``f_0``, ``D x = S(0) x``.
    """

    def __init__(self, S: TransferFunction, policy: TruncationPolicy, n_deg: int):
        if not S.causal:
            raise ValueError("realization needs a causal transfer function")
        self.S, self.policy, self.n_deg = S, policy, n_deg

    def s(self, n: int) -> ChaosExpansion:
        return self.S.coeff(n, self.policy).with_policy(self.policy)

    def A(self, f: list[ChaosExpansion]) -> list[ChaosExpansion]:
        return f[1:] + [ChaosExpansion.zero(self.policy)]

    def B(self, x: ChaosExpansion) -> list[ChaosExpansion]:
        return [wick_product(self.s(n + 1), x) for n in range(self.n_deg)]

    def C(self, f: list[ChaosExpansion]) -> ChaosExpansion:
        return f[0]

    def D(self, x: ChaosExpansion) -> ChaosExpansion:
        return wick_product(self.s(0), x)

    def coefficients(self, x: ChaosExpansion) -> list[ChaosExpansion]:
        """``zeta``-coefficients of the realized ``S x``: ``D x, C B x, C A B x, ...``."""
        out = [self.D(x)]
        state = self.B(x)
        for _ in range(1, self.n_deg + 1):
            out.append(self.C(state))
            state = self.A(state)
        return out

    def evaluate(self, x: ChaosExpansion, zeta: complex, z: Sequence[complex]) -> complex:
        """``(D x)(z) + zeta I(C (I - zeta A)^-1 B x)(z)`` by the terminating Neumann sum."""
        total = hermite_transform_eval(self.D(x), z)
        state, power = self.B(x), zeta
        for _ in range(self.n_deg):
            total += power * hermite_transform_eval(self.C(state), z)
            state, power = self.A(state), power * zeta
        return total


def realization_residuals(
    S: TransferFunction,
    policy: TruncationPolicy | None = None,
    n_deg: int | None = None,
    probes: Sequence[ChaosExpansion] | None = None,
) -> list[float]:
    """Max coefficient residual per degree ``0..n_deg`` between the realization
    applied to each probe and the explicit product ``s_n x``."""
    base = S.policy
    if probes is None:
        pp = TruncationPolicy(max(base.max_var, 2), base.max_degree)
        probes = [
            ChaosExpansion.constant(1.0, pp),
            ChaosExpansion.basis_element(MultiIndex.unit(1), pp),
            ChaosExpansion.basis_element(MultiIndex.unit(2), pp),
            ChaosExpansion.basis_element(MultiIndex.from_pairs([(1, 1), (2, 1)]), pp),
        ]
    if policy is None:
        extra = max(p.degree for p in probes)
        J = max([base.max_var] + [p.max_var for p in probes])
        policy = TruncationPolicy(J, base.max_degree + extra)
    if n_deg is None:
        n_deg = max(S.coeffs, default=0)
    real = CoisometricRealization(S, policy, n_deg)
    worst = [0.0] * (n_deg + 1)
    for x in probes:
        x = x.with_policy(policy)
        got = real.coefficients(x)
        for n in range(n_deg + 1):
            want = _oracle_product(real.s(n), x, policy)
            diff = got[n] - want
            worst[n] = max(worst[n], max((abs(c) for _, c in diff), default=0.0))
    return worst


def realization_verify(S: TransferFunction, policy=None, n_deg=None, tol: float = 1e-12, probes=None) -> bool:
    """True when every coefficient residual of the realization is ``<= tol``."""
    return max(realization_residuals(S, policy, n_deg, probes)) <= tol


# rational transfer functions


def _poly_at(coeffs: Sequence[np.ndarray], zeta: complex) -> np.ndarray:
    out = None
    for p, c in enumerate(coeffs):
        term = np.asarray(c, dtype=np.complex128) * zeta**p
        out = term if out is None else out + term
    return out


@dataclass(frozen=True)
class RationalSpec:
    """``D(zeta) + C(zeta)(I_N - sum_k z_k A_k(zeta))^-1 (sum_k z_k B_k(zeta))``.

    Every coefficient function is a polynomial in ``zeta`` given as a list of
    matrices (constant term first). Output is scalar: ``D`` is ``1x1``, ``C``
    is ``1xN``, ``A_k`` are ``NxN`` and ``B_k`` are ``Nx1``.
    """

    D: list = field(default_factory=list)
    C: list = field(default_factory=list)
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.A) != len(self.B):
            raise ValueError("need one B_k per A_k")
        N = self.state_dim
        for Ak in self.A:
            for c in Ak:
                if np.shape(c) != (N, N):
                    raise ValueError(f"A_k coefficient has shape {np.shape(c)}, expected {(N, N)}")
        for Bk in self.B:
            for c in Bk:
                if np.shape(c) != (N, 1):
                    raise ValueError(f"B_k coefficient has shape {np.shape(c)}, expected {(N, 1)}")
        for c in self.C:
            if np.shape(c) != (1, N):
                raise ValueError(f"C coefficient has shape {np.shape(c)}, expected {(1, N)}")
        for c in self.D:
            if np.shape(c) not in ((1, 1), (), (1,)):
                raise ValueError("D must be scalar (1x1)")

    @property
    def state_dim(self) -> int:
        return int(np.shape(self.C[0])[1])

    @property
    def M(self) -> int:
        return len(self.A)

    def at(self, zeta: complex):
        D = complex(np.asarray(_poly_at(self.D, zeta)).reshape(())) if self.D else 0j
        C = _poly_at(self.C, zeta)
        A = [_poly_at(a, zeta) for a in self.A]
        B = [_poly_at(b, zeta) for b in self.B]
        return D, C, A, B


def rational_eval(spec: RationalSpec, zeta: complex, z: Sequence[complex]) -> complex:
    """Direct evaluation through a dense linear solve."""
    D, C, A, B = spec.at(zeta)
    N = spec.state_dim
    lhs = np.eye(N, dtype=np.complex128) - sum(z[i] * A[i] for i in range(spec.M))
    rhs = sum(z[i] * B[i] for i in range(spec.M))
    return D + complex((C @ np.linalg.solve(lhs, rhs)).reshape(()))


def rational_expand(
    spec: RationalSpec, zeta: complex, policy: TruncationPolicy, z_radius: float | Sequence[float] = 0.1
) -> ChaosExpansion:
    """Chaos coefficients of ``H(zeta, .)`` from the Neumann series in ``z``.

    With ``X(z) = (I - sum z_k A_k)^-1 = sum_alpha z^alpha X_alpha`` one has
    ``X_alpha = sum_{k: alpha_k > 0} A_k X_{alpha - e_k}``, and the coefficient of
    ``z^alpha`` (``alpha != 0``) is ``C sum_k X_{alpha - e_k} B_k``.
    Raises :class:`NeumannDivergenceError` unless ``sum_k r_k ||A_k|| < 1`` on
    the box ``|z_k| <= r_k``.
    """
    D, C, A, B = spec.at(zeta)
    M, N = spec.M, spec.state_dim
    if M > policy.max_var:
        raise PolicyError(f"{M} random variables exceed policy J={policy.max_var}")
    radii = np.broadcast_to(np.asarray(z_radius, dtype=float), (M,)) if M else np.zeros(0)
    contraction = float(sum(r * np.linalg.norm(a, 2) for r, a in zip(radii, A)))
    if contraction >= 1.0:
        raise NeumannDivergenceError(f"sum_k r_k ||A_k|| = {contraction} >= 1 on the z-box")
    basis = policy.basis()
    X: dict[MultiIndex, np.ndarray] = {ZERO: np.eye(N, dtype=np.complex128)}
    terms: dict[MultiIndex, complex] = {ZERO: D}
    for alpha in basis:
        if alpha.is_zero() or alpha.max_var > M:
            continue
        Xa = np.zeros((N, N), dtype=np.complex128)
        out = 0j
        for j, _ in alpha.pairs:
            prev = alpha - MultiIndex.unit(j)
            Xa += A[j - 1] @ X[prev]
            out += complex((C @ X[prev] @ B[j - 1]).reshape(()))
        X[alpha] = Xa
        terms[alpha] = terms.get(alpha, 0j) + out
    return ChaosExpansion(terms, policy)
