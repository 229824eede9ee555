"""Continuous-time random systems ``y(t) = int h(s) (Wick) u(t - s) ds`` on uniform grids.

Integrals use the trapezoidal rule on the grid support; the tail beyond the
support is assumed zero unless a bound is supplied, and reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from . import _backend
from .chaos import ChaosExpansion, hermite_transform_eval, norm_k
from .multiindex import TruncationPolicy
from .operators import (
    SVD_MAX,
    adjoint_apply,
    assemble,
    check_orders,
    multiplier_norm_upper,
    operator_norm_estimate,
    vage_upper_bound,
)
from .report import CERTIFIED, INCONCLUSIVE, REFUTED, StabilityReport
from .vage import vage_constant

QUADRATURE_NOTE = "trapezoidal rule, error O(dt^2) for C^2 integrands"


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GridSignal:
    """Samples ``x(t0 + i dt)`` of a continuous ``H_k``-valued function."""

    t0: float
    dt: float
    samples: tuple[ChaosExpansion, ...]
    policy: TruncationPolicy
    truncation_loss: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        rehomed = tuple(x if x.policy == self.policy else x.with_policy(self.policy) for x in self.samples)
        object.__setattr__(self, "samples", rehomed)

    @classmethod
    def from_function(cls, fn, t0: float, dt: float, n: int, policy: TruncationPolicy) -> "GridSignal":
        """Sample ``fn(t) -> ChaosExpansion`` (or a scalar, taken as deterministic)."""
        out = []
        for i in range(n):
            v = fn(t0 + i * dt)
            out.append(v if isinstance(v, ChaosExpansion) else ChaosExpansion.constant(v, policy))
        return cls(t0, dt, tuple(out), policy)

    @classmethod
    def from_dense(cls, t0, dt, arr, policy, truncation_loss=False) -> "GridSignal":
        basis = policy.basis()
        return cls(t0, dt, tuple(ChaosExpansion.from_dense(row, basis) for row in arr), policy, truncation_loss)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    def to_dense(self) -> np.ndarray:
        basis = self.policy.basis()
        out = np.zeros((len(self.samples), len(basis)), dtype=np.complex128)
        for i, x in enumerate(self.samples):
            if x.terms:
                out[i] = x.to_dense(basis)
        return out

    def norms(self, k: float) -> np.ndarray:
        return np.array([norm_k(x, k) for x in self.samples])

    def with_policy(self, policy: TruncationPolicy) -> "GridSignal":
        return GridSignal(self.t0, self.dt, self.samples, policy, self.truncation_loss)

    def is_deterministic(self) -> bool:
        return all(x.is_deterministic() for x in self.samples)

    def to_json(self) -> dict:
        return {"t0": self.t0, "dt": self.dt, "samples": [x.to_json() for x in self.samples]}

    @classmethod
    def from_json(cls, obj: dict, policy: TruncationPolicy | None = None) -> "GridSignal":
        samples = [ChaosExpansion.from_json(x) for x in obj["samples"]]
        if policy is None:
            policy = samples[0].policy
            for s in samples[1:]:
                policy = policy.join(s.policy)
        return cls(float(obj["t0"]), float(obj["dt"]), tuple(samples), policy)


def _check_grids(h: GridSignal, u: GridSignal) -> None:
    if not math.isclose(h.dt, u.dt, rel_tol=1e-12):
        raise GridMismatchError(f"grid spacings differ: {h.dt} vs {u.dt}")


def _wick_rows(F: np.ndarray, G: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Row-wise Wick products ``F[i] (Wick) G[i]`` (products leaving the slice dropped)."""
    out = np.zeros_like(F)
    fi = np.flatnonzero(np.any(F != 0, axis=0))
    gj = np.flatnonzero(np.any(G != 0, axis=0))
    for i in fi:
        for j in gj:
            t = table[i, j]
            if t >= 0:
                out[:, t] += F[:, i] * G[:, j]
    return out


def wick_convolve_grid(h: GridSignal, u: GridSignal, kernels=None) -> GridSignal:
    """``y(t_i) = dt sum_j w_j h(s_j) (Wick) u(t_i - s_j)`` with trapezoidal weights.

    For each output time the weights are 1/2 at the two ends of the overlap of
    the supports and 1 inside, so the rule integrates over exactly that overlap.
    A one-sample grid is treated as a point mass of ``dt * value`` (weight 1).
    """
    _check_grids(h, u)
    kernels = kernels or _backend
    policy = h.policy.join(u.policy)
    h, u = h.with_policy(policy), u.with_policy(policy)
    table = policy.basis().add_table
    H, U = h.to_dense(), u.to_dense()
    Nh, Nu = len(H), len(U)
    full, lost = kernels.wick_convolve_dense(H, U, table)
    if Nh == 1 or Nu == 1:
        # a one-sample grid is a point mass: rectangle rule
        return GridSignal.from_dense(h.t0 + u.t0, h.dt, h.dt * full, policy, lost)
    i = np.arange(Nh + Nu - 1)
    jlo = np.maximum(0, i - (Nu - 1))
    jhi = np.minimum(Nh - 1, i)
    e_lo = _wick_rows(H[jlo], U[i - jlo], table)
    e_hi = _wick_rows(H[jhi], U[i - jhi], table)
    y = h.dt * (full - 0.5 * e_lo - 0.5 * e_hi)
    return GridSignal.from_dense(h.t0 + u.t0, h.dt, y, policy, lost or h.truncation_loss or u.truncation_loss)


def breguet_sabin_oracle(h: GridSignal, u: GridSignal) -> GridSignal:
    """Per-coefficient trapezoidal ``y_alpha(t) = int sum_{beta<=alpha} h_beta(s) u_{alpha-beta}(t-s) ds``
    by explicit loops (no Wick product, no kernels)."""
    _check_grids(h, u)
    policy = h.policy.join(u.policy)
    basis = policy.basis()
    Nh, Nu = len(h), len(u)
    out = []
    for i in range(Nh + Nu - 1):
        jlo, jhi = max(0, i - (Nu - 1)), min(Nh - 1, i)
        coeffs = {}
        for alpha in basis:
            total = 0j
            for j in range(jlo, jhi + 1):
                if Nh == 1 or Nu == 1:
                    w = 1.0
                elif jlo == jhi:
                    w = 0.0
                else:
                    w = 0.5 if j in (jlo, jhi) else 1.0
                hs, us = h.samples[j], u.samples[i - j]
                for beta, hb in hs.terms.items():
                    if beta <= alpha:
                        total += w * hb * us.terms.get(alpha - beta, 0j)
            if total:
                coeffs[alpha] = h.dt * total
        out.append(ChaosExpansion(coeffs, policy))
    return GridSignal(h.t0 + u.t0, h.dt, tuple(out), policy)


def _quad(values: np.ndarray, dt: float) -> float:
    """Trapezoidal integral; a single sample is a point mass ``dt * value``."""
    if len(values) == 0:
        return 0.0
    if len(values) == 1:
        return float(dt * values[0])
    return float(trapezoid(values, dx=dt))


def _weighted_dense(h: GridSignal, k: float) -> np.ndarray:
    return h.to_dense() * np.sqrt(h.policy.basis().weights(-k))


def _adjoint_norm_profile(h: GridSignal, g: ChaosExpansion, k: float) -> np.ndarray:
    """``t_i -> ||T^*_{h(t_i)} g||_k`` for all grid samples at once."""
    basis = h.policy.basis()
    table = basis.add_table
    gw = g.with_policy(h.policy).to_dense(basis) * np.sqrt(basis.weights(-k))
    # G[delta, beta] = g_w[delta + beta]
    G = np.where(table >= 0, gw[np.maximum(table, 0)], 0.0)
    return np.linalg.norm(np.conj(_weighted_dense(h, k)) @ G, axis=1)


def default_grid_probes(h: GridSignal, k: float, n_random: int = 8, seed: int = 0, max_basis: int = 256):
    basis = h.policy.basis()
    B = len(basis)
    w = np.sqrt(basis.weights(-k))
    vecs = []
    for i in range(min(B, max_basis)):
        e = np.zeros(B, dtype=np.complex128)
        e[i] = 1.0
        vecs.append(e)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.standard_normal(B) + 1j * rng.standard_normal(B)
        vecs.append(v / np.linalg.norm(v))
    norms = h.norms(k)
    if len(norms) and norms.max() > 0:
        x = h.samples[int(np.argmax(norms))]
        M = assemble(x, k, h.policy).entries
        est = operator_norm_estimate(M.conj().T, method="svd" if B <= SVD_MAX else "auto")
        if est.value > 0:
            vecs.append(est.vector / np.linalg.norm(est.vector))
    return [ChaosExpansion.from_dense(v / w, basis) for v in vecs]


def _probe_integrals(h, k, probes, power):
    best, best_g = 0.0, None
    for g in probes:
        ng = norm_k(g, k)
        if ng == 0:
            continue
        g = g * (1.0 / ng)
        val = _quad(_adjoint_norm_profile(h, g, k) ** power, h.dt)
        if best_g is None or val > best:
            best, best_g = val, g
    return best, best_g


def regularized_witness(h: GridSignal, g: ChaosExpansion, k: float, eps: float = 1e-8, t: float = 0.0) -> GridSignal:
    """Input ``u(s) = T^*_{h(t-s)} g / (||T^*_{h(t-s)} g||_k + eps)`` sampled on the mirrored grid."""
    vals = []
    for x in reversed(h.samples):
        a = adjoint_apply(x, g.with_policy(h.policy), k)
        vals.append(a * (1.0 / (norm_k(a, k) + eps)))
    t_first = t - (h.t0 + h.dt * (len(h) - 1))
    return GridSignal(t_first, h.dt, tuple(vals), h.policy)


def _bound_profile(h, k, l, tol, refine):
    per_tap = multiplier_norm_upper if refine else vage_upper_bound
    return np.array([per_tap(x, k, l, tol) for x in h.samples])


def cont_bibo_sufficient(
    h: GridSignal, k: float, l: float, tol: float = 1e-12, tail_bound: float = 0.0, refine: bool = False
) -> StabilityReport:
    """Upper bound ``int A(k-l) ||h(t)||_l dt`` (trapezoidal) plus ``tail_bound``."""
    check_orders(k, l)
    mass = _quad(_bound_profile(h, k, l, tol, refine), h.dt)
    upper = mass + tail_bound
    return StabilityReport(
        "bibo",
        CERTIFIED if math.isfinite(upper) else INCONCLUSIVE,
        upper_bound=upper,
        parameters={"k": k, "l": l, "dt": h.dt, "t0": h.t0, "tol": tol, "refine": refine},
        details={"computed_mass": mass, "assumed_tail": tail_bound, "quadrature": QUADRATURE_NOTE,
                 "vage_constant": vage_constant(k - l, tol)},
        vacuous=not any(x.terms for x in h.samples),
    )


def cont_bibo_probe(
    h: GridSignal, k: float, probes=None, n_random: int = 8, seed: int = 0, eps: float = 1e-8
) -> StabilityReport:
    """Lower bound ``max_g int ||T^*_{h(t)} g||_k dt`` over unit probes."""
    if probes is None:
        probes = default_grid_probes(h, k, n_random, seed)
    best, g = _probe_integrals(h, k, probes, 1)
    witness = None if g is None else {"probe": g.to_json(), "eps": eps, "construction": "u(s) = T*g / (||T*g|| + eps)"}
    return StabilityReport(
        "bibo",
        INCONCLUSIVE,
        lower_bound=best,
        witness=witness,
        parameters={"k": k, "dt": h.dt, "t0": h.t0, "probes": len(probes), "seed": seed},
        details={"quadrature": QUADRATURE_NOTE},
        vacuous=not any(x.terms for x in h.samples),
    )


def certify_cont_bibo(h, k, l, tol=1e-12, tail_bound=0.0, n_random=8, seed=0) -> StabilityReport:
    up = cont_bibo_sufficient(h, k, l, tol, tail_bound, refine=True)
    lo = cont_bibo_probe(h, k, n_random=n_random, seed=seed)
    return StabilityReport(
        "bibo",
        up.verdict,
        lower_bound=lo.lower_bound,
        upper_bound=up.upper_bound,
        witness=lo.witness,
        parameters={**up.parameters, "seed": seed, "probes_random": n_random},
        details={**up.details, "vage_upper_bound": cont_bibo_sufficient(h, k, l, tol, tail_bound).upper_bound},
        vacuous=up.vacuous,
    )


def l2linf_certify(
    h: GridSignal,
    k: float,
    l: float,
    tol: float = 1e-12,
    tail_bound: float = 0.0,
    refine: bool = False,
    probes=None,
    n_random: int = 8,
    seed: int = 0,
    bound: float | None = None,
) -> StabilityReport:
    """``M = (int ||T_{h(t)}||^2 dt)^(1/2)`` with Våge per-sample bounds, plus the
    probe lower bound ``max_g (int ||T^*_{h(t)} g||_k^2 dt)^(1/2)``."""
    check_orders(k, l)
    mass = _quad(_bound_profile(h, k, l, tol, refine) ** 2, h.dt)
    if probes is None:
        probes = default_grid_probes(h, k, n_random, seed)
    sq, g = _probe_integrals(h, k, probes, 2)
    upper = math.sqrt(mass + tail_bound)
    lower = math.sqrt(sq)
    if bound is not None and lower > bound:
        verdict = REFUTED
    elif math.isfinite(upper) and (bound is None or upper <= bound):
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    return StabilityReport(
        "l2linf",
        verdict,
        lower_bound=lower,
        upper_bound=upper,
        witness=None if g is None else {"probe": g.to_json()},
        parameters={"k": k, "l": l, "dt": h.dt, "t0": h.t0, "tol": tol, "refine": refine, "seed": seed,
                    "bound": bound},
        details={"computed_mass_sq": mass, "assumed_tail_sq": tail_bound, "quadrature": QUADRATURE_NOTE},
        vacuous=not any(x.terms for x in h.samples),
    )


def grid_transform(x: GridSignal, s: complex, z: Sequence[complex]) -> complex:
    """Trapezoidal Laplace transform ``int x(t) e^{-s t} dt`` followed by the Hermite transform."""
    basis = x.policy.basis()
    X = x.to_dense() * np.exp(-s * x.times)[:, None]
    if len(X) == 1:
        coeffs = x.dt * X[0]
    else:
        coeffs = trapezoid(X, dx=x.dt, axis=0)
    z = tuple(z) + (0.0,) * max(0, x.policy.max_var - len(z))
    return hermite_transform_eval(ChaosExpansion.from_dense(coeffs, basis), z)


def cont_transfer_check(h: GridSignal, u: GridSignal, freqs: Sequence[complex], z_points) -> float:
    """``max |y_hat - h_hat u_hat|`` over the given frequencies and Hermite points."""
    y = wick_convolve_grid(h, u)
    worst = 0.0
    for s in freqs:
        for z in z_points:
            worst = max(worst, abs(grid_transform(y, s, z) - grid_transform(h, s, z) * grid_transform(u, s, z)))
    return worst
