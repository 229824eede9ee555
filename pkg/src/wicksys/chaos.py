"""Truncated Wiener-Hermite chaos expansions and the Wick algebra on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .multiindex import ZERO, BasisEnumeration, MultiIndex, TruncationPolicy, weight


class TruncationLossError(ArithmeticError):
    """Raised by ``on_loss="raise"`` when a product term leaves the policy."""


@dataclass(frozen=True, eq=False)
class ChaosExpansion:
    """``f = sum_alpha c_alpha H_alpha`` on a truncation policy.

    Coefficients are complex; exact zeros are never stored. ``truncation_loss``
    records that some term was dropped while building this value.
    """

    terms: Mapping[MultiIndex, complex]
    policy: TruncationPolicy
    truncation_loss: bool = field(default=False)

    def __post_init__(self):
        clean = {}
        for alpha, c in self.terms.items():
            if not isinstance(alpha, MultiIndex):
                raise TypeError(f"keys must be MultiIndex, got {type(alpha).__name__}")
            self.policy.check(alpha)
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "terms", MappingProxyType(clean))

    # construction

    @classmethod
    def zero(cls, policy: TruncationPolicy) -> "ChaosExpansion":
        return cls({}, policy)

    @classmethod
    def constant(cls, c: complex, policy: TruncationPolicy) -> "ChaosExpansion":
        return cls({ZERO: c}, policy)

    @classmethod
    def basis_element(cls, alpha: MultiIndex, policy: TruncationPolicy, c: complex = 1.0) -> "ChaosExpansion":
        return cls({alpha: c}, policy)

    @classmethod
    def from_dense(cls, coeffs: Sequence[complex], basis: BasisEnumeration, truncation_loss: bool = False):
        coeffs = np.asarray(coeffs)
        nz = np.flatnonzero(coeffs)
        return cls({basis[i]: coeffs[i] for i in nz}, basis.policy, truncation_loss)

    def to_dense(self, basis: BasisEnumeration | None = None) -> np.ndarray:
        basis = basis or self.policy.basis()
        out = np.zeros(len(basis), dtype=np.complex128)
        for alpha, c in self.terms.items():
            out[basis.index(alpha)] = c
        return out

    def with_policy(self, policy: TruncationPolicy) -> "ChaosExpansion":
        """Re-home onto ``policy``; raises :class:`PolicyError` if a term does not fit."""
        return ChaosExpansion(dict(self.terms), policy, self.truncation_loss)

    # inspection

    def coeff(self, alpha: MultiIndex) -> complex:
        return self.terms.get(alpha, 0j)

    @property
    def mean(self) -> complex:
        """The ``alpha = 0`` coefficient, i.e. the expectation."""
        return self.coeff(ZERO)

    def is_deterministic(self) -> bool:
        return all(a.is_zero() for a in self.terms)

    @property
    def degree(self) -> int:
        return max((a.degree for a in self.terms), default=0)

    @property
    def max_var(self) -> int:
        return max((a.max_var for a in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    # linear structure

    def _combine(self, other: "ChaosExpansion", sign: float) -> "ChaosExpansion":
        policy = self.policy.join(other.policy)
        acc = dict(self.terms)
        for alpha, c in other.terms.items():
            acc[alpha] = acc.get(alpha, 0j) + sign * c
        return ChaosExpansion(acc, policy, self.truncation_loss or other.truncation_loss)

    def __add__(self, other):
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        return self._combine(other, 1.0)

    def __sub__(self, other):
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        return self._combine(other, -1.0)

    def __mul__(self, c):
        if isinstance(c, ChaosExpansion):
            raise TypeError("use wick_product for products of expansions")
        return ChaosExpansion({a: c * v for a, v in self.terms.items()}, self.policy, self.truncation_loss)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def conj(self) -> "ChaosExpansion":
        return ChaosExpansion({a: v.conjugate() for a, v in self.terms.items()}, self.policy, self.truncation_loss)

    def equals(self, other: "ChaosExpansion", rtol: float = 0.0, atol: float = 0.0) -> bool:
        """Coefficientwise comparison, ``|a - b| <= atol + rtol * max(|a|, |b|)``."""
        for alpha in set(self.terms) | set(other.terms):
            a, b = self.coeff(alpha), other.coeff(alpha)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        return dict(self.terms) == dict(other.terms) and self.policy == other.policy

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(f"{a!r}: {c:.6g}" for a, c in list(self.terms.items())[:6])
        more = ", ..." if len(self.terms) > 6 else ""
        return f"ChaosExpansion({{{body}{more}}}, J={self.policy.J}, D={self.policy.D})"

    # serialization

    def to_json(self) -> dict:
        basis_order = sorted(self.terms, key=lambda a: (a.degree, a.pairs))
        return {
            "policy": self.policy.to_json(),
            "terms": [
                {"alpha": a.to_json(), "re": self.terms[a].real, "im": self.terms[a].imag}
                for a in basis_order
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChaosExpansion":
        policy = TruncationPolicy.from_json(obj["policy"])
        terms: dict[MultiIndex, complex] = {}
        for t in obj["terms"]:
            pairs = [tuple(p) for p in t["alpha"]]
            if any(len(p) != 2 for p in pairs):
                raise ValueError(f"malformed multi-index {t['alpha']!r}")
            alpha = MultiIndex(tuple((int(j), int(a)) for j, a in pairs))
            terms[alpha] = terms.get(alpha, 0j) + complex(float(t["re"]), float(t.get("im", 0.0)))
        return cls(terms, policy)


def wick_product(f: ChaosExpansion, g: ChaosExpansion, on_loss: str = "flag") -> ChaosExpansion:
    """``f (Wick) g`` with ``H_alpha (Wick) H_beta = H_{alpha+beta}``.

    The result lives on the join of the two policies. Products that leave it
    are dropped and ``truncation_loss`` is set; ``on_loss="raise"`` raises
    :class:`TruncationLossError` instead.
    """
    policy = f.policy.join(g.policy)
    acc: dict[MultiIndex, complex] = {}
    lost = f.truncation_loss or g.truncation_loss
    for alpha, a in f.terms.items():
        for beta, b in g.terms.items():
            gamma = alpha + beta
            if not policy.contains(gamma):
                lost = True
                continue
            acc[gamma] = acc.get(gamma, 0j) + a * b
    if lost and on_loss == "raise":
        raise TruncationLossError("Wick product leaves the truncation policy")
    return ChaosExpansion(acc, policy, lost)


def wick_power(f: ChaosExpansion, n: int) -> ChaosExpansion:
    out = ChaosExpansion.constant(1.0, f.policy)
    for _ in range(n):
        out = wick_product(out, f)
    return out


def inner_k(f: ChaosExpansion, g: ChaosExpansion, k: float) -> complex:
    """``<f, g>_k = sum f_alpha conj(g_alpha) (2N)^(-k alpha)``, conjugate-linear in ``g``."""
    small, big = (f, g) if len(f) <= len(g) else (g, f)
    total = 0j
    for alpha in small.terms:
        if alpha in big.terms:
            total += f.terms[alpha] * g.terms[alpha].conjugate() * weight(alpha, -k)
    return total


def norm_k(f: ChaosExpansion, k: float) -> float:
    """Kondratiev-scale norm ``(sum |c_alpha|^2 (2N)^(-k alpha))^(1/2)``."""
    return math.sqrt(sum(abs(c) ** 2 * weight(a, -k) for a, c in f.terms.items()))


def white_noise_norm(f: ChaosExpansion) -> float:
    """``(sum |c_alpha|^2 alpha!)^(1/2)``."""
    return math.sqrt(sum(abs(c) ** 2 * a.factorial() for a, c in f.terms.items()))


def hermite_transform_eval(f: ChaosExpansion, z: Sequence[complex]) -> complex:
    """``I(f)(z) = sum c_alpha z^alpha``."""
    z = tuple(z)
    if f.max_var > len(z):
        raise ValueError(f"evaluation point has {len(z)} coordinates, expansion uses {f.max_var}")
    return sum((c * a.power(z) for a, c in f.terms.items()), 0j)


def dense_wick(f: np.ndarray, g: np.ndarray, basis: BasisEnumeration):
    """Dense-vector Wick product through the kernel backend; returns ``(coeffs, lost)``."""
    from ._backend import wick_dense

    return wick_dense(f, g, basis.add_table)


def random_expansion(
    rng: np.random.Generator,
    policy: TruncationPolicy,
    n_terms: int | None = None,
    max_degree: int | None = None,
    complex_coeffs: bool = True,
    scale: float = 1.0,
) -> ChaosExpansion:
    """Random expansion on ``policy`` (optionally restricted to ``degree <= max_degree``)."""
    candidates = [a for a in policy.basis() if max_degree is None or a.degree <= max_degree]
    if n_terms is None:
        n_terms = int(rng.integers(1, len(candidates) + 1))
    n_terms = min(n_terms, len(candidates))
    picks = rng.choice(len(candidates), size=n_terms, replace=False)
    terms = {}
    for i in sorted(picks):
        c = rng.normal() + (1j * rng.normal() if complex_coeffs else 0.0)
        terms[candidates[i]] = scale * c
    return ChaosExpansion(terms, policy)

