"""Multi-indices, truncation policies and the enumerated truncated basis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Sequence

import numpy as np


class PolicyError(ValueError):
    """A multi-index or expansion does not fit the truncation policy."""


@dataclass(frozen=True)
class MultiIndex:
    """Finitely supported exponent sequence, stored as sorted ``(j, a)`` pairs.

    Variables are numbered from 1. Zero exponents are never stored, so the
    empty tuple is the zero multi-index.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        last = 0
        for j, a in self.pairs:
            if j <= last:
                raise ValueError(f"variable indices must be strictly increasing: {self.pairs}")
            if a <= 0:
                raise ValueError(f"exponents must be positive: {self.pairs}")
            last = j

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]]) -> "MultiIndex":
        """Build from unsorted pairs; repeated variables are summed, zeros dropped."""
        acc: dict[int, int] = {}
        for j, a in pairs:
            j, a = int(j), int(a)
            if j < 1 or a < 0:
                raise ValueError(f"invalid pair ({j}, {a})")
            acc[j] = acc.get(j, 0) + a
        return cls(tuple((j, a) for j, a in sorted(acc.items()) if a))

    @classmethod
    def from_dense(cls, exponents: Sequence[int]) -> "MultiIndex":
        return cls(tuple((j + 1, int(a)) for j, a in enumerate(exponents) if a))

    @classmethod
    def unit(cls, j: int, a: int = 1) -> "MultiIndex":
        """The multi-index ``a * e_j``."""
        return cls(((j, a),)) if a else cls()

    def to_dense(self, size: int) -> tuple[int, ...]:
        out = [0] * size
        for j, a in self.pairs:
            if j > size:
                raise PolicyError(f"variable {j} exceeds dense size {size}")
            out[j - 1] = a
        return tuple(out)

    @property
    def degree(self) -> int:
        return sum(a for _, a in self.pairs)

    @property
    def max_var(self) -> int:
        return self.pairs[-1][0] if self.pairs else 0

    def is_zero(self) -> bool:
        return not self.pairs

    def factorial(self) -> int:
        """``alpha! = prod_j alpha_j!``"""
        out = 1
        for _, a in self.pairs:
            out *= math.factorial(a)
        return out

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return MultiIndex.from_pairs(self.pairs + other.pairs)

    def __le__(self, other: "MultiIndex") -> bool:
        """Componentwise order."""
        theirs = dict(other.pairs)
        return all(theirs.get(j, 0) >= a for j, a in self.pairs)

    def __ge__(self, other: "MultiIndex") -> bool:
        return other <= self

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        if not isinstance(other, MultiIndex):
            return NotImplemented
        acc = dict(self.pairs)
        for j, a in other.pairs:
            rest = acc.get(j, 0) - a
            if rest < 0:
                raise ValueError(f"{other} is not <= {self}")
            acc[j] = rest
        return MultiIndex(tuple((j, a) for j, a in sorted(acc.items()) if a))

    def power(self, z: Sequence[complex]) -> complex:
        """Monomial ``z^alpha``; variables beyond ``len(z)`` count as zero."""
        out: complex = 1.0
        for j, a in self.pairs:
            if j > len(z):
                return 0.0
            out *= z[j - 1] ** a
        return out

    def to_json(self) -> list[list[int]]:
        return [[j, a] for j, a in self.pairs]

    def __repr__(self) -> str:
        if not self.pairs:
            return "MultiIndex(0)"
        return "MultiIndex(" + " + ".join(f"{a}e{j}" if a > 1 else f"e{j}" for j, a in self.pairs) + ")"


ZERO = MultiIndex()


def weight(alpha: MultiIndex, q: float) -> float:
    """``(2N)^(q alpha) = prod_j (2j)^(q alpha_j)``.

    Overflow is detected in log space rather than silently producing ``inf``;
    the value itself is the direct product (exact for small integer powers).
    """
    if not alpha.pairs:
        return 1.0
    log_w = q * sum(a * math.log(2 * j) for j, a in alpha.pairs)
    if log_w > 709.78:
        raise OverflowError(f"weight (2N)^({q}*{alpha}) exceeds the float range")
    if log_w < -745.0:
        return 0.0
    return math.prod(float(2 * j) ** (q * a) for j, a in alpha.pairs)


@dataclass(frozen=True)
class TruncationPolicy:
    """Box truncation: variables ``1..max_var`` and total degree ``<= max_degree``."""

    max_var: int
    max_degree: int

    def __post_init__(self):
        if self.max_var < 1:
            raise ValueError("max_var must be positive")
        if self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")

    @property
    def J(self) -> int:
        return self.max_var

    @property
    def D(self) -> int:
        return self.max_degree

    def contains(self, alpha: MultiIndex) -> bool:
        return alpha.max_var <= self.max_var and alpha.degree <= self.max_degree

    def check(self, alpha: MultiIndex) -> None:
        if not self.contains(alpha):
            raise PolicyError(f"{alpha} violates policy (J={self.max_var}, D={self.max_degree})")

    @property
    def size(self) -> int:
        return math.comb(self.max_var + self.max_degree, self.max_degree)

    def join(self, other: "TruncationPolicy") -> "TruncationPolicy":
        """Pointwise max of two policies."""
        return TruncationPolicy(max(self.max_var, other.max_var), max(self.max_degree, other.max_degree))

    def basis(self) -> "BasisEnumeration":
        return BasisEnumeration.of(self)

    def to_json(self) -> dict:
        return {"J": self.max_var, "D": self.max_degree}

    @classmethod
    def from_json(cls, obj: dict) -> "TruncationPolicy":
        return cls(int(obj["J"]), int(obj["D"]))


def _graded_lex(J: int, D: int) -> Iterator[MultiIndex]:
    for d in range(D + 1):
        # combinations of variables in non-decreasing order give each degree-d
        # monomial once; sorting the dense vectors descending gives lex order
        dense = []
        for combo in combinations_with_replacement(range(J), d):
            vec = [0] * J
            for v in combo:
                vec[v] += 1
            dense.append(tuple(vec))
        dense.sort(reverse=True)
        for vec in dense:
            yield MultiIndex.from_dense(vec)


class BasisEnumeration:
    """Graded-lexicographic bijection between ``0..B-1`` and a policy slice.

    Index 0 is the zero multi-index and total degree is non-decreasing along
    the enumeration. Instances are cached per policy; use :meth:`of`.
    """

    def __init__(self, policy: TruncationPolicy):
        self.policy = policy
        self.indices: tuple[MultiIndex, ...] = tuple(_graded_lex(policy.max_var, policy.max_degree))
        self.position: dict[MultiIndex, int] = {a: i for i, a in enumerate(self.indices)}
        self.degrees = np.array([a.degree for a in self.indices], dtype=np.int64)
        self._add_table = None

    @classmethod
    def of(cls, policy: TruncationPolicy) -> "BasisEnumeration":
        return _basis_cached(policy)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __getitem__(self, i: int) -> MultiIndex:
        return self.indices[i]

    def index(self, alpha: MultiIndex) -> int:
        try:
            return self.position[alpha]
        except KeyError:
            raise PolicyError(f"{alpha} not in basis of {self.policy}") from None

    def weights(self, q: float) -> np.ndarray:
        """Vector of ``(2N)^(q alpha)`` along the enumeration."""
        return np.array([weight(a, q) for a in self.indices])

    def factorials(self) -> np.ndarray:
        return np.array([a.factorial() for a in self.indices], dtype=float)

    @property
    def add_table(self) -> np.ndarray:
        """``table[i, j]`` = position of ``alpha_i + alpha_j`` or -1 when it leaves the slice."""
        if self._add_table is None:
            dense = np.array([a.to_dense(self.policy.max_var) for a in self.indices], dtype=np.int64)
            B = len(self.indices)
            lookup = {tuple(row): i for i, row in enumerate(dense)}
            table = np.full((B, B), -1, dtype=np.intp)
            for i in range(B):
                sums = dense[i] + dense
                for j in range(B):
                    table[i, j] = lookup.get(tuple(sums[j]), -1)
            table.setflags(write=False)
            self._add_table = table
        return self._add_table

    def __repr__(self) -> str:
        return f"BasisEnumeration({self.policy}, B={len(self)})"


@lru_cache(maxsize=64)
def _basis_cached(policy: TruncationPolicy) -> BasisEnumeration:
    return BasisEnumeration(policy)
