"""Gaussian sampling of Hermite functionals.

``H_alpha(omega)`` is realized as ``prod_j h_{alpha_j}(X_j)`` with ``X_j`` i.i.d.
standard normal and ``h_n`` the probabilists' Hermite polynomials, which gives
``E[H_alpha H_beta] = delta_{alpha beta} alpha!``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chaos import ChaosExpansion
from .multiindex import MultiIndex


@dataclass(frozen=True)
class GaussianSample:
    """``N x J`` block of i.i.d. standard normal draws (one row per omega)."""

    x: np.ndarray
    seed: int | None = None

    @classmethod
    def draw(cls, n: int, J: int, seed: int) -> "GaussianSample":
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((n, J)), seed)

    @property
    def J(self) -> int:
        return self.x.shape[-1]

    def __len__(self) -> int:
        return self.x.shape[0] if self.x.ndim == 2 else 1


def hermite_poly(n: int, x):
    """Probabilists' Hermite polynomial ``h_n`` via ``h_{n+1} = x h_n - n h_{n-1}``."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return prev
    for m in range(1, n):
        prev, cur = cur, x * cur - m * prev
    return cur


def eval_hermite_functional(alpha: MultiIndex, x) -> np.ndarray | float:
    """``H_alpha`` at one sample (shape ``(J,)``) or many (shape ``(N, J)``)."""
    x = x.x if isinstance(x, GaussianSample) else np.asarray(x, dtype=float)
    if alpha.max_var > x.shape[-1]:
        raise ValueError(f"sample has {x.shape[-1]} coordinates, {alpha!r} needs {alpha.max_var}")
    out = np.ones(x.shape[:-1])
    for j, a in alpha.pairs:
        out = out * hermite_poly(a, x[..., j - 1])
    return float(out) if out.ndim == 0 else out


def eval_expansion(f: ChaosExpansion, x) -> np.ndarray:
    """Pointwise value ``f(omega) = sum c_alpha H_alpha(omega)`` for each sample row."""
    x = x.x if isinstance(x, GaussianSample) else np.asarray(x, dtype=float)
    x2 = np.atleast_2d(x)
    out = np.zeros(x2.shape[0], dtype=np.complex128)
    for alpha, c in f.terms.items():
        out += c * eval_hermite_functional(alpha, x2)
    return out


class Moment(NamedTuple):
    mean: complex
    stderr: float


def mc_moment(f: ChaosExpansion, g: ChaosExpansion, n: int, seed: int) -> Moment:
    """Sample mean and standard error of ``f(omega) * conj(g(omega))``.

    The conjugate matches the inner-product convention, so the target is
    ``sum alpha! f_alpha conj(g_alpha)`` (identical to ``E[f g]`` for real
    coefficients).
    """
    if n < 1:
        raise ValueError("need at least one sample")
    J = max(f.max_var, g.max_var, 1)
    sample = GaussianSample.draw(n, J, seed)
    vals = eval_expansion(f, sample) * np.conj(eval_expansion(g, sample))
    return _moment(vals)


def _moment(vals: np.ndarray) -> Moment:
    n = vals.shape[0]
    mean = complex(vals.mean())
    if n < 2:
        return Moment(mean, 0.0)
    # complex standard error: sqrt(E|v - mean|^2 / n)
    var = float(np.sum(np.abs(vals - mean) ** 2) / (n - 1))
    return Moment(mean, float(np.sqrt(var / n)))


def orthogonality_table(J: int, D: int, n: int, seed: int) -> list[dict]:
    """Empirical ``E[H_alpha H_beta]`` against ``delta alpha!`` over a ``(J, D)`` slice.

    One shared sample block; every unordered pair is reported with its z-score
    (zero when the standard error vanishes and the mean is exact).
    """
    from .multiindex import TruncationPolicy

    basis = TruncationPolicy(J, D).basis()
    sample = GaussianSample.draw(n, J, seed)
    values = [eval_hermite_functional(a, sample.x) for a in basis]
    rows = []
    for i, a in enumerate(basis):
        for j in range(i, len(basis)):
            b = basis[j]
            prod = values[i] * values[j]
            mom = _moment(prod)
            target = float(a.factorial()) if i == j else 0.0
            rows.append(_row(f"E[H{a.to_json()} H{b.to_json()}]", mom, target))
    return rows


def _row(name: str, mom: Moment, target: float) -> dict:
    err = abs(mom.mean - target)
    if mom.stderr > 0:
        z = err / mom.stderr
    else:
        z = 0.0 if err <= 1e-12 * max(1.0, abs(target)) else float("inf")
    return {"check": name, "mean": mom.mean.real, "target": target, "stderr": mom.stderr, "z": z}


def wick_expectation_rows(pairs, n: int, seed: int) -> list[dict]:
    """``E[f (Wick) g] = f_0 g_0``: exact coefficient check plus empirical z-score."""
    from .chaos import wick_product

    rows = []
    for idx, (f, g) in enumerate(pairs):
        fg = wick_product(f, g)
        target = f.mean * g.mean
        exact_ok = fg.mean == target
        one = ChaosExpansion.constant(1.0, fg.policy)
        mom = mc_moment(fg, one, n, seed + idx)
        err = abs(mom.mean - target)
        z = err / mom.stderr if mom.stderr > 0 else (0.0 if err <= 1e-12 else float("inf"))
        rows.append({
            "check": f"E[f{idx} wick g{idx}]",
            "mean_re": mom.mean.real,
            "mean_im": mom.mean.imag,
            "target_re": target.real,
            "target_im": target.imag,
            "stderr": mom.stderr,
            "z": z,
            "coefficient_identity": bool(exact_ok),
        })
    return rows
