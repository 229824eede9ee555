import numpy as np
import pytest

from wicksys.chaos import ChaosExpansion, random_expansion, wick_product
from wicksys.multiindex import MultiIndex, TruncationPolicy
from wicksys.sampling import (
    GaussianSample,
    eval_expansion,
    eval_hermite_functional,
    hermite_poly,
    mc_moment,
    orthogonality_table,
    wick_expectation_rows,
)

P = TruncationPolicy(3, 3)


def test_hermite_polynomials():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(hermite_poly(0, x), 1)
    assert np.allclose(hermite_poly(2, x), x**2 - 1)
    assert np.allclose(hermite_poly(3, x), x**3 - 3 * x)
    assert np.allclose(hermite_poly(4, x), x**4 - 6 * x**2 + 3)


def test_functional_examples():
    assert eval_hermite_functional(MultiIndex(), np.array([0.3, -1.0])) == 1.0
    assert eval_hermite_functional(MultiIndex.unit(1, 2), np.array([1.0])) == 0.0
    x = GaussianSample.draw(4, 2, seed=3)
    v = eval_hermite_functional(MultiIndex.from_pairs([(1, 1), (2, 2)]), x)
    assert np.allclose(v, x.x[:, 0] * (x.x[:, 1] ** 2 - 1))
    with pytest.raises(ValueError):
        eval_hermite_functional(MultiIndex.unit(3), np.zeros(2))


def test_constant_moment_exact():
    one = ChaosExpansion.constant(1.0, P)
    m = mc_moment(one, one, 1000, seed=1)
    assert m.mean == 1 and m.stderr == 0


def test_second_moment_of_e1():
    f = ChaosExpansion.basis_element(MultiIndex.unit(1), P)
    m = mc_moment(f, f, 100_000, seed=7)
    assert abs(m.mean - 1) <= 3 * m.stderr


def test_norm_identity_by_sampling(rng):
    # E[f conj(g)] = sum alpha! f_alpha conj(g_alpha)
    f = random_expansion(rng, P, n_terms=4)
    g = random_expansion(rng, P, n_terms=4)
    target = sum(a.factorial() * c * np.conj(g.coeff(a)) for a, c in f.terms.items())
    m = mc_moment(f, g, 200_000, seed=11)
    assert abs(m.mean - target) <= 4 * m.stderr


def test_eval_expansion_linear(rng):
    f = random_expansion(rng, P)
    g = random_expansion(rng, P)
    x = GaussianSample.draw(10, 3, seed=0)
    assert np.allclose(eval_expansion(f + g * 2.0, x), eval_expansion(f, x) + 2 * eval_expansion(g, x))


def test_reproducible():
    a = orthogonality_table(2, 2, 500, seed=5)
    b = orthogonality_table(2, 2, 500, seed=5)
    assert [r["z"] for r in a] == [r["z"] for r in b]


def test_wick_expectation_rows(rng):
    half = TruncationPolicy(3, 2)
    pairs = [(random_expansion(rng, half, complex_coeffs=False), random_expansion(rng, half, complex_coeffs=False))
             for _ in range(3)]
    rows = wick_expectation_rows(pairs, 50_000, seed=2)
    for (f, g), r in zip(pairs, rows):
        assert r["coefficient_identity"]
        assert wick_product(f, g).mean == f.mean * g.mean
        assert r["z"] <= 4
