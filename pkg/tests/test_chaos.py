import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wicksys.chaos import (
    ChaosExpansion,
    TruncationLossError,
    dense_wick,
    hermite_transform_eval,
    inner_k,
    norm_k,
    random_expansion,
    white_noise_norm,
    wick_power,
    wick_product,
)
from wicksys.multiindex import MultiIndex, PolicyError, TruncationPolicy

P = TruncationPolicy(3, 6)
e1, e2 = MultiIndex.unit(1), MultiIndex.unit(2)


def H(alpha, c=1.0, policy=P):
    return ChaosExpansion.basis_element(alpha, policy, c)


def one(c=1.0, policy=P):
    return ChaosExpansion.constant(c, policy)


def expansions(max_degree=3):
    return st.integers(0, 2**32 - 1).map(
        lambda s: random_expansion(np.random.default_rng(s), P, max_degree=max_degree)
    )


def test_wick_examples():
    assert wick_product(H(e1), H(e1)) == H(MultiIndex.unit(1, 2))
    f = one() + H(e1)
    want = one() + H(e1, 2.0) + H(MultiIndex.unit(1, 2))
    assert wick_product(f, f) == want


@given(expansions(), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_deterministic_factor_is_scalar_multiple(f, c):
    assert wick_product(one(c), f).equals(f * c, rtol=1e-15)


@given(expansions(), expansions())
def test_commutative_and_unit(f, g):
    # same products, different summation order
    assert wick_product(f, g).equals(wick_product(g, f), rtol=1e-14, atol=1e-15)
    assert wick_product(f, one()) == f


@settings(max_examples=50)
@given(expansions(2), expansions(2), expansions(2))
def test_associative(f, g, h):
    a = wick_product(wick_product(f, g), h)
    b = wick_product(f, wick_product(g, h))
    assert not a.truncation_loss
    assert a.equals(b, rtol=1e-12, atol=1e-12)


def test_truncation_loss_flag_and_raise():
    small = TruncationPolicy(2, 2)
    f = ChaosExpansion.basis_element(MultiIndex.unit(1, 2), small)
    g = ChaosExpansion.basis_element(MultiIndex.unit(2), small)
    out = wick_product(f, g)
    assert out.truncation_loss and not out.terms
    with pytest.raises(TruncationLossError):
        wick_product(f, g, on_loss="raise")
    # flag survives addition
    assert (out + f).truncation_loss


def test_policy_enforced():
    with pytest.raises(PolicyError):
        ChaosExpansion({MultiIndex.unit(4): 1.0}, P)
    assert ChaosExpansion({e1: 0.0}, P).terms == {}


def test_norm_examples():
    assert norm_k(H(e1), 2) == 0.5
    assert norm_k(H(e2), 2) == 0.25
    for k in (1, 3, 7):
        assert norm_k(one(3.0), k) == 3.0
    assert math.isclose(white_noise_norm(H(MultiIndex.unit(1, 2))), math.sqrt(2))
    assert white_noise_norm(one()) == 1.0
    assert math.isclose(white_noise_norm(H(e1) + H(e2)), math.sqrt(2))


@given(expansions(), expansions())
def test_inner_product_conventions(f, g):
    assert math.isclose(inner_k(f, f, 2).real, norm_k(f, 2) ** 2, rel_tol=1e-12)
    assert abs(inner_k(f, g, 3) - np.conj(inner_k(g, f, 3))) <= 1e-12 * (1 + abs(inner_k(f, g, 3)))
    # conjugate-linear in the second slot
    c = 0.3 - 1.1j
    assert abs(inner_k(f, g * c, 3) - np.conj(c) * inner_k(f, g, 3)) <= 1e-12 * (1 + abs(inner_k(f, g, 3)))


def test_hermite_transform_examples():
    assert hermite_transform_eval(H(MultiIndex.unit(1, 2)), [0.5]) == 0.25
    assert hermite_transform_eval(one(), [0.3, -0.2, 1j]) == 1.0
    with pytest.raises(ValueError):
        hermite_transform_eval(H(MultiIndex.unit(3)), [0.1])


@given(expansions(), expansions(), st.integers(0, 2**32 - 1))
def test_hermite_transform_homomorphism(f, g, seed):
    z = np.random.default_rng(seed).uniform(-0.3, 0.3, (3, 2)) @ [1, 1j]
    fg = wick_product(f, g)
    assert not fg.truncation_loss
    lhs = hermite_transform_eval(fg, z)
    assert abs(lhs - hermite_transform_eval(f, z) * hermite_transform_eval(g, z)) <= 1e-12


def test_wick_power_binomial():
    f = one() + H(e1)
    p3 = wick_power(f, 3)
    for a, c in [(0, 1), (1, 3), (2, 3), (3, 1)]:
        assert p3.coeff(MultiIndex.unit(1, a) if a else MultiIndex(())) == c


def test_dense_wick_matches(rng, kernels):
    basis = P.basis()
    f = random_expansion(rng, P, max_degree=3)
    g = random_expansion(rng, P, max_degree=3)
    out, lost = kernels.wick_dense(f.to_dense(basis), g.to_dense(basis), basis.add_table)
    assert not lost
    assert ChaosExpansion.from_dense(out, basis).equals(wick_product(f, g), rtol=1e-13, atol=1e-15)
    assert np.allclose(dense_wick(f.to_dense(basis), g.to_dense(basis), basis)[0], out)


@given(expansions())
def test_json_round_trip(f):
    back = ChaosExpansion.from_json(f.to_json())
    assert back == f
    assert back.to_json() == f.to_json()


def test_with_policy_refuses_to_drop_terms():
    f = H(MultiIndex.unit(1, 5))
    with pytest.raises(PolicyError):
        f.with_policy(TruncationPolicy(3, 2))
    assert f.with_policy(TruncationPolicy(4, 6)).policy == TruncationPolicy(4, 6)
