import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wicksys.chaos import ChaosExpansion, inner_k, random_expansion, wick_product
from wicksys.multiindex import MultiIndex, PolicyError, TruncationPolicy
from wicksys.operators import (
    NonConvergenceError,
    OrderError,
    adjoint_apply,
    assemble,
    dump_matrix,
    from_weighted,
    multiplier_norm_upper,
    operator_norm,
    operator_norm_estimate,
    to_weighted,
    vage_upper_bound,
)

P = TruncationPolicy(3, 4)
e1 = MultiIndex.unit(1)
seeds = st.integers(0, 2**32 - 1)


def rnd(seed, policy=P, **kw):
    return random_expansion(np.random.default_rng(seed), policy, **kw)


def test_deterministic_multiplier_is_scaled_identity():
    m = assemble(ChaosExpansion.constant(2 - 1j, P), 3, P)
    assert np.array_equal(m.toarray(), (2 - 1j) * np.eye(len(P.basis())))
    assert math.isclose(operator_norm(assemble(ChaosExpansion.constant(3.0, P), 4, P)), 3.0, rel_tol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_e1_first_column(k):
    m = assemble(ChaosExpansion.basis_element(e1, P), k, P).toarray()
    i = P.basis().index(e1)
    col = np.zeros(len(P.basis()))
    col[i] = 2 ** (-k / 2)
    assert np.allclose(m[:, 0], col, rtol=0, atol=1e-16)


def test_lower_triangular_by_grading(rng):
    m = assemble(rnd(1), 2, P).toarray()
    assert np.allclose(np.triu(m, 1), 0)


@given(seeds, seeds)
def test_apply_equals_wick_product(s1, s2):
    h, u = rnd(s1, max_degree=2), rnd(s2, max_degree=2)
    got = assemble(h, 3, P).apply(u)
    assert got.equals(wick_product(h, u), rtol=1e-13, atol=1e-14)


def test_policy_mismatch():
    h = ChaosExpansion.basis_element(MultiIndex.unit(1, 3), TruncationPolicy(1, 3))
    with pytest.raises(PolicyError):
        assemble(h, 2, TruncationPolicy(1, 2))


def test_adjoint_examples():
    h = ChaosExpansion.basis_element(e1, P)
    v = ChaosExpansion.basis_element(MultiIndex.unit(1, 2), P)
    for k in (1, 3, 4):
        assert adjoint_apply(h, v, k).equals(ChaosExpansion.basis_element(e1, P, 2.0**-k), rtol=1e-15)
    c = 0.5 + 2j
    u = rnd(3)
    assert adjoint_apply(ChaosExpansion.constant(c, P), u, 2).equals(u * np.conj(c), rtol=1e-15)


@settings(max_examples=60)
@given(seeds, seeds, seeds)
def test_adjoint_identity(s1, s2, s3):
    h, u, v = rnd(s1, max_degree=2), rnd(s2, max_degree=2), rnd(s3)
    lhs = inner_k(wick_product(h, u), v, 3)
    rhs = inner_k(u, adjoint_apply(h, v, 3), 3)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_adjoint_matrix_is_conjugate_transpose(rng):
    k = 2
    basis = P.basis()
    h = random_expansion(rng, P, max_degree=3)
    M = assemble(h, k, P).toarray()
    cols = [to_weighted(adjoint_apply(h, from_weighted(np.eye(len(basis))[i], k, basis), k), k, basis)
            for i in range(len(basis))]
    adj = np.array(cols).T
    ref = M.conj().T
    assert np.max(np.abs(adj - ref)) <= 1e-13 * np.max(np.abs(ref))


def test_product_of_matrices(rng):
    # assemble(f (Wick) g) = assemble(f) assemble(g) when nothing is lost
    f, g = random_expansion(rng, P, max_degree=2), random_expansion(rng, P, max_degree=2)
    fg = wick_product(f, g)
    assert not fg.truncation_loss
    lhs = assemble(fg, 2, P).toarray()
    rhs = assemble(f, 2, P).toarray() @ assemble(g, 2, P).toarray()
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_power_iteration_matches_svd(rng):
    p = TruncationPolicy(2, 3)
    h = random_expansion(rng, p, n_terms=len(p.basis()))
    m = assemble(h, 2, p)
    est = operator_norm_estimate(m, method="power")
    svd = np.linalg.svd(m.toarray(), compute_uv=False)[0]
    assert abs(est.value - svd) <= 1e-8 * svd
    assert est.method == "power"


def test_power_iteration_deterministic(rng):
    m = assemble(random_expansion(rng, P), 3, P)
    assert operator_norm(m) == operator_norm(m)


def test_nonconvergence_reports_bracket(rng):
    m = assemble(random_expansion(rng, P), 2, P)
    with pytest.raises(NonConvergenceError) as info:
        operator_norm_estimate(m, tol=0.0, max_iter=3, method="power")
    lo, hi = info.value.bracket
    assert lo <= np.linalg.svd(m.toarray(), compute_uv=False)[0] <= hi


def test_norm_monotone_in_degree_and_sandwiched():
    h = ChaosExpansion.basis_element(e1, TruncationPolicy(1, 1))
    up = vage_upper_bound(h, 4, 2)
    prev = 0.0
    for D in range(1, 9):
        p = TruncationPolicy(2, D)
        val = operator_norm(assemble(h.with_policy(p), 4, p))
        assert val >= prev - 1e-12
        assert val <= up
        prev = val


def test_vage_upper_bound_examples():
    one = ChaosExpansion.constant(1.0, P)
    assert abs(vage_upper_bound(one, 4, 2) - math.pi / 2) < 1e-11
    assert vage_upper_bound(ChaosExpansion.zero(P), 4, 2) == 0.0
    with pytest.raises(OrderError):
        vage_upper_bound(one, 3, 2)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_sandwich(seed):
    h = rnd(seed, max_degree=3)
    val = operator_norm(assemble(h, 4, P))
    assert val <= multiplier_norm_upper(h, 4, 2) + 1e-10
    assert multiplier_norm_upper(h, 4, 2) <= vage_upper_bound(h, 4, 2) + 1e-12


def test_multiplier_norm_upper_deterministic():
    c = ChaosExpansion.constant(-0.7, P)
    assert multiplier_norm_upper(c, 4, None) == 0.7
    assert multiplier_norm_upper(rnd(5, max_degree=2), 4, None) == float("inf")


def test_sparse_storage_above_cap(rng, monkeypatch):
    from wicksys import operators

    p = TruncationPolicy(2, 3)
    h = random_expansion(rng, p)
    dense = assemble(h, 2, p)
    monkeypatch.setattr(operators, "DENSE_MAX", 5)
    sparse = assemble(h, 2, p)
    assert sparse.is_sparse and not dense.is_sparse
    assert np.array_equal(sparse.toarray(), dense.toarray())
    assert abs(operator_norm(sparse) - operator_norm(dense)) <= 1e-9 * operator_norm(dense)


def test_dump_matrix_formats():
    p = TruncationPolicy(1, 2)
    m = assemble(ChaosExpansion.basis_element(e1, p), 2, p)
    buf = io.StringIO()
    dump_matrix(m, buf, "coo")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# B=3 k=2 J=1 D=2 format=coo"
    assert lines[1:] == ["1 0 0.5 0.0", "2 1 0.5 0.0"]
    buf = io.StringIO()
    dump_matrix(m, buf, "dense")
    assert len(buf.getvalue().splitlines()) == 4
    with pytest.raises(ValueError):
        dump_matrix(m, io.StringIO(), "xml")
