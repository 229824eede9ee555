import warnings

import numpy as np
import pytest

from wicksys.kernel import (
    DivergenceWarning,
    gram_matrix,
    kernel_K,
    kernel_K_checked,
    membership_Kk,
    sample_admissible,
)
from wicksys.multiindex import TruncationPolicy, weight


def test_membership_examples():
    assert membership_Kk([0.0], 3)
    assert membership_Kk([], 3)
    assert not membership_Kk([1.0], 1)
    assert membership_Kk([0.1, 0.05], 2)


def test_kernel_at_origin():
    assert kernel_K([0.0], [0.0], 4) == 1.0
    assert kernel_K([0.0, 0.0], [0.0], 2, TruncationPolicy(2, 5)) == 1.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_one_variable_geometric_series(k):
    t = 0.5 * 2 ** (-k / 2)
    closed = 1 / (1 - 2**k * t**2)
    assert abs(kernel_K([t], [t], k) - closed) < 1e-14
    # truncated sums converge to the closed form
    errs = [abs(kernel_K([t], [t], k, TruncationPolicy(1, D)) - closed) for D in (2, 8, 40)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-12


def test_truncated_matches_brute_force(rng):
    p = TruncationPolicy(3, 4)
    z, w = sample_admissible(rng, 2, 3, 2)
    brute = sum(a.power(z) * np.conj(a.power(w)) * weight(a, 2) for a in p.basis())
    assert abs(kernel_K(z, w, 2, p) - brute) < 1e-13


def test_divergence_warns():
    with pytest.warns(DivergenceWarning):
        v = kernel_K([1.0], [1.0], 1)
    assert np.isnan(v)
    with pytest.warns(DivergenceWarning):
        _, tail = kernel_K_checked([1.0], [0.1], 1, TruncationPolicy(1, 3))
    assert tail == float("inf")


def test_checked_tail_small(rng):
    z, w = sample_admissible(rng, 2, 2, 3, radius=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        val, tail = kernel_K_checked(z, w, 3, TruncationPolicy(2, 10))
    assert tail < 1e-6


@pytest.mark.parametrize("policy", [None, TruncationPolicy(3, 6)])
def test_gram_positive(rng, policy):
    pts = sample_admissible(rng, 25, 3, 2)
    G = gram_matrix(pts, 2, policy)
    assert np.allclose(G, G.conj().T)
    assert np.linalg.eigvalsh(G)[0] >= -1e-10 * np.trace(G).real


def test_samples_are_admissible(rng):
    for z in sample_admissible(rng, 50, 4, 3):
        assert membership_Kk(z, 3)
