import math

import numpy as np
import pytest

from wicksys.vage import DivergenceError, vage_bounds, vage_constant, vage_direct_sum, vage_partial_products


def test_q2_is_half_pi():
    # Euler's sine product: prod (1 - 1/(4 j^2)) = 2 / pi
    assert abs(vage_constant(2, 1e-9) - math.pi / 2) <= 1e-9
    lo, hi = vage_bounds(2.0, 1e-10)
    assert lo <= math.pi / 2 <= hi


def test_large_q_tends_to_one():
    a = vage_constant(20)
    assert 1 < a < 1 + 1e-5


@pytest.mark.parametrize("q", [1.0, 0.5, -2.0])
def test_divergent_orders(q):
    with pytest.raises(DivergenceError):
        vage_constant(q)


def test_partial_products_increase_to_limit():
    p = vage_partial_products(2, 2000)
    assert np.all(np.diff(p) > 0)
    assert p[-1] < math.pi / 2
    assert math.pi / 2 - p[-1] < 1e-3


@pytest.mark.parametrize("q", [2.0, 3.0, 4.5])
def test_direct_sum_is_lower_bound(q):
    A = vage_constant(q, 1e-12)
    prev = 0.0
    for J, D in [(2, 3), (4, 4), (6, 6)]:
        s = vage_direct_sum(q, J, D)
        assert prev <= s <= A
        prev = s
    # at q = 3 the box sum is already close
    if q >= 3:
        assert A - prev < 1e-2


def test_tolerance_is_honoured():
    lo, hi = vage_bounds(3.0, 1e-11)
    assert 0 <= hi - lo <= 1e-11
