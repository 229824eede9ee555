import os
import subprocess
import sys

import numpy as np
import pytest

from wicksys._backend import backends
from wicksys.multiindex import TruncationPolicy


def _rand(rng, shape, density=0.5):
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    x[rng.random(shape) > density] = 0
    return x


def _reference_convolve(h, u, table):
    # plain loops, no matrices
    Nh, B = h.shape
    y = np.zeros((Nh + len(u) - 1, B), dtype=complex)
    lost = False
    for d in range(Nh):
        for m in range(len(u)):
            for i in range(B):
                for j in range(B):
                    if h[d, i] == 0 or u[m, j] == 0:
                        continue
                    t = table[i, j]
                    if t < 0:
                        lost = True
                    else:
                        y[d + m, t] += h[d, i] * u[m, j]
    return y, lost


def test_convolve_matches_loops(rng, kernels):
    table = TruncationPolicy(2, 3).basis().add_table
    B = table.shape[0]
    h, u = _rand(rng, (3, B)), _rand(rng, (4, B))
    y, lost = kernels.wick_convolve_dense(h, u, table)
    ref, ref_lost = _reference_convolve(h, u, table)
    assert np.allclose(y, ref, rtol=1e-13, atol=1e-13)
    assert lost == ref_lost


def test_correlate_is_adjoint(rng, kernels):
    table = TruncationPolicy(3, 3).basis().add_table
    B = table.shape[0]
    h, u = _rand(rng, (4, B)), _rand(rng, (6, B))
    y = _rand(rng, (9, B), 1.0)
    conv, _ = kernels.wick_convolve_dense(h, u, table)
    x = kernels.wick_correlate_dense(h, y, table, 6)
    assert abs(np.vdot(y, conv) - np.vdot(x, u)) <= 1e-12 * abs(np.vdot(y, conv))


def test_no_loss_reported_inside_slice(kernels):
    table = TruncationPolicy(2, 4).basis().add_table
    h = np.zeros((1, table.shape[0]), complex)
    h[0, 0] = 2.0
    u = np.ones((2, table.shape[0]), complex)
    y, lost = kernels.wick_convolve_dense(h, u, table)
    assert not lost and np.array_equal(y, 2 * u)


def test_backends_agree(rng):
    mods = backends()
    if len(mods) < 2:
        pytest.skip("compiled core not built")
    table = TruncationPolicy(4, 4).basis().add_table
    B = table.shape[0]
    h, u = _rand(rng, (5, B), 0.3), _rand(rng, (7, B), 0.3)
    a, la = mods["cython"].wick_convolve_dense(h, u, table)
    b, lb = mods["python"].wick_convolve_dense(h, u, table)
    assert la == lb and np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(b))
    a = mods["cython"].wick_correlate_dense(h, a, table, 7)
    b = mods["python"].wick_correlate_dense(h, b, table, 7)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_env_forces_fallback():
    code = "import wicksys; print(wicksys.BACKEND)"
    env = dict(os.environ, WICKSYS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
