"""Pure numpy kernels; the reference semantics for the compiled core.

All arrays are dense over a fixed :class:`BasisEnumeration`. ``table`` is the
basis addition table (``-1`` where the sum leaves the slice).
"""

import numpy as np


def _multiplier(row, table):
    """Unweighted matrix of ``u -> row (Wick) u`` on the slice."""
    B = table.shape[0]
    M = np.zeros((B, B), dtype=np.complex128)
    nz = np.flatnonzero(row)
    if nz.size:
        tab = table[nz]
        ii, jj = np.nonzero(tab >= 0)
        np.add.at(M, (tab[ii, jj], jj), row[nz][ii])
    return M


def _loss(h, u, table):
    hi = np.flatnonzero(np.any(h != 0, axis=0))
    uj = np.flatnonzero(np.any(u != 0, axis=0))
    if not hi.size or not uj.size:
        return False
    return bool(np.any(table[np.ix_(hi, uj)] < 0))


def wick_convolve_dense(h, u, table):
    """``y[n] = sum_m h[n-m] (Wick) u[m]`` for rows starting at offset 0.

    Returns ``(y, lost)`` with ``y`` of shape ``(len(h) + len(u) - 1, B)``.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    Nh, B = h.shape
    Nu = u.shape[0]
    y = np.zeros((Nh + Nu - 1, B), dtype=np.complex128)
    for d in range(Nh):
        if not h[d].any():
            continue
        y[d:d + Nu] += u @ _multiplier(h[d], table).T
    return y, _loss(h, u, table)


def wick_correlate_dense(h, y, table, n_out):
    """Adjoint of :func:`wick_convolve_dense` in the unweighted coordinates.

    ``x[m, b] = sum_d sum_t conj(M_d[t, b]) y[m + d, t]`` for ``m < n_out``.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    Nh, B = h.shape
    Ny = y.shape[0]
    x = np.zeros((n_out, B), dtype=np.complex128)
    for d in range(Nh):
        if not h[d].any():
            continue
        stop = min(n_out, Ny - d)
        if stop <= 0:
            continue
        x[:stop] += y[d:d + stop] @ _multiplier(h[d], table).conj()
    return x


def wick_dense(f, g, table):
    """Single Wick product of two dense coefficient vectors."""
    y, lost = wick_convolve_dense(np.asarray(f)[None, :], np.asarray(g)[None, :], table)
    return y[0], lost
