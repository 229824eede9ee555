# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Wick-product and Wick-convolution kernels.

Same contracts as :mod:`wicksys._kernels_py`; selected at import by
:mod:`wicksys._backend`.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef bint _loss(const double complex[:, ::1] h, const double complex[:, ::1] u,
                const Py_ssize_t[:, ::1] table):
    cdef Py_ssize_t B = table.shape[0]
    cdef Py_ssize_t i, j, n
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] hnz = np.zeros(B, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] unz = np.zeros(B, dtype=np.uint8)
    for n in range(h.shape[0]):
        for i in range(B):
            if h[n, i] != 0:
                hnz[i] = 1
    for n in range(u.shape[0]):
        for j in range(B):
            if u[n, j] != 0:
                unz[j] = 1
    for i in range(B):
        if not hnz[i]:
            continue
        for j in range(B):
            if unz[j] and table[i, j] < 0:
                return True
    return False


_COMPRESSED = {}


def _compress(table):
    """CSR form of the valid entries of the addition table: row ``i`` holds the
    pairs ``(j, table[i, j])`` with ``table[i, j] >= 0``.

    Cached per table object; the cache keeps the table alive so ids stay unique.
    """
    hit = _COMPRESSED.get(id(table))
    if hit is not None and hit[0] is table:
        return hit[1]
    if len(_COMPRESSED) >= 64:
        _COMPRESSED.clear()
    out = _compress_uncached(table)
    _COMPRESSED[id(table)] = (table, out)
    return out


def _compress_uncached(table):
    t = np.ascontiguousarray(table, dtype=np.intp)
    ii, jj = np.nonzero(t >= 0)
    indptr = np.zeros(t.shape[0] + 1, dtype=np.intp)
    np.cumsum(np.bincount(ii, minlength=t.shape[0]), out=indptr[1:])
    return t, indptr, np.ascontiguousarray(jj, dtype=np.intp), np.ascontiguousarray(t[ii, jj], dtype=np.intp)


def wick_convolve_dense(h, u, table):
    cdef const double complex[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double complex[:, ::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    t_full, indptr, jidx, tidx = _compress(table)
    cdef const Py_ssize_t[::1] ptr = indptr
    cdef const Py_ssize_t[::1] js = jidx
    cdef const Py_ssize_t[::1] ts = tidx
    cdef Py_ssize_t Nh = hv.shape[0], Nu = uv.shape[0], B = hv.shape[1]
    out = np.zeros((Nh + Nu - 1, B), dtype=np.complex128)
    cdef double complex[:, ::1] y = out
    cdef Py_ssize_t d, m, i, p
    cdef double complex c
    with nogil:
        for d in range(Nh):
            for i in range(B):
                c = hv[d, i]
                if c == 0:
                    continue
                for m in range(Nu):
                    for p in range(ptr[i], ptr[i + 1]):
                        y[d + m, ts[p]] += c * uv[m, js[p]]
    return out, bool(_loss(hv, uv, t_full))


def wick_correlate_dense(h, y, table, Py_ssize_t n_out):
    cdef const double complex[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double complex[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    _, indptr, jidx, tidx = _compress(table)
    cdef const Py_ssize_t[::1] ptr = indptr
    cdef const Py_ssize_t[::1] js = jidx
    cdef const Py_ssize_t[::1] ts = tidx
    cdef Py_ssize_t Nh = hv.shape[0], Ny = yv.shape[0], B = hv.shape[1]
    out = np.zeros((n_out, B), dtype=np.complex128)
    cdef double complex[:, ::1] x = out
    cdef Py_ssize_t d, m, i, p
    cdef double complex c
    with nogil:
        for d in range(Nh):
            for i in range(B):
                c = hv[d, i]
                if c == 0:
                    continue
                c = c.conjugate()
                for m in range(n_out):
                    if m + d >= Ny:
                        break
                    for p in range(ptr[i], ptr[i + 1]):
                        x[m, js[p]] += c * yv[m + d, ts[p]]
    return out


def wick_dense(f, g, table):
    f = np.ascontiguousarray(f, dtype=np.complex128).reshape(1, -1)
    g = np.ascontiguousarray(g, dtype=np.complex128).reshape(1, -1)
    y, lost = wick_convolve_dense(f, g, table)
    return y[0], lost
