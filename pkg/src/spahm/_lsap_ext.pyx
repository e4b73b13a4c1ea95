# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shortest augmenting path solver (see ``_lsap_py`` for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


cdef Py_ssize_t _augment(const double[:, ::1] cost, Py_ssize_t cur_row,
                         double[::1] u, double[::1] v, Py_ssize_t[::1] path,
                         Py_ssize_t[::1] row4col, double[::1] spc,
                         char[::1] sr, char[::1] sc, Py_ssize_t[::1] remaining,
                         double* p_min_val) except -2:
    cdef Py_ssize_t nc = cost.shape[1]
    cdef Py_ssize_t num_remaining = nc
    cdef Py_ssize_t it, j, index, sink = -1
    cdef Py_ssize_t i = cur_row
    cdef double min_val = 0.0, lowest, r

    for it in range(nc):
        remaining[it] = nc - it - 1
        spc[it] = INFINITY
        sc[it] = 0
    for it in range(sr.shape[0]):
        sr[it] = 0

    while sink == -1:
        index = -1
        lowest = INFINITY
        sr[i] = 1
        for it in range(num_remaining):
            j = remaining[it]
            r = min_val + cost[i, j] - u[i] - v[j]
            if r < spc[j]:
                path[j] = i
                spc[j] = r
            if spc[j] < lowest or (spc[j] == lowest and row4col[j] == -1):
                lowest = spc[j]
                index = it
        min_val = lowest
        if min_val == INFINITY or index == -1:
            raise ValueError("cost matrix admits no finite assignment")
        j = remaining[index]
        if row4col[j] == -1:
            sink = j
        else:
            i = row4col[j]
        sc[j] = 1
        num_remaining -= 1
        remaining[index] = remaining[num_remaining]

    p_min_val[0] = min_val
    return sink


def solve_transposed(cost_in):
    """Assign every row of ``cost`` (n_rows <= n_cols) to a distinct column."""
    cdef const double[:, ::1] cost = np.ascontiguousarray(cost_in, dtype=np.float64)
    cdef Py_ssize_t nr = cost.shape[0], nc = cost.shape[1]
    cdef double[::1] u = np.zeros(nr)
    cdef double[::1] v = np.zeros(nc)
    cdef double[::1] spc = np.empty(nc)
    cdef Py_ssize_t[::1] path = np.full(nc, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] col4row = np.full(nr, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] row4col = np.full(nc, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] remaining = np.empty(nc, dtype=np.intp)
    cdef char[::1] sr = np.zeros(nr, dtype=np.int8)
    cdef char[::1] sc = np.zeros(nc, dtype=np.int8)
    cdef Py_ssize_t cur_row, i, j, sink, tmp
    cdef double min_val = 0.0

    for cur_row in range(nr):
        sink = _augment(cost, cur_row, u, v, path, row4col, spc, sr, sc,
                        remaining, &min_val)
        u[cur_row] += min_val
        for i in range(nr):
            if sr[i] and i != cur_row:
                u[i] += min_val - spc[col4row[i]]
        for j in range(nc):
            if sc[j]:
                v[j] -= min_val - spc[j]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur_row:
                break
    return np.asarray(col4row, dtype=np.int64)
