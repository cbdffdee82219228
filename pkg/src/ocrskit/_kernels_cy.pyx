# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled selection kernels (hot per-trial simulation loops)."""

import numpy as np

BACKEND = "cython"


def select_count_policy(active, thr, double q, double demote_b,
                        accept_coin=None, demote_coin=None):
    """See ``_kernels_py.select_count_policy`` for the contract."""
    cdef const unsigned char[:, ::1] act = np.ascontiguousarray(active, dtype=np.uint8)
    cdef const double[::1] th = np.ascontiguousarray(thr, dtype=np.float64)
    cdef Py_ssize_t trials = act.shape[0]
    cdef Py_ssize_t n = act.shape[1]
    out_arr = np.zeros((trials, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef const double[:, ::1] ac = None
    cdef const double[:, ::1] dc = None
    cdef bint use_q = q < 1.0
    cdef bint use_d = demote_b < 1.0
    if use_q:
        ac = np.ascontiguousarray(accept_coin, dtype=np.float64)
    if use_d:
        dc = np.ascontiguousarray(demote_coin, dtype=np.float64)
    cdef Py_ssize_t t, i
    cdef long count
    cdef bint a
    for t in range(trials):
        count = 0
        for i in range(n):
            a = act[t, i] != 0
            if a and use_d:
                a = dc[t, i] < demote_b
            if a and (count + 1 <= th[i]):
                if use_q:
                    a = ac[t, i] < q
                if a:
                    out[t, i] = 1
                    count += 1
    return out_arr


def select_partition_policy(active, part_id, quota, double demote_b,
                            demote_coin=None):
    """See ``_kernels_py.select_partition_policy`` for the contract."""
    cdef const unsigned char[:, ::1] act = np.ascontiguousarray(active, dtype=np.uint8)
    cdef const long long[::1] pid = np.ascontiguousarray(part_id, dtype=np.int64)
    cdef const long long[::1] qu = np.ascontiguousarray(quota, dtype=np.int64)
    cdef Py_ssize_t trials = act.shape[0]
    cdef Py_ssize_t n = act.shape[1]
    cdef Py_ssize_t nparts = qu.shape[0]
    out_arr = np.zeros((trials, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef const double[:, ::1] dc = None
    cdef bint use_d = demote_b < 1.0
    if use_d:
        dc = np.ascontiguousarray(demote_coin, dtype=np.float64)
    counts_arr = np.zeros(nparts, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t t, i, p
    cdef bint a
    for t in range(trials):
        for p in range(nparts):
            counts[p] = 0
        for i in range(n):
            a = act[t, i] != 0
            if a and use_d:
                a = dc[t, i] < demote_b
            if a:
                p = pid[i]
                if counts[p] < qu[p]:
                    out[t, i] = 1
                    counts[p] += 1
    return out_arr
