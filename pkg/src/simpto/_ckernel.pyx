# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels. Must stay bit-identical with _pykernel."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport qsort, malloc, free

cnp.import_array()

BACKEND = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TO_UNIT = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t derive(uint64_t key, uint64_t index) noexcept nogil:
    return mix64((key ^ index) + GAMMA)


cdef inline double uniform_at(uint64_t key, uint64_t j) noexcept nogil:
    return <double>(mix64(key + (j + 1) * GAMMA) >> 11) * TO_UNIT


cdef struct Keyed:
    double neg_ratio
    int64_t idx


cdef int cmp_keyed(const void* a, const void* b) noexcept nogil:
    cdef const Keyed* x = <const Keyed*>a
    cdef const Keyed* y = <const Keyed*>b
    if x.neg_ratio < y.neg_ratio:
        return -1
    if x.neg_ratio > y.neg_ratio:
        return 1
    if x.idx < y.idx:
        return -1
    if x.idx > y.idx:
        return 1
    return 0


cdef inline int64_t predict_one(int64_t a, const double[:] tpr, const double[:] fpr,
                                int64_t positive, int64_t k, uint64_t key,
                                int64_t* degenerate) noexcept nogil:
    cdef double r = uniform_at(key, 0)
    cdef double r2, s, q
    cdef int64_t o, m, pick, last
    if positive >= 0:
        if a == positive:
            return positive if r <= tpr[positive] else 1 - positive
        return (1 - positive) if r <= 1.0 - fpr[positive] else positive
    r2 = uniform_at(key, 1)
    if r <= tpr[a]:
        return a
    s = 0.0
    for o in range(k):
        if o != a:
            s += fpr[o]
    if not s > 0:
        degenerate[0] += 1
        m = k - 1
        pick = <int64_t>(r2 * m)
        if pick > m - 1:
            pick = m - 1
        return pick if pick < a else pick + 1
    q = 0.0
    last = a
    for o in range(k):
        if o == a:
            continue
        last = o
        q += fpr[o] / s
        if r2 <= q:
            return o
    return last


def simulate_labels(actual, tpr, fpr, int64_t positive, uint64_t rep_key):
    cdef const int64_t[:] act = np.ascontiguousarray(actual, dtype=np.int64)
    cdef const double[:] t = np.ascontiguousarray(tpr, dtype=np.float64)
    cdef const double[:] f = np.ascontiguousarray(fpr, dtype=np.float64)
    cdef Py_ssize_t n = act.shape[0], i
    cdef int64_t k = t.shape[0]
    cdef int64_t degenerate = 0
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[:] pred = out
    with nogil:
        for i in range(n):
            pred[i] = predict_one(act[i], t, f, positive, k, derive(rep_key, <uint64_t>i), &degenerate)
    return out, degenerate


def simulate_cell(actual, tpr, fpr, int64_t positive, uint64_t cell_key, Py_ssize_t reps,
                  durations, weights):
    cdef const int64_t[:] act = np.ascontiguousarray(actual, dtype=np.int64)
    cdef const double[:] t = np.ascontiguousarray(tpr, dtype=np.float64)
    cdef const double[:] f = np.ascontiguousarray(fpr, dtype=np.float64)
    cdef const double[:] p = np.ascontiguousarray(durations, dtype=np.float64)
    cdef const double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = act.shape[0], i, rep, step
    cdef int64_t k = t.shape[0]
    cdef int64_t degenerate = 0
    cdef uint64_t rep_key
    cdef int64_t c, best, j
    cdef double clock, total, key_best, key_c
    conf_arr = np.zeros((reps, k, k), dtype=np.int64)
    tot_arr = np.empty(reps, dtype=np.float64)
    pred_arr = np.empty(n, dtype=np.int64)
    # WSPT order restricted to jobs predicted as class c does not depend on
    # the predictions: sort once per class, then k-way merge per repetition
    order_arr = np.empty((k, n), dtype=np.int64)
    ratio_arr = np.empty((k, n), dtype=np.float64)
    head_arr = np.empty(k, dtype=np.int64)
    cdef int64_t[:, :, :] conf = conf_arr
    cdef double[:] totals = tot_arr
    cdef int64_t[:] pred = pred_arr
    cdef int64_t[:, :] order = order_arr
    cdef double[:, :] neg_ratio = ratio_arr
    cdef int64_t[:] head = head_arr
    cdef Keyed* keyed = <Keyed*>malloc(n * sizeof(Keyed)) if n > 0 else NULL
    if n > 0 and keyed == NULL:
        raise MemoryError()
    try:
        with nogil:
            for c in range(k):
                for i in range(n):
                    keyed[i].neg_ratio = -(w[c] / p[i])
                    keyed[i].idx = i
                qsort(keyed, n, sizeof(Keyed), cmp_keyed)
                for i in range(n):
                    order[c, i] = keyed[i].idx
                    neg_ratio[c, i] = keyed[i].neg_ratio
            for rep in range(reps):
                rep_key = derive(cell_key, <uint64_t>rep)
                for i in range(n):
                    c = predict_one(act[i], t, f, positive, k, derive(rep_key, <uint64_t>i), &degenerate)
                    pred[i] = c
                    conf[rep, act[i], c] += 1
                for c in range(k):
                    head[c] = 0
                    while head[c] < n and pred[order[c, head[c]]] != c:
                        head[c] += 1
                clock = 0.0
                total = 0.0
                for step in range(n):
                    best = -1
                    key_best = 0.0
                    for c in range(k):
                        if head[c] >= n:
                            continue
                        key_c = neg_ratio[c, head[c]]
                        if best < 0 or key_c < key_best or (
                            key_c == key_best and order[c, head[c]] < order[best, head[best]]
                        ):
                            best = c
                            key_best = key_c
                    j = order[best, head[best]]
                    clock = clock + p[j]
                    total = total + w[act[j]] * clock
                    head[best] += 1
                    while head[best] < n and pred[order[best, head[best]]] != best:
                        head[best] += 1
                totals[rep] = total
    finally:
        free(keyed)
    return conf_arr, tot_arr, degenerate
