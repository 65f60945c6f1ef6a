# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled n-gram precision counting (hot path of the agreement filter).

Counts for one order are computed by packing each n-gram into a uint64
(four 16-bit token ids), sorting the packed arrays, and merging. Callers
guarantee token ids < 2**16 and order <= 4; the Python wrapper falls back
to the pure backend otherwise.
"""

from libc.stdlib cimport malloc, free

BACKEND_NAME = "cython"

MAX_PACKED_ORDER = 4
MAX_TOKEN_ID = 0xFFFF


cdef void _sort_u64(unsigned long long* a, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # In-place quicksort with insertion sort below a small cutoff.
    cdef Py_ssize_t i, j
    cdef unsigned long long pivot, tmp
    while hi - lo > 16:
        pivot = a[lo + (hi - lo) // 2]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
        if j - lo < hi - i:
            _sort_u64(a, lo, j)
            lo = i
        else:
            _sort_u64(a, i, hi)
            hi = j
    for i in range(lo + 1, hi + 1):
        tmp = a[i]
        j = i - 1
        while j >= lo and a[j] > tmp:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = tmp


cdef long _clipped_matches(unsigned long long* hyp, Py_ssize_t nh,
                           unsigned long long* ref, Py_ssize_t nr) noexcept nogil:
    # Both arrays sorted; sum over distinct values of min(count_hyp, count_ref).
    cdef Py_ssize_t i = 0, j = 0, ci, cj
    cdef long matched = 0
    cdef unsigned long long v
    while i < nh and j < nr:
        if hyp[i] < ref[j]:
            i += 1
        elif hyp[i] > ref[j]:
            j += 1
        else:
            v = hyp[i]
            ci = 0
            while i < nh and hyp[i] == v:
                ci += 1
                i += 1
            cj = 0
            while j < nr and ref[j] == v:
                cj += 1
                j += 1
            matched += ci if ci < cj else cj
    return matched


def precision_stats(list hyp_ids, list ref_ids, int max_order):
    """Mirror of the pure backend: (matched, total) per available order."""
    cdef Py_ssize_t hyp_len = len(hyp_ids)
    cdef Py_ssize_t ref_len = len(ref_ids)
    cdef Py_ssize_t i
    cdef int order
    if max_order > MAX_PACKED_ORDER:
        raise ValueError("compiled backend supports orders up to 4")

    cdef unsigned long long* hyp = <unsigned long long*> malloc(
        (hyp_len if hyp_len > 0 else 1) * sizeof(unsigned long long))
    cdef unsigned long long* ref = <unsigned long long*> malloc(
        (ref_len if ref_len > 0 else 1) * sizeof(unsigned long long))
    cdef unsigned long long* hyp_grams = <unsigned long long*> malloc(
        (hyp_len if hyp_len > 0 else 1) * sizeof(unsigned long long))
    cdef unsigned long long* ref_grams = <unsigned long long*> malloc(
        (ref_len if ref_len > 0 else 1) * sizeof(unsigned long long))
    if hyp == NULL or ref == NULL or hyp_grams == NULL or ref_grams == NULL:
        free(hyp); free(ref); free(hyp_grams); free(ref_grams)
        raise MemoryError()

    cdef unsigned long long packed
    cdef Py_ssize_t nh, nr, k
    cdef long matched
    stats = []
    try:
        for i in range(hyp_len):
            hyp[i] = <unsigned long long> hyp_ids[i]
        for i in range(ref_len):
            ref[i] = <unsigned long long> ref_ids[i]

        for order in range(1, max_order + 1):
            nh = hyp_len - order + 1
            if nh < 1:
                break
            nr = ref_len - order + 1
            with nogil:
                for i in range(nh):
                    packed = 0
                    for k in range(order):
                        packed = (packed << 16) | hyp[i + k]
                    hyp_grams[i] = packed
                matched = 0
                if nr >= 1:
                    for i in range(nr):
                        packed = 0
                        for k in range(order):
                            packed = (packed << 16) | ref[i + k]
                        ref_grams[i] = packed
                    _sort_u64(hyp_grams, 0, nh - 1)
                    _sort_u64(ref_grams, 0, nr - 1)
                    matched = _clipped_matches(hyp_grams, nh, ref_grams, nr)
            stats.append((matched, nh))
    finally:
        free(hyp)
        free(ref)
        free(hyp_grams)
        free(ref_grams)
    return stats
