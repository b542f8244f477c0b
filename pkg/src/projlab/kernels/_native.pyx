# cython: language_level=3
"""Compiled kernels: per-point loops for the chaos-game update and hash-set
box-occupancy counts.  Arithmetic matches the numpy backend exactly."""

import numpy as np

from libc.math cimport floor


def apply_similarities(double[:, ::1] points, double[::1] ratios,
                       double[::1] cosines, double[::1] sines,
                       double[::1] tx, double[::1] ty, long long[::1] idx):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t j
    cdef long long i
    cdef double x, y, r, c, s
    out_arr = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for j in range(n):
        i = idx[j]
        x = points[j, 0]
        y = points[j, 1]
        r = ratios[i]
        c = cosines[i]
        s = sines[i]
        out[j, 0] = r * (c * x - s * y) + tx[i]
        out[j, 1] = r * (s * x + c * y) + ty[i]
    return out_arr


cdef inline unsigned long long _mix(unsigned long long z) nogil:
    # splitmix64 finalizer
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef Py_ssize_t _insert_count(long long[::1] keys, unsigned char[::1] used,
                              long long key, unsigned long long mask) nogil:
    cdef unsigned long long h = _mix(<unsigned long long>key) & mask
    while used[h]:
        if keys[h] == key:
            return 0
        h = (h + 1) & mask
    used[h] = 1
    keys[h] = key
    return 1


def count_boxes_1d(double[::1] values, double eps):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t cap = 1
    while cap < 2 * n:
        cap <<= 1
    keys_arr = np.empty(cap, dtype=np.int64)
    used_arr = np.zeros(cap, dtype=np.uint8)
    cdef long long[::1] keys = keys_arr
    cdef unsigned char[::1] used = used_arr
    cdef unsigned long long mask = cap - 1
    cdef Py_ssize_t j, count = 0
    cdef long long key
    for j in range(n):
        key = <long long>floor(values[j] / eps)
        count += _insert_count(keys, used, key, mask)
    return count


def count_boxes_2d(double[:, ::1] points, double eps):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t cap = 1
    while cap < 2 * n:
        cap <<= 1
    keys_arr = np.empty(cap, dtype=np.int64)
    used_arr = np.zeros(cap, dtype=np.uint8)
    cdef long long[::1] keys = keys_arr
    cdef unsigned char[::1] used = used_arr
    cdef unsigned long long mask = cap - 1
    cdef Py_ssize_t j, count = 0
    cdef long long kx, ky, key
    for j in range(n):
        kx = <long long>floor(points[j, 0] / eps)
        ky = <long long>floor(points[j, 1] / eps)
        # injective for |box indices| < 2^31, far beyond the scales used here
        key = (kx << 32) | (ky & <long long>0xFFFFFFFF)
        count += _insert_count(keys, used, key, mask)
    return count
