# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled distress-cascade kernel; mirrors _cascade_py.cascade exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef unsigned char UNDISTRESSED = 0
cdef unsigned char DISTRESSED = 1
cdef unsigned char INACTIVE = 2


def cascade(double[:, ::1] W, double[::1] h0, unsigned char[::1] distressed0):
    """Synchronous distress propagation; see the numpy kernel for semantics."""
    cdef Py_ssize_t b = W.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h_arr = np.empty(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] states_arr = np.empty(b, dtype=np.uint8)
    cdef double[::1] h = h_arr
    cdef unsigned char[::1] states = states_arr
    cdef double[::1] delta = np.empty(b, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef int rounds = 0
    cdef bint any_distressed = False
    cdef double hj, hi

    for i in range(b):
        h[i] = h0[i]
        if distressed0[i]:
            states[i] = DISTRESSED
            any_distressed = True
        else:
            states[i] = UNDISTRESSED

    while any_distressed:
        for i in range(b):
            delta[i] = 0.0
        # transmissions use h values from the start of the round
        for j in range(b):
            if states[j] == DISTRESSED:
                hj = h[j]
                for i in range(b):
                    delta[i] += W[j, i] * hj
        any_distressed = False
        for i in range(b):
            hi = h[i] + delta[i]
            if hi > 1.0:
                hi = 1.0
            if states[i] == DISTRESSED:
                states[i] = INACTIVE
            elif states[i] == UNDISTRESSED and hi > 0.0:
                states[i] = DISTRESSED
                any_distressed = True
            h[i] = hi
        rounds += 1

    return h_arr, states_arr, rounds
