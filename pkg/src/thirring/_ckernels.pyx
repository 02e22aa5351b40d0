# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled gate kernels over bit-masked amplitude strides."""

from libc.math cimport cos, sin

import numpy as np
cimport numpy as cnp

cnp.import_array()


def apply_givens(double complex[::1] state, int q, double theta):
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t lo = (<Py_ssize_t>1) << q
    cdef Py_ssize_t block = lo << 2
    cdef Py_ssize_t base, j, i1, i2
    cdef double c = cos(theta), s = sin(theta)
    cdef double complex a, b
    with nogil:
        base = 0
        while base < dim:
            for j in range(lo):
                i1 = base + lo + j
                i2 = base + 2 * lo + j
                a = state[i1]
                b = state[i2]
                state[i1] = c * a + s * b
                state[i2] = c * b - s * a
            base += block


def apply_phase(double complex[::1] state, int q, double beta):
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t lo = (<Py_ssize_t>1) << q
    cdef Py_ssize_t base, j
    cdef double complex ph = cos(beta) + 1j * sin(beta)
    with nogil:
        base = 0
        while base < dim:
            for j in range(lo):
                state[base + lo + j] = state[base + lo + j] * ph
            base += 2 * lo


def apply_pauli(double complex[::1] state, int q, str kind):
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t lo = (<Py_ssize_t>1) << q
    cdef Py_ssize_t base, j, i0, i1
    cdef double complex a, b
    cdef int code
    if kind == "X":
        code = 0
    elif kind == "Y":
        code = 1
    elif kind == "Z":
        code = 2
    else:
        raise ValueError(f"unknown Pauli {kind!r}")
    with nogil:
        base = 0
        while base < dim:
            for j in range(lo):
                i0 = base + j
                i1 = base + lo + j
                a = state[i0]
                b = state[i1]
                if code == 0:
                    state[i0] = b
                    state[i1] = a
                elif code == 1:
                    state[i0] = -1j * b
                    state[i1] = 1j * a
                else:
                    state[i1] = -b
            base += 2 * lo


def apply_ladder(double complex[::1] state, int q, str kind):
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t lo = (<Py_ssize_t>1) << q
    cdef Py_ssize_t base, j, i0, i1
    cdef bint raise_ = kind == "+"
    if kind not in ("+", "-"):
        raise ValueError(f"unknown ladder operator {kind!r}")
    with nogil:
        base = 0
        while base < dim:
            for j in range(lo):
                i0 = base + j
                i1 = base + lo + j
                if raise_:
                    state[i0] = state[i1]
                    state[i1] = 0
                else:
                    state[i1] = state[i0]
                    state[i0] = 0
            base += 2 * lo


def apply_diagonal_phase(double complex[::1] state, double complex[::1] phases):
    cdef Py_ssize_t i, dim = state.shape[0]
    with nogil:
        for i in range(dim):
            state[i] = state[i] * phases[i]
