# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled chain recursions; signatures mirror _kernels_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log

BACKEND = "cython"


def forward(const double[::1] start, const double[:, :, ::1] edges):
    cdef Py_ssize_t n_pos = edges.shape[0] + 1
    cdef Py_ssize_t n_states = start.shape[0]
    alpha_arr = np.empty((n_pos, n_states))
    cdef double[:, ::1] alpha = alpha_arr
    cdef Py_ssize_t t, a, b
    cdef double mx, acc, v
    for b in range(n_states):
        alpha[0, b] = start[b]
    for t in range(1, n_pos):
        for b in range(n_states):
            mx = -INFINITY
            for a in range(n_states):
                v = alpha[t - 1, a] + edges[t - 1, a, b]
                if v > mx:
                    mx = v
            if mx == -INFINITY:
                alpha[t, b] = -INFINITY
            else:
                acc = 0.0
                for a in range(n_states):
                    v = alpha[t - 1, a] + edges[t - 1, a, b]
                    if v > -INFINITY:
                        acc += exp(v - mx)
                alpha[t, b] = mx + log(acc)
    return alpha_arr


def backward(const double[::1] end_mask, const double[:, :, ::1] edges):
    cdef Py_ssize_t n_pos = edges.shape[0] + 1
    cdef Py_ssize_t n_states = end_mask.shape[0]
    beta_arr = np.empty((n_pos, n_states))
    cdef double[:, ::1] beta = beta_arr
    cdef Py_ssize_t t, a, b
    cdef double mx, acc, v
    for a in range(n_states):
        beta[n_pos - 1, a] = end_mask[a]
    for t in range(n_pos - 2, -1, -1):
        for a in range(n_states):
            mx = -INFINITY
            for b in range(n_states):
                v = edges[t, a, b] + beta[t + 1, b]
                if v > mx:
                    mx = v
            if mx == -INFINITY:
                beta[t, a] = -INFINITY
            else:
                acc = 0.0
                for b in range(n_states):
                    v = edges[t, a, b] + beta[t + 1, b]
                    if v > -INFINITY:
                        acc += exp(v - mx)
                beta[t, a] = mx + log(acc)
    return beta_arr


def viterbi_path(const double[::1] start, const double[:, :, ::1] edges, const double[::1] end_mask):
    cdef Py_ssize_t n_pos = edges.shape[0] + 1
    cdef Py_ssize_t n_states = start.shape[0]
    delta_arr = np.empty(n_states)
    next_arr = np.empty(n_states)
    back_arr = np.empty((n_pos - 1, n_states), dtype=np.int32)
    path_arr = np.empty(n_pos, dtype=np.int32)
    cdef double[::1] delta = delta_arr
    cdef double[::1] nxt = next_arr
    cdef int[:, ::1] back = back_arr
    cdef int[::1] path = path_arr
    cdef Py_ssize_t t, a, b, arg, last
    cdef double best, v, score
    for a in range(n_states):
        delta[a] = start[a]
    for t in range(1, n_pos):
        for b in range(n_states):
            best = -INFINITY
            arg = 0
            for a in range(n_states):
                v = delta[a] + edges[t - 1, a, b]
                if v > best:  # strict: ties keep the lowest-ordered state
                    best = v
                    arg = a
            nxt[b] = best
            back[t - 1, b] = <int> arg
        delta[:] = nxt
    best = -INFINITY
    last = 0
    for a in range(n_states):
        v = delta[a] + end_mask[a]
        if v > best:
            best = v
            last = a
    score = best
    path[n_pos - 1] = <int> last
    for t in range(n_pos - 2, -1, -1):
        path[t] = back[t, path[t + 1]]
    return path_arr, score
