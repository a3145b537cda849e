# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled relation-attention kernels (float64).

Fuses the add-then-contract loops that the numpy path materializes as
(heads, N, N, d_head) temporaries. Inputs may be strided views (the model
passes head-split transposes whose last axis is still contiguous).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def rel_attn_scores(double[:, :, :] q, double[:, :, :] k, double[:, :, :, :] gamma):
    cdef Py_ssize_t H = q.shape[0], N = q.shape[1], D = q.shape[2]
    out_arr = np.empty((H, N, N), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t h, i, j, d
    cdef double acc
    for h in range(H):
        for i in range(N):
            for j in range(N):
                acc = 0.0
                for d in range(D):
                    acc += q[h, i, d] * (k[h, j, d] + gamma[h, i, j, d])
                out[h, i, j] = acc
    return out_arr


def rel_attn_scores_backward(
    double[:, :, :] g,
    double[:, :, :] q,
    double[:, :, :] k,
    double[:, :, :, :] gamma,
):
    cdef Py_ssize_t H = q.shape[0], N = q.shape[1], D = q.shape[2]
    dq_arr = np.zeros((H, N, D), dtype=np.float64)
    dk_arr = np.zeros((H, N, D), dtype=np.float64)
    dgamma_arr = np.empty((H, N, N, D), dtype=np.float64)
    cdef double[:, :, ::1] dq = dq_arr
    cdef double[:, :, ::1] dk = dk_arr
    cdef double[:, :, :, ::1] dgamma = dgamma_arr
    cdef Py_ssize_t h, i, j, d
    cdef double gv
    for h in range(H):
        for i in range(N):
            for j in range(N):
                gv = g[h, i, j]
                for d in range(D):
                    dq[h, i, d] += gv * (k[h, j, d] + gamma[h, i, j, d])
                    dk[h, j, d] += gv * q[h, i, d]
                    dgamma[h, i, j, d] = gv * q[h, i, d]
    return dq_arr, dk_arr, dgamma_arr


def rel_attn_context(double[:, :, :] a, double[:, :, :] v, double[:, :, :, :] gamma):
    cdef Py_ssize_t H = a.shape[0], N = a.shape[1], D = v.shape[2]
    out_arr = np.zeros((H, N, D), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t h, i, j, d
    cdef double av
    for h in range(H):
        for i in range(N):
            for j in range(N):
                av = a[h, i, j]
                for d in range(D):
                    out[h, i, d] += av * (v[h, j, d] + gamma[h, i, j, d])
    return out_arr


def rel_attn_context_backward(
    double[:, :, :] g,
    double[:, :, :] a,
    double[:, :, :] v,
    double[:, :, :, :] gamma,
):
    cdef Py_ssize_t H = a.shape[0], N = a.shape[1], D = v.shape[2]
    da_arr = np.empty((H, N, N), dtype=np.float64)
    dv_arr = np.zeros((H, N, D), dtype=np.float64)
    dgamma_arr = np.empty((H, N, N, D), dtype=np.float64)
    cdef double[:, :, ::1] da = da_arr
    cdef double[:, :, ::1] dv = dv_arr
    cdef double[:, :, :, ::1] dgamma = dgamma_arr
    cdef Py_ssize_t h, i, j, d
    cdef double acc, av
    for h in range(H):
        for i in range(N):
            for j in range(N):
                av = a[h, i, j]
                acc = 0.0
                for d in range(D):
                    acc += g[h, i, d] * (v[h, j, d] + gamma[h, i, j, d])
                    dv[h, j, d] += av * g[h, i, d]
                    dgamma[h, i, j, d] = av * g[h, i, d]
                da[h, i, j] = acc
    return da_arr, dv_arr, dgamma_arr
