# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled MLP kernels: fused forward/backward calling BLAS dgemm directly.

Same contract as `_kernels_np`; selected at import when available.  The win
over numpy comes from skipping intermediate temporaries and per-op dispatch
overhead on the small matrices this workload uses.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef void _gemm(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c,
                bint ta, bint tb, double beta) noexcept nogil:
    # c = op(a) @ op(b) + beta * c, all arrays C-order.
    cdef int m = c.shape[0]
    cdef int n = c.shape[1]
    cdef int k = a.shape[0] if ta else a.shape[1]
    cdef int lda = a.shape[1]
    cdef int ldb = b.shape[1]
    cdef double alpha = 1.0
    cdef char cta = b'T' if ta else b'N'
    cdef char ctb = b'T' if tb else b'N'
    # Row-major trick: compute c^T = op(b)^T @ op(a)^T in column-major terms.
    dgemm(&ctb, &cta, &n, &m, &k, &alpha,
          &b[0, 0], &ldb, &a[0, 0], &lda, &beta, &c[0, 0], &n)


cdef void _bias_relu(double[:, ::1] z, double[::1] bias) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            v = z[i, j] + bias[j]
            z[i, j] = v if v > 0.0 else 0.0


cdef void _bias(double[:, ::1] z, double[::1] bias) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            z[i, j] = z[i, j] + bias[j]


def forward(list weights, list biases, cnp.ndarray[double, ndim=2] x):
    cdef int n_layers = len(weights)
    cdef cnp.ndarray[double, ndim=2] h = x
    cdef cnp.ndarray[double, ndim=2] z
    cdef int l
    for l in range(n_layers):
        z = np.empty((h.shape[0], (<cnp.ndarray> weights[l]).shape[1]))
        _gemm(h, weights[l], z, False, False, 0.0)
        if l < n_layers - 1:
            _bias_relu(z, biases[l])
        else:
            _bias(z, biases[l])
        h = z
    return h


def backward(list weights, list biases, cnp.ndarray[double, ndim=2] x,
             cnp.ndarray[cnp.int64_t, ndim=1] actions,
             cnp.ndarray[double, ndim=1] targets):
    cdef int n_layers = len(weights)
    cdef int batch = x.shape[0]
    cdef list hs = [x]
    cdef cnp.ndarray[double, ndim=2] h = x
    cdef cnp.ndarray[double, ndim=2] z
    cdef int l
    cdef Py_ssize_t i, j

    for l in range(n_layers - 1):
        z = np.empty((batch, (<cnp.ndarray> weights[l]).shape[1]))
        _gemm(h, weights[l], z, False, False, 0.0)
        _bias_relu(z, biases[l])
        hs.append(z)
        h = z
    cdef cnp.ndarray[double, ndim=2] q = np.empty(
        (batch, (<cnp.ndarray> weights[n_layers - 1]).shape[1]))
    _gemm(h, weights[n_layers - 1], q, False, False, 0.0)
    _bias(q, biases[n_layers - 1])

    cdef cnp.ndarray[double, ndim=2] dq = np.zeros_like(q)
    cdef double loss = 0.0
    cdef double r
    for i in range(batch):
        r = q[i, actions[i]] - targets[i]
        loss += r * r
        dq[i, actions[i]] = 2.0 * r / batch
    loss /= batch

    cdef list grad_w = [None] * n_layers
    cdef list grad_b = [None] * n_layers
    cdef cnp.ndarray[double, ndim=2] d = dq
    cdef cnp.ndarray[double, ndim=2] gw, dprev, hprev
    cdef cnp.ndarray[double, ndim=1] gb
    for l in range(n_layers - 1, -1, -1):
        hprev = hs[l]
        gw = np.empty((hprev.shape[1], d.shape[1]))
        _gemm(hprev, d, gw, True, False, 0.0)
        gb = np.empty(d.shape[1])
        _colsum(d, gb)
        grad_w[l] = gw
        grad_b[l] = gb
        if l > 0:
            dprev = np.empty((batch, (<cnp.ndarray> weights[l]).shape[0]))
            _gemm(d, weights[l], dprev, False, True, 0.0)
            # ReLU was applied in place, so hs[l] > 0 marks live units.
            _mask_dead(dprev, hs[l])
            d = dprev
    return loss, grad_w, grad_b


cdef void _colsum(double[:, ::1] d, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    for j in range(d.shape[1]):
        out[j] = 0.0
    for i in range(d.shape[0]):
        for j in range(d.shape[1]):
            out[j] += d[i, j]


cdef void _mask_dead(double[:, ::1] d, double[:, ::1] act) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(d.shape[0]):
        for j in range(d.shape[1]):
            if act[i, j] <= 0.0:
                d[i, j] = 0.0
