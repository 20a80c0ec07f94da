# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: cdivision=True, language_level=3
"""Compiled evaluation kernels for the subset contributions of the
alternating hypermatrix functional.

Same surface as the numpy fallback `_phi_py` (see its module docstring for
the block layout and mask conventions).  Subset contractions run as flat
offset loops: for each axis subset the plan stores the row-major offsets
reachable through the free (outer) axes and through the contracted (inner)
axes; every entry offset splits uniquely as outer + inner, which the
gradient kernels exploit.  All hot loops release the GIL, so independent
restarts can share a thread pool.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx
ctypedef cnp.int64_t i64


cdef double _phi_q(const cplx[:, ::1] X, const cplx[:, ::1] U,
                   const i64[::1] oo, const i64[::1] oi) noexcept nogil:
    cdef Py_ssize_t a, b, c, k
    cdef Py_ssize_t n_out = oo.shape[0], n_in = oi.shape[0], n = X.shape[0]
    cdef i64 oa, ob, oc
    cdef cplx s
    cdef double acc = 0.0
    for a in range(n_out):
        oa = oo[a]
        for b in range(n_out):
            ob = oo[b]
            s = 0
            for c in range(n_in):
                oc = oi[c]
                for k in range(n):
                    s = s + X[k, oa + oc] * U[k, ob + oc]
            acc += s.real * s.real + s.imag * s.imag
    return acc


cdef double _phi_q_store(const cplx[:, ::1] X, const cplx[:, ::1] U,
                         const i64[::1] oo, const i64[::1] oi,
                         cplx[:, ::1] M) noexcept nogil:
    cdef Py_ssize_t a, b, c, k
    cdef Py_ssize_t n_out = oo.shape[0], n_in = oi.shape[0], n = X.shape[0]
    cdef i64 oa, ob, oc
    cdef cplx s
    cdef double acc = 0.0
    for a in range(n_out):
        oa = oo[a]
        for b in range(n_out):
            ob = oo[b]
            s = 0
            for c in range(n_in):
                oc = oi[c]
                for k in range(n):
                    s = s + X[k, oa + oc] * U[k, ob + oc]
            M[a, b] = s
            acc += s.real * s.real + s.imag * s.imag
    return acc


cdef void _accum_cograd(const cplx[:, ::1] X, const cplx[:, ::1] U,
                        const i64[::1] oo, const i64[::1] oi,
                        const cplx[:, ::1] M, double w,
                        cplx[:, ::1] GX, cplx[:, ::1] GU) noexcept nogil:
    cdef Py_ssize_t a, b, c, k
    cdef Py_ssize_t n_out = oo.shape[0], n_in = oi.shape[0], n = X.shape[0]
    cdef i64 e, oc
    cdef cplx s
    for a in range(n_out):
        for c in range(n_in):
            oc = oi[c]
            e = oo[a] + oc
            for k in range(n):
                s = 0
                for b in range(n_out):
                    s = s + M[a, b] * U[k, oo[b] + oc].conjugate()
                GX[k, e] = GX[k, e] + w * s
    for b in range(n_out):
        for c in range(n_in):
            oc = oi[c]
            e = oo[b] + oc
            for k in range(n):
                s = 0
                for a in range(n_out):
                    s = s + M[a, b] * X[k, oo[a] + oc].conjugate()
                GU[k, e] = GU[k, e] + w * s


cdef class PhiPlan:
    """Evaluation plan for hypermatrix blocks of one fixed shape."""

    cdef public tuple dims
    cdef public Py_ssize_t m, size, n_subsets
    cdef i64[:, ::1] _outer      # padded per-mask outer offset tables
    cdef i64[:, ::1] _inner      # padded per-mask inner offset tables
    cdef i64[::1] _n_outer
    cdef i64[::1] _n_inner
    cdef Py_ssize_t _max_outer

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"bad shape {dims}")
        self.dims = dims
        self.m = len(dims)
        self.size = int(np.prod(dims))
        self.n_subsets = 1 << self.m

        strides = np.ones(self.m, dtype=np.int64)
        for s in range(self.m - 2, -1, -1):
            strides[s] = strides[s + 1] * dims[s + 1]

        def table(axes):
            offs = np.zeros(1, dtype=np.int64)
            for s in axes:
                offs = (offs[:, None]
                        + (np.arange(dims[s], dtype=np.int64) * strides[s])[None, :]
                        ).reshape(-1)
            return offs

        outer, inner = [], []
        for mask in range(self.n_subsets):
            outer.append(table([s for s in range(self.m) if not mask >> s & 1]))
            inner.append(table([s for s in range(self.m) if mask >> s & 1]))
        n_outer = np.array([len(t) for t in outer], dtype=np.int64)
        n_inner = np.array([len(t) for t in inner], dtype=np.int64)
        pad_out = np.zeros((self.n_subsets, int(n_outer.max())), dtype=np.int64)
        pad_in = np.zeros((self.n_subsets, int(n_inner.max())), dtype=np.int64)
        for mask in range(self.n_subsets):
            pad_out[mask, : n_outer[mask]] = outer[mask]
            pad_in[mask, : n_inner[mask]] = inner[mask]
        self._outer = pad_out
        self._inner = pad_in
        self._n_outer = n_outer
        self._n_inner = n_inner
        self._max_outer = int(n_outer.max())

    cdef _coerce(self, xs, us):
        xs = np.ascontiguousarray(xs, dtype=np.complex128)
        us = np.ascontiguousarray(us, dtype=np.complex128)
        if xs.ndim != 2 or xs.shape != us.shape or xs.shape[1] != self.size:
            raise ValueError("blocks must be (n, D) arrays matching the plan shape")
        return xs, us

    def subset_value(self, Py_ssize_t mask, xs, us):
        """Single Phi_Q: sum of squared moduli of the Q-contracted outer sum."""
        if not 0 <= mask < self.n_subsets:
            raise ValueError(f"mask {mask} out of range")
        xs, us = self._coerce(xs, us)
        cdef const cplx[:, ::1] X = xs
        cdef const cplx[:, ::1] U = us
        cdef double v
        with nogil:
            v = _phi_q(X, U, self._outer[mask, : self._n_outer[mask]],
                       self._inner[mask, : self._n_inner[mask]])
        return v

    def values(self, xs, us):
        """All 2^m subset contributions, indexed by bitmask."""
        xs, us = self._coerce(xs, us)
        out = np.empty(self.n_subsets, dtype=np.float64)
        cdef const cplx[:, ::1] X = xs
        cdef const cplx[:, ::1] U = us
        cdef double[::1] o = out
        cdef Py_ssize_t mask
        with nogil:
            for mask in range(self.n_subsets):
                o[mask] = _phi_q(X, U, self._outer[mask, : self._n_outer[mask]],
                                 self._inner[mask, : self._n_inner[mask]])
        return out

    def cogradients(self, weights, xs, us):
        """Per-subset values plus the conjugate cogradients of the weighted
        total; gradient in the real parameterization is (2 Re G, 2 Im G)."""
        xs, us = self._coerce(xs, us)
        w_arr = np.ascontiguousarray(weights, dtype=np.float64)
        if w_arr.shape[0] != self.n_subsets:
            raise ValueError("need one weight per subset")
        values = np.empty(self.n_subsets, dtype=np.float64)
        gx = np.zeros_like(xs)
        gu = np.zeros_like(us)
        M_buf = np.empty((self._max_outer, self._max_outer), dtype=np.complex128)
        cdef const cplx[:, ::1] X = xs
        cdef const cplx[:, ::1] U = us
        cdef const double[::1] W = w_arr
        cdef double[::1] V = values
        cdef cplx[:, ::1] GX = gx
        cdef cplx[:, ::1] GU = gu
        cdef cplx[:, ::1] M = M_buf
        cdef Py_ssize_t mask, n_out
        with nogil:
            for mask in range(self.n_subsets):
                n_out = self._n_outer[mask]
                V[mask] = _phi_q_store(
                    X, U, self._outer[mask, :n_out],
                    self._inner[mask, : self._n_inner[mask]], M[:n_out, :n_out])
                if W[mask] != 0.0:
                    _accum_cograd(X, U, self._outer[mask, :n_out],
                                  self._inner[mask, : self._n_inner[mask]],
                                  M[:n_out, :n_out], W[mask], GX, GU)
        return values, gx, gu

    cdef double _total_raw(self, const cplx[:, ::1] X, const cplx[:, ::1] U,
                           const double[::1] W) noexcept nogil:
        cdef double t = 0.0
        cdef Py_ssize_t mask
        for mask in range(self.n_subsets):
            t += W[mask] * _phi_q(X, U, self._outer[mask, : self._n_outer[mask]],
                                  self._inner[mask, : self._n_inner[mask]])
        return t

    def weighted_total_raw(self, weights, xs, us):
        """Plain mask-order weighted sum, used inside difference quotients."""
        xs, us = self._coerce(xs, us)
        w_arr = np.ascontiguousarray(weights, dtype=np.float64)
        cdef const cplx[:, ::1] X = xs
        cdef const cplx[:, ::1] U = us
        cdef const double[::1] W = w_arr
        cdef double t
        with nogil:
            t = self._total_raw(X, U, W)
        return t

    def fd_gradient(self, weights, xs, us, double eps):
        """Central finite-difference gradient of the weighted total in the
        real parameterization; returns (gx, gu) of shape (n, D, 2)."""
        xs, us = self._coerce(xs, us)
        w_arr = np.ascontiguousarray(weights, dtype=np.float64)
        X_work = np.array(xs)
        U_work = np.array(us)
        cdef Py_ssize_t n = xs.shape[0]
        gx = np.empty((n, self.size, 2), dtype=np.float64)
        gu = np.empty((n, self.size, 2), dtype=np.float64)
        cdef cplx[:, ::1] XW = X_work
        cdef cplx[:, ::1] UW = U_work
        cdef const double[::1] W = w_arr
        cdef double[:, :, ::1] GX = gx
        cdef double[:, :, ::1] GU = gu
        cdef Py_ssize_t k, e
        cdef cplx orig
        cdef double f_plus, f_minus
        with nogil:
            for k in range(n):
                for e in range(self.size):
                    orig = XW[k, e]
                    XW[k, e] = orig + eps
                    f_plus = self._total_raw(XW, UW, W)
                    XW[k, e] = orig - eps
                    f_minus = self._total_raw(XW, UW, W)
                    GX[k, e, 0] = (f_plus - f_minus) / (2.0 * eps)
                    XW[k, e] = orig + eps * 1j
                    f_plus = self._total_raw(XW, UW, W)
                    XW[k, e] = orig - eps * 1j
                    f_minus = self._total_raw(XW, UW, W)
                    GX[k, e, 1] = (f_plus - f_minus) / (2.0 * eps)
                    XW[k, e] = orig
            for k in range(n):
                for e in range(self.size):
                    orig = UW[k, e]
                    UW[k, e] = orig + eps
                    f_plus = self._total_raw(XW, UW, W)
                    UW[k, e] = orig - eps
                    f_minus = self._total_raw(XW, UW, W)
                    GU[k, e, 0] = (f_plus - f_minus) / (2.0 * eps)
                    UW[k, e] = orig + eps * 1j
                    f_plus = self._total_raw(XW, UW, W)
                    UW[k, e] = orig - eps * 1j
                    f_minus = self._total_raw(XW, UW, W)
                    GU[k, e, 1] = (f_plus - f_minus) / (2.0 * eps)
                    UW[k, e] = orig
        return gx, gu
