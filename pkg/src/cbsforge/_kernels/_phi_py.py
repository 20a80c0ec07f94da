"""Pure-numpy evaluation kernels for the subset contributions of the
alternating hypermatrix functional.

Mirror of the compiled extension `_phi_cy`; the public surface of both is
the `PhiPlan` class.  A plan is bound to one shape and precomputes the
einsum label lists for all 2^m axis subsets, so repeated evaluations (the
search hot loop) pay no per-call setup.

Conventions shared with the compiled kernel:
  * hypermatrix blocks are passed as C-contiguous (n, D) complex128 arrays
    of row-major flat entries, D = prod(dims);
  * subsets are bitmasks, bit s set <=> axis s+1 contracted;
  * ``values`` returns the 2^m nonnegative per-subset sums indexed by mask;
  * cogradients are derivatives with respect to conjugated entries, so the
    gradient in the real parameterization (re, im) is (2*Re G, 2*Im G).
"""

import numpy as np


class PhiPlan:
    """Evaluation plan for hypermatrix blocks of one fixed shape."""

    def __init__(self, dims):
        self.dims = tuple(int(d) for d in dims)
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"bad shape {dims}")
        m = len(self.dims)
        self.m = m
        self.size = int(np.prod(self.dims))
        self.n_subsets = 1 << m
        # einsum labels: axis s of x always carries label s (it doubles as
        # the contraction label when s is in the subset); axis s of u
        # carries m+s outside the subset and s inside it.
        self._x_labels = list(range(m))
        self._u_labels = []
        self._out_labels = []
        for mask in range(self.n_subsets):
            in_q = [bool(mask >> s & 1) for s in range(m)]
            self._u_labels.append([s if in_q[s] else m + s for s in range(m)])
            self._out_labels.append(
                [s for s in range(m) if not in_q[s]]
                + [m + s for s in range(m) if not in_q[s]]
            )

    def _check(self, xs, us):
        xs = np.ascontiguousarray(xs, dtype=np.complex128)
        us = np.ascontiguousarray(us, dtype=np.complex128)
        if xs.ndim != 2 or xs.shape != us.shape or xs.shape[1] != self.size:
            raise ValueError("blocks must be (n, D) arrays matching the plan shape")
        return xs, us

    def _contraction(self, mask, xs, us):
        M = None
        for k in range(xs.shape[0]):
            t = np.einsum(
                xs[k].reshape(self.dims), self._x_labels,
                us[k].reshape(self.dims), self._u_labels[mask],
                self._out_labels[mask],
            )
            M = t if M is None else M + t
        return M

    def subset_value(self, mask, xs, us):
        """Single Phi_Q: sum of squared moduli of the Q-contracted outer sum."""
        xs, us = self._check(xs, us)
        M = self._contraction(mask, xs, us)
        return float(np.real(np.vdot(M, M)))

    def values(self, xs, us):
        """All 2^m subset contributions, indexed by bitmask."""
        xs, us = self._check(xs, us)
        out = np.empty(self.n_subsets, dtype=np.float64)
        for mask in range(self.n_subsets):
            M = self._contraction(mask, xs, us)
            out[mask] = np.real(np.vdot(M, M))
        return out

    def cogradients(self, weights, xs, us):
        """Per-subset values plus the conjugate cogradients of the weighted
        total sum(weights[mask] * value[mask])."""
        xs, us = self._check(xs, us)
        weights = np.asarray(weights, dtype=np.float64)
        gx = np.zeros_like(xs)
        gu = np.zeros_like(us)
        values = np.empty(self.n_subsets, dtype=np.float64)
        for mask in range(self.n_subsets):
            M = self._contraction(mask, xs, us)
            values[mask] = np.real(np.vdot(M, M))
            w = weights[mask]
            if w == 0.0:
                continue
            for k in range(xs.shape[0]):
                gx[k] += w * np.einsum(
                    M, self._out_labels[mask],
                    np.conj(us[k].reshape(self.dims)), self._u_labels[mask],
                    self._x_labels,
                ).reshape(-1)
                gu[k] += w * np.einsum(
                    M, self._out_labels[mask],
                    np.conj(xs[k].reshape(self.dims)), self._x_labels,
                    self._u_labels[mask],
                ).reshape(-1)
        return values, gx, gu

    def weighted_total_raw(self, weights, xs, us):
        """Plain mask-order weighted sum, used inside difference quotients."""
        return float(np.dot(np.asarray(weights, dtype=np.float64),
                            self.values(xs, us)))

    def fd_gradient(self, weights, xs, us, eps):
        """Central finite-difference gradient of the weighted total in the
        real parameterization; returns (gx, gu) of shape (n, D, 2) with the
        last axis holding (d/dRe, d/dIm)."""
        xs, us = self._check(xs, us)
        weights = np.asarray(weights, dtype=np.float64)
        n = xs.shape[0]
        grads = []
        for which in range(2):
            blocks = (np.array(xs), np.array(us))
            work = blocks[which]
            g = np.empty((n, self.size, 2), dtype=np.float64)
            for k in range(n):
                for e in range(self.size):
                    orig = work[k, e]
                    for part, delta in enumerate((eps, 1j * eps)):
                        work[k, e] = orig + delta
                        f_plus = self.weighted_total_raw(weights, blocks[0], blocks[1])
                        work[k, e] = orig - delta
                        f_minus = self.weighted_total_raw(weights, blocks[0], blocks[1])
                        g[k, e, part] = (f_plus - f_minus) / (2.0 * eps)
                    work[k, e] = orig
            grads.append(g)
        return grads[0], grads[1]
