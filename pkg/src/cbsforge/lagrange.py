"""Sum-of-squares identities for the n=1 functional.

The central object is the alternating kernel

    sigma_{i;j}(x, u) = sum_Q (-1)^|Q| x[i^Q] u[j^Q],

where the pair (i^Q, j^Q) swaps the components of the multi-indices i and j
at the positions in Q.  Swapping any subset flips the sign by (-1)^|Q|
(the kernel in particular vanishes whenever i and j agree in a component),
and summing |sigma|^2 over index pairs reproduces the n=1 functional two
ways: over all pairs with a 1/2^m factor, or over the strictly increasing
pairs (i_s < j_s for every s) with no factor.

Both floating verification and the exact integer form of the identity
(entries in Z, squares instead of squared moduli, no conjugation) live
here; the integer path never touches floating point.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from . import cbs
from .hypermatrix import (
    Hypermatrix,
    IndexSubset,
    IntHypermatrix,
    ShapeMismatchError,
    check_multi_index,
    modified_indices,
    row_major_strides,
)


def _require_same_shape(x, u):
    if x.shape != u.shape:
        raise ShapeMismatchError(f"shapes {tuple(x.shape)} and {tuple(u.shape)} differ")


def sigma(i, j, x, u):
    """The 2^m-term alternating kernel at one index pair.

    Exact (Python int) for IntHypermatrix inputs, complex otherwise.
    """
    _require_same_shape(x, u)
    i = check_multi_index(x.shape, i)
    j = check_multi_index(x.shape, j)
    m = x.shape.m
    total = 0
    for mask in range(1 << m):
        Q = IndexSubset(mask, m)
        i_mod, j_mod = modified_indices(i, j, Q)
        term = x.entry(i_mod) * u.entry(j_mod)
        total = total - term if Q.size % 2 else total + term
    return total


def sigma_sign_check(i, j, Q: IndexSubset, x, u) -> bool:
    """Does swapping the Q-positions of (i, j) flip sigma by (-1)^|Q|?

    Exact comparison for integer hypermatrices, 1e-13 absolute otherwise.
    """
    i_mod, j_mod = modified_indices(tuple(i), tuple(j), Q)
    lhs = sigma(i_mod, j_mod, x, u)
    rhs = sigma(i, j, x, u)
    if Q.size % 2:
        rhs = -rhs
    if isinstance(x, IntHypermatrix):
        return lhs == rhs
    return abs(lhs - rhs) <= 1e-13


def _sigma_table(x: Hypermatrix, u: Hypermatrix) -> np.ndarray:
    """sigma over all pairs as a 2m-axis tensor S[i..., j...]."""
    m = x.shape.m
    xd, ud = x.data, u.data
    table = None
    for mask in range(1 << m):
        x_lab = [m + s if mask >> s & 1 else s for s in range(m)]
        u_lab = [s if mask >> s & 1 else m + s for s in range(m)]
        term = np.einsum(xd, x_lab, ud, u_lab, list(range(2 * m)))
        if mask.bit_count() % 2:
            term = -term
        table = term if table is None else table + term
    return table


def lagrange_rhs_full(x: Hypermatrix, u: Hypermatrix) -> float:
    """(1/2^m) * sum over all index pairs of |sigma(x, conj u)|^2."""
    _require_same_shape(x, u)
    S = _sigma_table(x, u.conj())
    return float(np.real(np.vdot(S, S))) / 2 ** x.shape.m


def _strict_pair_weights(shape) -> np.ndarray:
    """Indicator tensor of the strictly increasing pairs i_s < j_s."""
    m = shape.m
    w = np.ones((), dtype=np.float64)
    w = w.reshape((1,) * (2 * m))
    for s, d in enumerate(shape):
        strict = np.triu(np.ones((d, d)), k=1)
        sh = [1] * (2 * m)
        sh[s], sh[m + s] = d, d
        w = w * strict.reshape(sh)
    return w


def lagrange_rhs_restricted(x: Hypermatrix, u: Hypermatrix) -> float:
    """Sum of |sigma(x, conj u)|^2 over pairs with i_s < j_s for all s."""
    _require_same_shape(x, u)
    S = _sigma_table(x, u.conj())
    return float(np.sum(np.abs(S) ** 2 * _strict_pair_weights(x.shape)))


@dataclass(frozen=True)
class LagrangeReport:
    shape: tuple
    phi1: float
    rhs_full: float
    rhs_restricted: float
    max_deviation: float
    mass: float
    tol: float
    passed: bool


def verify_lagrange(x: Hypermatrix, u: Hypermatrix, tol: float = 1e-10) -> LagrangeReport:
    """Three-way check: the n=1 functional against both sum-of-squares
    forms, to `tol` relative to the alternating sum's cancellation mass.

    Failures are reported, not raised.
    """
    _require_same_shape(x, u)
    breakdown = cbs.phi(cbs.CbsInput(xs=(x,), us=(u,)))
    phi1 = breakdown.total
    full = lagrange_rhs_full(x, u)
    restricted = lagrange_rhs_restricted(x, u)
    vals = (phi1, full, restricted)
    dev = max(abs(a - b) for a in vals for b in vals)
    mass = breakdown.cancellation_mass
    return LagrangeReport(
        shape=tuple(x.shape),
        phi1=phi1,
        rhs_full=full,
        rhs_restricted=restricted,
        max_deviation=dev,
        mass=mass,
        tol=tol,
        passed=dev <= tol * mass,
    )


# ---------------------------------------------------------------------------
# exact integer identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactLagrangeResult:
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


@lru_cache(maxsize=256)
def _offset_tables(shape):
    """Per mask: (outer offsets, inner offsets) such that every full offset
    splits as outer + inner, outer axes being the ones not in the mask."""
    dims = tuple(shape)
    m = len(dims)
    strides = row_major_strides(shape)

    def table(axes):
        offs = [0]
        for s in axes:
            offs = [o + t * strides[s] for o in offs for t in range(dims[s])]
        return tuple(offs)

    out = []
    for mask in range(1 << m):
        outer_axes = [s for s in range(m) if not mask >> s & 1]
        inner_axes = [s for s in range(m) if mask >> s & 1]
        out.append((table(outer_axes), table(inner_axes)))
    return tuple(out)


def lagrange_exact(x: IntHypermatrix, u: IntHypermatrix) -> ExactLagrangeResult:
    """Both sides of the integer identity, evaluated exactly over Z.

    lhs: the alternating subset sum with squares in place of squared moduli
    (the inner sum running over the diagonal j_q = i_q of the contracted
    axes; an empty subset contributes the bare product).
    rhs: sum of sigma(x, u)^2 over strictly increasing index pairs.
    """
    _require_same_shape(x, u)
    if not isinstance(x, IntHypermatrix) or not isinstance(u, IntHypermatrix):
        raise TypeError("exact identity needs integer hypermatrices")
    shape = x.shape
    m = shape.m
    xf, uf = x.entries, u.entries

    lhs = 0
    for mask, (outer, inner) in enumerate(_offset_tables(tuple(shape))):
        acc = 0
        for a in outer:
            for b in outer:
                s = 0
                for c in inner:
                    s += xf[a + c] * uf[b + c]
                acc += s * s
        lhs = lhs - acc if mask.bit_count() % 2 else lhs + acc

    strides = row_major_strides(shape)
    axis_pairs = [list(combinations(range(d), 2)) for d in shape]
    rhs = 0
    for combo in product(*axis_pairs):
        s_val = 0
        for mask in range(1 << m):
            off_x = 0
            off_u = 0
            for s in range(m):
                lo, hi = combo[s]
                if mask >> s & 1:
                    off_x += hi * strides[s]
                    off_u += lo * strides[s]
                else:
                    off_x += lo * strides[s]
                    off_u += hi * strides[s]
            term = xf[off_x] * uf[off_u]
            s_val = s_val - term if mask.bit_count() % 2 else s_val + term
        rhs += s_val * s_val
    return ExactLagrangeResult(lhs=lhs, rhs=rhs)
