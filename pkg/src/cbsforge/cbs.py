"""The generalized quadratic functional on n pairs of hypermatrices.

For blocks x^(1..n), u^(1..n) sharing one shape (d1,...,dm), the functional
is an alternating sum over all axis subsets Q of {1..m}:

    total = sum_Q (-1/n)^|Q| * Phi_Q,

where Phi_Q contracts the Q-axes of each product x^(k)_i u^(k)_j along the
diagonal (j_q = i_q, summed) and takes squared moduli over the remaining
free indices.  Every Phi_Q is a sum of squared moduli, hence >= 0; the
total is the quantity whose conjectured nonnegativity this package probes.

Because the alternating weights cancel, totals near zero are the
interesting regime: subsets are accumulated in increasing-cardinality
order through exact compensated summation (math.fsum), and relative
tolerances elsewhere in the package are measured against the cancellation
mass sum_Q |weight * Phi_Q| rather than against the total.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import PhiPlan
from .hypermatrix import (
    BudgetExceededError,
    DimVector,
    Hypermatrix,
    IndexSubset,
    ShapeMismatchError,
    all_subsets,
    hypermatrix_from_json,
    hypermatrix_to_json,
)

# Default cap on scalar multiply-adds per evaluation.
DEFAULT_BUDGET = 10**9


@dataclass(frozen=True)
class CbsInput:
    """Ordered collection of n same-shape hypermatrix pairs (x^(k), u^(k))."""

    xs: tuple
    us: tuple

    def __post_init__(self):
        xs, us = tuple(self.xs), tuple(self.us)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)
        if len(xs) < 1 or len(xs) != len(us):
            raise ValueError("need n >= 1 pairs of blocks")
        shape = xs[0].shape
        for h in xs + us:
            if not isinstance(h, Hypermatrix):
                raise TypeError("blocks must be complex hypermatrices")
            if h.shape != shape:
                raise ShapeMismatchError("all 2n blocks must share one shape")

    @property
    def n(self):
        return len(self.xs)

    @property
    def shape(self) -> DimVector:
        return self.xs[0].shape

    def stacked(self):
        """(xs, us) as (n, D) complex arrays of flat entries."""
        return (
            np.stack([x.flat() for x in self.xs]),
            np.stack([u.flat() for u in self.us]),
        )


@dataclass(frozen=True)
class PhiBreakdown:
    """Total plus the signed per-subset decomposition."""

    total: float
    per_subset: dict  # IndexSubset -> (weight, contribution)

    @property
    def cancellation_mass(self) -> float:
        """sum_Q |weight * Phi_Q| -- the scale against which the total's
        relative accuracy is meaningful."""
        return math.fsum(abs(w * v) for w, v in self.per_subset.values())

    def recomputed_total(self) -> float:
        return math.fsum(w * v for w, v in self.per_subset.values())


def subset_weight(n: int, q_size: int) -> float:
    return (-1.0 / n) ** q_size


@lru_cache(maxsize=128)
def _plan(dims: tuple) -> PhiPlan:
    return PhiPlan(dims)


@lru_cache(maxsize=128)
def _mask_order(m: int):
    """Masks in increasing-cardinality order, plus per-mask |Q|."""
    order = [q.mask for q in all_subsets(m)]
    sizes = [mask.bit_count() for mask in range(1 << m)]
    return order, sizes


def weights_by_mask(m: int, n: int) -> np.ndarray:
    sizes = _mask_order(m)[1]
    return np.array([subset_weight(n, s) for s in sizes])


def weighted_total(m: int, n: int, values_by_mask) -> float:
    """Compensated alternating sum in increasing-cardinality order.

    This is *the* definition of the functional's total; the search module
    routes its objective through here so that reported minima re-evaluate
    bit-identically.
    """
    order, sizes = _mask_order(m)
    return math.fsum(subset_weight(n, sizes[mask]) * values_by_mask[mask]
                     for mask in order)


def work_estimate(shape, n: int) -> int:
    """Scalar multiply-adds of one evaluation: sum over subsets of
    n * (outer size)^2 * (inner size)."""
    shape = DimVector(shape)
    total = 0
    for mask in range(1 << shape.m):
        outer = math.prod(d for s, d in enumerate(shape) if not mask >> s & 1)
        inner = math.prod(d for s, d in enumerate(shape) if mask >> s & 1)
        total += n * outer * outer * inner
    return total


def _check_budget(shape, n, budget):
    est = work_estimate(shape, n)
    if est > budget:
        raise BudgetExceededError(
            f"evaluation at shape {tuple(shape)}, n={n} needs ~{est:.3g} "
            f"multiply-adds (budget {budget:.3g})"
        )


def phi_subset(Q: IndexSubset, inp: CbsInput, budget=DEFAULT_BUDGET) -> float:
    """Single subset contribution Phi_Q (unweighted, >= 0)."""
    shape = inp.shape
    if Q.m != shape.m:
        raise ShapeMismatchError(f"subset over m={Q.m} vs shape {tuple(shape)}")
    _check_budget(shape, inp.n, budget)
    xs, us = inp.stacked()
    return _plan(tuple(shape)).subset_value(Q.mask, xs, us)


def phi(inp: CbsInput, budget=DEFAULT_BUDGET) -> PhiBreakdown:
    """Evaluate the functional with its full per-subset breakdown."""
    shape = inp.shape
    _check_budget(shape, inp.n, budget)
    xs, us = inp.stacked()
    values = _plan(tuple(shape)).values(xs, us)
    m, n = shape.m, inp.n
    per = {}
    for Q in all_subsets(m):
        per[Q] = (subset_weight(n, Q.size), float(values[Q.mask]))
    return PhiBreakdown(total=weighted_total(m, n, values), per_subset=per)


def phi_total(inp: CbsInput, budget=DEFAULT_BUDGET) -> float:
    return phi(inp, budget).total


def phi_m1_closed(inp: CbsInput) -> float:
    """Closed form for one-axis shapes: with the d x d matrix
    X = sum_k transpose(x^(k)) u^(k), the total equals
    ||X||_F^2 - (1/n) |tr X|^2."""
    if inp.shape.m != 1:
        raise ShapeMismatchError("closed form requires m = 1")
    d = inp.shape[0]
    X = np.zeros((d, d), dtype=np.complex128)
    for x, u in zip(inp.xs, inp.us):
        X += np.outer(x.flat(), u.flat())
    fro = float(np.real(np.vdot(X, X)))
    tr = complex(np.trace(X))
    return fro - abs(tr) ** 2 / inp.n


def phi_m2_compact(inp: CbsInput) -> float:
    """Compact matrix form for m = 2, n = 2, blocks (x, y, u, v):
    ||kron(x,u)+kron(y,v)||^2 - (1/2)||x^T u + y^T v||^2
    - (1/2)||u x^T + v y^T||^2 + (1/4)|tr(x^T u + y^T v)|^2."""
    if inp.shape.m != 2 or inp.n != 2:
        raise ShapeMismatchError("compact form requires m = 2, n = 2")
    x, y = (h.data for h in inp.xs)
    u, v = (h.data for h in inp.us)
    big = np.kron(x, u) + np.kron(y, v)
    cross = x.T @ u + y.T @ v
    cross2 = u @ x.T + v @ y.T
    t1 = float(np.real(np.vdot(big, big)))
    t2 = float(np.real(np.vdot(cross, cross)))
    t3 = float(np.real(np.vdot(cross2, cross2)))
    t4 = abs(complex(np.trace(cross))) ** 2
    return t1 - 0.5 * t2 - 0.5 * t3 + 0.25 * t4


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def cbs_input_to_json(inp: CbsInput) -> dict:
    return {
        "n": inp.n,
        "xs": [hypermatrix_to_json(x) for x in inp.xs],
        "us": [hypermatrix_to_json(u) for u in inp.us],
    }


def cbs_input_from_json(obj) -> CbsInput:
    n = int(obj["n"])
    xs = [hypermatrix_from_json(h) for h in obj["xs"]]
    us = [hypermatrix_from_json(h) for h in obj["us"]]
    if len(xs) != n or len(us) != n:
        raise ValueError(f"record claims n={n} but carries {len(xs)}/{len(us)} blocks")
    return CbsInput(xs=tuple(xs), us=tuple(us))


def save_cbs_input(inp: CbsInput, path):
    with open(path, "w") as fh:
        json.dump(cbs_input_to_json(inp), fh)


def load_cbs_input(path) -> CbsInput:
    with open(path) as fh:
        return cbs_input_from_json(json.load(fh))


def breakdown_to_json(b: PhiBreakdown) -> dict:
    return {
        "total": b.total,
        "cancellation_mass": b.cancellation_mass,
        "per_subset": [
            {"subset": list(Q.members), "weight": w, "value": v}
            for Q, (w, v) in b.per_subset.items()
        ],
    }
