"""Grid-quadrature form of the functional and two closed-form parametric
inequalities.

Square-integrable functions are approximated by hypermatrices on midpoint
grids, with each entry scaled by sqrt(cell width) per axis; under that
scaling the discrete functional approximates its integral counterpart with
no further factors (every grid index appears either inside a squared
modulus, contributing the width twice through its two factors, or once in
each of the two factors of a diagonal inner sum).

The two parametric families make the case "first axis of length 2, second
axis continuous" fully explicit for n=2:

  * power family on (0,1):  per-block exponents (a-1)/2 resp. (b-1)/2;
    all the integrals collapse to reciprocals 1/(alpha+beta);
  * centered Gaussian family on the line: exponents exp(-a t^2); the
    integrals collapse to reciprocal square roots (a shared factor of
    sqrt(pi) per integral divides out of the displayed combination).

Both closed forms follow from the proven two-level case, so they are
asserted nonnegative; the quadrature evaluators exist to cross-check the
closed forms against the defining functions.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cbs import CbsInput, phi
from .hypermatrix import BudgetExceededError, DimVector, Hypermatrix

MAX_GRID_SAMPLES = 10**7


@dataclass(frozen=True)
class GridSpec:
    """Uniform midpoint grid with n_points cells on [lo, hi]."""

    lo: float
    hi: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("need at least one cell")
        if not self.hi > self.lo:
            raise ValueError("need hi > lo")

    @property
    def delta(self) -> float:
        return (self.hi - self.lo) / self.n_points

    def nodes(self) -> np.ndarray:
        return self.lo + (np.arange(self.n_points) + 0.5) * self.delta


def discretize(f, grid, m: int = None) -> Hypermatrix:
    """Sample f on the midpoint grid(s) into a hypermatrix whose entries
    carry the product of per-axis sqrt(cell width) factors.

    `grid` is one GridSpec (reused on all m axes) or a sequence of m specs;
    f takes m real arguments and may return complex values.
    """
    if isinstance(grid, GridSpec):
        if m is None:
            m = 1
        grids = [grid] * m
    else:
        grids = list(grid)
        if m is not None and m != len(grids):
            raise ValueError("m does not match the number of grids")
    shape = DimVector(g.n_points for g in grids)
    if shape.size > MAX_GRID_SAMPLES:
        raise BudgetExceededError(f"{shape.size} samples exceed cap {MAX_GRID_SAMPLES}")
    scale = math.prod(math.sqrt(g.delta) for g in grids)
    nodes = [g.nodes() for g in grids]
    entries = np.empty(tuple(shape), dtype=np.complex128)
    for idx in np.ndindex(*shape):
        entries[idx] = f(*(nodes[s][idx[s]] for s in range(len(grids))))
    return Hypermatrix(shape, entries * scale)


def integral_phi_m1(xis, etas, grid: GridSpec, n: int = None) -> float:
    """Quadrature value of the one-variable functional for n function
    pairs (xi_k, eta_k): discretize every function on the grid and feed the
    resulting vectors through the hypermatrix evaluation."""
    xis, etas = list(xis), list(etas)
    if n is None:
        n = len(xis)
    if n != len(xis) or n != len(etas):
        raise ValueError("need the same number of xi and eta functions")
    xs = tuple(discretize(f, grid, 1) for f in xis)
    us = tuple(discretize(f, grid, 1) for f in etas)
    return phi(CbsInput(xs=xs, us=us)).total


# ---------------------------------------------------------------------------
# closed-form parametric families (indices i, k over {1, 2})
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamBlock:
    """Positive 2x2 parameter blocks a[i,k], b[i,k] (0-based storage)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise ValueError("parameter blocks must be 2x2")
        if not (np.all(a > 0) and np.all(b > 0)):
            raise ValueError("all parameters must be positive")

    @classmethod
    def random(cls, seed: int, lo: float = 0.1, hi: float = 10.0) -> "ParamBlock":
        rng = np.random.Generator(np.random.PCG64(seed))
        return cls(a=rng.uniform(lo, hi, (2, 2)), b=rng.uniform(lo, hi, (2, 2)))


def _pair_power(alpha, beta):
    return 1.0 / (alpha * beta) if beta else 1.0 / alpha


def _pair_gauss(alpha, beta):
    return 1.0 / math.sqrt(alpha * beta) if beta else 1.0 / math.sqrt(alpha)


_PAIR = {"power": _pair_power, "gauss": _pair_gauss}


def _family_terms(p: ParamBlock, family: str):
    """The four alternating terms of the parametric combination; `pair`
    maps the block-exponent sums (alpha, beta) to the elementary integral
    value (beta = 0 marks the single-integral terms)."""
    pair = _PAIR[family]
    a, b = p.a, p.b
    idx = (0, 1)
    # fsum everywhere: exactly rounded sums are invariant under the
    # k-relabeling symmetry, which the checks assert with zero tolerance
    t1 = math.fsum(pair(a[i, k] + a[i, l], b[j, k] + b[j, l])
                   for i in idx for j in idx for k in idx for l in idx)
    t2 = math.fsum(pair(a[i, k] + a[j, l], b[i, k] + b[j, l])
                   for i in idx for j in idx for k in idx for l in idx)
    t3 = math.fsum(math.fsum(pair(a[i, k] + b[j, k], 0.0) for k in idx) ** 2
                   for i in idx for j in idx)
    t4 = math.fsum(pair(a[i, k] + b[i, k], 0.0) for i in idx for k in idx) ** 2
    return t1, t2, t3, t4


def power_inequality(p: ParamBlock) -> float:
    """Closed form for the power family: elementary integrals are
    reciprocals of exponent sums."""
    t1, t2, t3, t4 = _family_terms(p, "power")
    return 4.0 * t1 - 2.0 * t2 - 2.0 * t3 + t4


def gaussian_inequality(p: ParamBlock) -> float:
    """Closed form for the Gaussian family: reciprocal square roots."""
    t1, t2, t3, t4 = _family_terms(p, "gauss")
    return 4.0 * t1 - 2.0 * t2 - 2.0 * t3 + t4


def closed_form_mass(p: ParamBlock, family: str) -> float:
    """Sum of absolute values of the four alternating terms; the scale for
    relative comparisons of near-cancelling values."""
    t1, t2, t3, t4 = _family_terms(p, family)
    return 4.0 * t1 + 2.0 * t2 + 2.0 * t3 + t4


def _two_level_quadrature(xi_rows, eta_rows, grid: GridSpec) -> float:
    """Functional value for shape (2, N) blocks: row i of block k samples
    the function xi_i^(k) (resp. eta) on the grid."""
    nodes = grid.nodes()
    root_dt = math.sqrt(grid.delta)
    shape = DimVector((2, grid.n_points))
    xs, us = [], []
    for k in range(2):
        x_entries = np.stack([xi_rows[k][i](nodes) for i in range(2)]) * root_dt
        u_entries = np.stack([eta_rows[k][i](nodes) for i in range(2)]) * root_dt
        xs.append(Hypermatrix(shape, x_entries))
        us.append(Hypermatrix(shape, u_entries))
    return phi(CbsInput(xs=tuple(xs), us=tuple(us))).total


def power_quadrature(p: ParamBlock, n_points: int = 4096) -> float:
    """Quadrature twin of power_inequality: monomial exponents (a-1)/2 and
    (b-1)/2 on (0,1).  Exponents below 1 (a < 1) are integrable but
    singular at 0, so dual-path checks should stick to a, b >= 1."""
    grid = GridSpec(0.0, 1.0, n_points)
    xi = [[(lambda t, e=(p.a[i, k] - 1) / 2: t ** e) for i in range(2)] for k in range(2)]
    eta = [[(lambda t, e=(p.b[i, k] - 1) / 2: t ** e) for i in range(2)] for k in range(2)]
    return _two_level_quadrature(xi, eta, grid)


def gaussian_quadrature(p: ParamBlock, n_points: int = 4096,
                        half_width: float = 8.0) -> float:
    """Quadrature twin of gaussian_inequality on [-half_width, half_width]
    (tail mass is negligible for a >= 0.1 at the default width).  Each
    elementary Gaussian integral carries sqrt(pi) where the power family's
    carries 2, so the functional equals (pi/4) times the displayed closed
    combination; that shared factor is divided out here."""
    grid = GridSpec(-half_width, half_width, n_points)
    xi = [[(lambda t, c=p.a[i, k]: np.exp(-c * t * t)) for i in range(2)] for k in range(2)]
    eta = [[(lambda t, c=p.b[i, k]: np.exp(-c * t * t)) for i in range(2)] for k in range(2)]
    return _two_level_quadrature(xi, eta, grid) * 4.0 / math.pi


@dataclass(frozen=True)
class DualPathCheck:
    family: str
    closed: float
    quad_values: tuple  # coarsest to finest
    envelope: float
    passed: bool

    @property
    def quad_fine(self) -> float:
        return self.quad_values[-1]


def dual_path_check(p: ParamBlock, family: str, n_points: int = 4096) -> DualPathCheck:
    """Compare a closed form against its quadrature twin, within the
    quadrature's own convergence envelope.

    The envelope combines the Cauchy differences of three refinement
    levels (the alternating combination mixes error terms of different
    rates, so a single difference can be anomalously small when those
    terms cross zero between two levels) plus a roundoff floor on the
    term mass.
    """
    if family == "power":
        quad = power_quadrature
        closed = power_inequality(p)
    elif family == "gauss":
        quad = gaussian_quadrature
        closed = gaussian_inequality(p)
    else:
        raise ValueError(f"unknown family {family!r}")
    values = tuple(quad(p, n_points // k) for k in (4, 2, 1))
    envelope = (
        4.0 * max(abs(values[2] - values[1]), 0.5 * abs(values[1] - values[0]))
        + 1e-9 * closed_form_mass(p, family)
    )
    return DualPathCheck(family=family, closed=closed, quad_values=values,
                         envelope=envelope,
                         passed=abs(closed - values[2]) <= envelope)
