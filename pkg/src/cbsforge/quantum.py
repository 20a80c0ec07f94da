"""Dense-operator oracle for the n=2 case of the functional.

The m pairs of local spaces are represented on the interleaved product
basis |i1,j1,i2,j2,...,im,jm> (i1 slowest), so the tensor product of
per-pair operators is a plain Kronecker product.  The bipartite cut for
Schmidt rank regroups to (i1..im | j1..jm).

On a single d x d pair:
  * the flip F swaps |i,j> -> |j,i|; F^2 = 1, eigenvalues +-1 with
    multiplicities d(d+1)/2 and d(d-1)/2;
  * the one-parameter family 1 - tF (kept non-normalized) is positive
    semidefinite for |t| <= 1;
  * P projects onto the maximally entangled direction (1/sqrt d) sum |i,i>;
    1 - t d P is the partial transpose of 1 - tF.

The critical product witness operator is the Kronecker product over pairs
of (1 - d_k P_k / 2).  Its expectation on a vector x (x) u + y (x) v equals
the n=2 functional on the blocks (x, y, u, v); `phi_oracle_check` exercises
exactly that dual path.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import cbs
from .hypermatrix import (
    BudgetExceededError,
    DimVector,
    Hypermatrix,
    NumericalIntegrityError,
    ShapeMismatchError,
    as_dims,
)

# Dense operators exist to validate the functional at small sizes only.
MAX_OPERATOR_DIM = 4096


@dataclass(frozen=True)
class ProductBasisLayout:
    """Index bookkeeping for the interleaved basis |i1,j1,...,im,jm>."""

    dims: DimVector

    def __post_init__(self):
        object.__setattr__(self, "dims", as_dims(self.dims))

    @property
    def total_dim(self) -> int:
        return math.prod(d * d for d in self.dims)

    @property
    def interleaved_shape(self) -> tuple:
        out = []
        for d in self.dims:
            out += [d, d]
        return tuple(out)

    def basis_index(self, i, j) -> int:
        """Offset of |i1,j1,...,im,jm> for 1-based multi-indices i, j."""
        m = self.dims.m
        if len(i) != m or len(j) != m:
            raise ShapeMismatchError("multi-index length mismatch")
        off = 0
        for s in range(m):
            d = self.dims[s]
            if not (1 <= i[s] <= d and 1 <= j[s] <= d):
                raise IndexError(f"component {s + 1} outside 1..{d}")
            off = (off * d + (i[s] - 1)) * d + (j[s] - 1)
        return off

    def _regroup_axes(self):
        m = self.dims.m
        i_axes = [2 * s for s in range(m)]
        j_axes = [2 * s + 1 for s in range(m)]
        return i_axes + j_axes

    def coefficient_matrix(self, psi) -> np.ndarray:
        """Reshape psi to the (prod d) x (prod d) matrix of the bipartite
        cut, rows indexed by (i1..im) and columns by (j1..jm)."""
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        if psi.size != self.total_dim:
            raise ShapeMismatchError(f"vector length {psi.size} != {self.total_dim}")
        D = math.prod(self.dims)
        t = psi.reshape(self.interleaved_shape).transpose(self._regroup_axes())
        return t.reshape(D, D)

    def from_coefficient_matrix(self, C) -> np.ndarray:
        """Inverse of coefficient_matrix: scatter C[(i),(j)] back into the
        interleaved amplitude vector."""
        C = np.asarray(C, dtype=np.complex128)
        D = math.prod(self.dims)
        if C.shape != (D, D):
            raise ShapeMismatchError(f"coefficient matrix must be {D}x{D}")
        shape = tuple(self.dims) * 2
        inv = np.argsort(self._regroup_axes())
        return C.reshape(shape).transpose(inv).reshape(-1)


def flip_operator(d: int) -> np.ndarray:
    """The d^2 x d^2 swap |i,j> -> |j,i>: a symmetric 0/1 permutation."""
    if d < 1:
        raise ValueError("d must be positive")
    F = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            F[i * d + j, j * d + i] = 1.0
    return F


def werner_state(d: int, t: float, strict: bool = True) -> np.ndarray:
    """The non-normalized one-parameter family 1 - tF on a d x d pair;
    positive semidefinite exactly for |t| <= 1."""
    if not -1.0 <= t <= 1.0:
        if strict:
            raise ValueError(f"t={t} outside [-1, 1]")
        warnings.warn(f"t={t} outside [-1, 1]; operator is not PSD", stacklevel=2)
    return np.eye(d * d, dtype=np.complex128) - t * flip_operator(d)


def max_entangled_projector(d: int) -> np.ndarray:
    """Rank-1 projector onto (1/sqrt d) sum_i |i,i>."""
    if d < 1:
        raise ValueError("d must be positive")
    phi_vec = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        phi_vec[i * d + i] = 1.0 / math.sqrt(d)
    return np.outer(phi_vec, phi_vec.conj())


def isotropic_operator(d: int, t: float) -> np.ndarray:
    """1 - t d P: the partial transpose of 1 - tF."""
    return np.eye(d * d, dtype=np.complex128) - t * d * max_entangled_projector(d)


def sigma_crit(dims, max_dim: int = MAX_OPERATOR_DIM) -> np.ndarray:
    """Kronecker product over pairs of (1 - d_k P_k / 2) on the
    interleaved layout."""
    dims = as_dims(dims)
    layout = ProductBasisLayout(dims)
    if layout.total_dim > max_dim:
        raise BudgetExceededError(
            f"operator dimension {layout.total_dim} exceeds cap {max_dim}"
        )
    op = np.ones((1, 1), dtype=np.complex128)
    for d in dims:
        factor = np.eye(d * d, dtype=np.complex128) - d * max_entangled_projector(d) / 2
        op = np.kron(op, factor)
    return op


@dataclass(frozen=True)
class SchmidtRank2Spec:
    """Four same-shape hypermatrices (x, y, u, v) defining the amplitude
    vector with coefficients x_i u_j + y_i v_j (Schmidt rank <= 2)."""

    x: Hypermatrix
    y: Hypermatrix
    u: Hypermatrix
    v: Hypermatrix

    def __post_init__(self):
        shape = self.x.shape
        for h in (self.y, self.u, self.v):
            if h.shape != shape:
                raise ShapeMismatchError("all four blocks must share one shape")

    @property
    def dims(self) -> DimVector:
        return self.x.shape

    def as_cbs_input(self) -> cbs.CbsInput:
        return cbs.CbsInput(xs=(self.x, self.y), us=(self.u, self.v))


def rank2_vector(spec: SchmidtRank2Spec) -> np.ndarray:
    """Interleaved amplitudes of x (x) u + y (x) v."""
    layout = ProductBasisLayout(spec.dims)
    C = np.outer(spec.x.flat(), spec.u.flat()) + np.outer(spec.y.flat(), spec.v.flat())
    return layout.from_coefficient_matrix(C)


def schmidt_rank(psi, dims, threshold: float = 1e-10) -> int:
    """Number of singular values of the bipartite coefficient matrix above
    threshold * (largest singular value)."""
    layout = ProductBasisLayout(as_dims(dims))
    C = layout.coefficient_matrix(psi)
    svals = np.linalg.svd(C, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        raise ValueError("Schmidt rank of the zero vector is undefined")
    return int(np.sum(svals > threshold * svals[0]))


def expectation(op, psi) -> float:
    """<psi| op |psi> for Hermitian op; the imaginary residue must stay
    below 1e-12 * ||op||_F * ||psi||^2 or the call aborts."""
    op = np.asarray(op, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if op.shape != (psi.size, psi.size):
        raise ShapeMismatchError(f"operator {op.shape} vs vector length {psi.size}")
    val = complex(np.vdot(psi, op @ psi))
    bound = 1e-12 * np.linalg.norm(op) * float(np.real(np.vdot(psi, psi)))
    if abs(val.imag) > bound:
        raise NumericalIntegrityError(
            f"imaginary residue {val.imag:.3e} exceeds bound {bound:.3e}"
        )
    return val.real


@dataclass(frozen=True)
class OracleCheck:
    dims: tuple
    operator_value: float
    functional_value: float
    deviation: float
    scale: float
    tol: float
    passed: bool


def phi_oracle_check(spec: SchmidtRank2Spec, tol: float = 1e-10,
                     max_dim: int = MAX_OPERATOR_DIM) -> OracleCheck:
    """Dual-path identity: the witness-operator expectation on the rank-2
    vector against the n=2 functional on (x, y, u, v)."""
    dims = spec.dims
    lhs = expectation(sigma_crit(dims, max_dim=max_dim), rank2_vector(spec))
    breakdown = cbs.phi(spec.as_cbs_input())
    rhs = breakdown.total
    scale = max(breakdown.cancellation_mass, abs(lhs), abs(rhs))
    dev = abs(lhs - rhs)
    return OracleCheck(
        dims=tuple(dims),
        operator_value=lhs,
        functional_value=rhs,
        deviation=dev,
        scale=scale,
        tol=tol,
        passed=dev <= tol * scale if scale > 0 else dev == 0.0,
    )


@dataclass(frozen=True)
class SweepPoint:
    t: float
    best_value: float
    converged_restarts: int


@dataclass(frozen=True)
class WernerSweep:
    d: int
    points: tuple
    crossing_bracket: tuple  # (last t with min >= -tol, first t with min < -tol)
    monotone_nonincreasing: bool


def werner_threshold_sweep(d: int, t_grid, restarts: int = 20, seed: int = 0,
                           max_iters: int = 400, zero_tol: float = 1e-8,
                           gradient: str = "fd") -> WernerSweep:
    """Minimize <psi| 1 - t d P |psi> over normalized rank-2 vectors for
    each t on the grid.  The minimum is reported per point; the sign change
    (expected at t = 1/2) is bracketed, and the monotonicity of the minima
    in t is recorded as an observation, never asserted."""
    from .search import SearchConfig, minimize_expectation

    if d < 2:
        raise ValueError("sweep needs d >= 2")
    points = []
    for idx, t in enumerate(t_grid):
        op = isotropic_operator(d, float(t))
        point_seed = int(np.random.SeedSequence((seed, idx)).generate_state(1)[0])
        config = SearchConfig(dims=DimVector((d,)), n=2, restarts=restarts,
                              max_iters=max_iters, seed=point_seed, gradient=gradient)
        res = minimize_expectation(op, DimVector((d,)), config)
        points.append(SweepPoint(
            t=float(t), best_value=res.best_value,
            converged_restarts=sum(1 for r in res.per_restart if r.converged),
        ))
    below = [p.t for p in points if p.best_value < -zero_tol]
    above = [p.t for p in points if p.best_value >= -zero_tol]
    bracket = (max(above) if above else None, min(below) if below else None)
    vals = [p.best_value for p in points]
    monotone = all(b <= a + zero_tol for a, b in zip(vals, vals[1:]))
    return WernerSweep(d=d, points=tuple(points), crossing_bracket=bracket,
                       monotone_nonincreasing=monotone)
