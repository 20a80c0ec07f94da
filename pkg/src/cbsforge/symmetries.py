"""Invariance transforms of the functional: axis permutation, elimination
of unit axes, per-axis unitary action, and invertible mixing of the n
block pairs.

Each transform comes with the equality it is expected to preserve:

  * permuting axes leaves the total unchanged;
  * dropping an axis of length 1 rescales the total by (n-1)/n;
  * a unitary acting on one axis of every x-block, with its entrywise
    conjugate acting on the same axis of every u-block, leaves the total
    unchanged (and these actions for different axes commute);
  * replacing the x-blocks by Lambda-combinations and the u-blocks by
    inverse-transpose-of-Lambda combinations leaves the total unchanged
    for any invertible Lambda.
"""

from dataclasses import dataclass, field

import numpy as np

from .cbs import CbsInput
from .hypermatrix import DimVector, Hypermatrix, ShapeMismatchError

# Mixing matrices with condition number beyond this measure conditioning,
# not the invariance law.
MAX_MIXING_COND = 1e6


@dataclass(frozen=True)
class AxisPermutation:
    """Permutation pi of the axis positions {1..m}; pi[k-1] is the image
    of position k."""

    pi: tuple

    def __post_init__(self):
        pi = tuple(int(p) for p in self.pi)
        object.__setattr__(self, "pi", pi)
        if sorted(pi) != list(range(1, len(pi) + 1)):
            raise ValueError(f"{pi} is not a permutation of 1..{len(pi)}")

    @property
    def m(self):
        return len(self.pi)

    def __call__(self, k):
        return self.pi[k - 1]

    def inverse(self) -> "AxisPermutation":
        inv = [0] * self.m
        for k, image in enumerate(self.pi, start=1):
            inv[image - 1] = k
        return AxisPermutation(tuple(inv))


def permute_axes(x: Hypermatrix, pi: AxisPermutation) -> Hypermatrix:
    """Generalized transposition: output axis k has the length of input
    axis pi^{-1}(k), and entry (i'_1..i'_m) equals the input entry whose
    position-s component is i'_{pi(s)}.  For m=2 and the swap this is the
    ordinary matrix transpose."""
    if pi.m != x.shape.m:
        raise ShapeMismatchError(f"permutation of length {pi.m} on m={x.shape.m}")
    inv = pi.inverse()
    axes = [inv(k) - 1 for k in range(1, pi.m + 1)]
    return Hypermatrix(DimVector(x.data.transpose(axes).shape), x.data.transpose(axes))


def permute_cbs_input(inp: CbsInput, pi: AxisPermutation) -> CbsInput:
    return CbsInput(
        xs=tuple(permute_axes(x, pi) for x in inp.xs),
        us=tuple(permute_axes(u, pi) for u in inp.us),
    )


def drop_unit_axis(x: Hypermatrix, s: int) -> Hypermatrix:
    """Remove axis s (1-based); requires d_s = 1 and m >= 2."""
    if not 1 <= s <= x.shape.m:
        raise ValueError(f"axis {s} out of range")
    if x.shape[s - 1] != 1:
        raise ValueError(f"axis {s} has length {x.shape[s - 1]}, not 1")
    if x.shape.m == 1:
        raise ValueError("cannot drop the only axis")
    squeezed = np.take(x.data, 0, axis=s - 1)
    return Hypermatrix(DimVector(squeezed.shape), squeezed)


def drop_unit_axis_cbs_input(inp: CbsInput, s: int) -> CbsInput:
    return CbsInput(
        xs=tuple(drop_unit_axis(x, s) for x in inp.xs),
        us=tuple(drop_unit_axis(u, s) for u in inp.us),
    )


@dataclass(frozen=True)
class UnitaryMatrix:
    d: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        object.__setattr__(self, "mat", mat)
        if mat.shape != (self.d, self.d):
            raise ValueError(f"expected {self.d}x{self.d} matrix")
        dev = np.linalg.norm(mat @ mat.conj().T - np.eye(self.d))
        if dev > 1e-12 * max(1.0, self.d):
            raise ValueError(f"not unitary: ||U U+ - I|| = {dev:.3e}")

    def conj(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.d, np.conj(self.mat))


def random_unitary(d: int, seed: int) -> UnitaryMatrix:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    R-diagonal phases folded back in (deterministic per seed)."""
    if d < 1:
        raise ValueError("d must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return UnitaryMatrix(d, q * ph)


def apply_unitary(x: Hypermatrix, U: UnitaryMatrix, s: int) -> Hypermatrix:
    """Act with U on axis s: entry i_s of the result contracts U[i_s, :]
    against axis s of x.  Norm-preserving."""
    if not 1 <= s <= x.shape.m:
        raise ValueError(f"axis {s} out of range")
    if U.d != x.shape[s - 1]:
        raise ShapeMismatchError(f"U is {U.d}x{U.d} but axis {s} has length {x.shape[s - 1]}")
    moved = np.tensordot(U.mat, x.data, axes=([1], [s - 1]))
    out = np.moveaxis(moved, 0, s - 1)
    return Hypermatrix(x.shape, out)


def apply_unitary_cbs_input(inp: CbsInput, U: UnitaryMatrix, s: int) -> CbsInput:
    """The invariance action: U on every x-block, conj(U) on every u-block."""
    Uc = U.conj()
    return CbsInput(
        xs=tuple(apply_unitary(x, U, s) for x in inp.xs),
        us=tuple(apply_unitary(u, Uc, s) for u in inp.us),
    )


@dataclass(frozen=True)
class MixingMatrix:
    """Invertible n x n block-mixing pair: lam acts on the x-blocks and
    beta = (lam^T)^{-1} on the u-blocks."""

    n: int
    lam: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    def __post_init__(self):
        lam = np.ascontiguousarray(self.lam, dtype=np.complex128)
        beta = np.ascontiguousarray(self.beta, dtype=np.complex128)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "beta", beta)
        if lam.shape != (self.n, self.n) or beta.shape != (self.n, self.n):
            raise ValueError(f"expected {self.n}x{self.n} matrices")
        resid = np.linalg.norm(lam.T @ beta - np.eye(self.n))
        scale = max(np.linalg.norm(lam) * np.linalg.norm(beta), 1.0)
        if resid > 1e-10 * scale:
            raise ValueError(f"beta is not the inverse transpose of lam: {resid:.3e}")

    @classmethod
    def from_lambda(cls, lam) -> "MixingMatrix":
        lam = np.ascontiguousarray(lam, dtype=np.complex128)
        n = lam.shape[0]
        if lam.shape != (n, n):
            raise ValueError("lam must be square")
        cond = np.linalg.cond(lam)
        if not np.isfinite(cond) or cond > MAX_MIXING_COND:
            raise ValueError(f"condition number {cond:.3e} exceeds {MAX_MIXING_COND:.0e}")
        beta = np.linalg.inv(lam.T)
        return cls(n=n, lam=lam, beta=beta)

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.lam))


def apply_mixing(inp: CbsInput, mix: MixingMatrix) -> CbsInput:
    """x'^(p) = sum_k lam[p,k] x^(k);  u'^(p) = sum_k beta[p,k] u^(k)."""
    if mix.n != inp.n:
        raise ShapeMismatchError(f"mixing is {mix.n}x{mix.n} but input has n={inp.n}")
    shape = inp.shape
    xs_stack = np.stack([x.data for x in inp.xs])
    us_stack = np.stack([u.data for u in inp.us])
    new_xs = np.tensordot(mix.lam, xs_stack, axes=([1], [0]))
    new_us = np.tensordot(mix.beta, us_stack, axes=([1], [0]))
    return CbsInput(
        xs=tuple(Hypermatrix(shape, new_xs[p]) for p in range(mix.n)),
        us=tuple(Hypermatrix(shape, new_us[p]) for p in range(mix.n)),
    )


def mixing_tolerance(mix: MixingMatrix, base: float = 1e-10) -> float:
    """Invariance tolerance scaled by the square of the condition number
    (the inverse transpose amplifies rounding)."""
    return base * mix.cond ** 2
