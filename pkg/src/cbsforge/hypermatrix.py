"""Dense complex and exact-integer hypermatrix storage.

A hypermatrix of type d1 x ... x dm is a dense array with m axes; the m=1
case is an ordinary vector and m=2 an ordinary matrix.  This module owns the
multi-index arithmetic (1-based in the API, row-major 0-based offsets in
storage), the subset bookkeeping that drives every 2^m-term alternating sum
in the package, reproducible random sampling, and the JSON interchange
format.

All values are immutable after construction and every operation is pure.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

# Largest total entry count we are willing to address.
_MAX_TOTAL_SIZE = 2**62


class ShapeMismatchError(ValueError):
    """Operands do not share the required shape."""


class BudgetExceededError(RuntimeError):
    """Estimated work of an evaluation exceeds the configured budget."""


class NumericalIntegrityError(ArithmeticError):
    """A quantity that must vanish up to roundoff failed its bound."""


class DimVector(tuple):
    """Shape (d1, ..., dm) of a hypermatrix; an immutable tuple of m >= 1
    positive integers whose product must stay addressable."""

    def __new__(cls, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 1:
            raise ValueError("dimension vector needs at least one axis")
        if any(d < 1 for d in dims):
            raise ValueError(f"axis lengths must be positive, got {dims}")
        if math.prod(dims) > _MAX_TOTAL_SIZE:
            raise ValueError(f"total size of {dims} exceeds addressable range")
        return super().__new__(cls, dims)

    @property
    def m(self):
        return len(self)

    @property
    def size(self):
        return math.prod(self)


def as_dims(shape) -> DimVector:
    """Coerce a shape-like (tuple, list, DimVector) to a DimVector."""
    return shape if isinstance(shape, DimVector) else DimVector(shape)


# ---------------------------------------------------------------------------
# multi-index arithmetic (indices are 1-based, storage offsets 0-based)
# ---------------------------------------------------------------------------

def check_multi_index(shape, idx):
    shape = as_dims(shape)
    idx = tuple(int(i) for i in idx)
    if len(idx) != shape.m:
        raise IndexError(f"index {idx} has wrong length for shape {tuple(shape)}")
    for k, (i, d) in enumerate(zip(idx, shape), start=1):
        if not 1 <= i <= d:
            raise IndexError(f"component {k} of {idx} outside 1..{d}")
    return idx


def row_major_strides(shape):
    """Strides in entries (not bytes), last axis fastest."""
    shape = as_dims(shape)
    strides = [1] * shape.m
    for s in range(shape.m - 2, -1, -1):
        strides[s] = strides[s + 1] * shape[s + 1]
    return tuple(strides)


def linear_offset(shape, idx) -> int:
    """Row-major flat offset of the 1-based multi-index ``idx``."""
    idx = check_multi_index(shape, idx)
    strides = row_major_strides(shape)
    return sum((i - 1) * st for i, st in zip(idx, strides))


def multi_index(shape, offset) -> tuple:
    """Inverse of linear_offset: 1-based multi-index of a flat offset."""
    shape = as_dims(shape)
    if not 0 <= offset < shape.size:
        raise IndexError(f"offset {offset} outside 0..{shape.size - 1}")
    idx = []
    for st in row_major_strides(shape):
        idx.append(offset // st + 1)
        offset %= st
    return tuple(idx)


@dataclass(frozen=True)
class IndexSubset:
    """Subset Q of the axis positions {1, ..., m}, stored as a bitmask
    (bit p-1 set means position p is a member)."""

    mask: int
    m: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.m):
            raise ValueError(f"mask {self.mask} out of range for m={self.m}")

    @classmethod
    def empty(cls, m):
        return cls(0, m)

    @classmethod
    def full(cls, m):
        return cls((1 << m) - 1, m)

    @classmethod
    def from_members(cls, m, members):
        mask = 0
        for p in members:
            if not 1 <= p <= m:
                raise ValueError(f"position {p} outside 1..{m}")
            mask |= 1 << (p - 1)
        return cls(mask, m)

    def __contains__(self, p):
        return 1 <= p <= self.m and bool(self.mask >> (p - 1) & 1)

    @property
    def size(self):
        """Cardinality |Q|."""
        return self.mask.bit_count()

    @property
    def members(self):
        return tuple(p for p in range(1, self.m + 1) if p in self)

    def complement(self):
        return IndexSubset(self.mask ^ (1 << self.m) - 1, self.m)

    def symmetric_difference(self, other):
        if other.m != self.m:
            raise ValueError("subsets over different ground sets")
        return IndexSubset(self.mask ^ other.mask, self.m)


def all_subsets(m):
    """All 2^m subsets of {1..m} in increasing-cardinality order (ties by
    mask).  The alternating sums accumulate in this order."""
    masks = sorted(range(1 << m), key=lambda q: (q.bit_count(), q))
    return [IndexSubset(q, m) for q in masks]


def modified_indices(i, j, Q: IndexSubset):
    """Swap the Q-positions of the pair of multi-indices (i, j).

    Position p of the first result takes j_p when p is in Q and i_p
    otherwise; the second result does the opposite.  Applying the same Q
    twice gives back (i, j), and applying Q then R equals applying their
    symmetric difference.
    """
    i, j = tuple(i), tuple(j)
    if len(i) != len(j) or len(i) != Q.m:
        raise ShapeMismatchError(f"index pair {i}, {j} incompatible with m={Q.m}")
    i_mod = tuple(j[p - 1] if p in Q else i[p - 1] for p in range(1, Q.m + 1))
    j_mod = tuple(i[p - 1] if p in Q else j[p - 1] for p in range(1, Q.m + 1))
    return i_mod, j_mod


# ---------------------------------------------------------------------------
# hypermatrix containers
# ---------------------------------------------------------------------------

class Hypermatrix:
    """Dense complex hypermatrix.  Entries live in a read-only C-ordered
    complex128 ndarray; the flat view is row-major with the first axis
    slowest."""

    __slots__ = ("shape", "data")

    def __init__(self, shape, entries):
        shape = as_dims(shape)
        data = np.asarray(entries, dtype=np.complex128)
        if data.size != shape.size:
            raise ShapeMismatchError(
                f"{data.size} entries for shape {tuple(shape)} (need {shape.size})"
            )
        data = np.ascontiguousarray(data.reshape(tuple(shape)))
        data.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Hypermatrix is immutable")

    @classmethod
    def zeros(cls, shape):
        shape = as_dims(shape)
        return cls(shape, np.zeros(shape.size, dtype=np.complex128))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        return cls(DimVector(arr.shape), arr.astype(np.complex128))

    @property
    def m(self):
        return self.shape.m

    def flat(self):
        """Row-major flat complex128 view."""
        return self.data.reshape(-1)

    def entry(self, idx):
        """Entry at the 1-based multi-index ``idx``."""
        return self.flat()[linear_offset(self.shape, idx)]

    def conj(self):
        return Hypermatrix(self.shape, np.conj(self.data))

    def scaled(self, c):
        return Hypermatrix(self.shape, c * self.data)

    def __eq__(self, other):
        return (
            isinstance(other, Hypermatrix)
            and self.shape == other.shape
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))

    def __repr__(self):
        return f"Hypermatrix(shape={tuple(self.shape)})"


class IntHypermatrix:
    """Hypermatrix with arbitrary-precision integer entries, for the exact
    ring identities.  Degree-4 expansions overflow any fixed width, so the
    entries are plain Python ints in a flat row-major tuple."""

    __slots__ = ("shape", "entries")

    def __init__(self, shape, entries):
        shape = as_dims(shape)
        entries = tuple(int(e) for e in entries)
        if len(entries) != shape.size:
            raise ShapeMismatchError(
                f"{len(entries)} entries for shape {tuple(shape)} (need {shape.size})"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("IntHypermatrix is immutable")

    @property
    def m(self):
        return self.shape.m

    def entry(self, idx):
        return self.entries[linear_offset(self.shape, idx)]

    def to_complex(self):
        return Hypermatrix(self.shape, np.array(self.entries, dtype=np.complex128))

    def __eq__(self, other):
        return (
            isinstance(other, IntHypermatrix)
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        return f"IntHypermatrix(shape={tuple(self.shape)})"


def frobenius_norm_sq(x) -> float:
    """Sum of squared moduli of all entries; accepts Hypermatrix or ndarray."""
    data = x.data if isinstance(x, Hypermatrix) else np.asarray(x)
    v = data.reshape(-1)
    return float(np.real(np.vdot(v, v)))


# ---------------------------------------------------------------------------
# reproducible sampling
# ---------------------------------------------------------------------------

def _rng(seed):
    # PCG64 is stable across platforms and numpy releases we target.
    return np.random.Generator(np.random.PCG64(seed))


def random_hypermatrix(shape, seed, dist="complex-gaussian", lo=-5, hi=5):
    """Deterministic random hypermatrix for the given (shape, seed, dist).

    dist:
      "complex-gaussian" -- independent standard normals on re and im;
      "unit-sphere"      -- complex gaussian rescaled to Frobenius norm 1;
      "integer-range"    -- uniform integers in [lo, hi], returned as an
                            IntHypermatrix.
    """
    shape = as_dims(shape)
    rng = _rng(seed)
    if dist == "integer-range":
        if lo > hi:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        vals = rng.integers(lo, hi + 1, size=shape.size)
        return IntHypermatrix(shape, vals.tolist())
    if dist not in ("complex-gaussian", "unit-sphere"):
        raise ValueError(f"unknown distribution {dist!r}")
    z = rng.standard_normal(shape.size) + 1j * rng.standard_normal(shape.size)
    if dist == "unit-sphere":
        z /= np.linalg.norm(z)
    return Hypermatrix(shape, z)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def hypermatrix_to_json(x) -> dict:
    """Flat row-major JSON form: {"shape", "re", "im"} for complex entries,
    {"shape", "int"} with decimal strings for exact integers."""
    if isinstance(x, IntHypermatrix):
        return {"shape": list(x.shape), "int": [str(e) for e in x.entries]}
    flat = x.flat()
    return {
        "shape": list(x.shape),
        "re": flat.real.tolist(),
        "im": flat.imag.tolist(),
    }


def hypermatrix_from_json(obj):
    if "shape" not in obj:
        raise ValueError("hypermatrix record lacks 'shape'")
    shape = DimVector(obj["shape"])
    if "int" in obj:
        entries = [int(s) for s in obj["int"]]
        if len(entries) != shape.size:
            raise ValueError("entry count does not match shape")
        return IntHypermatrix(shape, entries)
    re, im = obj.get("re"), obj.get("im")
    if re is None or im is None:
        raise ValueError("hypermatrix record needs 're' and 'im' (or 'int')")
    if len(re) != shape.size or len(im) != shape.size:
        raise ValueError("entry count does not match shape")
    return Hypermatrix(shape, np.array(re, dtype=float) + 1j * np.array(im, dtype=float))


def save_hypermatrix(x, path):
    with open(path, "w") as fh:
        json.dump(hypermatrix_to_json(x), fh)


def load_hypermatrix(path):
    with open(path) as fh:
        return hypermatrix_from_json(json.load(fh))
