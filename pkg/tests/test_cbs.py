"""Functional evaluation: worked examples, closed forms, invariants, and
the interchange format."""

import json
import math

import numpy as np
import pytest

from cbsforge import (
    BudgetExceededError,
    CbsInput,
    Hypermatrix,
    IndexSubset,
    ShapeMismatchError,
    phi,
    phi_m1_closed,
    phi_m2_compact,
    phi_subset,
    random_hypermatrix,
)
from cbsforge.cbs import (
    cbs_input_from_json,
    cbs_input_to_json,
    work_estimate,
)


def _vec_input(x_entries, u_entries):
    d = len(x_entries)
    return CbsInput(xs=(Hypermatrix((d,), x_entries),),
                    us=(Hypermatrix((d,), u_entries),))


def _random_input(shape, n, seed, dist="unit-sphere"):
    return CbsInput(
        xs=tuple(random_hypermatrix(shape, seed + k, dist) for k in range(n)),
        us=tuple(random_hypermatrix(shape, seed + 100 + k, dist) for k in range(n)),
    )


class TestWorkedExamples:
    def test_m1_subsets(self):
        inp = _vec_input([1, 2], [3, 4])
        assert phi_subset(IndexSubset.empty(1), inp) == pytest.approx(125.0)
        assert phi_subset(IndexSubset.full(1), inp) == pytest.approx(121.0)
        assert phi(inp).total == pytest.approx(4.0)

    def test_empty_subset_is_outer_product_norm(self):
        inp = _random_input((2, 3), 2, 17)
        outer = sum(np.kron(x.flat()[:, None], u.flat()[None, :])
                    for x, u in zip(inp.xs, inp.us))
        assert phi_subset(IndexSubset.empty(2), inp) == pytest.approx(
            float(np.sum(np.abs(outer) ** 2)), rel=1e-13)

    def test_n2_offdiagonal_example(self):
        inp = CbsInput(
            xs=(Hypermatrix((2,), [1, 0]), Hypermatrix((2,), [0, 1])),
            us=(Hypermatrix((2,), [0, 1]), Hypermatrix((2,), [1, 0])),
        )
        assert phi(inp).total == pytest.approx(2.0)

    def test_all_zero(self):
        z = Hypermatrix.zeros((2, 2))
        assert phi(CbsInput(xs=(z, z), us=(z, z))).total == 0.0


class TestBreakdown:
    def test_total_matches_per_subset_sum(self):
        b = phi(_random_input((2, 3), 2, 4))
        assert b.total == pytest.approx(b.recomputed_total(), abs=1e-15)
        assert len(b.per_subset) == 4

    def test_subset_contributions_nonnegative(self):
        b = phi(_random_input((3, 2, 2), 3, 8))
        for Q, (w, v) in b.per_subset.items():
            assert v >= 0.0
            assert w == pytest.approx((-1.0 / 3.0) ** Q.size)

    def test_mass_bounds_total(self):
        b = phi(_random_input((2, 2), 2, 5))
        assert abs(b.total) <= b.cancellation_mass + 1e-15


class TestScaling:
    def test_block_scaling_is_modulus_squared(self):
        inp = _random_input((2, 3), 2, 21)
        c = 0.7 - 1.3j
        scaled = CbsInput(xs=tuple(x.scaled(c) for x in inp.xs), us=inp.us)
        b0, b1 = phi(inp), phi(scaled)
        assert b1.total == pytest.approx(abs(c) ** 2 * b0.total,
                                         abs=1e-12 * b0.cancellation_mass)
        scaled_u = CbsInput(xs=inp.xs, us=tuple(u.scaled(c) for u in inp.us))
        b2 = phi(scaled_u)
        assert b2.total == pytest.approx(abs(c) ** 2 * b0.total,
                                         abs=1e-12 * b0.cancellation_mass)


class TestClosedForms:
    def test_m1_worked(self):
        inp = _vec_input([1, 2], [3, 4])
        assert phi_m1_closed(inp) == pytest.approx(4.0)
        z = _vec_input([0, 0], [0, 0])
        assert phi_m1_closed(z) == 0.0

    def test_m1_against_phi_random(self):
        for t in range(1000):
            d = t % 6 + 1
            n = t % 4 + 1
            inp = _random_input((d,), n, 3000 + 7 * t)
            b = phi(inp)
            assert abs(phi_m1_closed(inp) - b.total) <= 1e-12 * b.cancellation_mass
            assert b.total >= -1e-12

    def test_m1_requires_one_axis(self):
        with pytest.raises(ShapeMismatchError):
            phi_m1_closed(_random_input((2, 2), 1, 0))

    def test_m2_zero_and_identity(self):
        z = Hypermatrix.zeros((2, 2))
        assert phi_m2_compact(CbsInput(xs=(z, z), us=(z, z))) == 0.0
        eye = Hypermatrix((2, 2), np.eye(2))
        inp = CbsInput(xs=(eye, eye), us=(eye, eye))
        b = phi(inp)
        assert phi_m2_compact(inp) == pytest.approx(b.total,
                                                    abs=1e-12 * b.cancellation_mass)

    def test_m2_against_phi_random(self):
        for t in range(1000):
            shape = (t % 3 + 2, (t // 3) % 3 + 2)
            inp = _random_input(shape, 2, 90000 + 11 * t)
            b = phi(inp)
            assert abs(phi_m2_compact(inp) - b.total) <= 1e-12 * b.cancellation_mass

    def test_m2_requires_two_axes_two_pairs(self):
        with pytest.raises(ShapeMismatchError):
            phi_m2_compact(_random_input((2, 2), 1, 0))
        with pytest.raises(ShapeMismatchError):
            phi_m2_compact(_random_input((2,), 2, 0))


class TestValidationAndBudget:
    def test_input_invariants(self):
        x = Hypermatrix((2,), [1, 2])
        with pytest.raises(ValueError):
            CbsInput(xs=(), us=())
        with pytest.raises(ValueError):
            CbsInput(xs=(x,), us=())
        with pytest.raises(ShapeMismatchError):
            CbsInput(xs=(x,), us=(Hypermatrix((3,), [1, 2, 3]),))

    def test_subset_over_wrong_m(self):
        inp = _vec_input([1, 2], [3, 4])
        with pytest.raises(ShapeMismatchError):
            phi_subset(IndexSubset.empty(2), inp)

    def test_work_estimate_and_budget(self):
        assert work_estimate((2,), 1) == 1 * (4 + 2)
        big = _random_input((40000,), 1, 0)
        with pytest.raises(BudgetExceededError):
            phi(big)
        # generous budget lets it through on a small input
        assert phi(_vec_input([1, 0], [0, 1]), budget=10**6).total is not None


class TestJson:
    def test_round_trip(self):
        inp = _random_input((2, 3), 2, 33)
        obj = json.loads(json.dumps(cbs_input_to_json(inp)))
        back = cbs_input_from_json(obj)
        assert back.n == inp.n
        for a, b in zip(back.xs + back.us, inp.xs + inp.us):
            assert a == b

    def test_round_trip_is_bit_exact_for_totals(self):
        inp = _random_input((2, 2), 2, 12)
        back = cbs_input_from_json(json.loads(json.dumps(cbs_input_to_json(inp))))
        assert phi(back).total == phi(inp).total

    def test_rejects_inconsistent_n(self):
        obj = cbs_input_to_json(_random_input((2,), 2, 1))
        obj["n"] = 3
        with pytest.raises(ValueError):
            cbs_input_from_json(obj)
