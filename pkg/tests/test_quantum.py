"""Dense-operator bridge tests: flip and projector algebra, the critical
witness operator, rank-2 vectors, Schmidt rank, expectations, and the
dual-path identity."""

import math

import numpy as np
import pytest

from cbsforge import Hypermatrix, NumericalIntegrityError, random_hypermatrix
from cbsforge.hypermatrix import BudgetExceededError, DimVector, ShapeMismatchError
from cbsforge.quantum import (
    ProductBasisLayout,
    SchmidtRank2Spec,
    expectation,
    flip_operator,
    isotropic_operator,
    max_entangled_projector,
    phi_oracle_check,
    rank2_vector,
    schmidt_rank,
    sigma_crit,
    werner_state,
    werner_threshold_sweep,
)


def _basis_vec(layout, *pairs):
    psi = np.zeros(layout.total_dim, dtype=np.complex128)
    for i, j, amp in pairs:
        psi[layout.basis_index(i, j)] += amp
    return psi


class TestFlip:
    def test_d1_identity(self):
        assert np.array_equal(flip_operator(1), np.eye(1))

    def test_d2_swap(self):
        F = flip_operator(2)
        expected = np.eye(4)[[0, 2, 1, 3]]
        assert np.array_equal(F, expected)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_involution_hermitian_spectrum(self, d):
        F = flip_operator(d)
        assert np.array_equal(F @ F, np.eye(d * d))
        assert np.array_equal(F, F.conj().T)
        eigs = np.linalg.eigvalsh(F)
        assert int(np.sum(eigs > 0)) == d * (d + 1) // 2
        assert int(np.sum(eigs < 0)) == d * (d - 1) // 2


class TestWernerFamily:
    def test_t0_identity(self):
        assert np.array_equal(werner_state(3, 0.0), np.eye(9))

    def test_t1_spectrum(self):
        eigs = np.linalg.eigvalsh(werner_state(2, 1.0))
        assert np.allclose(sorted(eigs), [0, 0, 0, 2])

    def test_psd_on_range(self):
        for t in (-1.0, -0.3, 0.5, 1.0):
            assert np.linalg.eigvalsh(werner_state(3, t)).min() >= -1e-12

    def test_domain_check(self):
        with pytest.raises(ValueError):
            werner_state(2, 1.5)
        with pytest.warns(UserWarning):
            werner_state(2, 1.5, strict=False)


class TestProjector:
    def test_d1_scalar(self):
        assert np.allclose(max_entangled_projector(1), [[1.0]])

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_projector_identity(self, d):
        P = max_entangled_projector(d)
        assert np.max(np.abs(P @ P - P)) <= 1e-13
        assert np.trace(P).real == pytest.approx(1.0)

    def test_action_on_diagonal_pair(self):
        # P (|1,1> + |2,2>) = (2/sqrt d) * maximally entangled direction
        d = 3
        layout = ProductBasisLayout(DimVector((d,)))
        psi = _basis_vec(layout, ((1,), (1,), 1.0), ((2,), (2,), 1.0))
        phi_vec = sum(
            _basis_vec(layout, ((i,), (i,), 1.0)) for i in range(1, d + 1)
        ) / math.sqrt(d)
        out = max_entangled_projector(d) @ psi
        assert np.allclose(out, (2 / math.sqrt(d)) * phi_vec)


class TestLayout:
    def test_basis_index_interleaved_first_pair_slowest(self):
        layout = ProductBasisLayout(DimVector((2, 3)))
        # offset = ((i1-1)*2 + (j1-1))*9 + (i2-1)*3 + (j2-1)
        assert layout.basis_index((1, 1), (1, 1)) == 0
        assert layout.basis_index((1, 1), (1, 2)) == 1
        assert layout.basis_index((1, 2), (1, 1)) == 3
        assert layout.basis_index((1, 1), (2, 1)) == 9
        assert layout.basis_index((2, 1), (1, 1)) == 18

    def test_coefficient_matrix_round_trip(self):
        layout = ProductBasisLayout(DimVector((2, 3)))
        rng = np.random.default_rng(1)
        psi = rng.standard_normal(36) + 1j * rng.standard_normal(36)
        C = layout.coefficient_matrix(psi)
        assert np.array_equal(layout.from_coefficient_matrix(C), psi)

    def test_coefficient_entries(self):
        layout = ProductBasisLayout(DimVector((2, 2)))
        psi = _basis_vec(layout, ((2, 1), (1, 2), 1.0))
        C = layout.coefficient_matrix(psi)
        from cbsforge.hypermatrix import linear_offset
        row = linear_offset((2, 2), (2, 1))
        col = linear_offset((2, 2), (1, 2))
        assert C[row, col] == 1.0 and np.sum(np.abs(C)) == 1.0


class TestSigmaCrit:
    def test_scalar_case(self):
        assert np.allclose(sigma_crit((1,)), [[0.5]])

    def test_single_pair_spectrum(self):
        # at d=2 the eigenvalues are 1 (bulk) and 1 - d/2 = 0 (entangled direction)
        op = sigma_crit((2,))
        eigs = np.linalg.eigvalsh(op)
        assert np.allclose(sorted(eigs), [0, 1, 1, 1], atol=1e-13)

    def test_matches_kron_of_factors(self):
        factors = [np.eye(d * d) - d * max_entangled_projector(d) / 2 for d in (2, 2)]
        assert np.max(np.abs(sigma_crit((2, 2)) - np.kron(*factors))) <= 1e-13

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            sigma_crit((9, 9))


class TestRank2:
    def test_product_vector(self):
        x = random_hypermatrix((3,), 1, "unit-sphere")
        u = random_hypermatrix((3,), 2, "unit-sphere")
        zero = Hypermatrix.zeros((3,))
        psi = rank2_vector(SchmidtRank2Spec(x=x, y=zero, u=u, v=zero))
        assert schmidt_rank(psi, (3,)) == 1

    def test_bell_like(self):
        spec = SchmidtRank2Spec(
            x=Hypermatrix((2,), [1, 0]), y=Hypermatrix((2,), [0, 1]),
            u=Hypermatrix((2,), [1, 0]), v=Hypermatrix((2,), [0, 1]))
        psi = rank2_vector(spec)
        layout = ProductBasisLayout(DimVector((2,)))
        expected = _basis_vec(layout, ((1,), (1,), 1.0), ((2,), (2,), 1.0))
        assert np.array_equal(psi, expected)
        assert schmidt_rank(psi, (2,)) == 2

    @pytest.mark.parametrize("dims", [(3,), (2, 2), (2, 3)])
    def test_random_rank_at_most_two(self, dims):
        for t in range(5):
            blocks = [random_hypermatrix(dims, 10 * t + k) for k in range(4)]
            psi = rank2_vector(SchmidtRank2Spec(*blocks))
            assert schmidt_rank(psi, dims) <= 2

    def test_maximally_entangled_rank(self):
        layout = ProductBasisLayout(DimVector((3,)))
        psi = sum(_basis_vec(layout, ((i,), (i,), 1.0)) for i in range(1, 4))
        assert schmidt_rank(psi / math.sqrt(3), (3,)) == 3

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            schmidt_rank(np.zeros(4), (2,))

    def test_spec_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            SchmidtRank2Spec(
                x=Hypermatrix((2,), [1, 0]), y=Hypermatrix((3,), [1, 0, 0]),
                u=Hypermatrix((2,), [1, 0]), v=Hypermatrix((2,), [0, 1]))


class TestExpectation:
    def test_zero_operator(self):
        assert expectation(np.zeros((4, 4)), np.ones(4)) == 0.0

    def test_witness_values(self):
        d = 3
        layout = ProductBasisLayout(DimVector((d,)))
        psi_diag = _basis_vec(layout, ((1,), (1,), 1.0), ((2,), (2,), 1.0))
        psi_anti = _basis_vec(layout, ((1,), (2,), 1.0), ((2,), (1,), -1.0))
        for t in (-1.0, 0.0, 0.5, 0.75, 1.0):
            assert expectation(isotropic_operator(d, t), psi_diag) == \
                pytest.approx(2 * (1 - 2 * t), abs=1e-12)
            assert expectation(werner_state(d, t), psi_anti) == \
                pytest.approx(2 * (1 + t), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            expectation(np.eye(4), np.ones(3))

    def test_imaginary_residue_guard(self):
        # a blatantly non-Hermitian operator trips the integrity bound
        with pytest.raises(NumericalIntegrityError):
            expectation(np.array([[1j]]), np.ones(1))


class TestOracle:
    def test_zero_spec(self):
        zero = Hypermatrix.zeros((2, 2))
        chk = phi_oracle_check(SchmidtRank2Spec(zero, zero, zero, zero))
        assert chk.passed and chk.operator_value == chk.functional_value == 0.0

    @pytest.mark.parametrize("dims", [(2,), (3,), (2, 2), (2, 3), (3, 3)])
    def test_dual_path_random(self, dims):
        for t in range(10):
            blocks = [random_hypermatrix(dims, 100 * t + k) for k in range(4)]
            chk = phi_oracle_check(SchmidtRank2Spec(*blocks))
            assert chk.passed, chk


class TestThresholdSweep:
    def test_bracketing_and_signs(self):
        sweep = werner_threshold_sweep(
            2, [0.25, 0.5, 0.75], restarts=6, seed=3, max_iters=300,
            gradient="analytic")
        by_t = {p.t: p.best_value for p in sweep.points}
        assert by_t[0.25] >= -1e-8            # indistillable side
        assert abs(by_t[0.5]) <= 1e-8         # critical point
        assert by_t[0.75] == pytest.approx(1 - 2 * 0.75, abs=1e-7)
        assert sweep.crossing_bracket == (0.5, 0.75)
        assert sweep.monotone_nonincreasing

    def test_witness_reaches_closed_form_floor(self):
        # the found minimum at (d, t) can never beat 1 - 2t, and multi-restart
        # descent reaches it
        sweep = werner_threshold_sweep(3, [0.6], restarts=8, seed=1,
                                       max_iters=300, gradient="analytic")
        val = sweep.points[0].best_value
        assert val == pytest.approx(1 - 2 * 0.6, abs=1e-7)
        assert val >= (1 - 2 * 0.6) - 1e-9
