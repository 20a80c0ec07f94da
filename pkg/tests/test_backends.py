"""Compiled extension vs numpy fallback: both backends must agree on
values and gradients, and the analytic cogradients must match central
finite differences."""

import numpy as np
import pytest

from cbsforge._kernels import BACKEND, available_backends
from cbsforge.cbs import weights_by_mask

BACKENDS = available_backends()

SHAPES = [((4,), 1), ((4,), 3), ((2, 3), 2), ((2, 2, 2), 1), ((3, 3), 2)]


def _blocks(dims, n, seed=0):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    xs = rng.standard_normal((n, D)) + 1j * rng.standard_normal((n, D))
    us = rng.standard_normal((n, D)) + 1j * rng.standard_normal((n, D))
    return xs, us


def test_compiled_extension_present():
    # this build ships the extension; the fallback is for degraded installs
    import os
    assert set(BACKENDS) == {"python", "cython"}
    if not os.environ.get("CBS_FORGE_BACKEND"):
        assert BACKEND == "cython"


@pytest.mark.parametrize("dims,n", SHAPES)
def test_values_agree_across_backends(dims, n):
    xs, us = _blocks(dims, n)
    results = {name: cls(dims).values(xs, us) for name, cls in BACKENDS.items()}
    ref = results["python"]
    for name, vals in results.items():
        assert np.allclose(vals, ref, rtol=1e-13, atol=1e-13 * np.max(ref))


@pytest.mark.parametrize("dims,n", SHAPES)
def test_subset_value_matches_values(dims, n):
    xs, us = _blocks(dims, n)
    for name, cls in BACKENDS.items():
        plan = cls(dims)
        vals = plan.values(xs, us)
        for mask in range(plan.n_subsets):
            assert plan.subset_value(mask, xs, us) == pytest.approx(vals[mask], rel=1e-14)


@pytest.mark.parametrize("dims,n", [((3,), 2), ((2, 3), 2), ((2, 2, 2), 1)])
def test_cogradients_agree_across_backends(dims, n):
    xs, us = _blocks(dims, n, seed=3)
    w = weights_by_mask(len(dims), n)
    ref = None
    for name, cls in BACKENDS.items():
        vals, gx, gu = cls(dims).cogradients(w, xs, us)
        if ref is None:
            ref = (vals, gx, gu)
        else:
            for a, b in zip(ref, (vals, gx, gu)):
                assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("dims,n", [((3,), 2), ((2, 3), 2)])
def test_analytic_gradient_matches_finite_differences(name, dims, n):
    # the optional analytic gradient must track central differences to 1e-5
    xs, us = _blocks(dims, n, seed=5)
    w = weights_by_mask(len(dims), n)
    plan = BACKENDS[name](dims)
    _, gx, gu = plan.cogradients(w, xs, us)
    fgx, fgu = plan.fd_gradient(w, xs, us, 1e-6)
    ana_x = np.stack([2 * gx.real, 2 * gx.imag], axis=-1)
    ana_u = np.stack([2 * gu.real, 2 * gu.imag], axis=-1)
    scale = max(np.max(np.abs(fgx)), np.max(np.abs(fgu)))
    assert np.max(np.abs(ana_x - fgx)) <= 1e-5 * scale
    assert np.max(np.abs(ana_u - fgu)) <= 1e-5 * scale


def test_weighted_total_raw_is_plain_dot():
    xs, us = _blocks((2, 3), 2, seed=9)
    w = weights_by_mask(2, 2)
    for name, cls in BACKENDS.items():
        plan = cls((2, 3))
        assert plan.weighted_total_raw(w, xs, us) == pytest.approx(
            float(np.dot(w, plan.values(xs, us))), rel=1e-15)


def test_bad_block_shapes_rejected():
    for name, cls in BACKENDS.items():
        plan = cls((2, 2))
        xs = np.zeros((2, 3), dtype=complex)
        with pytest.raises(ValueError):
            plan.values(xs, xs)
