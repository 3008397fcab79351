import numpy as np
import pytest

from holderlab.errors import DomainError, NonConvergenceError, OutOfRangeError
from holderlab.phasespace import QuotientPoint, TorusPoint, torus_delta, torus_dist
from holderlab.systems import (
    SuspensionLoop,
    SystemSpec,
    apply,
    apply_inverse,
    c0_distance,
    derivative,
    finite_difference_jacobian,
    jacobian,
    suspension_slice,
)


def test_cat_map_image(cat):
    assert np.allclose(apply(cat, TorusPoint([0.5, 0.5])).coords, [0.5, 0.0])


def test_zero_perturbation_matches_linear(cat, rng):
    p = rng.uniform(0, 1, (100, 2))
    assert np.array_equal(apply(SystemSpec("perturbed_anosov", delta=0.0), p), apply(cat, p))


def test_skew_fiber_rule():
    sys = SystemSpec("skew_product", eps=0.1)
    z = apply(sys, TorusPoint([0.25, 0.0, 0.5])).coords[2]
    assert z == pytest.approx(0.6, abs=1e-15)


def test_dimension_mismatch(cat):
    with pytest.raises(DomainError):
        apply(cat, np.zeros(3))


@pytest.mark.parametrize(
    "kw",
    [dict(matrix=((1, 1), (0, 1))), dict(matrix=((2, 0), (0, 1))), dict(delta=-1.0), dict(kind="nope"), dict(shape="odd")],
)
def test_spec_validation(kw):
    with pytest.raises(DomainError):
        SystemSpec(**kw)


def test_derivative_examples(cat):
    jet = derivative(cat, TorusPoint([0.3, 0.9]))
    assert np.array_equal(jet.derivative, cat.A)
    J = jacobian(SystemSpec("skew_product"), np.array([0.1, 0.2, 0.3]))
    assert np.array_equal(J, np.block([[cat.A, np.zeros((2, 1))], [np.zeros((1, 2)), np.ones((1, 1))]]))


@pytest.mark.parametrize(
    "sys",
    [
        SystemSpec("perturbed_anosov", delta=0.01),
        SystemSpec("skew_product", delta=0.01, eps=0.02),
        SystemSpec("skew_product", eps=0.02, shape="twist"),
        SystemSpec("perturbed_skew", delta=0.01, eps=0.01, shape="twist"),
        SystemSpec("quotient_cat"),
    ],
)
def test_derivative_matches_finite_differences(sys, rng):
    x = rng.uniform(0, 1, (100, sys.dim))
    err = np.abs(jacobian(sys, x) - finite_difference_jacobian(sys, x, h=1e-6))
    assert err.max() < 1e-6


def test_inverse_examples(cat):
    assert np.allclose(apply_inverse(cat, TorusPoint([0.5, 0.0])).coords, [0.5, 0.5])
    assert np.allclose(cat.A_inv, [[1, -1], [-1, 2]])


@pytest.mark.parametrize(
    "sys",
    [SystemSpec("perturbed_anosov", delta=0.01), SystemSpec("perturbed_skew", delta=0.01, eps=0.01, shape="twist")],
)
def test_inverse_round_trip(sys, rng):
    p = rng.uniform(0, 1, (100, sys.dim))
    q = apply(sys, apply_inverse(sys, p))
    assert torus_dist(p, q).max() < 1e-12


def test_inverse_newton_steps_on_grid(perturbed):
    g = np.stack(np.meshgrid(np.arange(64) / 64, np.arange(64) / 64, indexing="ij"), -1).reshape(-1, 2)
    x, steps = apply_inverse(perturbed, g, return_steps=True)
    assert steps <= 6
    assert torus_dist(apply(perturbed, x), g).max() < 1e-12


def test_inverse_fails_for_huge_perturbation():
    sys = SystemSpec("perturbed_anosov", delta=5.0)
    with pytest.raises(NonConvergenceError):
        apply_inverse(sys, np.random.default_rng(0).uniform(0, 1, (500, 2)), max_steps=50)


def test_quotient_commutes_with_gluing(rng):
    sys = SystemSpec("quotient_cat")
    v = rng.uniform(0, 1, (50, 2))
    for a in v:
        p = QuotientPoint(a, 0.0)
        glued = QuotientPoint(-a, 1.0)
        assert apply(sys, p) == apply(sys, glued)


def test_vertical_circles_map_to_vertical_circles(rng):
    sys = SystemSpec("skew_product", delta=0.01, eps=0.02, shape="twist")
    b = rng.uniform(0, 1, 2)
    z = np.linspace(0, 1, 17)
    img = apply(sys, np.column_stack([np.tile(b, (17, 1)), z]))
    assert np.ptp(img[:, 0]) < 1e-15 and np.ptp(img[:, 1]) < 1e-15


def test_suspension_endpoints_and_continuity():
    f = SystemSpec("skew_product", eps=0.01)
    g = SystemSpec("skew_product", delta=0.01, eps=0.01)
    loop = SuspensionLoop(f, g)
    assert suspension_slice(loop, 0.0) == f
    assert suspension_slice(loop, 1.0) == g
    with pytest.raises(OutOfRangeError):
        suspension_slice(loop, 2.0)
    # C0 distance of consecutive slices ~ |beta'(t)| delta dt
    dt = 1e-3
    for t in (0.3, 0.5, 0.7, 1.4):
        d = c0_distance(suspension_slice(loop, t), suspension_slice(loop, t + dt), n=24)
        rate = abs(float(loop.bump.derivative(t + dt / 2))) * 0.01
        assert d / dt == pytest.approx(rate, rel=0.2)


def test_bump_shape():
    loop = SuspensionLoop(SystemSpec(), SystemSpec("perturbed_anosov", delta=0.01))
    assert loop.bump(0.0) == 0 and loop.bump(1.0) == pytest.approx(1) and abs(loop.bump(2.0)) < 1e-30


def test_wrapped_delta_small_for_small_perturbation(cat, perturbed, rng):
    x = rng.uniform(0, 1, (200, 2))
    assert np.abs(torus_delta(apply(cat, x), apply(perturbed, x))).max() <= 0.01 + 1e-15
