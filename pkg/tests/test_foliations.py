import numpy as np
import pytest

from holderlab.bunching import estimate_splitting
from holderlab.errors import HolonomyUndefinedError, TransversalityError
from holderlab.foliations import (
    bruteforce_unstable_holonomy,
    center_patch_g,
    holonomy_params,
    linear_foliation,
    linear_frame,
    strong_foliation,
    strong_leaf_points,
    strong_manifold,
    triangle_constant,
)
from holderlab.phasespace import TorusPoint, Transversal, torus_delta
from holderlab.systems import SystemSpec

GOLD = (1 + 5**0.5) / 2
VERTICAL = np.array([0.0, 1.0])


def vertical(b1, radius=0.2, b2=0.0):
    return Transversal(TorusPoint([b1, b2]), VERTICAL, radius)


def unstable_setup(sys, b_to=0.5):
    B, _ = linear_frame(sys)
    model = strong_foliation(sys, "u", 0.1)
    path = model.path(np.zeros(2), b_to / B[0, 0])
    return model, path


def test_cat_unstable_manifold_is_eigenline():
    cat = SystemSpec()
    patch = strong_manifold(cat, [0.2, 0.3], "u", r=0.1)
    e = np.array([1.0, GOLD - 1]) / np.hypot(1, GOLD - 1)
    expect = np.array([0.2, 0.3]) + patch.params[:, None] * e
    assert np.max(np.abs(patch.samples - expect)) < 1e-14
    assert patch.residual < 1e-14


def test_perturbed_stable_manifold():
    sys = SystemSpec("perturbed_anosov", delta=0.01)
    p = np.array([0.37, 0.61])
    patch = strong_manifold(sys, p, "s", r=0.1)
    assert patch.residual < 1e-6
    i0 = int(np.argmin(np.abs(patch.params)))
    e_s = estimate_splitting(sys, p).e_s
    assert 1 - abs(patch.tangents[i0] @ e_s) < 0.05
    # arclength of samples stays within radius (up to the graph's tilt)
    assert np.max(np.abs(patch.arclength)) < 0.1 * 1.05


def test_cat_holonomy_vertical_transversals():
    cat = SystemSpec()
    model, path = unstable_setup(cat)
    s = np.linspace(-0.1, 0.1, 11)
    out = holonomy_params(model, vertical(0.0), vertical(0.5, 0.5, 0.0), path, s)
    shift = 0.5 * (GOLD - 1)
    assert shift == pytest.approx(0.3090170, abs=1e-7)
    assert np.max(np.abs(out - (s + shift))) < 1e-10


def test_empty_path_is_identity():
    model, _ = unstable_setup(SystemSpec())
    tau = vertical(0.0)
    s = np.linspace(-0.1, 0.1, 5)
    assert np.array_equal(holonomy_params(model, tau, tau, np.zeros((1, 2)), s), s)


def test_perturbed_holonomy_matches_bruteforce():
    sys = SystemSpec("perturbed_anosov", delta=0.01)
    model, path = unstable_setup(sys, 0.3)
    tf = vertical(0.0, 0.1)
    tt = Transversal(TorusPoint(np.mod(path[-1], 1)), VERTICAL, 0.3)
    s = np.linspace(-0.05, 0.05, 5)
    ours = holonomy_params(model, tf, tt, path, s)
    brute = bruteforce_unstable_holonomy(sys, tf, tt, s)
    assert np.max(np.abs(ours - brute)) < 1e-6


def test_holonomy_composition():
    sys = SystemSpec("perturbed_anosov", delta=0.01)
    model, path = unstable_setup(sys, 0.4)
    k = len(path) // 2
    t0 = vertical(0.0, 0.1)
    t1 = Transversal(TorusPoint(np.mod(path[k], 1)), VERTICAL, 0.2)
    t2 = Transversal(TorusPoint(np.mod(path[-1], 1)), VERTICAL, 0.3)
    s = np.linspace(-0.05, 0.05, 7)
    direct = holonomy_params(model, t0, t2, path, s)
    mid = holonomy_params(model, t0, t1, path[: k + 1], s)
    two = holonomy_params(model, t1, t2, path[k:], mid)
    assert np.max(np.abs(direct - two)) < 1e-10


def test_holonomy_leaving_tube_reports_exit():
    cat = SystemSpec()
    model, path = unstable_setup(cat)
    with pytest.raises(HolonomyUndefinedError) as exc:
        holonomy_params(model, vertical(0.0, 0.5), vertical(0.5, 0.5), path, np.array([0.45]), tube=0.1)
    assert exc.value.exit_point is not None


def test_product_holonomy_is_isometry():
    # coordinate foliation of the product: translation along x
    model = linear_foliation([1.0, 0.0], radius=0.2)
    path = model.path(np.zeros(2), 0.6)
    s = np.linspace(-0.1, 0.1, 9)
    out = holonomy_params(model, vertical(0.0), vertical(0.6, 0.2), path, s)
    assert np.max(np.abs(out - s)) < 1e-15


def test_triangle_constant_orthogonal():
    F = linear_foliation([1.0, 0.0])
    G = linear_foliation([0.0, 1.0])
    assert triangle_constant(F, G, vertical(0.3)) == pytest.approx(1.0, abs=1e-9)
    B, _ = linear_frame(SystemSpec())
    Fu, Fs = linear_foliation(B[:, 0]), linear_foliation(B[:, 1])
    assert triangle_constant(Fu, Fs, vertical(0.3)) == pytest.approx(1.0, abs=1e-6)


def test_triangle_constant_45_degrees():
    F = linear_foliation([1.0, 0.0])
    G = linear_foliation([1.0, 1.0])
    D = triangle_constant(F, G, vertical(0.3), n_pairs=2000)
    # brute force over 10^4 independent triples
    rng = np.random.default_rng(99)
    a, b = rng.uniform(-0.05, 0.05, (2, 10000))
    e = np.array([1.0, 1.0]) / np.sqrt(2)
    y = np.column_stack([a, 0 * a])
    q = y + b[:, None] * e
    dt = np.linalg.norm(q, axis=1)
    brute = np.max(np.maximum(np.maximum(np.abs(a), np.abs(b)) / dt, dt / (np.abs(a) + np.abs(b))))
    assert D == pytest.approx(brute, rel=0.1)
    assert D == pytest.approx(1 / np.sqrt(2 - np.sqrt(2)), rel=0.1)


def test_triangle_constant_tangent():
    F = linear_foliation([1.0, 0.0])
    G = linear_foliation([1.0, 1e-5])
    with pytest.raises(TransversalityError):
        triangle_constant(F, G, vertical(0.3))


def test_center_leaf_of_f_is_vertical():
    f = SystemSpec("skew_product", eps=0.01)
    patch = center_patch_g(f, f, [0.3, 0.7], n=32)
    assert patch.residual == 0.0 or patch.residual < 1e-15
    assert np.max(np.abs(patch.samples[:, :2] - [0.3, 0.7])) < 1e-15


def test_center_leaves_of_perturbation():
    delta = 0.01
    f = SystemSpec("skew_product", eps=0.01)
    g = SystemSpec("skew_product", delta=delta, eps=0.01)
    rng = np.random.default_rng(4)
    tilts = []
    for b in rng.uniform(0, 1, (32, 2)):
        patch = center_patch_g(f, g, b, n=16)
        assert patch.residual < 1e-6
        tilts.append(np.max(np.linalg.norm(torus_delta(b, patch.samples[:, :2]), axis=1)))
    assert max(tilts) <= 5 * delta


def test_strong_leaf_points_base_at_zero():
    sys = SystemSpec("perturbed_anosov", delta=0.01)
    base = np.array([[0.1, 0.2], [0.7, 0.4]])
    assert np.allclose(strong_leaf_points(sys, base, np.zeros(2), "u"), base, atol=1e-15)


def test_center_holonomy_exponent_not_below_slices():
    from holderlab.bunching import bracketing, predicted_exponent, torus_grid
    from holderlab.estimation import fit_holder, sample_pairs
    from holderlab.foliations import center_foliation

    g = SystemSpec("perturbed_skew", delta=0.01, eps=0.01, shape="twist")
    B, _ = linear_frame(g)
    model = center_foliation(g, radius=0.1)
    path = model.path(np.array([0.3, 0.2, 0.0]), 0.25)
    assert np.ptp(path[:, 0]) > 1e-3  # leaves are tilted
    tf = Transversal(TorusPoint([0.3, 0.2, 0.0]), B[:, 0], 0.05)
    tt = Transversal(TorusPoint(np.mod(path[-1], 1)), B[:, 0], 0.1)
    smp = sample_pairs(lambda s: holonomy_params(model, tf, tt, path, s), tf, 200, 2.0**-16, 2.0**-6, seed=0)
    rep = bracketing(g, torus_grid(6, 3), n_iters=40)
    slices = min(predicted_exponent(rep, c).theta_max for c in ("Ecu", "Ecs"))
    assert fit_holder(smp).theta_hat >= slices - 0.05
