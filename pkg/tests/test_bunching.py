import warnings

import numpy as np
import pytest

from holderlab.bunching import (
    BracketingReport,
    bracketing,
    conorm,
    estimate_splitting,
    exact_splitting_linear,
    predicted_exponent,
    torus_grid,
    validate_system,
)
from holderlab.errors import ConditionViolatedError, DomainError
from holderlab.systems import SystemSpec

GOLD = (1 + 5**0.5) / 2


def test_conorm_examples():
    assert conorm(np.eye(2)) == pytest.approx(1)
    assert conorm(np.diag([2.0, 3.0])) == pytest.approx(2)
    assert conorm([[2, 1], [1, 1]]) == pytest.approx(0.3819660, abs=1e-7)
    with pytest.raises(DomainError):
        conorm([[1, 2], [2, 4]])


def test_exact_splitting_cat():
    fr = exact_splitting_linear([[2, 1], [1, 1]])
    assert fr.eigenvalues[0] == pytest.approx(2.6180340, abs=1e-7)
    assert fr.e_u[1] / fr.e_u[0] == pytest.approx(GOLD - 1, abs=1e-12)
    assert fr.e_s[1] / fr.e_s[0] == pytest.approx(-GOLD, abs=1e-12)
    assert abs(fr.e_u @ fr.e_s) < 1e-15
    assert np.linalg.norm(fr.e_u) == pytest.approx(1, abs=1e-12)
    with pytest.raises(DomainError):
        exact_splitting_linear([[1, 1], [0, 1]])


def test_power_iteration_recovers_eigenvectors():
    fr = exact_splitting_linear([[2, 1], [1, 1]])
    # the product system goes through the orbit-push estimate
    est = estimate_splitting(SystemSpec("skew_product"), [0.3, 0.7, 0.1])
    assert np.allclose(est.e_u, np.r_[fr.e_u, 0], atol=1e-10)
    assert np.allclose(est.e_s, np.r_[fr.e_s, 0], atol=1e-10)
    assert np.allclose(est.e_c, [0.0, 0.0, 1.0], atol=1e-15)


def test_perturbed_splitting_residual_small():
    fr = estimate_splitting(SystemSpec("perturbed_anosov", delta=0.01), [0.21, 0.43])
    assert fr.residual < 1e-8
    for v in (fr.e_u, fr.e_s):
        assert np.linalg.norm(v) == pytest.approx(1, abs=1e-10)


def test_bracketing_cat_constant():
    rep = bracketing(SystemSpec(), torus_grid(8, 2), margin=0.0)
    assert np.allclose(rep.pointwise["mu"], 0.3819660, atol=1e-7)
    assert np.allclose(rep.pointwise["nu"], rep.pointwise["mu"])
    assert np.allclose(rep.lam, 1 / rep.pointwise["nuhat"])


def test_bracketing_skew_twist():
    eps = 0.01
    sys = SystemSpec("skew_product", eps=eps, shape="twist")
    rep = bracketing(sys, torus_grid(16, 3), margin=1e-6)
    assert rep.uniform["gamma"] == pytest.approx(1 - 2 * np.pi * eps - 1e-6, abs=1e-9)
    assert 1 / rep.uniform["gammahat"] == pytest.approx(1 + 2 * np.pi * eps + 1e-6, abs=1e-9)
    assert rep.check_ordering()


def test_product_system_lambda_muhat():
    rep = bracketing(SystemSpec("skew_product"), torus_grid(4, 3), margin=0.0)
    assert np.allclose(rep.lam * rep.pointwise["muhat"], 1.0, atol=1e-12)


def test_pointwise_ordering_perturbed():
    rep = bracketing(SystemSpec("perturbed_skew", delta=0.01, eps=0.01, shape="twist"), torus_grid(6, 3))
    pw = rep.pointwise
    assert np.all((0 < pw["mu"]) & (pw["mu"] < pw["nu"]) & (pw["nu"] < 1))
    assert np.all(pw["nu"] < pw["gamma"]) and np.all(1 / pw["gammahat"] < 1 / pw["nuhat"])


def test_ordering_violation_rejected():
    # a fiber twist of 2 pi eps = 0.75 pushes gamma below nu
    sys = SystemSpec("skew_product", eps=0.12, shape="twist")
    grid = torus_grid(6, 3)
    fr = exact_splitting_linear(sys.A)
    m = grid.shape[0]
    frames = (np.tile(np.r_[fr.e_u, 0], (m, 1)), np.tile([0.0, 0, 1], (m, 1)), np.tile(np.r_[fr.e_s, 0], (m, 1)))
    with pytest.raises(ConditionViolatedError):
        bracketing(sys, grid, frames)


def test_validate_accepts_small_twist():
    rep = validate_system(SystemSpec("skew_product", eps=0.01, shape="twist"), n=6)
    assert rep.uniform["nu"] * 1.1 < rep.uniform["gamma"]


def test_predicted_cat_thmA():
    rep = bracketing(SystemSpec(), torus_grid(8, 2), margin=0.0)
    assert predicted_exponent(rep, "ThmA_cu").theta_max == pytest.approx(1.0, abs=1e-12)


def test_predicted_es_example():
    rep = BracketingReport.from_constants(mu=0.3, nu=0.382, gamma=0.9, muhat=0.35)
    th = predicted_exponent(rep, "Es").theta_max
    assert th == pytest.approx(np.log(0.382 / 0.9) / np.log(0.35), abs=1e-12)
    # the printed value 0.8162 is truncated; the exact value is 0.81630...
    assert th == pytest.approx(0.8162, abs=1e-3)


def test_predicted_shear_map_data():
    rep = BracketingReport.from_constants(mu=1 / 9, nu=1 / 3)
    assert predicted_exponent(rep, "ThmA_cu").theta_max == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("cond", ["Eu", "Es", "Ecu", "Ecs", "Ec", "Wu_C1", "Ws_C1", "ThmA_cu", "ThmA_cs", "ThmB_full"])
def test_theta_max_is_supremum(cond):
    rep = bracketing(SystemSpec("skew_product", eps=0.01, shape="twist"), torus_grid(6, 3))
    pe = predicted_exponent(rep, cond)
    if pe.theta_max < 1:
        assert pe.holds(pe.theta_max - 1e-9)
        assert not pe.holds(pe.theta_max + 1e-9)
    else:
        assert pe.holds(1.0 - 1e-9)


def test_pointwise_mode_not_below_uniform():
    rep = bracketing(SystemSpec("perturbed_anosov", delta=0.01), torus_grid(8, 2))
    u = predicted_exponent(rep, "ThmA_cu").theta_max
    p = predicted_exponent(rep, "ThmA_cu", mode="pointwise").theta_max
    assert p >= u - 1e-12


def test_monotonicity_in_nu_and_mu():
    prev = 2.0
    for nu in np.linspace(0.2, 0.6, 9):
        th = predicted_exponent(BracketingReport.from_constants(mu=0.1, nu=nu), "ThmA_cu").theta_max
        assert th <= prev
        prev = th
    prev = 0.0
    for mu in np.linspace(0.05, 0.19, 8):
        th = predicted_exponent(BracketingReport.from_constants(mu=mu, nu=0.2), "ThmA_cu").theta_max
        assert th >= prev
        prev = th


def test_unsatisfiable_condition_warns():
    rep = BracketingReport.from_constants(mu=0.3, nu=0.95, gamma=0.9)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        pe = predicted_exponent(rep, "Es")
    assert pe.theta_max == 0 and not pe.satisfiable and w


def test_unknown_condition():
    with pytest.raises(DomainError):
        predicted_exponent(BracketingReport.from_constants(mu=0.1, nu=0.2), "nope")


def test_report_csv(tmp_path):
    rep = bracketing(SystemSpec(), torus_grid(2, 2))
    rep.to_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,mu,nu,gamma,gammahat,nuhat,muhat"
    assert len(lines) == 5
