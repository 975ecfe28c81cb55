import math

import numpy as np
import pytest

from gammaflow import curvature as cc
from gammaflow import diagnostics as dg
from gammaflow import exact
from gammaflow import geometry as geo
from gammaflow import profiles as pr
from gammaflow.errors import (DegenerateGrid, DomainError, InterpolationRange, RootBracketFailure,
                              StepTooLarge)

Spec = cc.CurvatureSpec


@pytest.fixture(scope="module")
def mean_bowl():
    return pr.shoot_bowl(Spec.mean(2), r_max=3.0, step=1e-2)


# -- Grim IVP ----------------------------------------------------------------------------

def test_grim_ivp_examples():
    sol = pr.solve_grim_ivp(0.0, 0.0, 1e-3, x_max=1.2)
    i = int(np.argmin(np.abs(sol.abscissa - math.pi / 4)))
    x = sol.abscissa[i]
    assert sol.u[i] == pytest.approx(-math.log(math.cos(x)), abs=1e-10)
    fine = pr.solve_grim_ivp(0.0, 0.0, math.pi / 4 / 800, x_max=math.pi / 4 + 1e-9)
    assert fine.u[-1] == pytest.approx(0.346574, abs=1e-6)
    assert fine.du[-1] == pytest.approx(1.0, abs=1e-10)
    assert sol.u[0] == 0.0 and sol.du[0] == 0.0


def test_grim_ivp_matches_closed_form():
    sol = pr.solve_grim_ivp(0.0, 0.5, 1e-3, x_max=1.2)
    u, du = pr.grim_closed_form(sol.abscissa, 0.0, 0.5)
    assert np.max(np.abs(sol.u - u)) < 1e-12
    assert np.max(np.abs(sol.du - du)) < 1e-11
    assert np.max(np.abs(sol.residual)) < 1e-12


def test_tilted_ivp_is_a_rescaled_grim():
    a = 1.0
    b = math.sqrt(2.0)
    sol = pr.solve_grim_ivp(a, 0.0, 1e-3, x_max=1.5)
    u0, _ = pr.grim_closed_form(sol.abscissa / b)
    np.testing.assert_allclose(sol.u, b * b * u0, atol=1e-12)
    # profile curvature reproduces the exact tilted cylinder
    g = exact.GrimSpec(b * math.pi, 2)
    pts = np.stack([sol.abscissa + g.omega / 2, np.zeros_like(sol.abscissa)], axis=1)
    np.testing.assert_allclose(sol.lam[:, 0], exact.grim_shape(g, pts).lam[:, -1], atol=1e-11)


def test_grim_ivp_fourth_order():
    errs = []
    for step in (0.1, 0.05, 0.025):
        sol = pr.solve_grim_ivp(0.0, 0.0, step, x_max=1.2 + 1e-9, rtol=1.0)
        u, _ = pr.grim_closed_form(sol.abscissa)
        errs.append(np.max(np.abs(sol.u - u)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(14 <= r <= 18 for r in ratios), ratios


def test_grim_ivp_error_control():
    with pytest.raises(StepTooLarge):
        pr.solve_grim_ivp(0.0, 0.0, 0.1, x_max=1.55)
    with pytest.raises(DomainError):
        pr.solve_grim_ivp(0.0, 0.0, 0.01, x_max=math.pi / 2)
    with pytest.raises(DomainError):
        pr.solve_grim_ivp(0.0, 0.0, -0.01)
    auto = pr.solve_grim_ivp(0.0, 0.0, 1e-2)
    assert 1.3 < auto.abscissa[-1] < math.pi / 2
    assert auto.metadata["max_local_error"] <= 1e-6


# -- radial root solve ---------------------------------------------------------------------

def test_radial_root_solve():
    for spec in cc.catalog(3):
        if cc.classify(spec, sample_count=64).monotone:
            k = pr.solve_radial_curvature(spec, 0.2, 0.9)
            lam = np.array([k, 0.2, 0.2])
            assert cc.eval_gamma(spec, lam) == pytest.approx(0.9, abs=1e-11)
    with pytest.raises(RootBracketFailure) as info:
        pr.solve_radial_curvature(Spec.power_mean(3, 2), 0.8, 0.5)
    assert info.value.interval == (0.0, 0.0)


# -- bowl --------------------------------------------------------------------------------------

def test_bowl_tip(mean_bowl):
    assert mean_bowl.ddu[0] == pytest.approx(0.5, abs=1e-12)
    assert mean_bowl.lam[0, 0] == mean_bowl.lam[0, 1] == pytest.approx(0.5)
    assert mean_bowl.metadata["tip_curvature"] == 0.5
    # first node lies on the tip series
    assert mean_bowl.lam[1, 0] == pytest.approx(0.5, abs=1e-4)


def test_bowl_tip_curvature_per_spec():
    for n in (2, 3):
        for spec in cc.catalog(n):
            assert pr.tip_curvature(spec) == pytest.approx(1.0 / cc.eval_gamma(spec, np.ones(n)))
    assert pr.tip_curvature(Spec.mean(3)) == pytest.approx(1 / 3)


def test_bowl_residual_and_shape(mean_bowl):
    assert np.max(np.abs(mean_bowl.residual)) < 1e-8
    assert np.all(np.diff(mean_bowl.du) > 0)
    assert np.all(mean_bowl.lam > 0)
    assert mean_bowl.metadata["max_local_error"] < 1e-6


def test_bowl_du_is_derivative_of_u(mean_bowl):
    r, u = mean_bowl.abscissa, mean_bowl.u
    step = r[1] - r[0]
    fd = (u[2:] - u[:-2]) / (2 * step)
    assert np.max(np.abs(fd - mean_bowl.du[1:-1])) < 10 * step**2


def test_bowl_converges_under_refinement():
    coarse = pr.shoot_bowl(Spec.mean(2), r_max=2.0, step=0.04)
    fine = pr.shoot_bowl(Spec.mean(2), r_max=2.0, step=0.02)
    assert abs(coarse.u[-1] - fine.u[-1]) < 1e-6


def test_bowl_for_each_normalised_gamma():
    for spec in (Spec.sigma_k_root(2, 3), Spec.gauss_root(2), Spec.power_mean(1, 2)):
        sol = pr.shoot_bowl(spec, r_max=2.0, step=2e-2)
        assert np.max(np.abs(sol.residual)) < 1e-8, spec.label()
        assert np.all(sol.lam[1:] > 0)


def test_combo_tip_is_linear_in_t():
    inner = Spec.gauss_root(3)
    inv = [1.0 / pr.tip_curvature(Spec.convex_combo(t, inner)) for t in (0.25, 0.5, 0.75, 1.0)]
    second = np.diff(inv, 2)
    assert np.max(np.abs(second)) < 1e-12


def test_bowl_rejects_bad_input():
    with pytest.raises(DomainError):
        pr.shoot_bowl(Spec.mean(1))
    with pytest.raises(DomainError):
        pr.shoot_bowl(Spec.mean(2), r_max=1e-3, step=1e-2)
    with pytest.raises(RootBracketFailure):
        pr.shoot_bowl(Spec.power_mean(3, 2), r_max=20.0, step=1e-2)


# -- profiles to patches ---------------------------------------------------------------------

def test_grim_profile_patch_matches_closed_form():
    g = exact.GrimSpec(math.pi, 2)
    sol = pr.solve_grim_ivp(0.0, 0.0, 1e-3, x_max=1.3)
    patch = pr.profile_to_patch(sol, 2, (41, 9), extent=1.2)
    assert patch.boundary_policy is geo.BoundaryPolicy.CLAMPED
    assert patch.lower[0] == pytest.approx(math.pi / 2 - 1.2)
    ref = g.height(patch.points())
    assert np.max(np.abs(patch.u - ref)) < 1e-11


def test_tilted_grim_profile_patch():
    a = 1.0
    g = exact.GrimSpec(math.sqrt(2) * math.pi, 2)
    sol = pr.solve_grim_ivp(a, 0.0, 1e-3, x_max=2.0)
    patch = pr.profile_to_patch(sol, 2, (31, 7), extent=1.8)
    assert np.max(np.abs(patch.u - g.height(patch.points()))) < 1e-10


def test_bowl_patch_is_convex(mean_bowl):
    patch = pr.profile_to_patch(mean_bowl, 2, 41, extent=1.5)
    shape = geo.shape_field(patch)
    scan = dg.convexity_scan(shape)
    assert scan.min_lambda > 0
    assert scan.negative_count == 0
    # the tip sits at the centre with the bowl curvature
    mid = 20
    np.testing.assert_allclose(shape.lam[mid, mid], [0.5, 0.5], atol=2e-3)


def test_profile_patch_range_checks(mean_bowl):
    with pytest.raises(InterpolationRange):
        pr.profile_to_patch(mean_bowl, 2, 21, extent=2.5)
    with pytest.raises(DegenerateGrid):
        pr.profile_to_patch(mean_bowl, 2, 4, extent=1.0)
    grim = pr.solve_grim_ivp(0.0, 0.0, 1e-2, x_max=1.0)
    with pytest.raises(InterpolationRange):
        pr.profile_to_patch(grim, 1, 21, extent=1.1)
    src = pr.ProfileSource(mean_bowl, 2)
    with pytest.raises(InterpolationRange):
        src.height(np.array([[3.5, 0.0]]))


def test_curvature_vectors(mean_bowl):
    v = mean_bowl.curvature_vectors(4)
    assert v.shape == (len(mean_bowl.abscissa), 4)
    np.testing.assert_array_equal(v[:, 0], mean_bowl.lam[:, 0])
    np.testing.assert_array_equal(v[:, 3], mean_bowl.lam[:, 1])
