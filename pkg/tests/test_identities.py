import math

import numpy as np
import pytest

from torsionlab.geometry import DomainSpec, Hole, build_quadratures, random_interior_points
from torsionlab.identities import (
    OverdeterminationError,
    cauchy_schwarz_deficit,
    check_divergence,
    check_fundamental,
    check_overdetermined,
    check_pohozaev,
    compute_flux_constant,
    p_function,
)
from torsionlab.solver import (
    evaluate,
    overdetermined_instance,
    radial_reference,
    solve_dirichlet,
)


# ---------------------------------------------------------------------------
# P-function and deficit
# ---------------------------------------------------------------------------


def test_p_function_radial_constant(annulus_model, rng):
    # |x|^2/4 - (1/2)(|x|^2-1)/2 = 1/4 everywhere
    pts = rng.uniform(-0.6, 0.6, size=(50, 2))
    vals = p_function(annulus_model, pts)
    assert np.max(np.abs(vals - 0.25)) <= 1e-14


def test_p_function_is_squared_flux_on_outer_curve(ball_quads):
    spec = DomainSpec(1.0, ((3, 0.05),))
    model, diag = solve_dirichlet(spec, 64, 1.8)
    quads = build_quadratures(spec, 128, 24)
    bq = quads.bounds.gamma
    _, grad, _ = evaluate(model, bq.nodes)
    u_nu = np.sum(grad * bq.normals, axis=1)
    vals = p_function(model, bq.nodes)
    # equality holds up to the fitted field's boundary residual (u = 0 there)
    assert np.max(np.abs(vals - u_nu**2)) <= max(1e-12, 2.0 * diag.max_residual)


def test_p_function_matches_direct_composition(rng):
    spec = DomainSpec(1.0, ((2, 0.06),))
    model, _ = solve_dirichlet(spec, 64, 1.8)
    pts = random_interior_points(spec, 200, rng)
    u, grad, _ = evaluate(model, pts)
    direct = np.sum(grad * grad, axis=1) - u
    assert np.max(np.abs(p_function(model, pts) - direct)) <= 1e-12


def test_deficit_zero_for_radial(annulus_model, rng):
    pts = rng.uniform(-0.5, 0.5, size=(100, 2))
    assert np.max(np.abs(cauchy_schwarz_deficit(annulus_model, pts))) <= 1e-14


def test_deficit_equals_companion_hessian_norm(rng):
    spec = DomainSpec(1.0, ((3, 0.06),))
    model, _ = solve_dirichlet(spec, 64, 1.8)
    pts = random_interior_points(spec, 300, rng)
    _, _, hess = evaluate(model, pts)
    h_hess = np.eye(2) / 2.0 - hess  # Hessian of quadratic - u
    frob_h = np.sum(h_hess * h_hess, axis=(1, 2))
    assert np.max(np.abs(cauchy_schwarz_deficit(model, pts) - frob_h)) <= 1e-12


def test_deficit_nonzero_off_radial():
    inst = overdetermined_instance(0.02)
    vals = cauchy_schwarz_deficit(inst.model, np.array([[0.8, 0.0], [0.0, 0.6]]))
    assert np.max(vals) > 1e-9  # only the radial family has zero deficit


def test_deficit_self_convergence_oracle():
    # value at a probe differs between resolutions only through the solve
    spec = DomainSpec(1.0, ((3, 0.05),))
    # a Dirichlet fit (the pure continuation has a rigidity floor)
    m1, _ = solve_dirichlet(spec, 64, 1.8)
    m8, _ = solve_dirichlet(spec, 256, 1.8)
    v1 = cauchy_schwarz_deficit(m1, (0.8, 0.0))
    v8 = cauchy_schwarz_deficit(m8, (0.8, 0.0))
    assert abs(v1 - v8) <= 1e-6


# ---------------------------------------------------------------------------
# Radial family: hand-computed values
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("rho", [0.1, 0.2, 0.4])
def test_pohozaev_radial_annulus(rho):
    spec = DomainSpec(1.0, holes=(Hole((0.0, 0.0), rho, (rho**2 - 1) / 4.0),))
    quads = build_quadratures(spec, 256, 48)
    model = radial_reference(1.0).as_field_model()
    rep = check_pohozaev(model, spec, quads)
    exact = (math.pi / 2.0) * (1.0 - rho**4)  # 4 * integral of |x|^2/4
    assert abs(rep.lhs - exact) <= 1e-12
    assert abs(rep.rhs - exact) <= 1e-12
    assert rep.rel_residual <= 1e-8


def test_pohozaev_ball(ball, ball_quads):
    model = radial_reference(1.0).as_field_model()
    rep = check_pohozaev(model, ball, ball_quads)
    assert abs(rep.lhs - math.pi / 2.0) <= 1e-12
    assert rep.rel_residual <= 1e-8


def test_fundamental_ball_both_sides_vanish(ball, ball_quads):
    model = radial_reference(1.0).as_field_model()
    rep = check_fundamental(model, ball, ball_quads)
    assert abs(rep.lhs) <= 1e-9 and abs(rep.rhs) <= 1e-9


def test_fundamental_radial_hole_terms_vanish_pointwise(annulus, annulus_quads, annulus_model):
    rep = check_fundamental(annulus_model, annulus, annulus_quads)
    for key, val in rep.breakdown.items():
        assert abs(val) <= 1e-9, key
    assert rep.rel_residual <= 1e-9


@pytest.mark.parametrize("rho", [0.1, 0.2, 0.4])
def test_overdetermined_radial_groups_vanish(rho):
    spec = DomainSpec(1.0, holes=(Hole((0.0, 0.0), rho, (rho**2 - 1) / 4.0),))
    quads = build_quadratures(spec, 256, 48)
    model = radial_reference(1.0).as_field_model()
    rep = check_overdetermined(model, spec, 0.5, quads)
    for key, val in rep.breakdown.items():
        assert abs(val) <= 1e-9, key
    assert rep.rel_residual <= 1e-8
    assert abs(rep.extras["flux_identity_residual"]) <= 1e-9


# ---------------------------------------------------------------------------
# Generic instances
# ---------------------------------------------------------------------------


def test_generic_dirichlet_residuals_and_convergence():
    spec = DomainSpec(1.0, ((3, 0.1),), (Hole((0.3, 0.1), 0.15, -0.05),))
    model, _ = solve_dirichlet(spec, 96, 1.8)
    coarse = build_quadratures(spec, 64, 12)
    fine = build_quadratures(spec, 128, 24)
    for checker in (check_pohozaev, check_fundamental):
        r_coarse = checker(model, spec, coarse)
        r_fine = checker(model, spec, fine)
        assert r_coarse.rel_residual <= 1e-4
        assert r_fine.rel_residual <= r_coarse.rel_residual / 4.0


def test_identities_with_two_holes():
    # the hole set need not be connected: every identity closes per component
    spec = DomainSpec(
        1.0,
        ((2, 0.05),),
        (Hole((0.4, 0.0), 0.12, -0.05), Hole((-0.35, 0.2), 0.1, -0.02)),
    )
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 192, 32)
    assert check_pohozaev(model, spec, quads).rel_residual <= 1e-4
    assert check_fundamental(model, spec, quads).rel_residual <= 1e-4
    div = check_divergence(spec, quads)
    assert div.rel_residual <= 1e-8
    assert abs(div.breakdown["hole_0"] + math.pi * 0.12**2) <= 1e-10
    assert abs(div.breakdown["hole_1"] + math.pi * 0.1**2) <= 1e-10


def test_fundamental_lhs_nonnegative_when_u_nonpositive():
    spec = DomainSpec(1.0, ((3, 0.08),), (Hole((0.25, 0.0), 0.12, -0.04),))
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 128, 24)
    rep = check_fundamental(model, spec, quads)
    assert rep.lhs >= -1e-12


def test_overdetermined_instance_identity():
    inst = overdetermined_instance(0.02)
    quads = build_quadratures(inst.spec, 256, 48)
    rep = check_overdetermined(inst.model, inst.spec, inst.c, quads)
    assert rep.rel_residual <= 1e-3
    assert abs(rep.extras["flux_identity_residual"]) <= 1e-6


def test_overdetermined_refuses_dirichlet_instance():
    spec = DomainSpec(1.0, ((3, 0.1),), (Hole((0.3, 0.1), 0.15, -0.05),))
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 128, 24)
    with pytest.raises(OverdeterminationError):
        check_overdetermined(model, spec, 0.5, quads)


def test_breakdown_sums_to_rhs():
    spec = DomainSpec(1.0, ((3, 0.1),), (Hole((0.3, 0.1), 0.15, -0.05),))
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 128, 24)
    for rep in (
        check_pohozaev(model, spec, quads),
        check_fundamental(model, spec, quads),
        check_divergence(spec, quads),
    ):
        assert abs(sum(rep.breakdown.values()) - rep.rhs) <= 1e-12


def test_divergence_orientation_guard(annulus, annulus_quads):
    rep = check_divergence(annulus, annulus_quads)
    assert abs(rep.breakdown["gamma"] - math.pi) <= 1e-10
    assert abs(rep.breakdown["hole_0"] + math.pi * 0.04) <= 1e-12
    assert rep.rel_residual <= 1e-10


# ---------------------------------------------------------------------------
# Flux constant
# ---------------------------------------------------------------------------


def test_flux_constant_radial_annulus(annulus, annulus_quads, annulus_model):
    fc = compute_flux_constant(annulus, annulus_model, annulus_quads)
    # hole flux integral is -rho/2 * 2 pi rho = -0.04 pi; c = (0.96pi + 0.04pi)/2pi
    assert abs(fc.from_divergence - 0.5) <= 1e-12
    assert abs(fc.from_average - 0.5) <= 1e-12
    assert not fc.inconsistent


def test_flux_constant_ball_scaling():
    spec = DomainSpec(2.0)
    quads = build_quadratures(spec, 256, 48)
    model = radial_reference(2.0).as_field_model()
    fc = compute_flux_constant(spec, model, quads)
    assert abs(fc.from_divergence - 1.0) <= 1e-12  # R/N = 2/2


def test_flux_constant_flags_inconsistency(ball):
    # mismatching inputs (quadratures built for a different curve than the
    # spec's closed-form areas) must trip the consistency flag
    model = radial_reference(1.0).as_field_model()
    wrong_quads = build_quadratures(DomainSpec(0.95), 128, 24)
    fc = compute_flux_constant(ball, model, wrong_quads)
    assert fc.inconsistent


def test_value_c_identity(annulus, annulus_quads, annulus_model):
    from torsionlab.identities import check_value_c

    rep = check_value_c(annulus_model, annulus, annulus_quads)
    # outer flux pi = 0.96 pi (areas) + 0.04 pi (hole flux, sign flipped)
    assert abs(rep.lhs - math.pi) <= 1e-12
    assert rep.rel_residual <= 1e-12
    assert abs(sum(rep.breakdown.values()) - rep.rhs) <= 1e-12


def test_value_c_identity_generic():
    from torsionlab.identities import check_value_c

    spec = DomainSpec(1.0, ((3, 0.1),), (Hole((0.3, 0.1), 0.15, -0.05),))
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 192, 32)
    assert check_value_c(model, spec, quads).rel_residual <= 1e-8
