import math

import numpy as np
import pytest

from torsionlab.geometry import DomainSpec, build_quadratures
from torsionlab.identities import compute_flux_constant
from torsionlab.shapeflow import (
    energy,
    final_roundness,
    flow_to_constant_flux,
    perturb_radially,
    shape_gradient,
)
from torsionlab.solver import normal_derivative, solve_dirichlet
from torsionlab.stability import pseudo_distance


def _volume_projected(spec, coeffs, n=1024):
    """Normal-velocity callable with the dS-weighted mean removed."""
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    w = spec.boundary_speed(theta) * (2.0 * math.pi / n)
    field = np.zeros(n)
    for (kind, k), amp in coeffs.items():
        field += amp * (np.cos(k * theta) if kind == "cos" else np.sin(k * theta))
    mean = float(np.sum(field * w) / np.sum(w))

    def fn(th):
        out = np.zeros_like(th)
        for (kind, k), amp in coeffs.items():
            out += amp * (np.cos(k * th) if kind == "cos" else np.sin(k * th))
        return out - mean

    return fn


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


def test_energy_unit_ball():
    assert abs(energy(DomainSpec(1.0)) - math.pi / 16.0) <= 1e-10


def test_energy_scaling():
    # I(B_R) = pi R^4 / 16
    assert abs(energy(DomainSpec(2.0)) - math.pi) <= 1e-9


def test_energy_self_convergence():
    spec = DomainSpec(1.0 / math.sqrt(1.0 + 0.05**2 / 2.0), ((2, 0.05),))  # area pi
    coarse = energy(spec, n_src_per_ring=64, n_theta=128, n_r=24)
    oracle = energy(spec, n_src_per_ring=192, n_theta=1024, n_r=96)
    assert abs(coarse - oracle) <= 1e-5


# ---------------------------------------------------------------------------
# Shape gradient
# ---------------------------------------------------------------------------


def test_ball_is_stationary():
    sg = shape_gradient(
        DomainSpec(1.0),
        {("cos", 2): 1.0, ("cos", 3): 0.4},
        mode_basis=(("cos", 2), ("cos", 3), ("sin", 2)),
    )
    assert abs(sg.derivative) <= 1e-9
    for val in sg.mode_gradient.values():
        assert abs(val) <= 1e-9


def test_gradient_matches_central_difference():
    spec = DomainSpec(1.0, ((2, 0.05),))
    sg = shape_gradient(spec, {("cos", 2): 1.0})
    fn = _volume_projected(spec, {("cos", 2): 1.0})
    t = 1e-4
    fd = (energy(perturb_radially(spec, fn, t)) - energy(perturb_radially(spec, fn, -t))) / (2 * t)
    assert abs(sg.derivative - fd) / (abs(fd) + 1e-12) <= 1e-4


def test_gradient_fd_random_fields(rng):
    specs = [DomainSpec(1.0, ((2, 0.05),)), DomainSpec(1.0, ((3, 0.04), (2, 0.02)))]
    t = 1e-4
    checked = 0
    for spec in specs:
        for _ in range(3):
            coeffs = {("cos", int(k)): float(rng.uniform(-1, 1)) for k in rng.choice([1, 2, 3, 4], 2, replace=False)}
            sg = shape_gradient(spec, coeffs)
            fn = _volume_projected(spec, coeffs)
            fd = (
                energy(perturb_radially(spec, fn, t)) - energy(perturb_radially(spec, fn, -t))
            ) / (2 * t)
            assert abs(sg.derivative - fd) / (abs(fd) + 1e-12) <= 1e-3
            checked += 1
    assert checked == 6


def test_parity_kills_odd_modes_on_even_domain():
    spec = DomainSpec(1.0, ((2, 0.05), (4, 0.01)))
    sg = shape_gradient(spec, {("sin", 3): 1.0})
    assert abs(sg.derivative) <= 1e-8


def test_volume_flux_projection_reported():
    spec = DomainSpec(1.0)
    sg = shape_gradient(spec, {("cos", 0): 1.0} if False else {("cos", 2): 0.0, ("cos", 1): 0.0})
    assert sg.removed_volume_component == pytest.approx(0.0)
    sg2 = shape_gradient(spec, {("cos", 2): 1.0})
    assert abs(sg2.removed_volume_component) <= 1e-12  # cos2 already mean-free on the circle


# ---------------------------------------------------------------------------
# Flow
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def flow_result():
    return flow_to_constant_flux(DomainSpec(1.0, ((3, 0.05),)))


def test_flow_converges(flow_result):
    assert flow_result.converged
    assert len(flow_result.trajectory) - 1 <= 200
    assert flow_result.final.flatness <= 1e-3


def test_flow_final_shape_is_round(flow_result):
    round_ = final_roundness(flow_result)
    assert round_["rho_gap"] <= 5e-3
    assert round_["area_drift"] <= 1e-5


def test_flow_energy_monotone_and_std_monotone(flow_result):
    energies = [s.energy for s in flow_result.trajectory]
    stds = [s.u_nu_std for s in flow_result.trajectory]
    assert all(b >= a - 1e-9 for a, b in zip(energies, energies[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(stds, stds[1:]))


def test_flow_starts_at_stationary_ball():
    res = flow_to_constant_flux(DomainSpec(1.0))
    assert res.converged
    assert len(res.trajectory) == 1  # terminates at iteration 0


def test_flow_two_modes_monotone_std():
    res = flow_to_constant_flux(DomainSpec(1.0, ((2, 0.03), (3, 0.03))))
    assert res.converged
    stds = [s.u_nu_std for s in res.trajectory]
    assert all(b <= a + 1e-12 for a, b in zip(stds, stds[1:]))


def test_flow_rejects_large_initial_amplitude():
    with pytest.raises(ValueError):
        flow_to_constant_flux(DomainSpec(1.0, ((2, 0.08), (3, 0.05),)))


def test_flow_realizes_overdetermined_condition(flow_result):
    # at termination the boundary flux is numerically constant and the curve
    # is the matching sphere to within the pseudo-distance tolerance
    spec = flow_result.final.spec
    model, _ = solve_dirichlet(spec, 96, 1.8)
    quads = build_quadratures(spec, 256, 48)
    fc = compute_flux_constant(spec, model, quads)
    bq = quads.bounds.gamma
    u_nu = normal_derivative(model, bq.nodes, bq.normals)
    assert np.max(np.abs(u_nu - fc.from_average)) <= 2e-3 * fc.from_average
    bary = np.sum(quads.area.nodes * quads.area.weights[:, None], axis=0) / quads.area.total
    assert pseudo_distance(bq, bary, fc.from_average) <= 1e-4
