import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soapfilm import lab, pmc, polar
from soapfilm import surface as sf
from soapfilm.errors import (
    ContinuationError,
    FocalDistanceError,
    PreconditionError,
    UnsupportedConfigurationError,
)

CAP_CENTER_01 = 0.02501564456182237  # sqrt(400) - sqrt(399), frozen


def _cap(r, H0):
    rho = 2 / H0
    return np.sqrt(rho**2 - r**2) - np.sqrt(rho**2 - 1)


def _slope(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def test_cap_oracle_value():
    assert _cap(0.0, 0.1) == pytest.approx(CAP_CENTER_01, abs=1e-15)


def test_zero_target_on_catenoid():
    b = lab.stable_catenoid_base(n=100)
    rep = pmc.solve_pmc(b, pmc.ConstantTarget(0.0))
    assert np.max(np.abs(rep.graph.u)) <= 1e-14


def test_constant_curvature_gives_cap():
    b = sf.flat_disk(1.0, 400)
    rep = pmc.solve_pmc(b, pmc.ConstantTarget(0.1))
    assert rep.residual_linf <= 1e-10
    assert rep.graph.u[0] == pytest.approx(CAP_CENTER_01, abs=1e-6)
    assert np.max(np.abs(rep.graph.u - _cap(b.s, 0.1))) <= 1e-6


def test_gravity_minus_cap_is_third_order():
    b = sf.flat_disk(1.0, 200)
    Ks = np.logspace(-2, -1, 5)
    diffs = []
    for K in Ks:
        ug = pmc.solve_gravity_film(b, pmc.GravityParams(K), tol=1e-12).graph.u
        uc = pmc.solve_pmc(b, pmc.ConstantTarget(K), tol=1e-12).graph.u
        diffs.append(np.max(np.abs(ug - uc)))
    assert _slope(Ks, diffs) == pytest.approx(3.0, abs=0.1)


def test_center_deflection_order_of_magnitude():
    g = pmc.solve_gravity_film(sf.flat_disk(1.0, 200), pmc.GravityParams(0.05)).graph
    # r^2 H / 4 with r = 1, H = 0.05
    assert 0.0125 / 1.05 <= g.u[0] <= 0.0125 * 1.05


def test_gravity_film_matches_exact_translator():
    K = 0.1
    _, _, u_of_r = pmc.bowl_film_oracle(K)
    errs = []
    for n in (50, 100):
        b = sf.flat_disk(1.0, n)
        u = pmc.solve_gravity_film(b, pmc.GravityParams(K), tol=1e-12).graph.u
        errs.append(np.max(np.abs(u - u_of_r(b.s))))
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] <= 1e-6


def test_catenoid_deflection_linear_in_kappa2h():
    b = lab.stable_catenoid_base(n=200)
    Ks = np.logspace(-4, -2, 5)
    amps = [np.max(np.abs(pmc.solve_gravity_film(b, pmc.GravityParams(K)).graph.u)) for K in Ks]
    assert _slope(Ks, amps) == pytest.approx(1.0, abs=0.01)


def test_zero_gravity():
    rep = pmc.solve_gravity_film(sf.flat_disk(1.0, 50), pmc.GravityParams(0.0))
    assert np.all(rep.graph.u == 0.0)


def test_continuation_failure_reports_progress():
    with pytest.raises(ContinuationError) as info:
        pmc.solve_gravity_film(sf.flat_disk(1.0, 100), pmc.GravityParams(5.0))
    assert 0 < info.value.largest_reached < 5.0


def test_newton_converges_quadratically():
    rep = pmc.solve_pmc(sf.flat_disk(1.0, 200), pmc.GravityTarget(0.05), tol=1e-12)
    h = [r for r in rep.history if r > 1e-12]
    assert len(h) >= 3
    for a, b in zip(h[1:-1], h[2:]):
        assert b <= 100 * a * a


def test_function_target_matches_gravity():
    b = sf.flat_disk(1.0, 100)
    K = 0.05
    ft = pmc.FunctionTarget(lambda s, u, Du, nu3: K * nu3)
    u1 = pmc.solve_pmc(b, ft, tol=1e-12).graph.u
    u2 = pmc.solve_pmc(b, pmc.GravityTarget(K), tol=1e-12).graph.u
    assert np.max(np.abs(u1 - u2)) <= 1e-13


def test_tilted_gravity_needs_polar_grid():
    with pytest.raises(UnsupportedConfigurationError):
        pmc.solve_gravity_film(sf.flat_disk(1.0, 50),
                               pmc.GravityParams(0.05, polar.tilted_direction(0.3)))
    with pytest.raises(PreconditionError):
        pmc.GravityParams(0.05, (1.0, 1.0, 0.0))
    with pytest.raises(PreconditionError):
        pmc.GravityParams(-1.0)


# --- two interfaces ----------------------------------------------------------

def test_flat_two_interface_residual():
    b = sf.flat_disk(1.0, 50)
    h, k2 = 0.03, 4.0
    res = pmc.two_interface_residual(b, h, h, k2)
    assert np.all(res == -2 * k2 * h)
    assert np.all(pmc.two_interface_residual(b, 0.0, 0.0, k2) == 0.0)


def _translator_slope(tp, K, n=200):
    b = tp.base(n)
    hs = np.logspace(-3, -1, 9)
    res = [np.max(np.abs(pmc.two_interface_residual(b, h, h, K / h))) for h in hs]
    return _slope(hs, res)


def test_two_interface_second_order_on_bowl():
    K = 0.05
    assert _translator_slope(pmc.translator_bowl(K), K) == pytest.approx(2.0, abs=0.1)


def test_two_interface_second_order_on_wing():
    K = 0.05
    tp = pmc.translator_wing(K, 0.9, -0.3, 0.3)
    assert _translator_slope(tp, K) == pytest.approx(2.0, abs=0.1)


def test_two_interface_variable_offsets():
    b = sf.flat_disk(1.0, 100)
    a = 0.01 + 0.001 * b.s
    res = pmc.two_interface_residual(b, a, a, 1.0)
    # slowly varying offsets of a plane are nearly flat
    assert np.allclose(res, -2 * a, atol=1e-4)
    with pytest.raises(PreconditionError):
        pmc.two_interface_residual(b, -a, a, 1.0)


def test_two_interface_focal_refusal():
    b = lab.stable_catenoid_base(n=50)
    with pytest.raises(FocalDistanceError):
        pmc.two_interface_residual(b, 2.0, 2.0, 1.0)


# --- polar grid --------------------------------------------------------------

def test_polar_axial_gravity_is_axisymmetric():
    sol = polar.solve_disk(polar.polar_disk(1.0, 16, 32), 0.05)
    assert sol.angular_variation() <= 1e-12


def test_polar_agrees_with_meridian_solver():
    K = 0.05
    axi = pmc.solve_gravity_film(sf.flat_disk(1.0, 400), pmc.GravityParams(K)).graph.u[0]
    centers = [polar.solve_disk(polar.polar_disk(1.0, n, 2 * n), K).u[0] for n in (16, 32)]
    assert abs(centers[1] - axi) < abs(centers[0] - axi)
    assert centers[1] == pytest.approx(axi, rel=5e-3)


def test_vertical_disk_has_no_deflection():
    disk = polar.polar_disk(1.0, 12, 24)
    rep = pmc.solve_gravity_film(disk, pmc.GravityParams(0.05, polar.tilted_direction(np.pi / 2)))
    assert np.max(np.abs(rep.graph.u)) <= 1e-12


@settings(max_examples=10, deadline=None)
@given(theta=st.floats(0.0, 1.3))
def test_tilt_scales_with_cosine_property(theta):
    disk = polar.polar_disk(1.0, 10, 20)
    u0 = polar.solve_disk(disk, 1e-3).u[0]
    u1 = polar.solve_disk(disk, 1e-3, polar.tilted_direction(theta)).u[0]
    assert u1 / u0 == pytest.approx(np.cos(theta), rel=0.02, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(K=st.floats(0.001, 0.1))
def test_gravity_film_area_exceeds_base_property(K):
    g = pmc.solve_gravity_film(sf.flat_disk(1.0, 60), pmc.GravityParams(K)).graph
    assert g.area_excess() > 0
    assert g.u[0] > 0
