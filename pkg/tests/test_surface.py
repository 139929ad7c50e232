import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soapfilm import surface as sf
from soapfilm.errors import (
    DegenerateNodeError,
    IrregularParameterizationError,
    PreconditionError,
    ResolutionError,
)


def _cylinder(n=41, height=1.0):
    z = np.linspace(0.0, height, n)
    return sf.ProfileCurve(z, np.ones(n), z)


def test_cylinder_curvatures():
    km, kp, H = sf.revolution_curvatures(_cylinder(), 20)
    assert km == pytest.approx(0.0, abs=1e-12)
    assert kp == pytest.approx(1.0, abs=1e-12)
    assert H == pytest.approx(1.0, abs=1e-12)


def test_catenoid_waist_curvatures():
    z = np.linspace(-0.5, 0.5, 201)
    curve = sf.ProfileCurve(z, np.cosh(z), z)
    km, kp, H = sf.revolution_curvatures(curve, 100)
    assert km == pytest.approx(-1.0, abs=1e-4)
    assert kp == pytest.approx(1.0, abs=1e-12)
    assert abs(H) < 1e-4


def test_sphere_mean_curvature():
    # sphere of radius 2, normal pointing away from the centre
    t = np.linspace(0.3, np.pi - 0.3, 401)
    curve = sf.ProfileCurve(t, 2 * np.sin(t), -2 * np.cos(t))
    H = curve.curvatures()[2]
    assert np.max(np.abs(H[1:-1] - 1.0)) < 1e-4


def test_axis_node_is_degenerate():
    s = np.linspace(0.0, 1.0, 11)
    r = s.copy()
    r[3] = 0.0
    curve = sf.ProfileCurve(s, r, np.zeros_like(s))
    with pytest.raises(DegenerateNodeError):
        sf.revolution_curvatures(curve, 3)


def test_irregular_parameterization():
    s = np.linspace(0.0, 1.0, 11)
    d = np.zeros_like(s)
    curve = sf.ProfileCurve(s, 1 + s, s, derivatives=(d, d, d, d))
    with pytest.raises(IrregularParameterizationError):
        sf.revolution_curvatures(curve, 4)


def test_endpoint_is_rejected():
    with pytest.raises(PreconditionError):
        sf.revolution_curvatures(_cylinder(), 0)


def test_disk_flat_and_area_converges():
    errs = []
    for n in (50, 100, 200):
        b = sf.build_base("flat-disk", n, R=1.0)
        assert np.all(b.k1 == 0) and np.all(b.k2 == 0)
        errs.append(abs(b.area - np.pi))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_catenoid_is_minimal():
    b = sf.build_base("catenoid", 200, c=1.0, z_range=(-0.5, 0.5))
    assert np.max(np.abs(b.k1 + b.k2)) <= 1e-8


def test_cylinder_revolution_area():
    height = 1.5
    b = sf.build_base("revolution", 100, curve=_cylinder(31, height))
    assert b.area == pytest.approx(2 * np.pi * height, rel=1e-12)


def test_integrate_examples():
    disk = sf.flat_disk(1.0, 200)
    assert sf.integrate(disk, np.ones(disk.n_nodes)) == pytest.approx(np.pi, abs=1e-4)
    assert sf.integrate(disk, np.zeros(disk.n_nodes)) == 0.0
    a = 0.5
    b = sf.catenoid(1.0, (-a, a), 0.0, 200)
    # 2 pi int cosh^2 = pi (2a + sinh(2a))
    exact = np.pi * (2 * a + np.sinh(2 * a))
    assert sf.integrate(b, np.ones(b.n_nodes)) == pytest.approx(exact, rel=1e-5)


def test_catenoid_area_second_order():
    a = 0.5
    exact = np.pi * (2 * a + np.sinh(2 * a))
    e1 = abs(sf.catenoid(1.0, (-a, a), 0.0, 40).area - exact)
    e2 = abs(sf.catenoid(1.0, (-a, a), 0.0, 80).area - exact)
    assert e1 / e2 >= 3.5


def test_resolution_refusal():
    with pytest.raises(ResolutionError) as info:
        sf.catenoid(0.05, (-0.5, 0.5), 0.0, 20)
    need = info.value.required_intervals
    assert need > 20
    sf.catenoid(0.05, (-0.5, 0.5), 0.0, need)


def test_unknown_kind():
    with pytest.raises(PreconditionError):
        sf.build_base("torus", 50)


def test_normals_and_frame_orthonormal():
    b = sf.catenoid(1.0, (-0.4, 0.4), 0.0, 50)
    nu = b.normal(0.7)
    t1, t2 = b.principal_dirs(0.7)
    for v in (nu, t1, t2):
        assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
    assert np.allclose(np.sum(nu * t1, axis=1), 0.0)
    assert np.allclose(np.sum(nu * t2, axis=1), 0.0)


def test_profile_csv_round_trip(tmp_path):
    curve = sf.catenoid(1.0, (-0.3, 0.3), 0.0, 30).profile()
    path = tmp_path / "p.csv"
    with open(path, "w") as fh:
        for row in sf.profile_csv_rows(curve):
            fh.write(",".join(row) + "\n")
    back = sf.read_profile_csv(path)
    assert np.array_equal(back.r, curve.r) and np.array_equal(back.z, curve.z)


def test_summarize_base():
    s = sf.summarize_base(sf.flat_disk(1.0, 100), ps=(3,))
    assert s.h_linf == 0.0 and s.h_lp[3] == 0.0
    assert s.diameter == pytest.approx(2.0)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.5, 2.0), shift=st.floats(-1.0, 1.0))
def test_catenoid_minimal_property(c, shift):
    b = sf.catenoid(c, (shift - 0.3 * c, shift + 0.3 * c), shift, 60)
    assert np.max(np.abs(b.mean_curvature)) <= 1e-10 / c


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(0.2, 5.0))
def test_curvature_scaling_property(scale):
    t = np.linspace(0.4, np.pi - 0.4, 101)
    H1 = sf.ProfileCurve(t, np.sin(t), -np.cos(t)).curvatures()[2]
    Hs = sf.ProfileCurve(t * scale, scale * np.sin(t), -scale * np.cos(t)).curvatures()[2]
    assert np.allclose(Hs * scale, H1, rtol=1e-9, atol=1e-9)
