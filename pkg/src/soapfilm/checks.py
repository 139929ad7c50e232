"""Invariant suite covering every module, deterministic under a seed."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import boundary as bd
from . import catenoids as cat
from . import deficits as df
from . import graph as gr
from . import lab
from . import pmc
from . import polar
from . import surface as sf
from .io import dumps


@dataclass
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str

    def to_dict(self):
        return {"module": self.module, "name": self.name, "passed": self.passed,
                "detail": self.detail}


_CHECKS = []


def check(module, name):
    def wrap(fn):
        _CHECKS.append((module, name, fn))
        return fn
    return wrap


def _smooth_field(rng, s0, s1, amp):
    """Random smooth function vanishing at both ends of ``[s0, s1]``."""
    k = rng.integers(1, 4)
    a = rng.uniform(0.5, 1.0)
    b = rng.uniform(-0.5, 0.5)

    def f(s):
        t = (s - s0) / (s1 - s0)
        return amp * a * np.sin(k * np.pi * t) * (1 + b * t)
    return f


def _ratio_ok(e1, e2, floor=1e-13):
    return e2 <= floor or e1 / e2 >= 3.5


# --- surface-core ------------------------------------------------------------

@check("surface-core", "second-order area and curvature under refinement")
def _c_surface_order(rng):
    c = rng.uniform(0.8, 1.2)
    z1, z2 = -rng.uniform(0.2, 0.4), rng.uniform(0.2, 0.4)
    exact = cat.catenoid_area(c, 0.0, z1, z2)
    errs, herr = [], []
    for n in (40, 80):
        errs.append(abs(sf.catenoid(c, (z1, z2), 0.0, n).area - exact))
        z = np.linspace(z1, z2, n + 1)
        curve = sf.ProfileCurve(z, c * np.cosh(z / c), z)
        herr.append(float(np.max(np.abs(curve.curvatures()[2]))))
    ok = _ratio_ok(*errs) and _ratio_ok(*herr)
    return ok, f"area ratio {errs[0] / errs[1]:.3f}, H ratio {herr[0] / herr[1]:.3f}"


@check("surface-core", "minimal bases have sum of curvatures O(spacing^2)")
def _c_minimal(rng):
    worst = 0.0
    for base in (sf.build_base("flat-disk", 100, R=1.0),
                 sf.build_base("catenoid", 100, c=rng.uniform(0.8, 1.2), z_range=(-0.3, 0.3))):
        worst = max(worst, float(np.max(np.abs(base.k1 + base.k2))) / base.spacing**2)
    return worst <= 1.0, f"max |sum kappa| / spacing^2 = {worst:.3g}"


@check("surface-core", "shape operator matches sampled normals")
def _c_normal(rng):
    errs = []
    c = rng.uniform(0.8, 1.2)
    phi = rng.uniform(0, 2 * np.pi)
    for n in (50, 100):
        b = sf.catenoid(c, (-0.4, 0.4), 0.0, n)
        nu = b.normal(phi)
        tau1, tau2 = b.principal_dirs(phi)
        dnu = (nu[2:] - nu[:-2]) / (2 * b.h * b.L[1:-1, None])
        e1 = np.abs(np.sum(dnu * tau1[1:-1], axis=1) - b.k1[1:-1])
        d = 1e-5
        dphi = (b.normal(phi + d) - b.normal(phi - d)) / (2 * d * b.r[:, None])
        e2 = np.abs(np.sum(dphi * tau2, axis=1) - b.k2)
        errs.append(max(e1.max(), e2.max()))
    ok = _ratio_ok(errs[0], errs[1], 1e-9)
    return ok, f"errors {errs[0]:.3g} -> {errs[1]:.3g}"


# --- plateau-catenoids -------------------------------------------------------

@check("plateau-catenoids", "regular catenoids meet both circles to 1e-10")
def _c_residual(rng):
    worst = 0.0
    count = 0
    for _ in range(5):
        b = cat.TwoCircleBoundary(rng.uniform(0.7, 1.3), rng.uniform(0.7, 1.3),
                                  rng.uniform(0.05, 1.0))
        sols, _ = cat.regular_catenoids(b)
        for s in sols:
            c, z0 = s.params["c"], s.params["z0"]
            for r, z in ((b.r1, b.z1), (b.r2, b.z2)):
                worst = max(worst, abs(c * np.cosh((z - z0) / c) - r))
            count += 1
    return worst <= 1e-10 and count > 0, f"{count} catenoids, worst residual {worst:.2g}"


@check("plateau-catenoids", "stable catenoid has the smaller area")
def _c_area_order(rng):
    fails = 0
    for sep in rng.uniform(0.1, 1.3, 5):
        sols, _ = cat.regular_catenoids(cat.TwoCircleBoundary(1.0, 1.0, sep))
        if len(sols) == 2 and not sols[0].area < sols[1].area:
            fails += 1
    return fails == 0, f"{fails} violations"


@check("plateau-catenoids", "area crossover d_G lies below d*")
def _c_crossover(rng):
    dG = cat.goldschmidt_separation(1.0)
    ds = cat.critical_separation(1.0, 1.0)
    ok = dG < ds
    for sep, sign in ((dG - 0.02, -1), (dG + 0.02, 1)):
        st = cat.regular_catenoids(cat.TwoCircleBoundary(1.0, 1.0, sep))[0][0]
        ok &= np.sign(st.area - 2 * np.pi) == sign
    return bool(ok), f"d_G = {dG:.9f}, d* = {ds:.9f}"


@check("plateau-catenoids", "singular catenoids meet the disk at 60 degrees")
def _c_junction(rng):
    sep = rng.uniform(0.2, 0.9)
    sols = cat.solve_singular_catenoid(cat.TwoCircleBoundary(1.0, 1.0, sep))
    worst = 0.0
    for s in sols:
        for c, z0 in ((s.params["c_upper"], s.params["z0_upper"]),
                      (s.params["c_lower"], s.params["z0_lower"])):
            t = cat.junction_conormals(c, z0)[0]
            ang = np.degrees(np.arccos(abs(t[0]) / np.hypot(*t)))
            worst = max(worst, abs(ang - 60.0))
    return len(sols) > 0 and worst < 1e-8, f"{len(sols)} solutions at sep {sep:.3f}, dev {worst:.2g} deg"


# --- normal-graph ------------------------------------------------------------

def _test_graph(rng, n=200):
    c = rng.uniform(0.85, 1.15)
    base = sf.catenoid(c, (-0.4, 0.4), 0.0, n)
    f = _smooth_field(rng, base.s[0], base.s[-1], 0.005)
    return base, f, gr.make_graph(base, f(base.s))


@check("normal-graph", "graph Jacobian integrates to the image area")
def _c_jacobian(rng):
    errs = []
    seed = int(rng.integers(1 << 30))
    for n in (100, 200):
        base, f, g = _test_graph(np.random.default_rng(seed), n)
        prof = gr.image_profile(base, f, np.linspace(base.s[0], base.s[-1], 2001))
        ref = sf.revolution(prof, 2000).area
        errs.append(abs(sf.integrate(base, g.jacobian) - ref) / ref)
    return _ratio_ok(*errs, 1e-10), f"relative errors {errs[0]:.3g} -> {errs[1]:.3g}"


@check("normal-graph", "divergence form equals the weighted mean curvature")
def _c_divform(rng):
    base, _, g = _test_graph(rng)
    phi = _smooth_field(rng, base.s[0], base.s[-1], 1.0)(base.s)
    phi[base.boundary_mask] = 0.0
    a = (1 + base.k1 * g.u) * (1 + base.k2 * g.u)
    lhs = float(np.dot(base.weights * phi, g.graph_H * a))
    rhs = gr.first_variation(g, phi)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return rel <= 1e-9, f"relative gap {rel:.2g}"


@check("normal-graph", "dG/dz at u = 0 equals the base mean curvature")
def _c_Gz(rng):
    base = sf.catenoid(rng.uniform(0.8, 1.2), (-0.3, 0.3), 0.0, 100)
    t = gr.G_terms(base.k1, base.k2, np.zeros(base.n_nodes), np.zeros(base.n_nodes))
    Gz = t[1]
    return float(np.max(np.abs(Gz))) <= 1e-12, f"max |Gz| = {np.max(np.abs(Gz)):.2g}"


@check("normal-graph", "PDE coefficients stay within C eps of the identity")
def _c_coeff(rng):
    base, _, g = _test_graph(rng)
    co = gr.pde_coefficients(g)
    dev = max(np.max(np.abs(co["lam1"] - 1)), np.max(np.abs(co["lam2"] - 1)),
              np.max(np.abs(co["d"] - 1)))
    kmax = float(np.max(np.abs(base.principal_curvatures)))
    C = 2.0 * max(1.0, kmax)
    ok = dev <= C * g.eps and np.all(co["c"] >= 0)
    return bool(ok), f"max deviation / eps = {dev / g.eps:.3g} (C = {C:.3g})"


# --- deficits ----------------------------------------------------------------

@check("deficits", "Holder chain between the L^p deficits")
def _c_holder(rng):
    w = rng.uniform(0.1, 1.0, 50)
    H = rng.normal(size=50)
    A = w.sum()
    dinf, dp = df.integral_deficits((w, H), (1, 3))
    ok = dp[1] <= A ** (2 / 3) * dp[3] * (1 + 1e-12) and dp[3] <= A ** (1 / 3) * dinf * (1 + 1e-12)
    return bool(ok), f"{dp[1]:.4g} <= {A ** (2 / 3) * dp[3]:.4g} <= {A * dinf:.4g}"


@check("deficits", "weak deficit is even on flat bases")
def _c_even(rng):
    base = sf.flat_disk(1.0, 100)
    u = 0.02 * rng.uniform(0.5, 1) * (1 - base.s**2) * (1 + rng.uniform(-0.5, 0.5) * base.s)
    a = df.weak_deficit(gr.make_graph(base, u))
    b = df.weak_deficit(gr.make_graph(base, -u))
    return abs(a - b) <= 1e-12 * a, f"{a:.15g} vs {b:.15g}"


@check("deficits", "dual lower bound grows with the dictionary")
def _c_dual_mono(rng):
    base = sf.flat_disk(1.0, 100)
    g = pmc.solve_gravity_film(base, pmc.GravityParams(rng.uniform(0.02, 0.08))).graph
    smp = df.samples_from_graph(g)
    vals = [df.dual_deficit_lower_bound(smp, np.inf, levels=k) for k in (2, 3, 4)]
    return bool(vals[0] <= vals[1] <= vals[2]), " <= ".join(f"{v:.4g}" for v in vals)


@check("deficits", "weak deficit squared over int H^2 is bounded across a sweep")
def _c_weak_ratio(rng):
    recs = lab.run_sweep(sf.flat_disk(1.0, 100), np.logspace(-3, -1, 5), converge=False)
    ratio = [r.norms["delta_weak"] ** 2 / r.norms["H_l2"] ** 2 for r in recs]
    return max(ratio) <= 1.5 * min(ratio), f"ratio in [{min(ratio):.4g}, {max(ratio):.4g}]"


# --- pmc-solver --------------------------------------------------------------

@check("pmc-solver", "Newton converges quadratically")
def _c_newton(rng):
    worst = 0.0
    for base in (sf.flat_disk(1.0, 100), lab.stable_catenoid_base(n=100)):
        rep = pmc.solve_pmc(base, pmc.GravityTarget(rng.uniform(0.01, 0.05)), tol=1e-13)
        h = [r for r in rep.history if r > 1e-13][-3:]
        for a, b in zip(h[:-1], h[1:]):
            worst = max(worst, b / a**2)
    return worst <= 100.0, f"max r_(k+1) / r_k^2 = {worst:.3g}"


@check("pmc-solver", "axial gravity gives an axisymmetric film on a polar grid")
def _c_symmetry(rng):
    sol = polar.solve_disk(polar.polar_disk(1.0, 12, 24), rng.uniform(0.01, 0.1))
    v = sol.angular_variation()
    return v <= 1e-12, f"angular variation {v:.2g}"


@check("pmc-solver", "tilted disk deflection scales with cos(theta)")
def _c_tilt(rng):
    disk = polar.polar_disk(1.0, 12, 24)
    th = rng.uniform(0.1, 1.2)
    u0 = polar.solve_disk(disk, 1e-3).u
    u1 = polar.solve_disk(disk, 1e-3, polar.tilted_direction(th)).u
    ratio = u1[0] / u0[0]
    return abs(ratio / np.cos(th) - 1) <= 0.02, f"ratio {ratio:.5f} vs cos {np.cos(th):.5f}"


@check("pmc-solver", "zero gravity returns the base")
def _c_zero(rng):
    worst = 0.0
    for base in (sf.flat_disk(1.0, 60), lab.stable_catenoid_base(n=60)):
        u = pmc.solve_gravity_film(base, pmc.GravityParams(0.0)).graph.u
        worst = max(worst, float(np.max(np.abs(u))))
    return worst <= 1e-12, f"max |u| = {worst:.2g}"


# --- boundary-geometry -------------------------------------------------------

def _reverify(cert, pts):
    z = pts - cert.x
    d = np.linalg.norm(z, axis=1)
    far = d > 1e-12
    return float(np.min(z[far] @ cert.e - d[far] * np.cos(0.5 * cert.theta)))


@check("boundary-geometry", "certificates re-verify against every sample")
def _c_cert(rng):
    worst, count = np.inf, 0
    for b in (bd.coaxial_circles(n=32), bd.three_circles(n=32)):
        pts = b.points
        for k in rng.choice(len(pts), 8, replace=False):
            cert = bd.is_accessible_at(pts[k], b)
            if cert is None:
                continue
            count += 1
            worst = min(worst, _reverify(cert, pts), bd.wedge_margin(cert.x, cert.e, cert.theta, pts))
    return count > 0 and worst >= 0, f"{count} certificates, smallest margin {worst:.3g}"


def _random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


@check("boundary-geometry", "certificates move with rigid motions")
def _c_motion(rng):
    b = bd.three_circles(n=32)
    Q = _random_rotation(rng)
    t = rng.normal(size=3)
    moved = bd.BoundarySamples(tuple(c @ Q.T + t for c in b.components))
    worst = 0.0
    for k in rng.choice(len(b.points), 5, replace=False):
        c0 = bd.is_accessible_at(b.points[k], b)
        c1 = bd.is_accessible_at(moved.points[k], moved)
        worst = max(worst, float(np.max(np.abs(Q @ c0.e - c1.e))), abs(c0.theta - c1.theta))
    return worst <= 1e-10, f"max deviation {worst:.2g}"


@check("boundary-geometry", "odd wedge sums beat the pairing bound")
def _c_wedge(rng):
    for _ in range(200):
        phi = rng.uniform(0.01, np.pi / 2 - 1e-3)
        m = 2 * int(rng.integers(1, 6)) + 1
        total, bound = bd.wedge_sum_lemma(rng.uniform(-phi, phi, m), phi)
        if not (total >= bound * (1 - 1e-14) and bound > 1):
            return False, f"violated: {total} < {bound}"
    return True, "200 random trials"


@check("boundary-geometry", "adding points never enlarges the accessible set")
def _c_monotone(rng):
    b = bd.three_circles(n=24)
    extra = rng.normal(scale=0.5, size=(6, 3)) + [0, 0, 0.5]
    bigger = bd.BoundarySamples(b.components + (extra,))
    f0 = [round(r["accessible_fraction"], 4) for r in bd.accessibility_report(b)]
    f1 = [round(r["accessible_fraction"], 4) for r in bd.accessibility_report(bigger)][:3]
    return all(a >= c for a, c in zip(f0, f1)), f"{f0} -> {f1}"


# --- estimates-lab -----------------------------------------------------------

@check("estimates-lab", "slope fits are stable under grid doubling")
def _c_fit_grid(rng):
    hs = np.logspace(-3, -1, 5)
    worst = 0.0
    for n in (60,):
        slopes = []
        for k in (n, 2 * n):
            recs = lab.run_sweep(sf.flat_disk(1.0, k), hs, converge=False, check=False)
            slopes.append([lab.fit_estimate(recs, x, y).slope for x, y in
                           (("H_linf", "u_c0"), ("H_l2", "area_excess"), ("delta_weak", "u_h1"))])
        worst = max(worst, float(np.max(np.abs(np.subtract(*slopes)))))
    return worst <= 0.02, f"max slope change {worst:.3g}"


@check("estimates-lab", "C0 constant is bounded across the sweep")
def _c_c0_const(rng):
    recs = lab.run_sweep(lab.stable_catenoid_base(n=100), np.logspace(-3, -1, 5), converge=False)
    vals = [r.norms["u_c0"] / (2 * r.norms["H_l2"]) for r in recs]
    return max(vals) <= 1.5 * min(vals), f"constant in [{min(vals):.4g}, {max(vals):.4g}]"


# --- cli ---------------------------------------------------------------------

@check("cli", "serialized output is reproducible")
def _c_determinism(rng):
    b = cat.TwoCircleBoundary(1.0, 1.0, rng.uniform(0.2, 1.0))
    a = dumps([s.to_dict() for s in cat.enumerate_family(b, eig_grid=60)])
    c = dumps([s.to_dict() for s in cat.enumerate_family(b, eig_grid=60)])
    return a == c, f"{len(a)} bytes"


def modules():
    return sorted({m for m, _, _ in _CHECKS})


def run_suite(suite="all", seed=0):
    """Run the checks of ``suite`` (a module name or ``all``) with a seeded RNG."""
    out = []
    for index, (module, name, fn) in enumerate(_CHECKS):
        if suite != "all" and module != suite:
            continue
        rng = np.random.default_rng([seed, index])
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(module, name, bool(ok), detail))
    return out


def format_table(results):
    w = max(len(r.module) for r in results) if results else 0
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.module:<{w}}  {r.name}: {r.detail}"
             for r in results]
    return "\n".join(lines)


if __name__ == "__main__":  # pragma: no cover
    t = time.time()
    res = run_suite()
    print(format_table(res))
    print(f"{sum(r.passed for r in res)}/{len(res)} in {time.time() - t:.1f}s")
