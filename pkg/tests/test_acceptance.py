"""Acceptance criteria 1-11, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import subprocess
import sys
import time
from importlib import resources

import numpy as np
import pytest

from soapfilm import boundary as bd
from soapfilm import bubbling as bb
from soapfilm import catenoids as cat
from soapfilm import graph as gr
from soapfilm import lab, pmc
from soapfilm import surface as sf

J01_SQ = 5.783185962946784  # first Dirichlet eigenvalue of the unit disk


def _report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    capman = _capture_manager()
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)
    assert ok, line


_CONFIG = {}


def _capture_manager():
    cfg = _CONFIG.get("config")
    return cfg.pluginmanager.getplugin("capturemanager") if cfg else None


@pytest.fixture(autouse=True)
def _grab_config(request):
    _CONFIG["config"] = request.config


def _bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


# --- 1 -----------------------------------------------------------------------

def test_criterion_01_catenoid_family():
    t0 = time.perf_counter()
    b = cat.TwoCircleBoundary(1.0, 1.0, 0.5)
    fam = cat.enumerate_family(b)
    regs = [s for s in fam if s.kind == "catenoid"]
    worst = 0.0
    for s in regs:
        c, z0 = s.params["c"], s.params["z0"]
        worst = max(worst, *(abs(c * np.cosh((z - z0) / c) - 1.0) for z in (b.z1, b.z2)))
    d = cat.critical_separation(1.0, 1.0)
    elapsed = time.perf_counter() - t0
    # oracle: the fold is where d(c) = 2 c arccosh(1/c) stops increasing
    c_fold = _bisect(lambda c: np.arccosh(1 / c) - 1 / np.sqrt(1 - c * c), 0.1, 0.99)
    oracle = 2 * c_fold * np.arccosh(1 / c_fold)
    ok = (len(regs) == 2 and regs[0].params["c"] != regs[1].params["c"] and worst <= 1e-10
          and abs(d - oracle) <= 1e-3 and elapsed < 5.0)
    _report(1, ok, f"{len(regs)} catenoids, residual {worst:.1e}, d* = {d:.7f} "
                   f"(oracle {oracle:.7f}), {elapsed:.2f} s")


# --- 2 -----------------------------------------------------------------------

def test_criterion_02_stability_split():
    signs = []
    for sep in (0.3, 0.5, 0.8, 1.1):
        fam = cat.enumerate_family(cat.TwoCircleBoundary(1.0, 1.0, sep))
        regs = [s for s in fam if s.kind == "catenoid"]
        signs.append(len(regs) == 2 and regs[0].params["c"] > regs[1].params["c"]
                     and regs[0].stability_eig > 0 > regs[1].stability_eig)
    lam = cat.jacobi_smallest_eigenvalue(sf.flat_disk(1.0, 400), n=400)
    ok = all(signs) and abs(lam - 5.7832) <= 0.01
    _report(2, ok, f"split at 0.3/0.5/0.8/1.1: {signs}, disk lambda_1 = {lam:.5f} "
                   f"(exact {J01_SQ:.5f})")


# --- 3 -----------------------------------------------------------------------

def test_criterion_03_singular_catenoids():
    found = None
    for sep in (0.3, 0.5, 0.7):
        sols = cat.solve_singular_catenoid(cat.TwoCircleBoundary(1.0, 1.0, sep))
        if [s.label for s in sols] == ["N4", "N5"]:
            found = (sep, sols)
            break
    ok = found is not None
    detail = "no separation with both N4 and N5"
    if ok:
        sep, sols = found
        sums = []
        for s in sols:
            p = s.params
            up, low, disk = cat.junction_conormals(p["c_upper"], p["z0_upper"])
            sums.append(float(np.linalg.norm(up + low + disk)))
        r4, r5 = (s.params["r_junction"] for s in sols)
        ok = max(sums) <= 1e-10 and r4 > r5
        detail = (f"sep {sep}: conormal sums {max(sums):.1e}, r_j(N4) = {r4:.6f} > "
                  f"r_j(N5) = {r5:.6f}")
    _report(3, ok, detail)


# --- 4 -----------------------------------------------------------------------

def _test_graph(k, n):
    c, amp, mode, tilt = [(1.0, 0.004, 1, 0.3), (0.9, 0.003, 2, -0.2), (1.1, 0.005, 1, 0.0),
                          (0.95, 0.002, 3, 0.5), (1.05, 0.004, 2, -0.4)][k]
    b = sf.catenoid(c, (-0.4, 0.4), 0.0, n)
    s0, s1 = b.s[0], b.s[-1]

    def f(s):
        t = (s - s0) / (s1 - s0)
        return amp * np.sin(mode * np.pi * t) * (1 + tilt * t)
    return b, f


def _oracle_error(k, n):
    b, f = _test_graph(k, n)
    g = gr.make_graph(b, f(b.s))
    H_ext = gr.image_profile(b, f).curvatures()[2]
    sl = slice(1, -1)
    return float(np.max(np.abs(g.graph_H[sl] - H_ext[sl])) / np.max(np.abs(H_ext[sl])))


def test_criterion_04_graph_calculus():
    ratios = [_oracle_error(k, 100) / _oracle_error(k, 200) for k in range(5)]
    b, f = _test_graph(0, 200)
    u = f(b.s)
    s0, s1 = b.s[0], b.s[-1]
    phi = np.sin(2 * np.pi * (b.s - s0) / (s1 - s0)) * (1 + 0.3 * b.s)
    phi[[0, -1]] = 0.0
    t = 1e-4
    fd = (gr.area_functional(b, u + t * phi) - gr.area_functional(b, u - t * phi)) / (2 * t)
    fv = gr.first_variation(gr.make_graph(b, u), phi)
    rel = abs(fv - fd) / abs(fd)
    ok = min(ratios) >= 3.5 and rel <= 1e-5
    _report(4, ok, f"error ratios {', '.join(f'{r:.2f}' for r in ratios)}; "
                   f"first variation vs FD {rel:.1e}")


# --- 5 -----------------------------------------------------------------------

def _two_interface_slope(base, K):
    hs = np.logspace(-3, -1, 9)
    res = [np.max(np.abs(pmc.two_interface_residual(base, h, h, K / h))) for h in hs]
    return float(np.polyfit(np.log(hs), np.log(res), 1)[0])


def test_criterion_05_two_interface_expansion():
    # mid-surfaces solving H = K nu.e3 exactly: a flat bowl and a catenoidal wing
    K = 0.05
    flat = pmc.translator_bowl(K).base(200)
    wing = pmc.translator_wing(K, 0.9, -0.3, 0.3).base(200)
    slopes = [_two_interface_slope(flat, K), _two_interface_slope(wing, K)]
    ok = all(abs(s - 2.0) <= 0.10 for s in slopes)
    _report(5, ok, f"slopes flat {slopes[0]:.4f}, catenoid {slopes[1]:.4f}")


# --- 6 and 7 -----------------------------------------------------------------

_SWEEPS = {}


def _sweeps():
    if not _SWEEPS:
        t0 = time.perf_counter()
        _SWEEPS["disk"] = lab.run_sweep(sf.flat_disk(1.0, 200))
        _SWEEPS["catenoid"] = lab.run_sweep(lab.stable_catenoid_base())
        _SWEEPS["time"] = time.perf_counter() - t0
    return _SWEEPS


def test_criterion_06_sharp_exponents():
    sw = _sweeps()
    parts, ok = [], sw["time"] < 120.0
    for name in ("disk", "catenoid"):
        recs = sw[name]
        ok &= len(recs) == 9
        for x, y, slope, tol in (("H_linf", "u_c0", 1.0, 0.05),
                                 ("H_l2", "area_excess", 2.0, 0.10),
                                 ("delta_weak", "u_h1", 1.0, 0.05)):
            fit = lab.fit_estimate(recs, x, y)
            ok &= abs(fit.slope - slope) <= tol and fit.r2 >= 0.99
            parts.append(f"{name} {y}/{x} {fit.slope:.4f}")
    _report(6, bool(ok), f"{'; '.join(parts)}; sweep time {sw['time']:.1f} s")


def test_criterion_07_flat_case_chain():
    reps = [lab.flat_case_constant_check(r.graph) for r in _sweeps()["disk"]]
    ok = all(r.slack_gradient >= 0 and r.slack_area >= 0 for r in reps)
    _report(7, ok, f"{len(reps)} records, min slacks {min(r.slack_gradient for r in reps):.2e} "
                   f"/ {min(r.slack_area for r in reps):.2e}")


# --- 8 -----------------------------------------------------------------------

def _fixture(name):
    return bd.read_boundary_csv(resources.files("soapfilm") / "fixtures" / name)


def test_criterion_08_accessibility_fixtures():
    nested = _fixture("nested_circles.csv")
    inner_blocked = all(bd.is_accessible_at(x, nested) is None for x in nested.components[0])
    worst, certs, all_any = np.inf, 0, True
    for name in ("coaxial_circles.csv", "three_circles.csv"):
        b = _fixture(name)
        pts = b.points
        for comp in b.components:
            got = [bd.is_accessible_at(x, b) for x in comp]
            all_any &= any(c is not None for c in got)
            for c in got:
                if c is None:
                    continue
                certs += 1
                z = pts - c.x
                d = np.linalg.norm(z, axis=1)
                far = d > 1e-12
                worst = min(worst, c.margin,
                            float(np.min(z[far] @ c.e - d[far] * np.cos(0.5 * c.theta))))
    ok = inner_blocked and all_any and worst >= 0
    _report(8, ok, f"nested inner blocked: {inner_blocked}; all components accessible: "
                   f"{all_any}; {certs} certificates, min margin {worst:.2e}")


# --- 9 -----------------------------------------------------------------------

def test_criterion_09_wedge_sum():
    rng = np.random.default_rng(9)
    worst_total, worst_gap = np.inf, np.inf
    for _ in range(10_000):
        phi = rng.uniform(1e-6, np.pi / 2 - 1e-9)
        m = 2 * int(rng.integers(1, 10)) + 1
        th = rng.uniform(-phi, phi, m)
        v = np.stack([np.cos(th), np.sin(th)], axis=1)
        total = float(np.linalg.norm(v.sum(axis=0)))  # exact, recomputed here
        _, bound = bd.wedge_sum_lemma(th, phi)
        worst_total = min(worst_total, total)
        worst_gap = min(worst_gap, total - bound)
    ok = worst_total > 1 and worst_gap >= -1e-12
    _report(9, ok, f"10000 trials, min |sum| {worst_total:.6f}, min(|sum| - bound) "
                   f"{worst_gap:.2e}")


# --- 10 ----------------------------------------------------------------------

def test_criterion_10_bubbling_family():
    reps = [bb.bubbling_family(1.0, e)[1] for e in (0.1, 0.05, 0.025)]
    l1 = [r.delta_p[1] for r in reps]
    away = [r.meta["h_sup_away"] for r in reps]
    dual = [r.delta_dual_lb[np.inf] for r in reps]
    area, limit = reps[-1].meta["area"], reps[-1].meta["area_limit"]
    bounded = max(l1) <= 2.0 * min(l1)
    ok = (bounded and away[0] > away[1] > away[2] and dual[0] > dual[1] > dual[2]
          and abs(area - limit) <= 0.05 * limit)
    _report(10, ok, f"delta_1 {', '.join(f'{v:.2f}' for v in l1)}; away sup|H| "
                    f"{', '.join(f'{v:.4f}' for v in away)}; dual lb "
                    f"{', '.join(f'{v:.1e}' for v in dual)}; area {area:.4f} vs {limit:.4f}")


# --- 11 ----------------------------------------------------------------------

def test_criterion_11_determinism(tmp_path):
    outs = []
    for k in range(2):
        js = tmp_path / f"run{k}.json"
        p = subprocess.run([sys.executable, "-m", "soapfilm.cli", "--seed", "0", "check",
                            "--suite", "all", "--json", str(js)],
                           capture_output=True, text=True, timeout=300)
        outs.append((p.returncode, p.stdout, js.read_bytes()))
    ok = outs[0][0] == 0 and outs[0] == outs[1]
    n = outs[0][1].count("\n")
    _report(11, ok, f"exit codes {outs[0][0]}/{outs[1][0]}, {n} checks, outputs identical: "
                    f"{outs[0] == outs[1]}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(pytest.main([__file__, "-q"]))
