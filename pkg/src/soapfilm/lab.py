"""Sweeps of gravity films over kappa^2 h, log-log slope fits and the flat-case
inequality chain.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import catenoids as cat
from . import deficits as df
from . import graph as gr
from . import pmc
from . import surface as sf
from .errors import GraphRegimeError, PreconditionError, ResolutionError, StabilityError

NORMS = ("u_c0", "u_h1", "area_excess", "H_linf", "H_l2", "H_lp", "delta_weak")
GRID_TOL = 0.01  # relative change allowed under grid doubling
MAX_REFINE = 3


@dataclass
class SweepRecord:
    h: float
    norms: dict
    grid: str
    grid_change: float = 0.0
    graph: gr.NormalGraph | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.norms.get("area_excess", 0.0) < -1e-15:
            raise AssertionError(f"negative area excess {self.norms['area_excess']:.3g}")

    def row(self):
        return [self.h, *(self.norms[k] for k in NORMS), self.grid]


SWEEP_HEADER = ["h", *NORMS, "grid"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    window: tuple

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "window": list(self.window)}


def default_h_values():
    return np.logspace(-3, -1, 9)


def graph_norms(g: gr.NormalGraph, p=3.0) -> dict:
    """Norms of ``u`` (on the base) and of ``H`` (on the graph), plus the weak deficit."""
    b = g.base
    u = g.u
    dir2 = float(u @ (sf.stiffness_matrix(b) @ u))
    l2 = float(np.dot(b.weights, u * u))
    _, dp = df.integral_deficits(g, (2, p))
    return {
        "u_c0": float(np.max(np.abs(u))),
        "u_h1": float(np.sqrt(dir2 + l2)),
        "area_excess": g.area_excess(),
        "H_linf": float(np.max(np.abs(g.graph_H))),
        "H_l2": dp[2],
        "H_lp": dp[p],
        "delta_weak": df.weak_deficit(g),
    }


def _intervals(base):
    return base.n_nodes - 1


def check_stable(base: sf.BaseSurface, n_eig=None) -> float:
    n = n_eig or max(_intervals(base), 50)
    lam = cat.jacobi_smallest_eigenvalue(base, n=n, richardson=False)
    if not lam > 0:
        raise StabilityError(
            f"base is not strictly stable (smallest Jacobi eigenvalue {lam:.4g}); "
            "the graph estimates assume a strictly stable minimal surface")
    return lam


def _rel_change(a, b):
    worst = 0.0
    for k in NORMS:
        x, y = a[k], b[k]
        scale = max(abs(x), abs(y))
        if scale > 0:
            worst = max(worst, abs(x - y) / scale)
    return worst


def _one_point(base, h, p, converge):
    n = _intervals(base)
    cur = base
    for _ in range(MAX_REFINE + 1):
        g = pmc.solve_gravity_film(cur, pmc.GravityParams(h)).graph
        norms = graph_norms(g, p)
        if not converge or h == 0.0:
            return SweepRecord(float(h), norms, f"n={n}", 0.0, g)
        fine = cur.with_resolution(2 * n)
        gf = pmc.solve_gravity_film(fine, pmc.GravityParams(h)).graph
        nf = graph_norms(gf, p)
        change = _rel_change(norms, nf)
        if change < GRID_TOL:
            return SweepRecord(float(h), nf, f"n={2 * n}", change, gf)
        cur, n = fine, 2 * n
    raise ResolutionError(f"sweep point h={h:g} not grid-converged", required_intervals=2 * n)


def sweep_threads():
    env = os.environ.get("SOAPFILM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(base: sf.BaseSurface, h_values=None, p=3.0, converge=True, check=True,
              threads=None) -> list:
    """Solve the gravity film for each ``h = kappa^2 h`` and record its norms.

    Refuses bases that are not strictly stable.  With ``converge`` every record
    is taken from a grid where doubling changes each norm by less than 1%.
    """
    hs = default_h_values() if h_values is None else np.asarray(h_values, float)
    if np.any(hs < 0) or not np.all(np.isfinite(hs)):
        raise PreconditionError("h values must be finite and nonnegative")
    if check:
        check_stable(base)
    workers = min(threads or sweep_threads(), len(hs)) or 1
    if workers == 1:
        return [_one_point(base, h, p, converge) for h in hs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda h: _one_point(base, h, p, converge), hs))


def fit_estimate(records, x_norm, y_norm) -> SlopeFit:
    """Least-squares line through ``(log x, log y)`` over the records."""
    if len(records) < 5:
        raise PreconditionError("need at least 5 records for a fit")
    x = np.array([r.norms[x_norm] for r in records], float)
    y = np.array([r.norms[y_norm] for r in records], float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise PreconditionError(f"fit needs positive values of {x_norm} and {y_norm}")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + icpt)
    tot = ly - ly.mean()
    r2 = 1.0 - float(res @ res) / float(tot @ tot) if tot @ tot > 0 else 1.0
    hs = [r.h for r in records]
    return SlopeFit(float(slope), float(icpt), r2, (min(hs), max(hs)))


def measured_constants(records, q=2.0):
    """Largest observed ratios ``u_h1 / delta_weak`` and ``u_c0 / (H_l2 + H_lq)``."""
    pos = [r for r in records if r.norms["delta_weak"] > 0]
    c_h1 = max((r.norms["u_h1"] / r.norms["delta_weak"] for r in pos), default=0.0)
    key = "H_l2" if q == 2 else "H_lp"
    c_c0 = max((r.norms["u_c0"] / (r.norms["H_l2"] + r.norms[key]) for r in pos), default=0.0)
    return {"h1_over_weak": c_h1, "c0_over_H": c_c0}


# --- flat case ---------------------------------------------------------------

@dataclass(frozen=True)
class FlatCaseReport:
    eps: float
    dirichlet: float  # int |grad u|^2
    delta: float
    area_excess: float
    lhs_gradient: float
    rhs_gradient: float
    lhs_area: float
    rhs_area: float

    @property
    def slack_gradient(self):
        return self.rhs_gradient - self.lhs_gradient

    @property
    def slack_area(self):
        return self.rhs_area - self.lhs_area

    @property
    def holds(self):
        return self.slack_gradient >= 0 and self.slack_area >= 0

    def to_dict(self):
        return {"eps": self.eps, "dirichlet": self.dirichlet, "delta": self.delta,
                "area_excess": self.area_excess, "slack_gradient": self.slack_gradient,
                "slack_area": self.slack_area, "holds": self.holds}


def flat_case_constant_check(g: gr.NormalGraph) -> FlatCaseReport:
    """Evaluate ``(1/3 - eps^2) int|grad u|^2 <= delta |grad u|_2`` and
    ``(1/3 - eps^2)(area excess) <= delta^2`` with ``eps = |u|_C0 + Lip(u)``."""
    b = g.base
    if np.any(b.k1 != 0) or np.any(b.k2 != 0):
        raise PreconditionError("flat-case check needs a flat base")
    slope = sf.face_gradient(b, g.u)
    lip = max(float(np.max(np.abs(g.Du))), float(np.max(np.abs(slope))))
    eps = float(np.max(np.abs(g.u))) + lip
    if eps * eps >= 1.0 / 3.0:
        raise GraphRegimeError(f"eps = {eps:.3g} leaves the flat-case regime (eps^2 < 1/3)",
                               node=int(np.argmax(np.abs(g.Du))))
    dir2 = float(np.dot(b.Wf, slope * slope))
    delta = df.weak_deficit(g)
    excess = g.area_excess()
    c = 1.0 / 3.0 - eps * eps
    return FlatCaseReport(eps, dir2, delta, excess, c * dir2, float(delta * np.sqrt(dir2)),
                          c * excess, delta * delta)


def stable_catenoid_base(r=1.0, sep=0.5, n=200) -> sf.BaseSurface:
    """Larger-neck catenoid spanning two coaxial circles of radius ``r``."""
    b = cat.TwoCircleBoundary(r, r, sep)
    regs, _ = cat.regular_catenoids(b)
    if not regs:
        raise PreconditionError("no catenoid at this separation")
    c = regs[0].params["c"]
    return sf.catenoid(c, (b.z1, b.z2), 0.0, n)
