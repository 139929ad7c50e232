"""Minimal surfaces spanning two coaxial horizontal circles.

Circle 1 (radius ``r1``) sits at ``z = -sep/2`` and circle 2 (radius ``r2``) at
``z = +sep/2``.  Besides the two flat disks the family contains regular
catenoids ``r = c cosh((z - z0)/c)`` and, for equal radii, singular catenoids:
two catenoid pieces and a floating disk meeting at 120 degrees along a
junction circle in the mid-plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq, minimize_scalar

from . import surface as sf
from .errors import PreconditionError, UnsupportedConfigurationError

# asinh(1/sqrt(3)): meridian slope dr/dz = tan 30 deg at the junction
T_JUNCTION = float(np.arcsinh(1.0 / np.sqrt(3.0)))


@dataclass(frozen=True)
class TwoCircleBoundary:
    r1: float
    r2: float
    sep: float

    def __post_init__(self):
        for name in ("r1", "r2", "sep"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise PreconditionError(f"{name} must be positive, got {v}")

    @property
    def z1(self):
        return -0.5 * self.sep

    @property
    def z2(self):
        return 0.5 * self.sep


@dataclass
class CatenoidSolution:
    kind: str  # two-disks | catenoid | singular-catenoid
    params: dict
    area: float
    stability_eig: float | None = None
    residual: float = 0.0
    label: str = ""

    def to_dict(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "params": dict(self.params),
            "area": self.area,
            "stability_eig": self.stability_eig,
            "residual": self.residual,
        }


class SolutionList(list):
    """List of solutions carrying the scan diagnostics."""

    def __init__(self, items=(), diagnostics=None):
        super().__init__(items)
        self.diagnostics = list(diagnostics or [])


def catenoid_area(c, z0, z1, z2):
    """Closed-form area of ``r = c cosh((z - z0)/c)`` for ``z1 <= z <= z2``."""
    x1, x2 = (z1 - z0) / c, (z2 - z0) / c
    return float(np.pi * c * ((z2 - z1) + 0.5 * c * (np.sinh(2 * x2) - np.sinh(2 * x1))))


# --- regular catenoids -------------------------------------------------------

# branch signs (s1, s2): (z_i - z0)/c = s_i * acosh(r_i/c)
_BRANCHES = {(-1, 1): "neck", (1, 1): "below", (-1, -1): "above"}


def _branch_fn(b, s1, s2):
    def f(c):
        a1 = np.arccosh(max(b.r1 / c, 1.0))
        a2 = np.arccosh(max(b.r2 / c, 1.0))
        return c * (s2 * a2 - s1 * a1) - b.sep

    return f


def _scan_roots(f, lo, hi, n_scan):
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([f(c) for c in grid])
    roots = []
    for k in range(n_scan - 1):
        if vals[k] == 0.0:
            roots.append(grid[k])
        elif np.sign(vals[k]) * np.sign(vals[k + 1]) < 0:
            roots.append(brentq(f, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots


def regular_catenoids(b: TwoCircleBoundary, n_scan=800):
    """All regular catenoids through both circles, with scan diagnostics."""
    rmin = min(b.r1, b.r2)
    lo = rmin * 1e-6
    out, diag = [], []
    for (s1, s2), name in _BRANCHES.items():
        if name == "below" and not b.r2 > b.r1:
            continue
        if name == "above" and not b.r1 > b.r2:
            continue
        roots = _scan_roots(_branch_fn(b, s1, s2), lo, rmin, n_scan)
        diag.append({"branch": name, "c_interval": [lo, rmin], "samples": n_scan,
                     "roots": len(roots)})
        for c in roots:
            a1 = np.arccosh(max(b.r1 / c, 1.0))
            z0 = b.z1 - c * s1 * a1
            res = max(abs(c * np.cosh((b.z1 - z0) / c) - b.r1),
                      abs(c * np.cosh((b.z2 - z0) / c) - b.r2))
            out.append(CatenoidSolution(
                kind="catenoid",
                params={"c": float(c), "z0": float(z0), "branch": name},
                area=catenoid_area(c, z0, b.z1, b.z2),
                residual=float(res),
            ))
    out.sort(key=lambda s: -s.params["c"])
    return out, diag


def _fold(r1, r2):
    """Neck scale and separation at the fold of the neck branch."""
    rmin = min(r1, r2)

    def d(c):
        return c * (np.arccosh(r1 / c) + np.arccosh(r2 / c))

    # d(c) is unimodal on (0, rmin]; bracket the max on a log grid then polish
    grid = np.geomspace(rmin * 1e-6, rmin, 400)
    vals = np.array([d(c) for c in grid])
    k = int(np.argmax(vals))
    if k == len(grid) - 1:
        return float(grid[-1]), float(vals[-1])
    res = minimize_scalar(lambda c: -d(c), bracket=(grid[max(k - 1, 0)], grid[k], grid[k + 1]),
                          tol=1e-12)
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(vals[k])


def critical_separation(r1, r2):
    """Largest separation ``d*`` at which a regular catenoid still spans the circles."""
    if not (r1 > 0 and r2 > 0):
        raise PreconditionError("radii must be positive")
    return _fold(r1, r2)[1]


def goldschmidt_separation(r=1.0):
    """Separation at which the stable catenoid's area equals the two disks' area (equal radii)."""
    if not r > 0:
        raise PreconditionError("radius must be positive")
    c_fold, _ = _fold(r, r)

    # walk the stable branch by its neck scale c in (c_fold, r)
    def gap(c):
        half = c * np.arccosh(r / c)
        return catenoid_area(c, 0.0, -half, half) - 2 * np.pi * r * r

    c = brentq(gap, c_fold, r * (1 - 1e-12), xtol=1e-15)
    return float(2 * c * np.arccosh(r / c))


# --- singular catenoids ------------------------------------------------------

def junction_conormals(c, z0):
    """Outward unit conormals (r, z components) at the mid-plane junction.

    Returns (upper piece, lower piece, floating disk) for the upper piece
    ``r = c cosh((z - z0)/c)``, ``z >= 0``, and its mirror image.
    """
    slope = np.sinh(-z0 / c)  # dr/dz at z = 0 on the upper piece
    nrm = np.hypot(slope, 1.0)
    upper = np.array([-slope, -1.0]) / nrm  # pointing down the sheet into the junction
    lower = np.array([-slope, 1.0]) / nrm
    disk = np.array([1.0, 0.0])
    return upper, lower, disk


def solve_singular_catenoid(b: TwoCircleBoundary, n_scan=800):
    """Y-shaped configurations: two catenoid pieces and a disk at 120 degrees.

    Ordered with the larger junction radius first.  An empty result carries
    the scanned bracket in ``.diagnostics``.
    """
    if not np.isclose(b.r1, b.r2, rtol=1e-12, atol=0.0):
        raise UnsupportedConfigurationError(
            "singular catenoids are implemented for equal radii only "
            f"(got r1={b.r1}, r2={b.r2})")
    r, half = b.r1, 0.5 * b.sep

    def g(c):
        with np.errstate(over="ignore"):
            return c * np.cosh(half / c + T_JUNCTION) - r

    # g > 0 both as c -> 0 and at c = r, so roots come in pairs
    lo, hi = r * 1e-4, r
    roots = _scan_roots(g, lo, hi, n_scan)
    diag = [{"branch": "singular", "c_interval": [lo, hi], "samples": n_scan,
             "roots": len(roots)}]
    out = []
    for c in sorted(roots, reverse=True):
        z0 = -c * T_JUNCTION
        rj = c * np.cosh(T_JUNCTION)
        up, low, disk = junction_conormals(c, z0)
        conormal = float(np.linalg.norm(up + low + disk))
        bres = abs(c * np.cosh((half - z0) / c) - r)
        piece = catenoid_area(c, z0, 0.0, half)
        out.append(CatenoidSolution(
            kind="singular-catenoid",
            params={"c_upper": float(c), "z0_upper": float(z0),
                    "c_lower": float(c), "z0_lower": float(-z0),
                    "r_junction": float(rj), "floating_disk": True,
                    "conormal_sum": conormal},
            area=float(2 * piece + np.pi * rj * rj),
            residual=float(max(bres, conormal)),
        ))
    for sol, lab in zip(out, ("N4", "N5")):
        sol.label = lab
    return SolutionList(out, diag)


# --- stability ---------------------------------------------------------------

def _smallest_eig(base: sf.BaseSurface, m: int):
    """Smallest Dirichlet eigenvalue of -Lap - |A|^2 restricted to angular mode m."""
    keep = ~base.boundary_mask
    if m > 0:
        for k, e in enumerate(base.ends):
            if e == "axis":
                keep[0 if k == 0 else -1] = False
    idx = np.flatnonzero(keep)
    cf = base.Wf / (base.Lf * base.h) ** 2
    n = base.n_nodes
    diag = np.zeros(n)
    diag[:-1] += cf
    diag[1:] += cf
    w = base.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        pot = np.where(base.r > 0, m * m / np.where(base.r > 0, base.r, 1.0) ** 2, 0.0)
    diag = diag + w * (pot - base.second_fundamental_norm2)
    off = -cf  # coupling between node j and j+1
    d = diag[idx]
    # consecutive kept nodes are neighbours
    e = off[idx[:-1]]
    scale = 1.0 / np.sqrt(w[idx])
    d = d * scale**2
    e = e * scale[:-1] * scale[1:]
    lam = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))
    return float(lam[0])


def jacobi_eigenvalues(base: sf.BaseSurface, modes=(0, 1, 2)):
    return {m: _smallest_eig(base, m) for m in modes}


def jacobi_smallest_eigenvalue(sol, n=400, modes=(0, 1, 2), richardson=True):
    """Smallest eigenvalue of the Jacobi operator with Dirichlet conditions.

    ``sol`` is a regular :class:`CatenoidSolution` or a :class:`BaseSurface`
    (e.g. the flat unit disk for calibration).  With ``richardson`` the values
    at ``n`` and ``2n`` intervals are extrapolated assuming second order.
    """
    if isinstance(sol, CatenoidSolution):
        if sol.kind != "catenoid":
            raise PreconditionError("Jacobi eigenvalue needs a regular catenoid")
        zr = sol.params.get("z_range")
        if zr is None:
            raise PreconditionError("catenoid solution is missing its z-range")
        def make(k):
            return sf.catenoid(sol.params["c"], tuple(zr), sol.params["z0"], k)
    elif isinstance(sol, sf.BaseSurface):
        def make(k):
            return sol.with_resolution(k)
    else:
        raise PreconditionError("expected a CatenoidSolution or BaseSurface")

    def lam(k):
        return min(jacobi_eigenvalues(make(k), modes).values())

    if not richardson:
        return lam(n)
    return (4.0 * lam(2 * n) - lam(n)) / 3.0


def catenoid_base(sol: CatenoidSolution, n=200):
    zr = sol.params["z_range"]
    return sf.catenoid(sol.params["c"], tuple(zr), sol.params["z0"], n)


# --- family ------------------------------------------------------------------

def enumerate_family(b: TwoCircleBoundary, stability=True, eig_grid=200, n_scan=800):
    """Two disks, regular catenoids (largest neck first) and singular catenoids."""
    out = [CatenoidSolution(
        kind="two-disks",
        params={"r1": b.r1, "r2": b.r2},
        area=float(np.pi * (b.r1**2 + b.r2**2)),
        residual=0.0,
        label="N1",
    )]
    regs, diag = regular_catenoids(b, n_scan)
    for k, sol in enumerate(regs):
        sol.params["z_range"] = [b.z1, b.z2]
        sol.label = f"N{2 + k}" if len(regs) <= 2 else f"catenoid-{k}"
        if stability:
            sol.stability_eig = jacobi_smallest_eigenvalue(sol, n=eig_grid)
    out.extend(regs)
    if np.isclose(b.r1, b.r2, rtol=1e-12, atol=0.0):
        sing = solve_singular_catenoid(b, n_scan)
        out.extend(sing)
        diag.extend(sing.diagnostics)
    else:
        diag.append({"branch": "singular", "skipped": "unequal radii unsupported"})
    return SolutionList(out, diag)
