"""Revolution surfaces that bubble onto a doubled disk while the weak deficit
stays small.

Circle 1 (radius ``R``) lies in the plane ``z = 0`` and circle 2 (radius ``R``)
in ``z = sep``.  Going from circle 2 the meridian follows the stable catenoid
(pushed outward by at most ``eps/2``), turns under circle 1 along an arc of
radius ``eps/4``, runs inward in the plane ``z = -eps/2``, passes through a
small catenoidal neck and returns outward in the plane ``z = 0`` to circle 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import catenoids as cat
from . import deficits as df
from . import surface as sf
from .errors import PreconditionError

NECK_FACTOR = 0.65  # neck blend radius r1 = 0.65 eps^(1/3) R


@dataclass
class _Piece:
    t: np.ndarray
    r: np.ndarray
    z: np.ndarray
    dr: np.ndarray
    dz: np.ndarray
    d2r: np.ndarray
    d2z: np.ndarray


def _trap_weights(t):
    w = np.zeros_like(t)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


@dataclass
class BubblingSurface:
    eps: float
    R: float
    sep: float
    profile: sf.ProfileCurve
    weights: np.ndarray  # per-node area weights (full revolution)
    H: np.ndarray
    normal_rz: np.ndarray
    neck: dict

    @property
    def area(self):
        return float(self.weights.sum())

    def distance_to_circle1(self):
        return np.hypot(self.profile.r - self.R, self.profile.z)

    def crossing_length(self, radius=None):
        """Length of the intersection with the tube of given radius about circle 1."""
        rad = self.eps if radius is None else radius
        f = self.distance_to_circle1() - rad
        r = self.profile.r
        total = 0.0
        for k in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
            lam = f[k] / (f[k] - f[k + 1])
            total += 2 * np.pi * (r[k] + lam * (r[k + 1] - r[k]))
        return total

    def h_sup_away(self):
        away = self.distance_to_circle1() > self.eps
        return float(np.max(np.abs(self.H[away])))

    def h_l1(self):
        return float(np.dot(self.weights, np.abs(self.H)))

    def samples(self):
        bnd = ((self.R, 0.0), (self.R, self.sep))
        return df.RevolutionSamples(self.profile.r, self.profile.z, self.normal_rz[:, 0],
                                    self.normal_rz[:, 1], self.weights, bnd, self.H)


def _neck_scale(r1, gap):
    """Neck size ``c`` so that catenoid plus quadratic blend rises by ``gap``."""

    def f(c):
        root = np.sqrt(r1 * r1 - c * c)
        return c * np.arccosh(r1 / c) + 0.5 * r1 * c / root - gap

    hi = r1 * (1 - 1e-9)
    lo = r1 * 1e-12
    if f(lo) > 0 or f(hi) < 0:
        raise PreconditionError("neck cannot be embedded: gap too large for the blend radius")
    # f increases on the useful branch; take the smaller root
    grid = np.geomspace(lo, hi, 400)
    vals = np.array([f(c) for c in grid])
    k = int(np.argmax(vals > 0))
    return brentq(f, grid[k - 1], grid[k], xtol=1e-16)


def bubbling_surface(R=1.0, eps=0.1, sep=0.5, n=400) -> BubblingSurface:
    """Profile of the bubbling family member with turn scale ``eps``."""
    if not (0 < eps <= 0.2 * R):
        raise PreconditionError("eps must lie in (0, 0.2 R]")
    b = cat.TwoCircleBoundary(R, R, sep)
    regs, _ = cat.regular_catenoids(b)
    if not regs:
        raise PreconditionError("no catenoid spans the circles at this separation")
    c = regs[0].params["c"]
    zc = 0.5 * sep  # neck height of the stable catenoid with circle 1 at z = 0
    off = 0.5 * eps / sep

    def sheet(z):
        x = (z - zc) / c
        r = c * np.cosh(x) + off * (sep - z)
        return r, np.sinh(x) - off, np.cosh(x) / c

    # tangency with the fillet circle whose centre sits at z = -eps/4
    rho = 0.25 * eps

    def tr_of(z):
        _, rp, _ = sheet(z)
        return -rp / np.hypot(rp, 1.0)  # r-component of the downward unit tangent

    zt = brentq(lambda z: z - (-0.25 * eps + rho * tr_of(z)), -eps, eps, xtol=1e-16)
    r_t, rp_t, _ = sheet(zt)
    L = np.hypot(rp_t, 1.0)
    T = np.array([-rp_t, -1.0]) / L
    NR = np.array([T[1], -T[0]])
    C = np.array([r_t, zt]) + rho * NR
    phi0 = np.arctan2(zt - C[1], r_t - C[0])

    r1 = NECK_FACTOR * R * eps ** (1.0 / 3.0)
    r2 = 2.0 * r1
    gap = 0.25 * eps
    if r2 >= C[0] - 0.1 * R:
        raise PreconditionError("neck blend does not fit inside the inner sheets")
    cn = _neck_scale(r1, gap)
    f1 = cn * np.arccosh(r1 / cn)
    fp1 = cn / np.sqrt(r1 * r1 - cn * cn)
    A = -fp1 / (2.0 * r1)
    zmid = -0.25 * eps

    pieces = []
    # 1. sheet from circle 2 down to the tangency point; parameter t = -z
    z = np.linspace(sep, zt, n + 1)
    r, rp, rpp = sheet(z)
    pieces.append(_Piece(-z, r, z, -rp, -np.ones_like(z), rpp, np.zeros_like(z)))
    # 2. fillet, clockwise from phi0 to -pi/2, arclength parameter
    phi = np.linspace(phi0, -0.5 * np.pi, max(n // 2, 64) + 1)
    t = -phi * rho
    pieces.append(_Piece(t, C[0] + rho * np.cos(phi), C[1] + rho * np.sin(phi),
                         np.sin(phi), -np.cos(phi), -np.cos(phi) / rho, -np.sin(phi) / rho))
    # 3. lower plane inward: r from C_r to r2
    rr = np.linspace(C[0], r2, n + 1)
    one = np.ones_like(rr)
    pieces.append(_Piece(-rr, rr, np.full_like(rr, zmid - gap), -one, 0 * one, 0 * one, 0 * one))

    # 4. lower blend r2 -> r1 as a graph z = zmid - f(r)
    def blend(rv):
        f = f1 + fp1 * (rv - r1) + A * (rv - r1) ** 2
        return f, fp1 + 2 * A * (rv - r1), 2 * A * np.ones_like(rv)

    rb = np.linspace(r2, r1, n // 2 + 1)
    f, fp, fpp = blend(rb)
    one = np.ones_like(rb)
    pieces.append(_Piece(-rb, rb, zmid - f, -one, fp, 0 * one, -fpp))
    # 5. neck r = cn cosh((z - zmid)/cn), z from zmid - f1 to zmid + f1
    zn = np.linspace(zmid - f1, zmid + f1, n + 1)
    x = (zn - zmid) / cn
    one = np.ones_like(zn)
    pieces.append(_Piece(zn, cn * np.cosh(x), zn, np.sinh(x), one, np.cosh(x) / cn, 0 * one))
    # 6. upper blend r1 -> r2, z = zmid + f(r)
    rb = np.linspace(r1, r2, n // 2 + 1)
    f, fp, fpp = blend(rb)
    one = np.ones_like(rb)
    pieces.append(_Piece(rb, rb, zmid + f, one, fp, 0 * one, fpp))
    # 7. upper plane z = 0 out to circle 1
    rr = np.linspace(r2, R, n + 1)
    one = np.ones_like(rr)
    pieces.append(_Piece(rr, rr, 0 * rr, one, 0 * one, 0 * one, 0 * one))

    return _assemble(pieces, eps, R, sep, {"c": cn, "r1": r1, "r2": r2, "z_mid": zmid,
                                           "fillet_center": C.tolist(), "catenoid_c": c})


def _assemble(pieces, eps, R, sep, neck):
    S, Rr, Z, DR, DZ, D2R, D2Z, W = ([] for _ in range(8))
    s0 = 0.0
    for k, p in enumerate(pieces):
        speed = np.hypot(p.dr, p.dz)
        Tv = np.stack([p.dr, p.dz]) / speed
        acc = np.stack([p.d2r, p.d2z])
        # derivatives with respect to arclength
        d2 = (acc - np.sum(acc * Tv, axis=0) * Tv) / speed**2
        ds = _trap_weights(p.t) * speed
        s = s0 + np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(p.t))])
        w = 2 * np.pi * p.r * ds
        sl = slice(0, None) if k == 0 else slice(1, None)
        if k > 0:
            W[-1][-1] += w[0]
        S.append(s[sl])
        Rr.append(p.r[sl])
        Z.append(p.z[sl])
        DR.append(Tv[0][sl])
        DZ.append(Tv[1][sl])
        D2R.append(d2[0][sl])
        D2Z.append(d2[1][sl])
        W.append(w[sl].copy())
        s0 = s[-1]
    cat_ = np.concatenate
    prof = sf.ProfileCurve(cat_(S), cat_(Rr), cat_(Z), ("fixed", "fixed"), 1,
                           (cat_(DR), cat_(DZ), cat_(D2R), cat_(D2Z)))
    H = prof.curvatures()[2]
    nrm = np.stack(prof.normal(), axis=1)
    return BubblingSurface(eps, R, sep, prof, cat_(W), H, nrm, neck)


def bubbling_family(circle_radius=1.0, neck_scale=0.1, sep=0.5, n=400, dual=True):
    """Bubbling surface for one ``eps`` and its :class:`DeficitReport`.

    ``meta`` holds the away-from-circle sup of ``|H|``, the tube crossing
    length, the area and the limiting area ``area(catenoid) + 2 pi R^2``.
    """
    bs = bubbling_surface(circle_radius, neck_scale, sep, n)
    w, H = bs.weights, bs.H
    dinf, dp = df.integral_deficits((w, H), (1, 2))
    b = cat.TwoCircleBoundary(circle_radius, circle_radius, sep)
    regs, _ = cat.regular_catenoids(b)
    stable = regs[0]
    limit = stable.area + 2 * np.pi * circle_radius**2
    meta = {
        "eps": neck_scale,
        "h_sup_away": bs.h_sup_away(),
        "h_l1": bs.h_l1(),
        "crossing_length": bs.crossing_length(),
        "area": bs.area,
        "area_limit": limit,
        "nodes": len(bs.profile),
    }
    dual_lb = {}
    if dual:
        dual_lb[np.inf] = df.dual_deficit_lower_bound(bs.samples(), np.inf)
    return bs.profile, df.DeficitReport(dinf, dp, None, dual_lb, meta), bs
