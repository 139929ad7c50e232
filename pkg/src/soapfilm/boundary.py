"""Accessibility from infinity for sampled boundary curves, and the odd
wedge-sum lemma for unit vectors in a cone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

SAFETY = 1e-9  # added to the cap radius to get theta/2


@dataclass(frozen=True)
class BoundarySamples:
    components: tuple  # of (k_i, d) arrays

    def __post_init__(self):
        comps = tuple(np.atleast_2d(np.asarray(c, float)) for c in self.components)
        if not comps:
            raise PreconditionError("need at least one component")
        dim = comps[0].shape[1]
        for c in comps:
            if c.shape[0] == 0 or c.shape[1] != dim:
                raise PreconditionError("components must be nonempty with a common dimension")
            if not np.all(np.isfinite(c)):
                raise PreconditionError("boundary samples must be finite")
        object.__setattr__(self, "components", comps)

    @property
    def points(self):
        return np.concatenate(self.components)

    @property
    def dim(self):
        return self.components[0].shape[1]


@dataclass(frozen=True)
class WedgeCertificate:
    x: np.ndarray
    e: np.ndarray
    theta: float
    margin: float
    nu1: np.ndarray
    nu2: np.ndarray

    def to_dict(self):
        return {"x": self.x.tolist(), "e": self.e.tolist(), "theta": self.theta,
                "margin": self.margin, "nu1": self.nu1.tolist(), "nu2": self.nu2.tolist()}


# --- smallest enclosing ball -------------------------------------------------

def _circumball(pts):
    """Smallest ball with all of ``pts`` (at most d+1 points) on its boundary."""
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0
    A = pts[1:] - p0
    M = 2.0 * A @ A.T
    rhs = np.sum(A * A, axis=1)
    lam = np.linalg.lstsq(M, rhs, rcond=None)[0]
    c = p0 + lam @ A
    return c, float(np.linalg.norm(pts[0] - c))


def _mtf(P, order, end, support, tol):
    dim = P.shape[1]
    if support:
        c, r = _circumball(np.array(support))
    else:
        c, r = np.zeros(dim), -1.0  # empty ball
    if len(support) == dim + 1:
        return c, r
    k = 0
    while k < end:
        seg = P[order[k:end]]
        if r < 0:
            out = np.ones(len(seg), bool)
        else:
            out = np.linalg.norm(seg - c, axis=1) > r + tol
        if not out.any():
            break
        k += int(np.argmax(out))
        p = P[order[k]]
        c, r = _mtf(P, order, k, support + [p], tol)
        # move the offending point to the front
        order[:k + 1] = np.roll(order[:k + 1], 1)
        k += 1
    return c, r


def smallest_enclosing_ball(points, tol=1e-13):
    """Welzl-type move-to-front algorithm (recursion depth <= d + 1)."""
    P = np.array(points, float)
    if P.ndim != 2 or len(P) == 0:
        raise PreconditionError("need a nonempty (k, d) array of points")
    # fixed pseudo-random order: sampled curves arrive sorted, which is the
    # worst case for move-to-front
    order = np.random.default_rng(0).permutation(len(P))
    c, r = _mtf(P, order, len(P), [], tol)
    # a further pass guards against round-off in the support updates
    for _ in range(2):
        if np.all(np.linalg.norm(P - c, axis=1) <= r + tol):
            break
        c, r = _mtf(P, order, len(P), [], tol)
    return c, r


# --- accessibility -----------------------------------------------------------

def _perp_unit(e):
    k = int(np.argmin(np.abs(e)))
    a = np.zeros_like(e)
    a[k] = 1.0
    w = a - (a @ e) * e
    return w / np.linalg.norm(w)


def wedge_margin(x, e, theta, points):
    """``min_y (y - x).e - |perp| / tan(theta/2)`` over ``points``."""
    z = np.asarray(points, float) - x
    ze = z @ e
    perp = np.linalg.norm(z - np.outer(ze, e), axis=1)
    if theta <= 0:
        return float(np.min(np.where(perp > 0, -np.inf, ze)))
    return float(np.min(ze - perp / np.tan(0.5 * theta)))


def is_accessible_at(x, b: BoundarySamples, match_tol=1e-9):
    """Wedge certificate at ``x`` or ``None`` when no acute cone contains the boundary."""
    x = np.asarray(x, float)
    pts = b.points
    scale = max(float(np.ptp(pts, axis=0).max()), 1.0)
    if np.min(np.linalg.norm(pts - x, axis=1)) > match_tol * scale:
        raise PreconditionError("x must be one of the boundary samples")
    z = pts - x
    dist = np.linalg.norm(z, axis=1)
    far = dist > 1e-12 * scale
    dim = pts.shape[1]
    if not np.any(far):
        e = np.zeros(dim)
        e[-1] = 1.0
        w = _perp_unit(e)
        return WedgeCertificate(x, e, 0.0, 0.0, w, -w)
    v = z[far] / dist[far, None]
    c, _ = smallest_enclosing_ball(v)
    nc = np.linalg.norm(c)
    if nc < 1e-12:
        return None
    e = c / nc
    cos_a = float(np.min(v @ e))
    if cos_a <= 0.0:
        return None
    alpha = float(np.arccos(min(cos_a, 1.0)))
    theta = 2.0 * (alpha + SAFETY)
    margin = wedge_margin(x, e, theta, pts[far])
    beta = 0.5 * (np.pi - theta)
    w = _perp_unit(e)
    nu1 = np.cos(beta) * e + np.sin(beta) * w
    nu2 = np.cos(beta) * e - np.sin(beta) * w
    return WedgeCertificate(x, e, theta, margin, nu1, nu2)


def accessibility_report(b: BoundarySamples):
    """Per component: whether some sample is accessible and the accessible fraction."""
    out = []
    for k, comp in enumerate(b.components):
        ok = [is_accessible_at(x, b) is not None for x in comp]
        frac = float(np.mean(ok))
        out.append({"component": k, "accessible_any": frac > 0, "accessible_fraction": frac,
                    "samples": len(comp)})
    return out


def totally_accessible(b: BoundarySamples) -> bool:
    return all(r["accessible_any"] for r in accessibility_report(b))


# --- fixtures ----------------------------------------------------------------

def circle(center, radius, normal=(0, 0, 1), n=128):
    normal = np.asarray(normal, float)
    normal /= np.linalg.norm(normal)
    u = _perp_unit(normal)
    v = np.cross(normal, u)
    t = 2 * np.pi * np.arange(n) / n
    return np.asarray(center, float) + radius * (np.outer(np.cos(t), u) + np.outer(np.sin(t), v))


def nested_circles(n=128):
    """Concentric coplanar circles of radii 1 (component 0) and 2."""
    return BoundarySamples((circle((0, 0, 0), 1.0, n=n), circle((0, 0, 0), 2.0, n=n)))


def coaxial_circles(r1=1.0, r2=1.0, sep=0.5, n=128):
    return BoundarySamples((circle((0, 0, -0.5 * sep), r1, n=n),
                            circle((0, 0, 0.5 * sep), r2, n=n)))


def three_circles(n=128):
    """Two stacked unit circles and a small vertical circle off to the side."""
    return BoundarySamples((circle((0, 0, 0), 1.0, n=n), circle((0, 0, 1), 1.0, n=n),
                            circle((2.5, 0, 0.5), 0.3, normal=(0, 1, 0), n=n)))


def read_boundary_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if not header or header[0] != "component" or len(header) < 3:
            raise PreconditionError("boundary CSV needs header component,x,y[,z...]")
        rows = [row for row in reader if row]
    comps = {}
    for row in rows:
        comps.setdefault(int(row[0]), []).append([float(v) for v in row[1:]])
    return BoundarySamples(tuple(np.array(comps[k]) for k in sorted(comps)))


def boundary_csv_rows(b: BoundarySamples):
    names = ["x", "y", "z"] if b.dim == 3 else [f"x{i}" for i in range(b.dim)]
    yield ["component", *names]
    for k, comp in enumerate(b.components):
        for p in comp:
            yield [k, *(repr(float(v)) for v in p)]


# --- wedge-sum lemma ---------------------------------------------------------

def wedge_sum_lemma(angles, phi):
    """Length of the sum of unit vectors at ``angles`` and the pairing lower bound.

    With the angles sorted and ``v_m`` the median vector, pairs
    ``w_j = v_j + v_{2p+2-j}`` satisfy ``w_j . v_m > 0``, so
    ``|sum v| >= sum_j w_j . v_m + 1 > 1``.
    """
    th = np.sort(np.asarray(angles, float))
    n = th.size
    if n < 3 or n % 2 == 0:
        raise PreconditionError("need an odd number (at least 3) of angles")
    if not 0 < phi < np.pi / 2:
        raise PreconditionError("phi must lie in (0, pi/2)")
    if np.any(np.abs(th) > phi):
        raise PreconditionError("all angles must lie in [-phi, phi]")
    v = np.stack([np.cos(th), np.sin(th)], axis=1)
    total = float(np.linalg.norm(v.sum(axis=0)))
    p = (n - 1) // 2
    vm = v[p]
    w = v[:p] + v[::-1][:p]
    bound = float(np.sum(w @ vm) + np.linalg.norm(vm))
    if not (total >= bound * (1 - 1e-14) and bound > 1.0):
        raise AssertionError(f"wedge-sum lemma violated: |sum|={total}, bound={bound}")
    return total, bound
