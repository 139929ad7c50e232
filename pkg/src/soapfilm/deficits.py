"""Almost-minimality deficits: sup and L^p norms of H, the weak graph deficit,
and a certified lower bound for the duality deficit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.sparse.linalg import cg
from scipy.spatial import cKDTree

from . import graph as gr
from . import surface as sf
from .errors import PreconditionError


@dataclass
class DeficitReport:
    delta_inf: float
    delta_p: dict
    delta_weak: float | None = None
    delta_dual_lb: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "delta_inf": self.delta_inf,
            "delta_p": {str(k): v for k, v in self.delta_p.items()},
            "delta_weak": self.delta_weak,
            "delta_dual_lb": {str(k): v for k, v in self.delta_dual_lb.items()},
            "meta": dict(self.meta),
        }


def _weights_and_H(source):
    if isinstance(source, gr.NormalGraph):
        return source.base.weights * source.jacobian, source.graph_H
    if isinstance(source, sf.BaseSurface):
        return source.weights, source.mean_curvature
    if isinstance(source, SurfaceSamples):
        if source.H is None:
            raise PreconditionError("samples carry no mean curvature")
        return source.weights, source.H
    w, H = source
    return np.asarray(w, float), np.asarray(H, float)


def integral_deficits(source, ps=(1, 2)):
    """``(delta_inf, {p: ||H||_p})`` for a graph, base surface, samples or ``(weights, H)``."""
    w, H = _weights_and_H(source)
    a = np.abs(H)
    dinf = float(a.max()) if a.size else 0.0
    dp = {}
    for p in ps:
        if not p >= 1:
            raise PreconditionError("p must be >= 1")
        dp[p] = float(np.dot(w, a**p) ** (1.0 / p))
    return dinf, dp


# --- weak deficit ------------------------------------------------------------

def weak_deficit_solve(g: gr.NormalGraph, rtol=1e-10):
    """``(delta(u), w)`` where ``w`` represents the first variation in ``H^1_0``."""
    base = g.base
    idx = base.interior
    K = sf.stiffness_matrix(base)[idx][:, idx]
    if idx.size == 0 or np.any(K.diagonal() <= 0):
        raise PreconditionError("stiffness matrix is singular: grid too coarse")
    b = gr.area_gradient(base, g.u)[idx]
    if not np.any(b):
        return 0.0, np.zeros(base.n_nodes)
    x, info = cg(K, b, rtol=rtol, atol=0.0, maxiter=20 * idx.size)
    if info != 0:
        raise PreconditionError(f"conjugate gradients did not converge (info={info})")
    w = np.zeros(base.n_nodes)
    w[idx] = x
    return float(np.sqrt(max(np.dot(b, x), 0.0))), w


def weak_deficit(g: gr.NormalGraph, rtol=1e-10) -> float:
    """Dual norm of the area first variation against ``int |grad phi|^2 <= 1``."""
    return weak_deficit_solve(g, rtol)[0]


def dirichlet_norm(base: sf.BaseSurface, phi) -> float:
    phi = np.asarray(phi, float)
    return float(np.sqrt(phi @ (sf.stiffness_matrix(base) @ phi)))


# --- surface samples ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurfaceSamples:
    """Quadrature samples of an embedded surface in R^3 with its boundary curve."""

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray
    H: np.ndarray | None = None

    @property
    def diameter(self):
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))


def revolve(r, z, nr, nz, weights, H=None, boundary_rz=(), n_phi=64, n_bdry=256):
    """Samples of a revolution surface from per-meridian-node data.

    ``weights`` already include the full angle; they are split evenly over
    ``n_phi`` azimuths.  ``boundary_rz`` lists the boundary circles.
    """
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    c, s = np.cos(phi), np.sin(phi)
    r = np.asarray(r, float)
    pts = np.stack([np.outer(r, c), np.outer(r, s), np.outer(z, np.ones(n_phi))], axis=-1)
    nrm = np.stack([np.outer(nr, c), np.outer(nr, s), np.outer(nz, np.ones(n_phi))], axis=-1)
    w = np.outer(weights, np.full(n_phi, 1.0 / n_phi))
    Hs = None if H is None else np.outer(H, np.ones(n_phi)).ravel()
    t = 2 * np.pi * np.arange(n_bdry) / n_bdry
    bd = [np.stack([rb * np.cos(t), rb * np.sin(t), np.full(n_bdry, zb)], axis=1)
          for rb, zb in boundary_rz]
    bd = np.concatenate(bd) if bd else np.zeros((0, 3))
    return SurfaceSamples(pts.reshape(-1, 3), nrm.reshape(-1, 3), w.ravel(), bd, Hs)


def samples_from_base(base: sf.BaseSurface):
    bnd = tuple((base.r[k], base.z[k]) for k in np.flatnonzero(base.boundary_mask))
    return RevolutionSamples(base.r, base.z, base.normal_rz[:, 0], base.normal_rz[:, 1],
                             base.weights, bnd, base.mean_curvature)


def samples_from_graph(g: gr.NormalGraph):
    b = g.base
    nr, nz = b.normal_rz.T
    pr = b.r + g.u * nr
    pz = b.z + g.u * nz
    cn, ct = g.graph_normal.T
    gnr = cn * nr + ct * b.tangent[:, 0]
    gnz = cn * nz + ct * b.tangent[:, 1]
    bnd = tuple((pr[k], pz[k]) for k in np.flatnonzero(b.boundary_mask))
    return RevolutionSamples(pr, pz, gnr, gnz, b.weights * g.jacobian, bnd, g.graph_H)


# --- dictionary fields -------------------------------------------------------

_ROTATIONS = [np.array(m, float) for m in (
    [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    [[0, 0, -1], [0, 0, 0], [1, 0, 0]],
    [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
)]
FIELD_KINDS = ("const-x", "const-y", "const-z", "rot-xy", "rot-xz", "rot-yz", "dilation")


def _bump(t):
    """Profile ``b(t) = (1 - t^2)^2`` and ``t b'(t)`` for ``t = r / rho`` in [0, 1]."""
    one = 1.0 - t * t
    return one * one, -4.0 * t * t * one


def _grad_sq(kind, t, s=1.0):
    """Squared Frobenius norm of grad X at scaled radius ``t`` (``rho = 1``).

    ``s`` is ``sin^2`` of the angle to the rotation axis (rotations only).
    """
    b, tb = _bump(t)
    if kind.startswith("const"):
        bp = -4.0 * t * (1.0 - t * t)
        return bp * bp
    if kind.startswith("rot"):
        return s * (tb * tb + 2.0 * b * tb) + 2.0 * b * b
    return tb * tb + 2.0 * b * tb + 3.0 * b * b


@lru_cache(maxsize=None)
def _unit_norm(kind, p):
    """``||grad X||_p`` for ``rho = 1``; scales as ``rho^(3/p - 1)`` for constant fields
    and ``rho^(3/p)`` for rotations and dilations."""
    if np.isinf(p):
        t = np.linspace(0.0, 1.0, 20001)
        if kind.startswith("rot"):
            return float(np.sqrt(max(_grad_sq(kind, t, 0.0).max(), _grad_sq(kind, t, 1.0).max())))
        return float(np.sqrt(_grad_sq(kind, t).max()))
    x, w = leggauss(200)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    if kind.startswith("rot"):
        # polar angle to the rotation axis: s = 1 - mu^2
        mu, wm = x, w
        vals = _grad_sq(kind, t[:, None], 1.0 - mu[None, :] ** 2) ** (p / 2.0)
        integral = 2 * np.pi * np.sum(wt[:, None] * wm[None, :] * vals * (t * t)[:, None])
    else:
        integral = 4 * np.pi * np.sum(wt * _grad_sq(kind, t) ** (p / 2.0) * t * t)
    return float(integral ** (1.0 / p))


def field_norm(kind, rho, p):
    base = _unit_norm(kind, p)
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    if kind.startswith("const"):
        return base * rho ** (3 * inv_p - 1.0)
    return base * rho ** (3 * inv_p)


def tangential_divergence(kind, y, nu, rho):
    """``div^M X`` of the dictionary field ``kind`` centred at the origin, at offsets ``y``."""
    r = np.linalg.norm(y, axis=1)
    t = r / rho
    inside = t < 1.0
    b, _ = _bump(np.where(inside, t, 1.0))
    b = np.where(inside, b, 0.0)
    # b'(r)/r = -4 (1 - t^2) / rho^2
    bpr = np.where(inside, -4.0 * (1.0 - t * t) / rho**2, 0.0)
    ydn = np.einsum("ij,ij->i", y, nu)
    if kind.startswith("const"):
        i = "xyz".index(kind[-1])
        grad_b = bpr[:, None] * y
        return grad_b[:, i] - nu[:, i] * np.einsum("ij,ij->i", nu, grad_b)
    if kind.startswith("rot"):
        A = _ROTATIONS[("rot-xy", "rot-xz", "rot-yz").index(kind)]
        Ay = y @ A.T
        return -bpr * np.einsum("ij,ij->i", nu, Ay) * ydn
    return 2.0 * b + bpr * r * r - bpr * ydn * ydn


def field_integral(samples, center, rho, kind, tree=None):
    """Quadrature of ``int_M div^M X`` for one dictionary field."""
    center = np.asarray(center, float)
    if isinstance(samples, RevolutionSamples):
        got = samples.bump_points(center, rho)
        if got is None:
            return 0.0
        pts, nu, w = got
        return float(np.dot(w, tangential_divergence(kind, pts - center, nu, rho)))
    tree = tree or cKDTree(samples.points)
    idx = tree.query_ball_point(center, rho)
    if not idx:
        return 0.0
    idx = np.asarray(idx)
    y = samples.points[idx] - center
    dv = tangential_divergence(kind, y, samples.normals[idx], rho)
    return float(np.dot(samples.weights[idx], dv))


def _lattice_bumps(lo, hi, bdist, levels, lattice):
    diam = float(np.linalg.norm(hi - lo))
    axes = [np.linspace(lo[k], hi[k], lattice) for k in range(3)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    dist = bdist(centers)
    out = []
    for k in range(1, levels + 1):
        rho = diam * 2.0**-k
        out.extend((c, rho) for c in centers[dist > rho])
    return out


def dictionary(samples, levels=5, lattice=5):
    """Centres and radii of bumps whose support avoids the boundary."""
    if isinstance(samples, RevolutionSamples):
        rmax = float(samples.r.max())
        lo = np.array([-rmax, -rmax, samples.z.min()])
        hi = np.array([rmax, rmax, samples.z.max()])

        def bdist(c):
            rc = np.hypot(c[:, 0], c[:, 1])
            d = [np.hypot(rc - rb, c[:, 2] - zb) for rb, zb in samples.boundary_rz]
            return np.min(d, axis=0) if d else np.full(len(c), np.inf)
    else:
        lo, hi = samples.points.min(axis=0), samples.points.max(axis=0)
        btree = cKDTree(samples.boundary) if len(samples.boundary) else None

        def bdist(c):
            return btree.query(c)[0] if btree is not None else np.full(len(c), np.inf)

    return _lattice_bumps(lo, hi, bdist, levels, lattice)


@dataclass(frozen=True, eq=False)
class RevolutionSamples:
    """Meridian quadrature data of a revolution surface about the z-axis.

    ``weights`` include the full angle.  Bump integrals are evaluated with
    Gauss-Legendre nodes on the exact azimuthal support of each bump, which
    removes the azimuthal sampling noise of :func:`revolve`.
    """

    r: np.ndarray
    z: np.ndarray
    nr: np.ndarray
    nz: np.ndarray
    weights: np.ndarray
    boundary_rz: tuple = ()
    H: np.ndarray | None = None
    n_gauss: int = 24

    def to_samples(self, n_phi=64):
        return revolve(self.r, self.z, self.nr, self.nz, self.weights, self.H,
                       self.boundary_rz, n_phi)

    @property
    def diameter(self):
        rmax = float(self.r.max())
        return float(np.hypot(2 * rmax, np.ptp(self.z)))

    def bump_points(self, c, rho):
        """Points, normals and weights covering the support of the bump at ``c``."""
        rc = float(np.hypot(c[0], c[1]))
        phic = float(np.arctan2(c[1], c[0]))
        dz = self.z - c[2]
        near = (np.abs(self.r - rc) < rho) & (np.abs(dz) < rho)
        j = np.flatnonzero(near)
        if j.size == 0:
            return None
        r, zj = self.r[j], self.z[j]
        num = r * r + rc * rc + dz[j] ** 2 - rho * rho
        with np.errstate(divide="ignore", invalid="ignore"):
            gam = np.where(r * rc > 0, num / (2 * r * rc), np.where(num < 0, -2.0, 2.0))
        keep = gam < 1.0
        j, r, zj, gam = j[keep], r[keep], zj[keep], gam[keep]
        if j.size == 0:
            return None
        half = np.where(gam <= -1.0, np.pi, np.arccos(np.clip(gam, -1.0, 1.0)))
        x, wg = leggauss(self.n_gauss)
        phi = phic + half[:, None] * x[None, :]
        wphi = half[:, None] * wg[None, :] / (2 * np.pi)
        cp, sp = np.cos(phi), np.sin(phi)
        pts = np.stack([r[:, None] * cp, r[:, None] * sp, np.broadcast_to(zj[:, None], cp.shape)], -1)
        nr, nz = self.nr[j][:, None], self.nz[j][:, None]
        nrm = np.stack([nr * cp, nr * sp, np.broadcast_to(nz, cp.shape)], -1)
        w = self.weights[j][:, None] * wphi
        return pts.reshape(-1, 3), nrm.reshape(-1, 3), w.ravel()


def dual_deficit_lower_bound(samples: SurfaceSamples, p=np.inf, levels=5, lattice=5,
                             return_best=False):
    """Lower bound for the duality deficit: best normalized field in the dictionary."""
    bumps = dictionary(samples, levels, lattice)
    if not bumps:
        raise PreconditionError("every bump touches the boundary; use smaller bump scales")
    revo = isinstance(samples, RevolutionSamples)
    tree = None if revo else cKDTree(samples.points)
    best, arg = 0.0, None
    for c, rho in bumps:
        if revo:
            got = samples.bump_points(c, rho)
            if got is None:
                continue
            pts, nu, w = got
            y = pts - c
        else:
            idx = tree.query_ball_point(c, rho)
            if not idx:
                continue
            idx = np.asarray(idx)
            y = samples.points[idx] - c
            nu = samples.normals[idx]
            w = samples.weights[idx]
        for kind in FIELD_KINDS:
            val = abs(float(np.dot(w, tangential_divergence(kind, y, nu, rho))))
            val /= field_norm(kind, rho, p)
            if val > best:
                best, arg = val, (tuple(c), rho, kind)
    if return_best:
        return best, {"center": arg and list(arg[0]), "rho": arg and arg[1],
                      "kind": arg and arg[2], "dictionary_size": 7 * len(bumps)}
    return best


def deficit_report(source, ps=(1, 2), dual_ps=(), samples=None, meta=None) -> DeficitReport:
    dinf, dp = integral_deficits(source, ps)
    weak = weak_deficit(source) if isinstance(source, gr.NormalGraph) else None
    dual = {}
    info = dict(meta or {})
    if dual_ps:
        if samples is None:
            if isinstance(source, gr.NormalGraph):
                samples = samples_from_graph(source)
            elif isinstance(source, sf.BaseSurface):
                samples = samples_from_base(source)
            else:
                raise PreconditionError("dual deficit needs surface samples")
        for p in dual_ps:
            dual[p], best = dual_deficit_lower_bound(samples, p, return_best=True)
            info["dictionary_size"] = best["dictionary_size"]
    return DeficitReport(dinf, dp, weak, dual, info)
