"""Normal graphs ``p + u(p) nu(p)`` over an axisymmetric base surface.

The area of the graph is ``int_N G(p, u, Du)`` with

    G = (1 + k1 u)(1 + k2 u) sqrt(1 + (u_s / (1 + k1 u))^2)

for an axisymmetric ``u`` (the parallel derivative vanishes).  The discrete
area sums ``G`` over the meridian faces; the discrete mean curvature of the
graph is defined from the exact gradient of that sum, so the first variation
identity holds to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import surface as sf
from .errors import FocalDistanceError, GraphRegimeError, PreconditionError

DEFAULT_U_FRACTION = 0.1  # sup|u| <= 0.1 / max|kappa|
DEFAULT_SLOPE_CAP = 0.1


# --- the integrand G and its derivatives ------------------------------------

def G_terms(k1, k2, z, x, second=False):
    """``G`` and its partial derivatives in ``z = u`` and ``x = u_s``.

    Returns ``(G, Gz, Gx)`` or, with ``second``, ``(G, Gz, Gx, Gzz, Gzx, Gxx)``.
    """
    a1 = 1.0 + k1 * z
    a2 = 1.0 + k2 * z
    q = x / a1
    S = np.sqrt(1.0 + q * q)
    G = a1 * a2 * S
    Gx = a2 * q / S
    Gz = k2 * a1 * S + k1 * a2 / S
    if not second:
        return G, Gz, Gx
    S3 = S**3
    Gxx = a2 / (a1 * S3)
    Gzx = k2 * q / S - k1 * a2 * q / (a1 * S3)
    Gzz = 2.0 * k1 * k2 / S + k1 * k1 * a2 * q * q / (a1 * S3)
    return G, Gz, Gx, Gzz, Gzx, Gxx


def G_excess(k1, k2, z, x):
    """``G - 1`` without cancellation for small ``z`` and ``x``."""
    a1 = 1.0 + k1 * z
    a2 = 1.0 + k2 * z
    q = x / a1
    S = np.sqrt(1.0 + q * q)
    return (a1 * a2 - 1.0) * S + q * q / (1.0 + S)


def _faces(base: sf.BaseSurface, u):
    u = np.asarray(u, float)
    ell = base.Lf * base.h
    return 0.5 * (u[1:] + u[:-1]), np.diff(u) / ell, ell


def area_functional(base: sf.BaseSurface, u) -> float:
    """Discrete area of the graph ``Psi_u``."""
    uf, xf, _ = _faces(base, u)
    G, _, _ = G_terms(base.k1f, base.k2f, uf, xf)
    return float(np.dot(base.Wf, G))


def area_excess(base: sf.BaseSurface, u) -> float:
    """Discrete ``area(Psi_u) - area(N)``, computed without cancellation."""
    uf, xf, _ = _faces(base, u)
    return float(np.dot(base.Wf, G_excess(base.k1f, base.k2f, uf, xf)))


def area_gradient(base: sf.BaseSurface, u):
    """Exact gradient of :func:`area_functional` with respect to the nodal values."""
    uf, xf, ell = _faces(base, u)
    _, Gz, Gx = G_terms(base.k1f, base.k2f, uf, xf)
    left = base.Wf * (0.5 * Gz - Gx / ell)  # d/du_j of face (j, j+1)
    right = base.Wf * (0.5 * Gz + Gx / ell)  # d/du_{j+1}
    g = np.zeros(base.n_nodes)
    g[:-1] += left
    g[1:] += right
    return g


def area_hessian_bands(base: sf.BaseSurface, u):
    """Tridiagonal Hessian of the discrete area: ``(sub, diag, super)``."""
    uf, xf, ell = _faces(base, u)
    _, _, _, Gzz, Gzx, Gxx = G_terms(base.k1f, base.k2f, uf, xf, second=True)
    W = base.Wf
    # face-local chain rule: dz/du = (1/2, 1/2), dx/du = (-1/ell, 1/ell)
    hl = W * (0.25 * Gzz - Gzx / ell + Gxx / ell**2)
    hr = W * (0.25 * Gzz + Gzx / ell + Gxx / ell**2)
    ho = W * (0.25 * Gzz - Gxx / ell**2)
    diag = np.zeros(base.n_nodes)
    diag[:-1] += hl
    diag[1:] += hr
    return ho.copy(), diag, ho.copy()


def _extrapolate_ends(base, H):
    H = H.copy()
    for k, e in enumerate(base.ends):
        if e == "boundary":
            if k == 0:
                H[0] = 3 * H[1] - 3 * H[2] + H[3]
            else:
                H[-1] = 3 * H[-2] - 3 * H[-3] + H[-4]
    return H


# --- normal graphs -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormalGraph:
    """Axisymmetric normal graph; derived fields are computed eagerly.

    ``u_cap`` and ``slope_cap`` bound the graph regime; by default
    ``sup|u| <= 0.1 / max|kappa|`` and ``max|u_s| <= 0.1``.
    """

    base: sf.BaseSurface
    u: np.ndarray
    u_cap: float | None = None
    slope_cap: float = DEFAULT_SLOPE_CAP
    Du: np.ndarray = field(init=False)
    Dstar_u: np.ndarray = field(init=False)
    jacobian: np.ndarray = field(init=False)
    graph_normal: np.ndarray = field(init=False)  # (n, 2): (nu . nu_N, nu . tau_1)
    graph_H: np.ndarray = field(init=False)
    d: np.ndarray = field(init=False)

    def __post_init__(self):
        base = self.base
        u = np.array(self.u, float)
        if u.shape != (base.n_nodes,):
            raise PreconditionError("u must have one value per base node")
        if np.any(u[base.boundary_mask] != 0.0):
            raise PreconditionError("u must vanish exactly at boundary nodes")
        object.__setattr__(self, "u", u)
        kmax = float(np.max(np.abs(base.principal_curvatures)))
        cap = self.u_cap
        if cap is None:
            cap = DEFAULT_U_FRACTION / kmax if kmax > 0 else np.inf
            object.__setattr__(self, "u_cap", cap)
        Du = sf.node_gradient(base, u)
        bad = np.flatnonzero(np.abs(u) > cap)
        if bad.size:
            i = int(bad[np.argmax(np.abs(u[bad]))])
            raise GraphRegimeError(
                f"|u| = {abs(u[i]):.3g} exceeds the graph-regime cap {cap:.3g} at node {i}", i)
        bad = np.flatnonzero(np.abs(Du) > self.slope_cap)
        if bad.size:
            i = int(bad[np.argmax(np.abs(Du[bad]))])
            raise GraphRegimeError(
                f"|Du| = {abs(Du[i]):.3g} exceeds the slope cap {self.slope_cap:.3g} at node {i}", i)
        a1 = 1.0 + base.k1 * u
        a2 = 1.0 + base.k2 * u
        if np.any(a1 <= 0) or np.any(a2 <= 0):
            i = int(np.argmin(np.minimum(a1, a2)))
            raise GraphRegimeError(f"offset passes a focal point at node {i}", i)
        Ds = Du / a1
        S = np.sqrt(1.0 + Ds * Ds)
        object.__setattr__(self, "Du", Du)
        object.__setattr__(self, "Dstar_u", Ds)
        object.__setattr__(self, "d", a1 * a2)
        object.__setattr__(self, "jacobian", a1 * a2 * S)
        object.__setattr__(self, "graph_normal", np.stack([1.0 / S, -Ds / S], axis=1))
        grad = area_gradient(base, u)
        with np.errstate(divide="ignore", invalid="ignore"):
            H = grad / (base.weights * a1 * a2)
        object.__setattr__(self, "graph_H", _extrapolate_ends(base, H))

    @property
    def eps(self):
        """Regime size ``sup|u| + Lip(u)`` as seen on the grid."""
        return float(np.max(np.abs(self.u)) + np.max(np.abs(self.Du)))

    def area(self):
        return area_functional(self.base, self.u)

    def area_excess(self):
        return area_excess(self.base, self.u)


def make_graph(base, u, **kw) -> NormalGraph:
    """Build a graph, snapping round-off sized boundary values to zero."""
    u = np.array(u, float)
    m = base.boundary_mask
    if np.all(np.abs(u[m]) <= 1e-12):
        u[m] = 0.0
    return NormalGraph(base, u, **kw)


def graph_jacobian(g: NormalGraph):
    return g.jacobian


def graph_mean_curvature(g: NormalGraph):
    return g.graph_H


def graph_normal_vertical(g: NormalGraph):
    """``(nu_graph . e3, nu_graph . nu_N)`` per node (meridian plane at angle 0)."""
    b = g.base
    cn, ct = g.graph_normal.T
    ez = cn * b.normal_rz[:, 1] + ct * b.tangent[:, 1]
    return ez, cn


def graph_normal_vectors(g: NormalGraph, phi=0.0):
    """Unit normals of the graph as 3-vectors at azimuth ``phi``."""
    tau1, _ = g.base.principal_dirs(phi)
    cn, ct = g.graph_normal.T
    return cn[:, None] * g.base.normal(phi) + ct[:, None] * tau1


def first_variation(g: NormalGraph, phi) -> float:
    """Derivative of the discrete area along ``phi`` (which must vanish on the boundary)."""
    phi = np.asarray(phi, float)
    if phi.shape != g.u.shape:
        raise PreconditionError("phi must have one value per node")
    if np.any(phi[g.base.boundary_mask] != 0.0):
        raise PreconditionError("phi must vanish on boundary nodes")
    return float(np.dot(phi, area_gradient(g.base, g.u)))


def pde_coefficients(g: NormalGraph):
    """Nodal coefficients of the divergence-form equation for ``H`` of the graph.

    ``H d = -c u - div(Lambda grad u)`` with ``Lambda = diag(lam1, lam2)``;
    returns ``dict(lam1, lam2, d, c)``.  ``c`` is ``G * sum kappa_i^2 / (1 + kappa_i u)``.
    """
    b = g.base
    a1 = 1.0 + b.k1 * g.u
    a2 = 1.0 + b.k2 * g.u
    S = np.sqrt(1.0 + g.Dstar_u**2)
    c = g.jacobian * (b.k1**2 / a1 + b.k2**2 / a2)
    return {"lam1": a2 / (a1 * S), "lam2": a1 / (a2 * S), "d": a1 * a2, "c": c}


# --- offsets -----------------------------------------------------------------

@dataclass(frozen=True)
class OffsetCurvatures:
    t: float
    kappas_offset: np.ndarray
    H_offset: np.ndarray


def offset_curvatures(base: sf.BaseSurface, t) -> OffsetCurvatures:
    """Principal curvatures of the parallel surface at signed distance ``t``."""
    k = base.principal_curvatures
    t = float(t)
    reach = np.abs(t) * np.max(np.abs(k))
    if reach >= 1.0:
        raise FocalDistanceError(f"offset {t} reaches the focal set (|t| max|kappa| = {reach:.3g})")
    ko = k / (1.0 + t * k)
    return OffsetCurvatures(t, ko, ko.sum(axis=1))


# --- extrinsic oracle --------------------------------------------------------

_D1 = np.array([1 / 60, -3 / 20, 3 / 4, 0.0, -3 / 4, 3 / 20, -1 / 60])[::-1]
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def image_profile(base: sf.BaseSurface, u_fn, s=None, step=1e-2) -> sf.ProfileCurve:
    """Meridian of the embedded graph with derivatives from the analytic geometry.

    ``u_fn`` is a smooth function of the meridian parameter.  Position is
    evaluated in closed form and differentiated with sixth-order stencils,
    independently of the divergence-form discretization.
    """
    geom = base.meta.get("_geometry")
    if geom is None:
        raise PreconditionError("base was not built from a geometry callback")
    s = base.s if s is None else np.asarray(s, float)

    def pos(t):
        r, z, dr, dz, _, _ = geom(t)
        L = np.hypot(dr, dz)
        uu = u_fn(t)
        return (r + uu * base.sigma * dz / L, z - uu * base.sigma * dr / L)

    offs = np.arange(-3, 4) * step
    R = np.array([pos(s + o)[0] for o in offs])
    Z = np.array([pos(s + o)[1] for o in offs])
    r0, z0 = pos(s)
    dr = _D1 @ R / step
    dz = _D1 @ Z / step
    d2r = _D2 @ R / step**2
    d2z = _D2 @ Z / step**2
    flags = tuple("axis" if e == "axis" else "fixed" for e in base.ends)
    return sf.ProfileCurve(s, r0, z0, flags, base.sigma, (dr, dz, d2r, d2z))
