"""Surfaces of revolution about the z-axis and their pointwise geometry.

Every surface here is generated by a meridian curve ``(r(s), z(s))``.  The
unit normal lies in the meridian plane and is ``sigma * (z', -r') / |gamma'|``,
principal directions are the meridian tangent (index 1) and the parallel
circle (index 2), and principal curvatures follow ``d nu = kappa * tau`` so that
the mean curvature is the *sum* ``H = kappa_1 + kappa_2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline

from .errors import (
    DegenerateNodeError,
    IrregularParameterizationError,
    PreconditionError,
    ResolutionError,
)

END_FLAGS = ("fixed", "junction", "axis", "free")
# max |kappa| * (arclength spacing) tolerated by build_base
MAX_CURVATURE_SPACING = 0.5


def _second_derivative(s, f):
    """Three-point second derivative on a (possibly nonuniform) grid."""
    s = np.asarray(s, float)
    f = np.asarray(f, float)
    n = len(s)
    if n < 4:
        raise PreconditionError("need at least 4 samples for second derivatives")
    out = np.empty(n)
    h1 = s[1:-1] - s[:-2]
    h2 = s[2:] - s[1:-1]
    out[1:-1] = 2.0 * (
        f[2:] / (h2 * (h1 + h2)) - f[1:-1] / (h1 * h2) + f[:-2] / (h1 * (h1 + h2))
    )
    # one-sided 4-point stencils, second order on uniform spacing
    for idx, sl in ((0, slice(0, 4)), (n - 1, slice(n - 4, n))):
        x = s[sl] - s[idx]
        V = np.vander(x, 4, increasing=True)
        coeffs = np.linalg.solve(V, f[sl])
        out[idx] = 2.0 * coeffs[2]
    return out


@dataclass(frozen=True)
class ProfileCurve:
    """Sampled meridian ``(r(s), z(s))`` revolved about the z-axis.

    ``derivatives`` optionally carries exact ``(dr, dz, d2r, d2z)`` with respect
    to ``params``; without it the module's finite-difference stencils are used.
    """

    params: np.ndarray
    r: np.ndarray
    z: np.ndarray
    boundary_flags: tuple = ("fixed", "fixed")
    orientation: int = 1
    derivatives: tuple | None = None

    def __post_init__(self):
        s = np.asarray(self.params, float)
        r = np.asarray(self.r, float)
        z = np.asarray(self.z, float)
        if not (s.shape == r.shape == z.shape) or s.ndim != 1:
            raise PreconditionError("params, r, z must be 1-D arrays of equal length")
        if len(s) < 4:
            raise PreconditionError("a profile needs at least 4 samples")
        if np.any(np.diff(s) <= 0):
            raise PreconditionError("profile parameters must be strictly increasing")
        if np.any(r < -1e-14):
            raise PreconditionError("profile radius must be nonnegative")
        if self.orientation not in (1, -1):
            raise PreconditionError("orientation must be +1 or -1")
        flags = tuple(self.boundary_flags)
        if len(flags) != 2 or any(f not in END_FLAGS for f in flags):
            raise PreconditionError(f"boundary_flags must be two of {END_FLAGS}")
        object.__setattr__(self, "params", s)
        object.__setattr__(self, "r", np.maximum(r, 0.0))
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "boundary_flags", flags)
        if self.derivatives is not None:
            d = tuple(np.asarray(a, float) for a in self.derivatives)
            if len(d) != 4 or any(a.shape != s.shape for a in d):
                raise PreconditionError("derivatives must be (dr, dz, d2r, d2z) arrays")
            object.__setattr__(self, "derivatives", d)

    def __len__(self):
        return len(self.params)

    def derivs(self):
        """Return ``(dr, dz, d2r, d2z)`` with respect to ``params``."""
        if self.derivatives is not None:
            return self.derivatives
        s = self.params
        dr = np.gradient(self.r, s, edge_order=2)
        dz = np.gradient(self.z, s, edge_order=2)
        return dr, dz, _second_derivative(s, self.r), _second_derivative(s, self.z)

    def normal(self):
        """Unit normal components ``(n_r, n_z)`` in the meridian plane."""
        dr, dz, _, _ = self.derivs()
        L = np.hypot(dr, dz)
        return self.orientation * dz / L, -self.orientation * dr / L

    def curvatures(self):
        """Principal curvatures ``(kappa_meridian, kappa_parallel, H)`` at every sample.

        Axis samples get ``kappa_parallel = kappa_meridian`` (smooth even extension).
        """
        dr, dz, d2r, d2z = self.derivs()
        return _curvature_fields(self.r, dr, dz, d2r, d2z, self.orientation)


def _curvature_fields(r, dr, dz, d2r, d2z, sigma):
    L = np.hypot(dr, dz)
    if np.any(L <= 0):
        raise IrregularParameterizationError("profile has a vanishing tangent")
    km = sigma * (dr * d2z - dz * d2r) / L**3
    nr = sigma * dz / L
    on_axis = r <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        kp = np.where(on_axis, km, nr / np.where(on_axis, 1.0, r))
    return km, kp, km + kp


def revolution_curvatures(curve: ProfileCurve, node_index: int):
    """Principal curvatures and mean curvature at one interior profile sample."""
    n = len(curve)
    i = int(node_index)
    if not 0 < i < n - 1:
        raise PreconditionError(f"node {i} is not interior (valid range 1..{n - 2})")
    if curve.r[i] <= 0:
        raise DegenerateNodeError(f"node {i} lies on the axis (r = 0)")
    dr, dz, d2r, d2z = (a[i] for a in curve.derivs())
    L = np.hypot(dr, dz)
    if not L > 1e-300:
        raise IrregularParameterizationError(f"vanishing tangent at node {i}")
    sigma = curve.orientation
    km = sigma * (dr * d2z - dz * d2r) / L**3
    kp = sigma * dz / L / curve.r[i]
    return float(km), float(kp), float(km + kp)


# geometry callback: s -> (r, z, dr, dz, d2r, d2z)
Geometry = Callable[[np.ndarray], tuple]


@dataclass(frozen=True, eq=False)
class BaseSurface:
    """Smooth base surface sampled on a uniform meridian parameter grid.

    Node arrays have length ``n + 1``; face (midpoint) arrays have length ``n``.
    ``weights`` are the per-node area weights of the quadrature on the full
    surface (the angle is integrated out).
    """

    kind: str
    s: np.ndarray
    h: float
    sigma: int
    ends: tuple
    r: np.ndarray
    z: np.ndarray
    L: np.ndarray
    tangent: np.ndarray  # (n+1, 2) meridian tangent (t_r, t_z)
    normal_rz: np.ndarray  # (n+1, 2)
    k1: np.ndarray  # meridian principal curvature
    k2: np.ndarray  # parallel principal curvature
    weights: np.ndarray
    rf: np.ndarray
    Lf: np.ndarray
    k1f: np.ndarray
    k2f: np.ndarray
    Wf: np.ndarray  # per-face area weight 2 pi r_f L_f h
    tangent_f: np.ndarray
    normal_f: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self):
        return len(self.s)

    @property
    def boundary_mask(self):
        mask = np.zeros(self.n_nodes, bool)
        if self.ends[0] == "boundary":
            mask[0] = True
        if self.ends[1] == "boundary":
            mask[-1] = True
        return mask

    @property
    def interior(self):
        return np.flatnonzero(~self.boundary_mask)

    @property
    def spacing(self):
        """Largest arclength spacing along the meridian."""
        return float(np.max(self.Lf) * self.h)

    @property
    def principal_curvatures(self):
        return np.stack([self.k1, self.k2], axis=1)

    @property
    def mean_curvature(self):
        return self.k1 + self.k2

    @property
    def second_fundamental_norm2(self):
        return self.k1**2 + self.k2**2

    @property
    def area(self):
        return float(np.sum(self.weights))

    def position(self, phi=0.0):
        c, sn = np.cos(phi), np.sin(phi)
        return np.stack([self.r * c, self.r * sn, self.z], axis=1)

    def normal(self, phi=0.0):
        c, sn = np.cos(phi), np.sin(phi)
        nr, nz = self.normal_rz.T
        return np.stack([nr * c, nr * sn, nz], axis=1)

    def principal_dirs(self, phi=0.0):
        """Orthonormal frame ``(tau_1, tau_2)``: meridian tangent, parallel direction."""
        c, sn = np.cos(phi), np.sin(phi)
        tr, tz = self.tangent.T
        tau1 = np.stack([tr * c, tr * sn, tz], axis=1)
        tau2 = np.tile([-sn, c, 0.0], (self.n_nodes, 1))
        return tau1, tau2

    def profile(self) -> ProfileCurve:
        flags = tuple("axis" if e == "axis" else "fixed" for e in self.ends)
        return ProfileCurve(self.s, self.r, self.z, flags, self.sigma)

    def with_resolution(self, n):
        """Same surface rebuilt on ``n`` intervals (needs the generating geometry)."""
        geom = self.meta.get("_geometry")
        if geom is None:
            raise PreconditionError("surface was not built from a geometry callback")
        return base_from_geometry(
            geom, self.s[0], self.s[-1], n, self.sigma, self.ends, self.kind,
            {k: v for k, v in self.meta.items() if k != "_geometry"},
        )


def _frame(r, dr, dz, d2r, d2z, sigma):
    L = np.hypot(dr, dz)
    if np.any(L <= 0):
        raise IrregularParameterizationError("vanishing tangent on the meridian grid")
    t = np.stack([dr / L, dz / L], axis=1)
    nu = sigma * np.stack([dz / L, -dr / L], axis=1)
    k1, k2, _ = _curvature_fields(r, dr, dz, d2r, d2z, sigma)
    return L, t, nu, k1, k2


def base_from_geometry(geom: Geometry, s0, s1, n, sigma, ends, kind, meta=None):
    """Sample a meridian geometry callback onto ``n`` uniform intervals of ``[s0, s1]``."""
    n = int(n)
    if n < 4:
        raise PreconditionError("grid needs at least 4 intervals")
    ends = tuple(ends)
    s = np.linspace(s0, s1, n + 1)
    h = (s1 - s0) / n
    sm = 0.5 * (s[1:] + s[:-1])
    r, z, dr, dz, d2r, d2z = (np.asarray(a, float) * np.ones_like(s) for a in geom(s))
    rf, _, drf, dzf, d2rf, d2zf = (np.asarray(a, float) * np.ones_like(sm) for a in geom(sm))
    r = np.where(np.abs(r) < 1e-14, 0.0, r)
    for k, e in enumerate(ends):
        node = 0 if k == 0 else -1
        if e == "axis" and r[node] != 0.0:
            raise PreconditionError("axis end must sit at r = 0")
        if e not in ("axis", "boundary"):
            raise PreconditionError(f"unknown end type {e!r}")
    if np.any(r[1:-1] <= 0) or np.any(rf <= 0):
        raise PreconditionError("meridian must stay off the axis except at an axis end")
    L, t, nu, k1, k2 = _frame(r, dr, dz, d2r, d2z, sigma)
    Lf, tf, nuf, k1f, k2f = _frame(rf, drf, dzf, d2rf, d2zf, sigma)

    kmax = max(np.max(np.abs(k1)), np.max(np.abs(k2)), np.max(np.abs(k1f)), np.max(np.abs(k2f)))
    spacing = np.max(Lf) * h
    if kmax * spacing > MAX_CURVATURE_SPACING:
        need = int(np.ceil(n * kmax * spacing / MAX_CURVATURE_SPACING)) + 1
        raise ResolutionError(
            f"grid too coarse: max|kappa|*spacing = {kmax * spacing:.3g} > "
            f"{MAX_CURVATURE_SPACING}; use at least {need} intervals",
            required_intervals=need,
        )

    Wf = 2.0 * np.pi * rf * Lf * h
    w = np.zeros(n + 1)
    w[:-1] += 0.5 * Wf
    w[1:] += 0.5 * Wf
    # axis node owns the polar cap out to the first face
    if ends[0] == "axis":
        w[0] = np.pi * rf[0] ** 2
    if ends[1] == "axis":
        w[-1] = np.pi * rf[-1] ** 2

    meta = dict(meta or {})
    meta["_geometry"] = geom
    return BaseSurface(
        kind=kind, s=s, h=float(h), sigma=int(sigma), ends=ends, r=r, z=z, L=L,
        tangent=t, normal_rz=nu, k1=k1, k2=k2, weights=w, rf=rf, Lf=Lf,
        k1f=k1f, k2f=k2f, Wf=Wf, tangent_f=tf, normal_f=nuf, meta=meta,
    )


def _flat_geometry(s):
    s = np.asarray(s, float)
    zero = np.zeros_like(s)
    return s, zero, np.ones_like(s), zero, zero, zero


def flat_disk(R=1.0, n=200):
    """Horizontal disk of radius ``R`` centred on the axis, normal ``+e3``."""
    if not R > 0:
        raise PreconditionError("disk radius must be positive")
    return base_from_geometry(_flat_geometry, 0.0, R, n, -1, ("axis", "boundary"),
                              "flat-disk", {"R": R})


def flat_annulus(R_in, R_out, n=200):
    if not 0 < R_in < R_out:
        raise PreconditionError("annulus needs 0 < R_in < R_out")
    return base_from_geometry(_flat_geometry, R_in, R_out, n, -1, ("boundary", "boundary"),
                              "flat-annulus", {"R_in": R_in, "R_out": R_out})


def catenoid_geometry(c, z0=0.0):
    """Arclength parameterization of ``r = c cosh((z - z0)/c)`` (s = 0 at the neck)."""

    def geom(s):
        s = np.asarray(s, float)
        r = np.sqrt(c * c + s * s)
        return (r, z0 + c * np.arcsinh(s / c), s / r, c / r, c * c / r**3, -c * s / r**3)

    return geom


def catenoid(c, z_range, z0=0.0, n=200):
    """Catenoid piece ``r = c cosh((z - z0)/c)`` for ``z`` in ``z_range``."""
    z1, z2 = z_range
    if not (c > 0 and z2 > z1):
        raise PreconditionError("catenoid needs c > 0 and an increasing z-range")
    s1 = c * np.sinh((z1 - z0) / c)
    s2 = c * np.sinh((z2 - z0) / c)
    return base_from_geometry(catenoid_geometry(c, z0), s1, s2, n, 1, ("boundary", "boundary"),
                              "catenoid", {"c": c, "z0": z0, "z_range": (z1, z2)})


def revolution(curve: ProfileCurve, n=None):
    """Base surface from a sampled profile, resampled through a cubic spline."""
    s = curve.params
    sr = CubicSpline(s, curve.r)
    sz = CubicSpline(s, curve.z)

    def geom(t):
        return (sr(t), sz(t), sr(t, 1), sz(t, 1), sr(t, 2), sz(t, 2))

    ends = tuple("axis" if f == "axis" else "boundary" for f in curve.boundary_flags)
    return base_from_geometry(geom, s[0], s[-1], n or len(s) - 1, curve.orientation, ends,
                              "revolution", {})


def build_base(kind: str, grid: int = 200, **params) -> BaseSurface:
    """Dispatch on ``kind`` in {flat-disk, flat-annulus, catenoid, revolution}."""
    if kind == "flat-disk":
        return flat_disk(params.get("R", 1.0), grid)
    if kind == "flat-annulus":
        return flat_annulus(params["R_in"], params["R_out"], grid)
    if kind == "catenoid":
        return catenoid(params["c"], params["z_range"], params.get("z0", 0.0), grid)
    if kind == "revolution":
        return revolution(params["curve"], grid)
    raise PreconditionError(f"unknown base kind {kind!r}")


def integrate(surface: BaseSurface, values) -> float:
    """Quadrature of a per-node field over the whole surface."""
    return float(np.dot(surface.weights, np.asarray(values, float)))


def face_gradient(surface: BaseSurface, u):
    """Arclength derivative of ``u`` along the meridian at the faces."""
    return np.diff(u) / (surface.Lf * surface.h)


def node_gradient(surface: BaseSurface, u):
    """Arclength derivative of ``u`` at the nodes (centered; one-sided at boundary ends)."""
    u = np.asarray(u, float)
    h = surface.h
    g = np.empty_like(u)
    g[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    for k, e in enumerate(surface.ends):
        if e == "axis":
            g[0 if k == 0 else -1] = 0.0
        elif k == 0:
            g[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
        else:
            g[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    return g / surface.L


def stiffness_matrix(surface: BaseSurface):
    """Finite-volume matrix of the Dirichlet energy ``int |grad phi|^2`` (all nodes)."""
    c = surface.Wf / (surface.Lf * surface.h) ** 2
    n = surface.n_nodes
    diag = np.zeros(n)
    diag[:-1] += c
    diag[1:] += c
    return sparse.diags([-c, diag, -c], [-1, 0, 1], format="csr")


@dataclass(frozen=True)
class SurfaceSummary:
    area: float
    h_linf: float
    h_l1: float
    h_l2: float
    h_lp: dict
    diameter: float


def summarize(weights, H, positions, ps=(3,), diameter=None) -> SurfaceSummary:
    """Area and mean-curvature norms from per-sample weights and H values."""
    w = np.asarray(weights, float)
    a = np.abs(np.asarray(H, float))
    if diameter is None:
        pts = np.asarray(positions, float)
        diameter = float(np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1)))
    return SurfaceSummary(
        area=float(w.sum()),
        h_linf=float(a.max()) if a.size else 0.0,
        h_l1=float(np.dot(w, a)),
        h_l2=float(np.sqrt(np.dot(w, a**2))),
        h_lp={p: float(np.dot(w, a**p) ** (1.0 / p)) for p in ps},
        diameter=float(diameter),
    )


def revolution_diameter(r, z):
    """Diameter of a surface of revolution: attained by antipodal meridian points."""
    r = np.asarray(r, float)
    z = np.asarray(z, float)
    return float(np.sqrt(np.max((r[:, None] + r[None]) ** 2 + (z[:, None] - z[None]) ** 2)))


def summarize_base(surface: BaseSurface, ps=(3,)) -> SurfaceSummary:
    return summarize(surface.weights, surface.mean_curvature, None, ps,
                     diameter=revolution_diameter(surface.r, surface.z))


def read_profile_csv(path, boundary_flags=("fixed", "fixed"), orientation=1) -> ProfileCurve:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames][:3] != ["s", "r", "z"]:
            raise PreconditionError("profile CSV must have header s,r,z")
        rows = [(float(row["s"]), float(row["r"]), float(row["z"])) for row in reader]
    s, r, z = np.array(rows).T
    return ProfileCurve(s, r, z, boundary_flags, orientation)


def profile_csv_rows(curve: ProfileCurve):
    yield ("s", "r", "z")
    for s, r, z in zip(curve.params, curve.r, curve.z):
        yield (repr(float(s)), repr(float(r)), repr(float(z)))
