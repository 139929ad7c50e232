"""Prescribed mean curvature for axisymmetric normal graphs.

Newton's method on the discrete Euler-Lagrange system

    dE/du_j - w_j d_j T_j(u_j, Du_j) = 0      (interior nodes)

where ``E`` is the discrete graph area from :mod:`soapfilm.graph`, ``d = (1 +
k1 u)(1 + k2 u)`` and ``T`` the target mean curvature.  The Jacobian is the
analytic tridiagonal Hessian of ``E`` plus the linearized target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from . import graph as gr
from . import surface as sf
from .errors import (
    ContinuationError,
    FocalDistanceError,
    GraphRegimeError,
    NewtonDivergenceError,
    PreconditionError,
    UnsupportedConfigurationError,
)

NEWTON_TOL = 1e-10
MAX_CONTINUATION_STEPS = 20
MIN_CONTINUATION_STEP = 1e-6


# --- targets -----------------------------------------------------------------

class ConstantTarget:
    """``H = H0`` everywhere."""

    def __init__(self, H0):
        self.H0 = float(H0)

    def __call__(self, base, u, Du):
        z = np.zeros_like(u)
        return np.full_like(u, self.H0), z, z.copy()


class GravityTarget:
    """``H = K nu . e3`` with ``nu`` the graph normal (fully implicit in ``u``)."""

    def __init__(self, kappa2h):
        self.K = float(kappa2h)

    def __call__(self, base, u, Du):
        nz = base.normal_rz[:, 1]
        tz = base.tangent[:, 1]
        a1 = 1.0 + base.k1 * u
        q = Du / a1
        S = np.sqrt(1.0 + q * q)
        T = self.K * (nz - q * tz) / S
        dT_dq = self.K * (-tz - nz * q) / S**3
        return T, dT_dq * (-Du * base.k1 / a1**2), dT_dq / a1


class FunctionTarget:
    """Target given by ``fn(s, u, Du, nu_e3)``; derivatives by complex step."""

    def __init__(self, fn, step=1e-30):
        self.fn = fn
        self.step = step

    def _eval(self, base, u, Du):
        nz = base.normal_rz[:, 1]
        tz = base.tangent[:, 1]
        a1 = 1.0 + base.k1 * u
        q = Du / a1
        nu3 = (nz - q * tz) / np.sqrt(1.0 + q * q)
        return self.fn(base.s, u, Du, nu3)

    def __call__(self, base, u, Du):
        h = self.step
        T = np.real(self._eval(base, u.astype(float), Du.astype(float)))
        Tu = np.imag(self._eval(base, u + 1j * h, Du.astype(complex))) / h
        TD = np.imag(self._eval(base, u.astype(complex), Du + 1j * h)) / h
        return T, Tu, TD


@dataclass(frozen=True)
class GravityParams:
    kappa2h: float
    gravity_dir: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not (np.isfinite(self.kappa2h) and self.kappa2h >= 0):
            raise PreconditionError("kappa2h must be a nonnegative number")
        d = np.asarray(self.gravity_dir, float)
        if d.shape != (3,) or not np.isclose(np.linalg.norm(d), 1.0, atol=1e-12):
            raise PreconditionError("gravity_dir must be a unit 3-vector")


@dataclass
class SolveReport:
    graph: object
    residual_linf: float
    newton_iters: int
    continuation_steps: int = 0
    history: list = field(default_factory=list)
    kappa2h: float | None = None

    def to_dict(self):
        return {
            "residual_linf": self.residual_linf,
            "newton_iters": self.newton_iters,
            "continuation_steps": self.continuation_steps,
            "kappa2h": self.kappa2h,
            "history": list(self.history),
        }


# --- Newton ------------------------------------------------------------------

def _central_gradient(base, u):
    g = np.zeros_like(u)
    g[1:-1] = (u[2:] - u[:-2]) / (2.0 * base.L[1:-1] * base.h)
    return g


def pmc_residual(base: sf.BaseSurface, u, target):
    """Nodal residual ``H_j - T_j`` on the unknown nodes and the raw system."""
    Du = _central_gradient(base, u)
    a1 = 1.0 + base.k1 * u
    a2 = 1.0 + base.k2 * u
    d = a1 * a2
    T, Tu, TD = target(base, u, Du)
    grad = gr.area_gradient(base, u)
    F = grad - base.weights * d * T
    return F, d, (T, Tu, TD)


def _jacobian(base, u, d, tgt):
    T, Tu, TD = tgt
    sub, diag, sup = gr.area_hessian_bands(base, u)
    w = base.weights
    dd = base.k1 * (1.0 + base.k2 * u) + base.k2 * (1.0 + base.k1 * u)
    diag = diag - w * (dd * T + d * Tu)
    # Du_j depends on u_{j+1} (+) and u_{j-1} (-); zero at the ends
    c = np.zeros_like(u)
    c[1:-1] = w[1:-1] * d[1:-1] * TD[1:-1] / (2.0 * base.L[1:-1] * base.h)
    sup = sup - c[:-1]  # row j, column j+1
    sub = sub + c[1:]  # row j+1, column j
    return sub, diag, sup


def solve_pmc(base: sf.BaseSurface, target, u0=None, tol=NEWTON_TOL, max_iter=40,
              u_cap=None, slope_cap=gr.DEFAULT_SLOPE_CAP) -> SolveReport:
    """Solve ``H(Psi_u) = target`` with ``u = 0`` on the boundary by Newton's method."""
    if callable(target) and not isinstance(target, (ConstantTarget, GravityTarget, FunctionTarget)):
        target = FunctionTarget(target)
    n = base.n_nodes
    u = np.zeros(n) if u0 is None else np.array(u0, float)
    free = ~base.boundary_mask
    u[~free] = 0.0
    idx = np.flatnonzero(free)
    history = []
    for it in range(max_iter + 1):
        F, d, tgt = pmc_residual(base, u, target)
        with np.errstate(divide="ignore", invalid="ignore"):
            res = np.abs(F[idx] / (base.weights[idx] * d[idx]))
        rinf = float(np.max(res)) if res.size else 0.0
        history.append(rinf)
        if not np.isfinite(rinf):
            raise NewtonDivergenceError(
                "Newton produced non-finite values; reduce kappa2h", last_residual=rinf)
        if rinf <= tol:
            g = gr.NormalGraph(base, u, u_cap=u_cap, slope_cap=slope_cap)
            return SolveReport(g, rinf, it, history=history)
        if it == max_iter or (it >= 4 and rinf > 10 * min(history)):
            raise NewtonDivergenceError(
                f"Newton did not converge (residual {rinf:.3g} after {it} iterations); "
                "reduce kappa2h or the prescribed curvature", last_residual=rinf)
        sub, diag, sup = _jacobian(base, u, d, tgt)
        # restrict to the unknown nodes (they are contiguous)
        lo, hi = idx[0], idx[-1] + 1
        ab = np.zeros((3, hi - lo))
        ab[0, 1:] = sup[lo:hi - 1]
        ab[1] = diag[lo:hi]
        ab[2, :-1] = sub[lo:hi - 1]
        du = solve_banded((1, 1), ab, -F[lo:hi])
        u[lo:hi] += du
        kmax = np.max(np.abs(base.principal_curvatures))
        if kmax > 0 and np.max(np.abs(u)) * kmax >= 0.5:
            raise GraphRegimeError("Newton iterate left the graph regime", int(np.argmax(np.abs(u))))
    raise AssertionError("unreachable")


def solve_gravity_film(base, params: GravityParams, tol=NEWTON_TOL, u_cap=None,
                       slope_cap=gr.DEFAULT_SLOPE_CAP) -> SolveReport:
    """Soap film with gravity, ``H = kappa2h nu . g``, by continuation from ``kappa2h = 0``.

    ``base`` is an axisymmetric :class:`BaseSurface` (gravity along the axis)
    or a :class:`soapfilm.polar.PolarDisk` (any direction).
    """
    from . import polar

    K = float(params.kappa2h)
    if isinstance(base, polar.PolarDisk):
        def solve(k, u0):
            return polar.solve_disk(base, k, params.gravity_dir, u0=u0, tol=tol)
    else:
        gdir = np.asarray(params.gravity_dir, float)
        if not np.allclose(gdir, [0, 0, 1], atol=1e-14):
            raise UnsupportedConfigurationError(
                "axisymmetric bases need gravity along the axis; use a polar grid")

        def solve(k, u0):
            return solve_pmc(base, GravityTarget(k), u0=u0, tol=tol, u_cap=u_cap,
                             slope_cap=slope_cap)

    done, step, steps = 0.0, K, 0
    rep = solve(0.0, None)
    if K == 0.0:
        rep.kappa2h = 0.0
        return rep
    u = rep.graph.u
    last = rep.residual_linf
    while done < K:
        if steps >= MAX_CONTINUATION_STEPS:
            raise ContinuationError(
                f"continuation needed more than {MAX_CONTINUATION_STEPS} steps; "
                f"largest kappa2h reached {done:.6g}", largest_reached=done, last_residual=last)
        k_next = min(done + step, K)
        try:
            rep = solve(k_next, u)
        except (NewtonDivergenceError, GraphRegimeError, FocalDistanceError) as exc:
            last = getattr(exc, "last_residual", last)
            step *= 0.5
            if step < MIN_CONTINUATION_STEP:
                raise ContinuationError(
                    f"continuation stalled: largest kappa2h reached {done:.6g} "
                    f"(target {K:.6g}); the prescribed curvature is too large for this boundary",
                    largest_reached=done, last_residual=last) from exc
            continue
        steps += 1
        done = k_next
        u = rep.graph.u
        last = rep.residual_linf
    rep.continuation_steps = steps
    rep.kappa2h = K
    return rep


# --- exact translating solutions ---------------------------------------------

@dataclass(frozen=True)
class TranslatorProfile:
    """Meridian of an exact solution of ``H = K nu . e3`` from an ODE in arclength."""

    K: float
    sigma: int
    s_range: tuple
    sol: object

    def state(self, s):
        s = np.asarray(s, float)
        r, z, psi = self.sol(s)
        return r, z, psi

    def geometry(self, s):
        r, z, psi = self.state(s)
        r = np.maximum(r, 0.0)
        dpsi = _psi_rate(self.K, r, psi)
        c, sn = np.cos(psi), np.sin(psi)
        return r, z, c, sn, -sn * dpsi, c * dpsi

    def base(self, n=200, s_range=None):
        s0, s1 = self.s_range if s_range is None else s_range
        ends = ("axis" if (self.sigma == -1 and s0 == 0.0) else "boundary", "boundary")
        return sf.base_from_geometry(self.geometry, s0, s1, n, self.sigma, ends,
                                     "translator", {"K": self.K})


def _psi_rate(K, r, psi):
    r = np.asarray(r, float)
    psi = np.asarray(psi, float)
    small = r < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small, 0.0, np.sin(psi) / np.where(small, 1.0, r))
    # on the axis sin(psi)/r -> psi'(0) = -K/2
    return np.where(small, -0.5 * K, -K * np.cos(psi) - ratio)


def _rhs(K):
    def f(s, y):
        r, z, psi = y
        return [np.cos(psi), np.sin(psi), float(_psi_rate(K, r, psi))]

    return f


def translator_bowl(K, s_max=1.2, rtol=1e-13, atol=1e-15):
    """Rotationally symmetric graph over the horizontal plane starting on the axis.

    Normal points up at the axis; the meridian is ``s -> (r, z)`` with ``s = 0``
    on the axis and ``z(0) = 0``.
    """
    sol = solve_ivp(_rhs(K), (0.0, s_max), [0.0, 0.0, 0.0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise PreconditionError(f"translator integration failed: {sol.message}")
    return TranslatorProfile(float(K), -1, (0.0, s_max), sol.sol)


def translator_wing(K, neck, s_lo, s_hi, rtol=1e-13, atol=1e-15):
    """Catenoid-like exact solution through the neck circle ``r = neck`` at ``s = 0``."""
    y0 = [neck, 0.0, 0.5 * np.pi]
    fwd = solve_ivp(_rhs(K), (0.0, s_hi), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=True)
    bwd = solve_ivp(_rhs(K), (0.0, s_lo), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=True)
    if not (fwd.success and bwd.success):
        raise PreconditionError("translator integration failed")

    def both(s):
        s = np.atleast_1d(np.asarray(s, float))
        out = np.empty((3, s.size))
        pos = s >= 0
        if pos.any():
            out[:, pos] = fwd.sol(s[pos])
        if (~pos).any():
            out[:, ~pos] = bwd.sol(s[~pos])
        return out

    return TranslatorProfile(float(K), 1, (s_lo, s_hi), both)


def bowl_film_oracle(K, R=1.0):
    """Exact gravity film over the horizontal disk of radius ``R``.

    Returns ``(profile, s_R, u_of_r)`` where ``u_of_r`` gives the height above
    the boundary plane.
    """
    tp = translator_bowl(K, s_max=1.5 * R)
    from scipy.optimize import brentq

    sR = brentq(lambda s: tp.state(s)[0] - R, 0.5 * R, 1.5 * R, xtol=1e-15)
    zR = tp.state(sR)[1]

    def u_of_r(r):
        r = np.asarray(r, float)
        s = np.array([brentq(lambda t: tp.state(t)[0] - ri, -1e-12, sR + 1e-12, xtol=1e-15)
                      if ri > 0 else 0.0 for ri in np.atleast_1d(r)])
        return tp.state(s)[1] - zR

    return tp, sR, u_of_r


# --- two interfaces ----------------------------------------------------------

def _offset_H_general(base, t):
    """Mean curvature of the offset ``p + t(p) nu(p)`` by surface-core stencils."""
    nr, nz = base.normal_rz.T
    prof = sf.ProfileCurve(base.s, base.r + t * nr, base.z + t * nz,
                           tuple("axis" if e == "axis" else "fixed" for e in base.ends),
                           base.sigma)
    return prof.curvatures()[2]


def two_interface_residual(base: sf.BaseSurface, alpha, beta, kappa2):
    """``H_{M(alpha)}(x+) - H_{M(-beta)}(x-) - kappa2 (alpha + beta) nu . e3`` per node.

    Both interface curvatures are taken with respect to the normal pointing
    out of the film, so the lower interface uses ``-nu``.
    """
    n = base.n_nodes
    a = np.broadcast_to(np.asarray(alpha, float), (n,)).copy()
    b = np.broadcast_to(np.asarray(beta, float), (n,)).copy()
    if np.any(a < 0) or np.any(b < 0):
        raise PreconditionError("interface offsets must be nonnegative")
    kmax = np.max(np.abs(base.principal_curvatures))
    if max(a.max(), b.max()) * kmax >= 1.0:
        raise FocalDistanceError("interface offset reaches the focal distance of the base")
    nu3 = base.normal_rz[:, 1]
    if np.ptp(a) == 0.0 and np.ptp(b) == 0.0:
        Hp = gr.offset_curvatures(base, a[0]).H_offset
        Hm = -gr.offset_curvatures(base, -b[0]).H_offset
    else:
        ds = base.L * base.h
        for arr in (a, b):
            if np.max(np.abs(np.diff(arr)) / ds[:-1]) > 0.05:
                raise PreconditionError("offsets must vary slowly (|grad| <= 0.05)")
        Hp = _offset_H_general(base, a)
        Hm = -_offset_H_general(base, -b)
    return Hp - Hm - kappa2 * (a + b) * nu3


def export_grid_rows(g: gr.NormalGraph, n_theta=1):
    """Rows ``i,j,s,theta,u`` for an axisymmetric solution."""
    yield ("i", "j", "s", "theta", "u")
    for j in range(n_theta):
        th = 2 * np.pi * j / n_theta
        for i, (s, u) in enumerate(zip(g.base.s, g.u)):
            yield (i, j, repr(float(s)), repr(float(th)), repr(float(u)))


def image_meridian(g: gr.NormalGraph) -> sf.ProfileCurve:
    b = g.base
    nr, nz = b.normal_rz.T
    flags = tuple("axis" if e == "axis" else "fixed" for e in b.ends)
    return sf.ProfileCurve(b.s, b.r + g.u * nr, b.z + g.u * nz, flags, b.sigma)
