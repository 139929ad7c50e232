"""Graphs over a flat disk on a full polar grid (P1 finite elements).

Independent of the axisymmetric meridian discretization: used to cross-check
it and to handle gravity directions that break the rotational symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import NewtonDivergenceError, PreconditionError


@dataclass(frozen=True, eq=False)
class PolarDisk:
    """Triangulated disk of radius ``R`` in the plane ``z = 0`` (normal ``+e3``)."""

    R: float
    n_r: int
    n_theta: int
    points: np.ndarray  # (N, 2)
    tris: np.ndarray  # (T, 3)
    boundary: np.ndarray  # bool mask
    ring: np.ndarray  # ring index per node (0 = centre)
    angle: np.ndarray  # angle index per node
    area_t: np.ndarray
    B: np.ndarray  # (T, 2, 3) gradients of the hat functions


def polar_disk(R=1.0, n_r=24, n_theta=48) -> PolarDisk:
    if n_r < 2 or n_theta < 3 or not R > 0:
        raise PreconditionError("need R > 0, n_r >= 2, n_theta >= 3")
    rad = np.linspace(0.0, R, n_r + 1)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    pts = [(0.0, 0.0)]
    ring = [0]
    ang = [0]
    for i in range(1, n_r + 1):
        for j in range(n_theta):
            pts.append((rad[i] * np.cos(th[j]), rad[i] * np.sin(th[j])))
            ring.append(i)
            ang.append(j)
    pts = np.array(pts)

    def node(i, j):
        return 1 + (i - 1) * n_theta + (j % n_theta)

    tris = []
    for j in range(n_theta):
        tris.append((0, node(1, j), node(1, j + 1)))
    for i in range(1, n_r):
        for j in range(n_theta):
            a, b = node(i, j), node(i, j + 1)
            c, d = node(i + 1, j), node(i + 1, j + 1)
            tris.append((a, c, d))
            tris.append((a, d, b))
    tris = np.array(tris)
    P = pts[tris]  # (T, 3, 2)
    e1 = P[:, 1] - P[:, 0]
    e2 = P[:, 2] - P[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates
    B = np.empty((len(tris), 2, 3))
    inv = 1.0 / det
    B[:, 0, 1] = e2[:, 1] * inv
    B[:, 1, 1] = -e2[:, 0] * inv
    B[:, 0, 2] = -e1[:, 1] * inv
    B[:, 1, 2] = e1[:, 0] * inv
    B[:, :, 0] = -B[:, :, 1] - B[:, :, 2]
    ring = np.array(ring)
    return PolarDisk(R, n_r, n_theta, pts, tris, ring == n_r, ring, np.array(ang), area, B)


def _element_state(disk, u):
    g = np.einsum("tkj,tj->tk", disk.B, u[disk.tris])
    S = np.sqrt(1.0 + np.sum(g * g, axis=1))
    return g, S


def disk_area(disk: PolarDisk, u) -> float:
    _, S = _element_state(disk, np.asarray(u, float))
    return float(np.dot(disk.area_t, S))


def _assemble(disk, u, K, d):
    """Residual and Jacobian of ``dE/du - int T phi`` with ``T = K nu . d``."""
    g, S = _element_state(disk, u)
    A = disk.area_t
    B = disk.B
    n = len(u)
    flux = g / S[:, None]
    nrm = d[2] - g[:, 0] * d[0] - g[:, 1] * d[1]
    T = K * nrm / S
    dT = K * (-d[None, :2] / S[:, None] - nrm[:, None] * g / S[:, None] ** 3)
    F = np.zeros(n)
    np.add.at(F, disk.tris, A[:, None] * (np.einsum("tk,tkj->tj", flux, B) - T[:, None] / 3.0))
    M = np.eye(2)[None] / S[:, None, None] - np.einsum("ti,tj->tij", g, g) / S[:, None, None] ** 3
    Ke = A[:, None, None] * np.einsum("tki,tkl,tlj->tij", B, M, B)
    Ke -= A[:, None, None] / 3.0 * np.einsum("tk,tkj->tj", dT, B)[:, None, :]
    rows = np.repeat(disk.tris, 3, axis=1).ravel()
    cols = np.tile(disk.tris, (1, 3)).ravel()
    J = sparse.csr_matrix((Ke.ravel(), (rows, cols)), shape=(n, n))
    return F, J, T


@dataclass
class DiskSolve:
    disk: PolarDisk
    u: np.ndarray
    residual_linf: float
    newton_iters: int
    history: list

    @property
    def graph(self):
        return self

    def angular_variation(self):
        """Largest spread of ``u`` around any ring."""
        worst = 0.0
        for i in range(1, self.disk.n_r + 1):
            vals = self.u[self.disk.ring == i]
            worst = max(worst, float(np.ptp(vals)))
        return worst


def solve_disk(disk: PolarDisk, K, gravity_dir=(0.0, 0.0, 1.0), u0=None, tol=1e-10,
               max_iter=30) -> DiskSolve:
    """Newton solve of ``H = K nu . gravity_dir`` over the disk, ``u = 0`` on the rim."""
    d = np.asarray(gravity_dir, float)
    n = len(disk.points)
    u = np.zeros(n) if u0 is None else np.array(u0, float)
    u[disk.boundary] = 0.0
    free = np.flatnonzero(~disk.boundary)
    # lumped nodal area for a pointwise residual in curvature units
    lump = np.zeros(n)
    np.add.at(lump, disk.tris, np.repeat(disk.area_t[:, None] / 3.0, 3, axis=1))
    hist = []
    for it in range(max_iter + 1):
        F, J, _ = _assemble(disk, u, K, d)
        r = float(np.max(np.abs(F[free] / lump[free])))
        hist.append(r)
        if r <= tol:
            return DiskSolve(disk, u, r, it, hist)
        if not np.isfinite(r) or it == max_iter or (it >= 4 and r > 10 * min(hist)):
            raise NewtonDivergenceError(f"polar Newton failed (residual {r:.3g})", last_residual=r)
        Jf = J[free][:, free]
        u[free] -= spsolve(Jf.tocsc(), F[free])
    raise AssertionError("unreachable")


def tilted_direction(theta):
    """Gravity direction seen from a disk rotated by ``theta`` about the x-axis."""
    return (0.0, float(np.sin(theta)), float(np.cos(theta)))
