"""Small numerical geometry helpers shared by the builders and the checks."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class PlaneFit(NamedTuple):
    normal: np.ndarray
    offset: float
    residual: float
    """Largest point-to-plane distance divided by the point-set diameter."""


def diameter(pts: np.ndarray) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def fit_plane(pts: np.ndarray) -> PlaneFit:
    """Total least-squares plane; the normal is oriented so its largest
    component is positive."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 3:
        raise ValueError("need at least three points for a plane")
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid)
    n = vt[-1]
    if n[int(np.argmax(np.abs(n)))] < 0:
        n = -n
    dist = np.abs((pts - centroid) @ n)
    diam = diameter(pts)
    resid = float(dist.max() / diam) if diam > 0 else 0.0
    return PlaneFit(n, float(n @ centroid), resid)


def face_planarity(faces: np.ndarray) -> np.ndarray:
    """Relative non-planarity of a stack of polygons, shape (F, k, 3)."""
    faces = np.asarray(faces, dtype=float)
    centred = faces - faces.mean(axis=1, keepdims=True)
    _, s, vt = np.linalg.svd(centred)
    normals = vt[:, -1, :]
    dist = np.abs(np.einsum("fkd,fd->fk", centred, normals)).max(axis=1)
    diff = faces[:, :, None, :] - faces[:, None, :, :]
    diam = np.sqrt(np.max(np.sum(diff * diff, axis=-1), axis=(1, 2)))
    return np.where(diam > 0, dist / np.where(diam > 0, diam, 1.0), 0.0)


def face_planes(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best-fit unit normals and offsets ``n·x = d`` of a stack of polygons."""
    faces = np.asarray(faces, dtype=float)
    cen = faces.mean(axis=1)
    _, _, vt = np.linalg.svd(faces - cen[:, None, :])
    normals = vt[:, -1, :]
    return normals, np.einsum("fd,fd->f", normals, cen)


def in_plane_frame(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frame of the plane, pivoting on the largest normal component.

    The axis following the pivot axis is projected into the plane, which makes
    the frame a deterministic function of the normal.
    """
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    k = int(np.argmax(np.abs(n)))
    seed = np.zeros(3)
    seed[(k + 1) % 3] = 1.0
    e1 = seed - (seed @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


class CircleFit(NamedTuple):
    center: np.ndarray
    radius: float
    residual: float
    """max |(u_i - c)·(u_{i+1} - c) - R²| divided by the squared diameter."""
    fitted: bool


def polar_circle_residual(uv: np.ndarray, pairs: np.ndarray, center, radius2: float) -> float:
    uv = np.asarray(uv, dtype=float)
    c = np.asarray(center, dtype=float)
    i, j = pairs[:, 0], pairs[:, 1]
    vals = np.sum((uv[i] - c) * (uv[j] - c), axis=1) - radius2
    diam = diameter(uv)
    return float(np.max(np.abs(vals)) / diam**2) if diam > 0 else 0.0


def fit_discrete_circle(uv: np.ndarray, pairs: np.ndarray, fallback_center=None, fallback_r2=None) -> CircleFit:
    """Fit one circle to the relation ``(u_i - c)·(u_j - c) = R²`` over the
    consecutive vertex pairs.

    The relation is linear in ``(c, R² - |c|²)``.  With fewer than three pairs
    the system is underdetermined and the supplied fallback circle is used.
    """
    uv = np.asarray(uv, dtype=float)
    pairs = np.asarray(pairs, dtype=int)
    if len(pairs) < 3:
        if fallback_center is None:
            raise ValueError("too few vertex pairs and no fallback circle")
        c = np.asarray(fallback_center, dtype=float)
        r2 = float(fallback_r2)
        return CircleFit(c, float(np.sqrt(max(r2, 0.0))), polar_circle_residual(uv, pairs, c, r2), False)
    i, j = pairs[:, 0], pairs[:, 1]
    A = np.column_stack([uv[i] + uv[j], np.ones(len(pairs))])
    rhs = np.sum(uv[i] * uv[j], axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    c = sol[:2]
    r2 = float(sol[2] + c @ c)
    return CircleFit(c, float(np.sqrt(max(r2, 0.0))), polar_circle_residual(uv, pairs, c, r2), True)


def kabsch_residual(P: np.ndarray, Q: np.ndarray) -> float:
    """Max vertex deviation after the best proper rigid motion taking P to Q,
    divided by the diameter of Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if np.array_equal(P, Q):
        return 0.0
    pc, qc = P.mean(axis=0), Q.mean(axis=0)
    H = (P - pc).T @ (Q - qc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    D = np.diag([1.0, 1.0, d])
    Rm = Vt.T @ D @ U.T
    moved = (P - pc) @ Rm.T + qc
    diam = diameter(Q)
    dev = float(np.max(np.linalg.norm(moved - Q, axis=1)))
    return dev / diam if diam > 0 else dev


def homogeneous_intersection(normals: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, float]:
    """Common point of planes ``n·x = d`` as a unit vector in R⁴.

    Returns the least-squares solution and the largest row residual.
    """
    rows = np.column_stack([normals, -offsets])
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(rows)
    X = vt[-1]
    if X[3] < 0:
        X = -X
    return X, float(np.max(np.abs(rows @ X)))


def projective_distance(X: np.ndarray, Y: np.ndarray) -> float:
    """Sine of the angle between two homogeneous points."""
    X = X / np.linalg.norm(X)
    Y = Y / np.linalg.norm(Y)
    # rejection norm rather than sqrt(1 - cos²), which loses half the digits
    return float(np.linalg.norm(X - (X @ Y) * Y))


def distance_to_span(X: np.ndarray, basis: np.ndarray) -> float:
    """Distance of a unit vector from the span of the rows of ``basis``."""
    X = X / np.linalg.norm(X)
    q, _ = np.linalg.qr(np.asarray(basis, dtype=float).T)
    return float(np.linalg.norm(X - q @ (q.T @ X)))
