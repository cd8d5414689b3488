"""Continuous reference geometry: confocal coordinates, circular sections,
umbilics, diagonal curvature-line parametrisations and polarity.

Everything here is evaluated from closed formulas and serves as the oracle
for the discrete constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_SLACK = 1e-12


@dataclass(frozen=True)
class QuadricForm:
    """Coefficients of ``x²/α + y²/β + z²/γ = 1``."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("quadric coefficients must be non-negative")

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma], dtype=float)

    @property
    def degenerate(self) -> bool:
        """Flat (a zero coefficient) or without a strict ordering of the axes."""
        a, b, g = self.alpha, self.beta, self.gamma
        return min(a, b, g) == 0 or not (a > b > g or a < b < g)

    @property
    def is_sphere(self) -> bool:
        return self.alpha == self.beta == self.gamma

    def value(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.sum(pts**2 / self.coeffs, axis=-1)

    def bilinear(self, p, q) -> np.ndarray:
        """``⟨p, q⟩ = p_x q_x/α + p_y q_y/β + p_z q_z/γ``."""
        return np.sum(np.asarray(p) * np.asarray(q) / self.coeffs, axis=-1)


@dataclass(frozen=True)
class PlaneH:
    """Plane ``p x + q y + r z = s`` with unit normal ``(p, q, r)``."""

    p: float
    q: float
    r: float
    s: float

    @classmethod
    def from_coeffs(cls, normal, s) -> "PlaneH":
        n = np.asarray(normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm == 0:
            raise ValueError("plane normal must be non-zero")
        return cls(*(n / norm), float(s) / norm)

    @property
    def normal(self) -> np.ndarray:
        return np.array([self.p, self.q, self.r])

    def distance(self, pts) -> np.ndarray:
        return np.asarray(pts, dtype=float) @ self.normal - self.s


# --------------------------------------------------------------------------
# confocal coordinates


@dataclass(frozen=True)
class ConfocalPoint:
    u1: float
    u2: float
    u3: float
    signs: tuple[int, int, int] = (1, 1, 1)


def _check_abc(a, b, c):
    if not a > b > c:
        raise ValueError(f"need a > b > c, got {a}, {b}, {c}")


def confocal_point(cp: ConfocalPoint, a: float, b: float, c: float) -> np.ndarray:
    """Cartesian point of confocal parameters; boundary values give the planar limits."""
    _check_abc(a, b, c)
    u1, u2, u3 = cp.u1, cp.u2, cp.u3
    if not (-a <= u1 <= -b <= u2 <= -c <= u3):
        raise ValueError(f"parameter chain violated: {u1}, {u2}, {u3}")
    x2 = (u1 + a) * (u2 + a) * (u3 + a) / ((a - b) * (a - c))
    y2 = (u1 + b) * (u2 + b) * (u3 + b) / ((b - a) * (b - c))
    z2 = (u1 + c) * (u2 + c) * (u3 + c) / ((c - a) * (c - b))
    sq = np.sqrt(np.maximum([x2, y2, z2], 0.0))
    return sq * np.asarray(cp.signs, dtype=float)


def confocal_residuals(point, cp: ConfocalPoint, a: float, b: float, c: float) -> np.ndarray:
    """Residuals of the three quadric equations at a point (generic parameters)."""
    x, y, z = point
    out = []
    for u in (cp.u1, cp.u2, cp.u3):
        out.append(x * x / (u + a) + y * y / (u + b) + z * z / (u + c) - 1.0)
    return np.abs(np.array(out))


def _richardson_tangent(func, u: float, h: float) -> np.ndarray:
    def central(step):
        return (func(u + step) - func(u - step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def coordinate_orthogonality(cp: ConfocalPoint, a: float, b: float, c: float, h: float = 1e-4) -> float:
    """Largest |cos| between the three coordinate tangent vectors.

    Tangents use central differences with one Richardson step; ``cp`` must lie
    strictly inside its chamber and at least ``h`` away from the walls.
    """

    def along(i):
        def f(t):
            u = [cp.u1, cp.u2, cp.u3]
            u[i] = t
            return confocal_point(ConfocalPoint(*u, cp.signs), a, b, c)

        return f

    us = (cp.u1, cp.u2, cp.u3)
    tang = [_richardson_tangent(along(i), us[i], h) for i in range(3)]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            ti, tj = tang[i], tang[j]
            worst = max(worst, abs(ti @ tj) / (np.linalg.norm(ti) * np.linalg.norm(tj)))
    return float(worst)


# --------------------------------------------------------------------------
# circular sections, umbilics, polarity


def _middle_check(Q: QuadricForm):
    a, b, g = Q.alpha, Q.beta, Q.gamma
    if not (a > b > g or a < b < g) or min(a, b, g) <= 0:
        raise ValueError("circular sections need beta strictly between alpha and gamma")


def circular_normal(Q: QuadricForm, sign: int) -> np.ndarray:
    """Unnormalised normal ``(√|1/β-1/α|, 0, ±√|1/γ-1/β|)`` of the family Π±."""
    _middle_check(Q)
    a, b, g = Q.alpha, Q.beta, Q.gamma
    return np.array([math.sqrt(abs(1 / b - 1 / a)), 0.0, sign * math.sqrt(abs(1 / g - 1 / b))])


def mu_max(Q: QuadricForm) -> float:
    return math.sqrt(abs(Q.alpha - Q.gamma) / Q.beta)


def circular_planes(Q: QuadricForm, sign: int, mu: float) -> PlaneH:
    """Plane of the family Π± at offset μ.

    Absolute values make the formula valid for β between α and γ in either
    order, which covers every non-degenerate member of the deformation family.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    m = mu_max(Q)
    if abs(mu) > m * (1 + _SLACK):
        raise ValueError(f"mu={mu} outside [-{m}, {m}]")
    return PlaneH.from_coeffs(circular_normal(Q, sign), mu)


class SectionCircle(NamedTuple):
    center: np.ndarray
    radius: float


def section_circle(Q: QuadricForm, plane: PlaneH) -> SectionCircle:
    """Centre and radius of a circular section (assumes the plane is circular)."""
    A = Q.coeffs
    n = plane.normal
    c = plane.s * A * n / float(n @ (A * n))
    r2 = Q.beta * (1 - float(Q.value(c)))
    return SectionCircle(c, math.sqrt(max(r2, 0.0)))


def sample_section(Q: QuadricForm, plane: PlaneH, count: int = 16) -> np.ndarray:
    """Points of the plane section found by intersecting rays from the conic centre.

    No circle is assumed: each ray is intersected with the quadric directly.
    """
    A = Q.coeffs
    n = plane.normal
    c = plane.s * A * n / float(n @ (A * n))
    rest = 1 - float(Q.value(c))
    if rest < 0:
        raise ValueError("plane misses the quadric")
    e1 = _pivot_frame(n)[0]
    e2 = np.cross(n, e1)
    t = 2 * np.pi * np.arange(count) / count
    w = np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2
    rho = np.sqrt(rest / Q.value(w))
    return c + rho[:, None] * w


def _pivot_frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal in-plane frame; the axis of the smallest normal component seeds it."""
    n = n / np.linalg.norm(n)
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(n)))] = 1.0
    e1 = seed - (seed @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def umbilic_points(Q: QuadricForm) -> np.ndarray:
    """The four umbilics, rows ordered (+,+), (+,-), (-,+), (-,-) in (x, z) signs."""
    _middle_check(Q)
    a, b, g = Q.alpha, Q.beta, Q.gamma
    X = math.sqrt(a * (a - b) / (a - g))
    Z = math.sqrt(g * (b - g) / (a - g))
    return np.array([[sx * X, 0.0, sz * Z] for sx in (1, -1) for sz in (1, -1)])


def opposite_umbilics(Q: QuadricForm, sign: int) -> np.ndarray:
    """Opposite umbilic pair whose tangent planes belong to Π±."""
    u = umbilic_points(Q)
    return u[[0, 3]] if sign > 0 else u[[1, 2]]


class Pole(NamedTuple):
    coords: np.ndarray
    finite: bool
    """False when the plane passes through the centre; coords is then a direction."""


def pole(plane: PlaneH, Q: QuadricForm) -> Pole:
    v = Q.coeffs * plane.normal
    if plane.s == 0:
        return Pole(v / np.linalg.norm(v), False)
    return Pole(v / plane.s, True)


def pole_homogeneous(plane: PlaneH, Q: QuadricForm) -> np.ndarray:
    return np.append(Q.coeffs * plane.normal, plane.s)


def polar_plane(point, Q: QuadricForm) -> PlaneH:
    point = np.asarray(point, dtype=float)
    if not np.any(point):
        raise ValueError("the centre has no polar plane")
    return PlaneH.from_coeffs(point / Q.coeffs, 1.0)


# --------------------------------------------------------------------------
# diagonal curvature-line parametrisations


def diag_bounds(Q: QuadricForm) -> tuple[float, float]:
    k = math.sqrt((Q.alpha - Q.beta) / (Q.alpha - Q.gamma))
    return math.asin(k), math.acos(k)


def _check_domain(s1, s2, b1, b2):
    if abs(s1) > b1 * (1 + _SLACK) or abs(s2) > b2 * (1 + _SLACK):
        raise ValueError(f"(s1, s2)=({s1}, {s2}) outside [-{b1}, {b1}] x [-{b2}, {b2}]")


def _half_factor(s: float, s0: float) -> float:
    """``√(sin(s0 - s) sin(s0 + s))``, exactly zero at ``|s| = s0``."""
    return math.sqrt(max(math.sin(s0 - abs(s)) * math.sin(s0 + abs(s)), 0.0))


def _y_factor(s1, s2, s1_0, s2_0) -> float:
    # 1 - k sin²s1 and k cos²s2 - 1 with k = 1/sin²s1⁰ = 1/cos²s2⁰ in product form
    return _half_factor(s1, s1_0) * _half_factor(s2, s2_0) / (math.sin(s1_0) * math.cos(s2_0))


def diag_param(Q: QuadricForm, hemisphere: int, s1: float, s2: float) -> np.ndarray:
    """Curvature-line parametrisation of one half of the ellipsoid whose
    diagonals ``s1 ± s2 = const`` are its circular sections."""
    a, b, g = Q.alpha, Q.beta, Q.gamma
    if not a > b > g > 0:
        raise ValueError("need alpha > beta > gamma > 0")
    s1_0, s2_0 = diag_bounds(Q)
    _check_domain(s1, s2, s1_0, s2_0)
    x = math.sqrt(a * (a - g) / (a - b)) * math.sin(s1) * math.cos(s2)
    y = hemisphere * math.sqrt(b * (a - b) / (b - g)) * _y_factor(s1, s2, s1_0, s2_0)
    z = math.sqrt(g * (a - g) / (b - g)) * math.cos(s1) * math.sin(s2)
    return np.array([x, y, z])


def family_bounds(a: float, b: float, c: float) -> tuple[float, float]:
    k = math.sqrt((a - b) / (a - c))
    return math.asin(k), math.acos(k)


def family_quadric(a: float, b: float, c: float, s3: float) -> QuadricForm:
    """Member of the isometric deformation family at ``s3``."""
    return QuadricForm(
        (a - c) / (b - c) * math.cos(s3) ** 2,
        1.0,
        (a - c) / (a - b) * math.sin(s3) ** 2,
    )


def s3_sphere(a: float, b: float, c: float) -> float:
    return math.atan(math.sqrt((a - b) / (b - c)))


def family_param(a, b, c, hemisphere: int, s1: float, s2: float, s3: float, bounds=None) -> np.ndarray:
    """Point of the deformation family member ``s3`` (one half, sign ``hemisphere``).

    ``bounds`` may supply ``(s1⁰, s2⁰)`` exactly, e.g. for closed samplings.
    """
    _check_abc(a, b, c)
    if c <= 0:
        raise ValueError("need c > 0")
    if not 0 <= s3 < math.pi:
        raise ValueError("s3 must lie in [0, pi)")
    s1_0, s2_0 = family_bounds(a, b, c) if bounds is None else bounds
    _check_domain(s1, s2, s1_0, s2_0)
    amp = (a - c) / math.sqrt((a - b) * (b - c))
    x = amp * math.sin(s1) * math.cos(s2) * math.cos(s3)
    y = hemisphere * math.sqrt((a - b) / (b - c)) * _y_factor(s1, s2, s1_0, s2_0)
    z = amp * math.cos(s1) * math.sin(s2) * math.sin(s3)
    return np.array([x, y, z])


def family_circle_normal(s3: float, family: int) -> np.ndarray:
    """Unit normal of the planes ``s1 + family*s2 = const`` of member ``s3``.

    Defined for every non-planar member, the unit sphere included.
    """
    n = np.array([math.sin(s3), 0.0, family * math.cos(s3)])
    return n / np.linalg.norm(n)


def affine_isometric_check(Q: QuadricForm, sigma1: float, sigma3: float, tol: float = 1e-12):
    """Whether ``(x, y, z) -> (σ1 x, y, σ3 z)`` is isometric on the circular sections."""
    if sigma1 <= 0 or sigma3 <= 0:
        raise ValueError("sigma1, sigma3 must be positive")
    a, b, g = Q.alpha, Q.beta, Q.gamma
    lhs = a * (b - g) * sigma1**2 + g * (a - b) * sigma3**2
    rhs = b * (a - g)
    resid = abs(lhs - rhs) / abs(rhs)
    return resid <= tol, resid


def affine_image(Q: QuadricForm, sigma1: float, sigma3: float) -> QuadricForm:
    return QuadricForm(Q.alpha * sigma1**2, Q.beta, Q.gamma * sigma3**2)


def confocal_up_to_scaling(Q1: QuadricForm, Q2: QuadricForm, tol: float = 1e-12) -> bool:
    """Some rescaling of Q2 differs from Q1 by a common shift of all coefficients."""
    d1 = np.diff(Q1.coeffs)
    d2 = np.diff(Q2.coeffs)
    # scaling lambda*Q2 is confocal with Q1 iff the difference vectors are parallel
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    return abs(cross) <= tol * max(np.linalg.norm(d1) * np.linalg.norm(d2), 1e-300)


# --------------------------------------------------------------------------
# sampled webs


def web_closing(M1: int, M2: int) -> float:
    """Shape ratio ``(a-b)/(a-c)`` for which a web sampled with ``2*M1`` and
    ``2*M2`` curvature lines closes."""
    if M1 < 1 or M2 < 1:
        raise ValueError("M1, M2 must be positive")
    # cos²(θ/2) written as (1 + cos θ)/2, which is exactly ½ when M1 = M2
    return (1 + math.cos(M2 * math.pi / (M1 + M2))) / 2


def web_q(M1: int, M2: int) -> float:
    """Same condition expressed as ``q = (a-2b+c)/(a-c)``."""
    # q = 2 (a-b)/(a-c) - 1; exact zero for M1 = M2
    return 2 * web_closing(M1, M2) - 1


@dataclass(frozen=True)
class SampledWeb:
    a: float
    b: float
    c: float
    s3: float
    step: float
    curvature_lines: list[np.ndarray]
    circles: dict[int, list[np.ndarray]]
    """family -> closed polylines (first point repeated at the end)."""


def sample_web(M1: int, M2: int, scale: float = 1.0, s3: float | None = None) -> SampledWeb:
    """Curvature lines and circular sections of a classical ellipsoid on the
    closed grid of step ``h = 2 s1⁰/M1 = 2 s2⁰/M2``.

    Every polyline runs over the upper half and back over the lower half, so
    it is closed with its first sample repeated last.
    """
    ratio = web_closing(M1, M2)
    c = scale / 2
    a = 3 * scale / 2
    b = a - ratio * (a - c)
    s3 = s3_sphere(a, b, c) if s3 is None else s3
    s1_0 = M1 * math.pi / (2 * (M1 + M2))
    s2_0 = M2 * math.pi / (2 * (M1 + M2))
    h = 2 * s1_0 / M1
    s1 = s1_0 * (2 * np.arange(M1 + 1) / M1 - 1)
    s2 = s2_0 * (2 * np.arange(M2 + 1) / M2 - 1)
    bounds = (s1_0, s2_0)

    def closed(pairs):
        up = [family_param(a, b, c, 1, u, v, s3, bounds) for u, v in pairs]
        down = [family_param(a, b, c, -1, u, v, s3, bounds) for u, v in reversed(pairs)]
        return np.array(up + down[1:])

    lines = []
    for u in s1:
        lines.append(closed([(u, v) for v in s2]))
    for v in s2:
        lines.append(closed([(u, v) for u in s1]))
    circles: dict[int, list[np.ndarray]] = {1: [], -1: []}
    for fam in (1, -1):
        for level in range(M1 + M2 + 1):
            pairs = []
            for i in range(M1 + 1):
                j = level - i if fam > 0 else i - level + M2
                if 0 <= j <= M2:
                    pairs.append((s1[i], s2[j]))
            if len(pairs) > 1:
                circles[fam].append(closed(pairs))
    return SampledWeb(a, b, c, s3, h, lines, circles)
