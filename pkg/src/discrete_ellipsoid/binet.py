"""Discrete semi-ellipsoids, closed discrete ellipsoids and their circles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from dataclasses import replace as dc_replace

import numpy as np

from . import classical as cl
from .geometry import fit_discrete_circle, fit_plane, in_plane_frame
from .halfint import (
    DomainKind,
    IdentificationMap,
    Key,
    QuadComplex,
    build_identification,
    face_corners,
    is_primal,
    lattice_edges,
    make_domain,
)
from .shape import (
    DeformationAxes,
    GFunctions,
    SampledFunction,
    ShapeParams,
    deformation_axes,
    g_recurrence,
    trig_solutions,
)

SEAM_TOL = 1e-9


class _PointSet:
    """Keys with a coordinate array and a key -> row index."""

    keys: list[Key]
    coords: np.ndarray
    index: dict[Key, int]

    def _init_points(self, keys, coords):
        self.keys = list(keys)
        self.coords = np.asarray(coords, dtype=float)
        self.index = {k: i for i, k in enumerate(self.keys)}

    def pos(self, keys) -> np.ndarray:
        """Positions of a key or of a sequence of keys."""
        if isinstance(keys, tuple) and keys and all(isinstance(t, (int, np.integer)) for t in keys):
            return self.coords[self.index[keys]]
        return self.coords[[self.index[k] for k in keys]]

    @property
    def vertex_positions(self) -> dict[Key, np.ndarray]:
        return {k: self.coords[i] for k, i in self.index.items()}


@dataclass(eq=False)
class SemiBinet(_PointSet):
    """One half of a discrete ellipsoid on U ∪ U*.

    ``family_sign`` relates diagonal family ±1 to the sign of the classical
    plane family Π± of ``quadric``; it is the sign of ``f̂3 ĥ3``.
    """

    shape: ShapeParams
    s3: float | None
    hemisphere: int
    quadric: cl.QuadricForm
    g: GFunctions
    axes: DeformationAxes | None
    family_sign: int
    keys_in: list = field(repr=False, default_factory=list)
    coords_in: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._init_points(self.keys_in, self.coords_in)
        N1, N2 = self.shape.n1_max, self.shape.n2_max
        self.primal_domain = make_domain(DomainKind.U, N1, N2)
        self.dual_domain = make_domain(DomainKind.U_STAR, N1, N2)

    @property
    def closure_ok(self) -> bool:
        return self.g.boundary_ok and not self.g.interior_sign_change

    def primal_faces(self) -> list[tuple[Key, ...]]:
        """Quads of the ℤ² net, one per U* centre."""
        return [face_corners(c) for c in self.dual_domain.vertices()]

    def dual_faces(self) -> list[tuple[Key, ...]]:
        """Quads of the dual net, one per interior U point."""
        return [face_corners(c) for c in self.primal_domain.vertices() if all(k in self.dual_domain for k in face_corners(c))]

    def faces(self) -> list[tuple[Key, ...]]:
        return self.primal_faces() + self.dual_faces()

    def dual_edge_pairs(self) -> list[tuple[tuple[Key, Key], tuple[Key, Key]]]:
        """Primal edges paired with their crossing dual edge, where both exist."""
        out = []
        for a, b in lattice_edges(self.primal_domain):
            mid = ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)
            if a[1] == b[1]:
                d = ((mid[0], mid[1] - 1), (mid[0], mid[1] + 1))
            else:
                d = ((mid[0] - 1, mid[1]), (mid[0] + 1, mid[1]))
            if d[0] in self.dual_domain and d[1] in self.dual_domain:
                out.append(((a, b), d))
        return out

    def diagonal_pairs(self) -> list[tuple[Key, Key]]:
        """All (primal, dual) pairs at diagonal offsets ``(±½, ±½)``."""
        out = []
        for p in self.primal_domain.vertices():
            for d1 in (-1, 1):
                for d2 in (-1, 1):
                    q = (p[0] + d1, p[1] + d2)
                    if q in self.dual_domain:
                        out.append((p, q))
        return out


def _positions(keys, f1, g1, h1, f2, g2, h2, cx, cy, cz) -> np.ndarray:
    t = np.array(keys, dtype=int)
    t1, t2 = t[:, 0], t[:, 1]
    x = cx * f1.at_twice(t1) * f2.at_twice(t2)
    y = cy * g1.at_twice(t1) * g2.at_twice(t2)
    z = cz * h1.at_twice(t1) * h2.at_twice(t2)
    return np.column_stack([x, y, z])


def _domain_keys(N1, N2) -> list[Key]:
    return make_domain(DomainKind.U, N1, N2).vertices() + make_domain(DomainKind.U_STAR, N1, N2).vertices()


def build_semi_ellipsoid(
    p: ShapeParams,
    s3: float,
    hemisphere: int = 1,
    g1_0: float | None = None,
    g2_0: float | None = None,
) -> SemiBinet:
    """Member ``s3`` of the isometric deformation family, one half.

    ``hemisphere = -1`` negates the initial value of g1, which reflects the
    half in the plane y = 0.
    """
    if hemisphere not in (1, -1):
        raise ValueError("hemisphere must be +1 or -1")
    axes = deformation_axes(p, s3)
    g10 = p.natural_g0[0] if g1_0 is None else g1_0
    g = g_recurrence(p, hemisphere * g10, g2_0)
    f1, h1, f2, h2 = trig_solutions(p)
    a, b, c = p.a, p.b, p.c
    keys = _domain_keys(p.n1_max, p.n2_max)
    coords = _positions(
        keys,
        f1, g.g1, h1, f2, g.g2, h2,
        axes.f3_hat / math.sqrt((a - b) * (a - c)),
        1 / math.sqrt((a - b) * (b - c)),
        axes.h3_hat / math.sqrt((a - c) * (b - c)),
    )
    quadric = cl.QuadricForm(axes.f3_hat**2, 1.0, axes.h3_hat**2)
    sign = 1 if axes.f3_hat * axes.h3_hat >= 0 else -1
    return SemiBinet(p, s3, hemisphere, quadric, g, axes, sign, keys, coords)


def build_single_ellipsoid(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    N1: int,
    N2: int,
    g1_0: float | None = None,
    g2_0: float | None = None,
    hemisphere: int = 1,
) -> SemiBinet:
    """Discrete half of the ellipsoid ``x²/α + y²/β + z²/γ = 1`` with the
    trigonometric f, h of step ``delta`` on U ∪ U* of size (N1, N2)."""
    if not alpha > beta > gamma > 0:
        raise ValueError("need alpha > beta > gamma > 0")
    if hemisphere not in (1, -1):
        raise ValueError("hemisphere must be +1 or -1")
    p = ShapeParams(alpha, beta, gamma, delta, int(N1), int(N2))
    g10 = p.natural_g0[0] if g1_0 is None else g1_0
    g = g_recurrence(p, hemisphere * g10, g2_0)
    f1, h1, f2, h2 = trig_solutions(p)
    al, be, ga = alpha, beta, gamma
    keys = _domain_keys(p.n1_max, p.n2_max)
    coords = _positions(
        keys,
        f1, g.g1, h1, f2, g.g2, h2,
        math.sqrt(al / ((al - be) * (al - ga))),
        math.sqrt(be / ((al - be) * (be - ga))),
        math.sqrt(ga / ((al - ga) * (be - ga))),
    )
    return SemiBinet(p, None, hemisphere, cl.QuadricForm(al, be, ga), g, None, 1, keys, coords)


# --------------------------------------------------------------------------
# closed pairs


@dataclass(eq=False)
class ClosedEllipsoidPair(_PointSet):
    """A closed discrete ellipsoid and its dual, glued from two halves.

    Positions of primal vertices are stored under canonical ids; dual vertices
    keep their V* keys.
    """

    shape: ShapeParams
    s3: float | None
    quadric: cl.QuadricForm
    axes: DeformationAxes | None
    family_sign: int
    identification: IdentificationMap
    seam_deviation: float
    keys_in: list = field(repr=False, default_factory=list)
    coords_in: np.ndarray = field(repr=False, default=None)
    circles: list = field(default_factory=list)
    g: GFunctions | None = None
    """g-functions of the plus half (the minus half has -g1)."""

    def __post_init__(self):
        self._init_points(self.keys_in, self.coords_in)

    @property
    def primal_mesh(self) -> QuadComplex:
        return self.identification.primal

    @property
    def dual_mesh(self) -> QuadComplex:
        return self.identification.dual

    @property
    def umbilic_vertices(self) -> list[Key]:
        return self.identification.umbilic_vertices

    @property
    def umbilic_edges(self) -> list[tuple[Key, Key]]:
        return self.identification.umbilic_edges

    def faces(self) -> list[tuple[Key, ...]]:
        return list(self.primal_mesh.faces) + list(self.dual_mesh.faces)

    def dual_edge_pairs(self):
        return sorted(self.identification.dual_of_primal_edge.items())

    def diagonal_pairs(self) -> list[tuple[Key, Key]]:
        """Each primal vertex with the corners of its dual face (the face centres
        around it), so glue-connected neighbours are included."""
        out = []
        for v, cyc in self.identification.dual_face_of_primal_vertex.items():
            out.extend((v, d) for d in cyc)
        for v in self.umbilic_vertices:
            for e in self.umbilic_edges:
                if _umbilic_corner(v, self.shape.n1_max, self.shape.n2_max) in e:
                    out.extend((v, d) for d in e)
        return out

    def face_plane_of(self, key: Key) -> tuple[Key, ...] | None:
        """Corner keys of the face polar to ``key`` (None for umbilic vertices)."""
        if is_primal(key):
            return self.identification.dual_face_of_primal_vertex.get(key)
        return self.identification.primal_face_of_dual_vertex[key]


def _umbilic_corner(v: Key, N1: int, N2: int) -> Key:
    """The U* corner next to a primal corner of U (V coordinates on the plus side)."""
    t1, t2 = v
    return (t1 - 1 if t1 > 0 else t1 + 1, t2 - 1 if t2 > 0 else t2 + 1)


def glue_closed(plus: SemiBinet, minus: SemiBinet, seam_tol: float = SEAM_TOL) -> ClosedEllipsoidPair:
    """Glue two halves with opposite g1 signs into a closed discrete ellipsoid."""
    if plus.shape != minus.shape or plus.s3 != minus.s3 or plus.quadric != minus.quadric:
        raise ValueError("halves come from different shapes or deformation parameters")
    if not np.allclose(plus.g.g1.values, -minus.g.g1.values, rtol=0, atol=1e-14) or not np.allclose(
        plus.g.g2.values, minus.g.g2.values, rtol=0, atol=1e-14
    ):
        raise ValueError("halves must differ exactly by the sign of g1")
    if not plus.g.boundary_ok:
        raise ValueError(f"boundary conditions violated (residual {plus.g.boundary_residual:.3e})")
    p = plus.shape
    N1, N2 = p.n1_max, p.n2_max
    ident = build_identification(N1, N2)
    tN1 = 2 * N1

    def lookup(k: Key) -> np.ndarray:
        if k[0] <= tN1:
            return plus.pos(k)
        return minus.pos(ident.mirror(k))

    scale = math.sqrt(p.a - p.c)
    worst = 0.0
    for cls_key, members in ident.classes().items():
        if len(members) > 1:
            ref = lookup(cls_key)
            for m in members[1:]:
                worst = max(worst, float(np.max(np.abs(lookup(m) - ref))))
    worst /= max(scale, 1e-300)
    if worst > seam_tol:
        raise ValueError(f"glued boundary vertices differ by {worst:.3e}")
    keys = list(ident.primal.vertices) + list(ident.dual.vertices)
    coords = np.array([lookup(k) for k in keys])
    pair = ClosedEllipsoidPair(
        p, plus.s3, plus.quadric, plus.axes, plus.family_sign, ident, worst, keys, coords, g=plus.g
    )
    pair.circles = extract_discrete_circles(pair)
    return pair


def build_closed_ellipsoid(
    N1: int, N2: int, s3: float, scale: float = 1.0, g1_0: float | None = None, g2_0: float | None = None
) -> ClosedEllipsoidPair:
    from .shape import solve_boundary_shape

    p = solve_boundary_shape(N1, N2, scale)
    plus = build_semi_ellipsoid(p, s3, 1, g1_0, g2_0)
    minus = build_semi_ellipsoid(p, s3, -1, g1_0, g2_0)
    return glue_closed(plus, minus)


def with_positions(obj, coords, quadric: cl.QuadricForm | None = None):
    """Copy of a built object with replaced vertex coordinates (rows in
    ``obj.keys`` order).  Circles of a closed pair are re-extracted."""
    coords = np.array(coords, dtype=float)
    if coords.shape != obj.coords.shape:
        raise ValueError("coordinate array has the wrong shape")
    changes = {"keys_in": list(obj.keys), "coords_in": coords}
    if quadric is not None:
        changes["quadric"] = quadric
    new = dc_replace(obj, **changes)
    if isinstance(new, ClosedEllipsoidPair):
        new.circles = extract_discrete_circles(new)
    return new


def scaled(obj, factor: float):
    """Uniformly scaled copy; the underlying quadric scales with it."""
    Q = obj.quadric
    f2 = factor * factor
    return with_positions(obj, obj.coords * factor, cl.QuadricForm(Q.alpha * f2, Q.beta * f2, Q.gamma * f2))


# --------------------------------------------------------------------------
# discrete circles


@dataclass
class DiscreteCircle:
    family: int
    level: int
    """``k = n1 + family*n2``; the diagonal coordinate is ``n± = k/2``."""
    vertices: tuple[Key, ...]
    closed: bool
    degenerate: bool
    positions: np.ndarray = field(repr=False)
    plane: cl.PlaneH | None = None
    plane_residual: float = 0.0
    center: np.ndarray | None = None
    radius: float = 0.0
    circle_residual: float = 0.0
    fitted: bool = False
    umbilic_polar_plane: cl.PlaneH | None = None

    @property
    def n_level(self) -> float:
        return self.level / 2

    def consecutive_pairs(self) -> np.ndarray:
        n = len(self.vertices)
        m = n if self.closed else n - 1
        return np.array([(i, (i + 1) % n) for i in range(m)], dtype=int).reshape(-1, 2)


def _interleaved_line(family: int, level: int, N1: int, N2: int) -> list[Key]:
    """Primal and dual points on ``n1 + family*n2 = level`` in U ∪ U*, by n1."""
    out = []
    for t1 in range(-2 * N1, 2 * N1 + 1):
        t2 = family * (2 * level - t1)
        if t1 % 2 == 0:
            ok = abs(t2) <= 2 * N2
        else:
            ok = abs(t1) <= 2 * N1 - 1 and abs(t2) <= 2 * N2 - 1
        if ok:
            out.append((t1, t2))
    return out


def _circle_from(obj, family, level, verts, closed, degenerate) -> DiscreteCircle:
    pts = obj.pos(list(verts))
    circ = DiscreteCircle(family, level, tuple(verts), closed, degenerate, pts)
    flat = min(obj.quadric.coeffs) == 0  # classical polarity is undefined
    if degenerate:
        umb = [v for v in verts if is_primal(v)][0]
        if not flat:
            try:
                circ.umbilic_polar_plane = cl.polar_plane(obj.pos(umb), obj.quadric)
            except ValueError:
                circ.umbilic_polar_plane = None
        return circ
    fit = fit_plane(pts)
    circ.plane = cl.PlaneH.from_coeffs(fit.normal, fit.offset)
    circ.plane_residual = fit.residual
    e1, e2 = in_plane_frame(fit.normal)
    uv = np.column_stack([pts @ e1, pts @ e2])
    fallback_c, fallback_r2 = None, None
    if not flat:
        try:
            sec = cl.section_circle(obj.quadric, circ.plane)
            fallback_c = np.array([sec.center @ e1, sec.center @ e2])
            fallback_r2 = sec.radius**2
        except (ValueError, ZeroDivisionError):
            pass
    cf = fit_discrete_circle(uv, circ.consecutive_pairs(), fallback_c, fallback_r2)
    base = fit.normal * fit.offset
    circ.center = base + cf.center[0] * e1 + cf.center[1] * e2
    circ.radius = cf.radius
    circ.circle_residual = cf.residual
    circ.fitted = cf.fitted
    return circ


def extract_discrete_circles(obj) -> list[DiscreteCircle]:
    """Diagonal discrete circles of both families, ordered by (family, level).

    On a closed pair every circle is a closed loop: the half circle on the
    plus side followed by its mirror image run backwards.  The two extreme
    levels of each family are degenerate: an umbilic vertex together with
    its umbilic edge (a single corner vertex on a half).
    """
    N1, N2 = obj.shape.n1_max, obj.shape.n2_max
    closed_pair = isinstance(obj, ClosedEllipsoidPair)
    out = []
    for family in (1, -1):
        for level in range(-(N1 + N2), N1 + N2 + 1):
            pts = _interleaved_line(family, level, N1, N2)
            degenerate = abs(level) == N1 + N2
            if degenerate:
                corner = _umbilic_corner(pts[0], N1, N2)
                if closed_pair:
                    ident = obj.identification
                    verts = [corner, ident.canonical[pts[0]], ident.mirror(corner)]
                else:
                    verts = [pts[0], corner]
                out.append(_circle_from(obj, family, level, verts, closed_pair, True))
                continue
            if closed_pair:
                ident = obj.identification
                if not (is_primal(pts[0]) and is_primal(pts[-1])):
                    raise RuntimeError("half circles must end at primal boundary vertices")
                loop = pts + [ident.mirror(k) for k in reversed(pts[1:-1])]
                verts = [ident.canonical.get(k, k) if is_primal(k) else k for k in loop]
                out.append(_circle_from(obj, family, level, verts, True, False))
            else:
                out.append(_circle_from(obj, family, level, pts, False, False))
    return out


# --------------------------------------------------------------------------
# three-dimensional discrete confocal lattice


@dataclass(eq=False)
class ConfocalLattice3D(_PointSet):
    a: float
    b: float
    c: float
    bounds: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    functional_residual: float
    keys_in: list = field(repr=False, default_factory=list)
    coords_in: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._init_points(self.keys_in, self.coords_in)

    def primal_keys(self) -> list[tuple[int, int, int]]:
        return [k for k in self.keys if k[0] % 2 == 0]

    def edge_dual_pairs(self):
        """Each ℤ³ edge with the four edges of the dual square it pierces."""
        out = []
        idx = self.index
        for k in self.primal_keys():
            for ax in range(3):
                nb = list(k)
                nb[ax] += 2
                nb = tuple(nb)
                if nb not in idx:
                    continue
                mid = list(k)
                mid[ax] += 1
                o1, o2 = [i for i in range(3) if i != ax]
                corners = []
                for s1, s2 in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
                    q = list(mid)
                    q[o1] += s1
                    q[o2] += s2
                    corners.append(tuple(q))
                if all(q in idx for q in corners):
                    duals = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
                    out.append(((k, nb), duals))
        return out


def _product_recurrence(rhs, g0: float, lo_t: int, hi_t: int, start_t: int) -> SampledFunction:
    """Solve ``g(n+½) g(n) = rhs(n)`` outward from ``start``."""
    vals = {start_t: g0}
    for t in range(start_t, hi_t):
        vals[t + 1] = rhs(t / 2) / vals[t]
    for t in range(start_t, lo_t, -1):
        vals[t - 1] = rhs((t - 1) / 2) / vals[t]
    return SampledFunction(lo_t, np.array([vals[t] for t in range(lo_t, hi_t + 1)]))


def default_confocal_samplers(a: float, b: float, c: float, delta: float, bounds):
    """Trigonometric samplers in directions 1, 2 and hyperbolic ones in direction 3.

    Direction 3 uses ``f3 = A cosh(δn)``, ``h3 = A sinh(δn)`` with
    ``A² cosh(δ/2) = a - c``, so that ``f3⟨2⟩ - h3⟨2⟩ = a - c``.
    """
    eps_amp = math.sqrt((a - c) / math.cos(delta / 2))
    hyp_amp = math.sqrt((a - c) / math.cosh(delta / 2))
    (l1, u1), (l2, u2), (l3, u3) = bounds
    mk = SampledFunction.from_callable
    f1 = mk(lambda n: eps_amp * math.sin(delta * n), l1, u1)
    h1 = mk(lambda n: eps_amp * math.cos(delta * n), l1, u1)
    f2 = mk(lambda n: eps_amp * math.cos(delta * n), l2, u2)
    h2 = mk(lambda n: eps_amp * math.sin(delta * n), l2, u2)
    f3 = mk(lambda n: hyp_amp * math.cosh(delta * n), l3, u3)
    h3 = mk(lambda n: hyp_amp * math.sinh(delta * n), l3, u3)

    def sq(f):
        return lambda n: f(n) * f(n + 0.5)

    def start(lo, hi):
        return 0 if lo <= 0 <= hi else 2 * lo

    s1, s2, s3 = start(l1, u1), start(l2, u2), start(l3, u3)
    g1 = _product_recurrence(lambda n: (a - b) - sq(f1)(n), math.sqrt(max(a - b - f1(s1 / 2) ** 2, 1e-3)), 2 * l1, 2 * u1, s1)
    g2 = _product_recurrence(lambda n: sq(f2)(n) - (a - b), math.sqrt(max(f2(s2 / 2) ** 2 - (a - b), 1e-3)), 2 * l2, 2 * u2, s2)
    g3 = _product_recurrence(lambda n: sq(f3)(n) - (a - b), math.sqrt(max(f3(s3 / 2) ** 2 - (a - b), 1e-3)), 2 * l3, 2 * u3, s3)
    return {1: (f1, g1, h1), 2: (f2, g2, h2), 3: (f3, g3, h3)}


def functional_residual(a: float, b: float, c: float, samplers) -> float:
    """Largest relative residual of the six discrete functional equations."""
    signs = {1: (1, 1), 2: (-1, 1), 3: (-1, -1)}
    worst = 0.0
    for i, (f, g, h) in samplers.items():
        sg, sh = signs[i]
        fs = f.values[:-1] * f.values[1:]
        gs = g.values[:-1] * g.values[1:]
        hs = h.values[:-1] * h.values[1:]
        worst = max(worst, float(np.max(np.abs(fs + sg * gs - (a - b)))) / (a - c))
        worst = max(worst, float(np.max(np.abs(fs + sh * hs - (a - c)))) / (a - c))
    return worst


def build_discrete_confocal_3d(a: float, b: float, c: float, samplers, bounds, tol: float = 1e-9) -> ConfocalLattice3D:
    """The map (½ℤ)³ ⊃ Ω -> ℝ³ restricted to the bcc lattice ℤ³ ∪ (ℤ³)*.

    ``bounds`` gives integer ranges per direction; dual points lie strictly inside.
    """
    _ = cl._check_abc(a, b, c)
    resid = functional_residual(a, b, c, samplers)
    if resid > tol:
        raise ValueError(f"samplers violate the functional equations (residual {resid:.3e})")
    (l1, u1), (l2, u2), (l3, u3) = bounds
    keys = []
    for t1 in range(2 * l1, 2 * u1 + 1, 2):
        for t2 in range(2 * l2, 2 * u2 + 1, 2):
            for t3 in range(2 * l3, 2 * u3 + 1, 2):
                keys.append((t1, t2, t3))
    for t1 in range(2 * l1 + 1, 2 * u1, 2):
        for t2 in range(2 * l2 + 1, 2 * u2, 2):
            for t3 in range(2 * l3 + 1, 2 * u3, 2):
                keys.append((t1, t2, t3))
    t = np.array(keys, dtype=int)
    (f1, g1, h1), (f2, g2, h2), (f3, g3, h3) = samplers[1], samplers[2], samplers[3]
    x = f1.at_twice(t[:, 0]) * f2.at_twice(t[:, 1]) * f3.at_twice(t[:, 2]) / math.sqrt((a - b) * (a - c))
    y = g1.at_twice(t[:, 0]) * g2.at_twice(t[:, 1]) * g3.at_twice(t[:, 2]) / math.sqrt((a - b) * (b - c))
    z = h1.at_twice(t[:, 0]) * h2.at_twice(t[:, 1]) * h3.at_twice(t[:, 2]) / math.sqrt((a - c) * (b - c))
    return ConfocalLattice3D(a, b, c, tuple(map(tuple, bounds)), resid, keys, np.column_stack([x, y, z]))
