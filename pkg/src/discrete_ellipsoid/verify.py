"""Named, tolerance-parameterised checks of the invariants of discrete
ellipsoids, collected into a structured report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import classical as cl
from .binet import ClosedEllipsoidPair, ConfocalLattice3D, DiscreteCircle, SemiBinet
from .geometry import (
    distance_to_span,
    face_planarity,
    face_planes,
    homogeneous_intersection,
    in_plane_frame,
    kabsch_residual,
    polar_circle_residual,
    projective_distance,
)
from .halfint import Key, format_key
from .shape import SampledFunction, ShapeParams

DEFAULT_TOL = 1e-9
WORST_COUNT = 5


@dataclass
class CheckEntry:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    details: list = field(default_factory=list)
    """Worst offenders as ``{"element": str, "residual": float}``, largest first."""
    skipped: bool = False
    note: str = ""
    scope: str = ""
    """Which member (or pair of members) of a family the entry refers to."""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scope": self.scope,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "skipped": bool(self.skipped),
            "note": self.note,
            "details": [{"element": d["element"], "residual": float(d["residual"])} for d in self.details],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckEntry":
        def num(x):
            return math.inf if x is None else float(x)

        return cls(
            d["name"], num(d["max_residual"]), float(d["tolerance"]), bool(d["pass"]),
            [{"element": e["element"], "residual": num(e["residual"])} for e in d["details"]],
            bool(d["skipped"]), d["note"], d["scope"],
        )


@dataclass
class VerificationReport:
    entries: list[CheckEntry] = field(default_factory=list)

    def extend(self, entries) -> "VerificationReport":
        self.entries.extend(entries)
        return self

    @property
    def overall_pass(self) -> bool:
        return all(e.passed for e in self.entries)

    def sorted_entries(self) -> list[CheckEntry]:
        return sorted(self.entries, key=lambda e: (e.name, e.scope))

    def by_name(self, name: str) -> list[CheckEntry]:
        return [e for e in self.entries if e.name == name]

    def to_dict(self) -> dict:
        return {
            "overall_pass": self.overall_pass,
            "entries": [e.to_dict() for e in self.sorted_entries()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls([CheckEntry.from_dict(e) for e in d["entries"]])


def _entry(name: str, residuals, labels, tol: float, note: str = "") -> CheckEntry:
    residuals = np.asarray(residuals, dtype=float)
    if residuals.size == 0:
        return CheckEntry(name, 0.0, tol, True, [], True, note or "nothing to check")
    residuals = np.where(np.isfinite(residuals), np.abs(residuals), np.inf)
    order = sorted(range(len(residuals)), key=lambda i: (-residuals[i], str(labels[i])))
    worst = [{"element": str(labels[i]), "residual": float(residuals[i])} for i in order[:WORST_COUNT]]
    mx = float(residuals.max())
    return CheckEntry(name, mx, tol, mx < tol, worst, False, note)


def _skip(name: str, tol: float, note: str) -> CheckEntry:
    return CheckEntry(name, 0.0, tol, True, [], True, note)


def _label(keys) -> str:
    if isinstance(keys, tuple) and len(keys) and isinstance(keys[0], int):
        return format_key(keys)
    return "-".join(_label(k) for k in keys)


# --------------------------------------------------------------------------
# principal binet and polarity


def check_principal(binet, tol: float = DEFAULT_TOL) -> list[CheckEntry]:
    """Face planarity (best-fit plane distance over face diameter) and
    orthogonality of dual edge pairs (|cos| of the angle)."""
    faces = [f for f in binet.faces() if len(f) >= 4]
    stack = np.array([binet.pos(list(f)) for f in faces]) if faces else np.zeros((0, 4, 3))
    plan = face_planarity(stack) if len(stack) else np.zeros(0)
    e_plan = _entry("face_planarity", plan, [_label(f) for f in faces], tol)

    pairs = binet.dual_edge_pairs()
    if pairs:
        P = np.array([[binet.pos(e[0]), binet.pos(e[1])] for e, _ in pairs])
        D = np.array([[binet.pos(d[0]), binet.pos(d[1])] for _, d in pairs])
        u = P[:, 1] - P[:, 0]
        v = D[:, 1] - D[:, 0]
        lu, lv = np.linalg.norm(u, axis=1), np.linalg.norm(v, axis=1)
        # flat members (s3 = 0) collapse some edges to points; they have no direction
        floor = 1e-12 * max(float(np.max(np.abs(binet.coords))), 1e-300)
        keep = (lu > floor) & (lv > floor)
        cos = np.abs(np.sum(u[keep] * v[keep], axis=1)) / (lu[keep] * lv[keep])
        labels = [f"{_label(e)}|{_label(d)}" for (e, d), k in zip(pairs, keep) if k]
        dropped = int(len(pairs) - keep.sum())
    else:
        cos, labels, dropped = np.zeros(0), [], 0
    note = f"{dropped} pairs with a zero-length edge skipped" if dropped else ""
    e_orth = _entry("dual_orthogonality", cos, labels, tol, note)
    return [e_plan, e_orth]


def check_polarity(binet, tol: float = DEFAULT_TOL, quadric: cl.QuadricForm | None = None) -> CheckEntry:
    """Residual of ``x x'/α + y y'/β + z z'/γ - 1`` over all diagonal pairs."""
    Q = binet.quadric if quadric is None else quadric
    if _flat(Q):
        return _skip("polarity", tol, "planar family member, polarity undefined")
    pairs = binet.diagonal_pairs()
    P = binet.pos([p for p, _ in pairs])
    R = binet.pos([q for _, q in pairs])
    res = Q.bilinear(P, R) - 1.0
    return _entry("polarity", res, [_label(pq) for pq in pairs], tol)


# --------------------------------------------------------------------------
# circles


def _flat(Q: cl.QuadricForm, ratio: float = 1e-12) -> bool:
    """Shortest semi-axis at most ``ratio`` times the longest (s3 = 0 or π/2
    in floating point)."""
    c = Q.coeffs
    return bool(c.min() <= ratio**2 * c.max())


def _near_sphere(Q: cl.QuadricForm, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(Q.coeffs - Q.beta)) <= tol * Q.beta)


def expected_circle_normal(Q: cl.QuadricForm, family: int, family_sign: int = 1, s3: float | None = None):
    """Normal of the classical circular sections matching a diagonal family.

    Near the sphere the classical families are undefined and the deformation
    family's own normal ``(sin s3, 0, ±cos s3)`` is used.
    """
    if s3 is not None and (_near_sphere(Q) or Q.degenerate or _flat(Q)):
        if math.sin(s3) == 0 or math.cos(s3) == 0:
            return None
        return cl.family_circle_normal(s3, family)
    if Q.degenerate or _flat(Q):
        return None
    n = cl.circular_normal(Q, family * family_sign)
    return n / np.linalg.norm(n)


def check_circles(
    circles: list[DiscreteCircle],
    quadric: cl.QuadricForm,
    tol: float = DEFAULT_TOL,
    family_sign: int = 1,
    s3: float | None = None,
    tol_circle: float | None = None,
    tol_align: float | None = None,
) -> list[CheckEntry]:
    """Coplanarity, parallelism within each family, the discrete-circle relation
    with one fitted circle, and agreement with the classical circular sections."""
    tol_circle = tol if tol_circle is None else tol_circle
    tol_align = tol if tol_align is None else tol_align
    live = [c for c in circles if not c.degenerate]
    n_degen = len(circles) - len(live)
    note = f"{n_degen} degenerate umbilic levels skipped" if n_degen else ""
    labels = [f"{'+' if c.family > 0 else '-'}{c.level}" for c in live]
    entries = [_entry("circle_coplanarity", [c.plane_residual for c in live], labels, tol, note)]

    par_res, par_lab = [], []
    for fam in (1, -1):
        fam_c = [c for c in live if c.family == fam]
        if not fam_c:
            continue
        ref = fam_c[0].plane.normal
        for c in fam_c:
            par_res.append(np.linalg.norm(np.cross(ref, c.plane.normal)))
            par_lab.append(f"{'+' if fam > 0 else '-'}{c.level}")
    entries.append(_entry("circle_parallelism", par_res, par_lab, tol_align))

    entries.append(_entry("discrete_circle", [c.circle_residual for c in live], labels, tol_circle, note))

    align, pol, lab2 = [], [], []
    for c, lab in zip(live, labels):
        n_exp = expected_circle_normal(quadric, c.family, family_sign, s3)
        if n_exp is None:
            continue
        align.append(np.linalg.norm(np.cross(n_exp, c.plane.normal)))
        if not _flat(quadric):
            sec = cl.section_circle(quadric, c.plane)
            pol.append(_classical_circle_residual(c, sec))
        lab2.append(lab)
    if align:
        entries.append(_entry("circle_plane_alignment", align, lab2, tol_align))
        entries.append(_entry("polarity_in_plane", pol, lab2[: len(pol)], tol_circle))
    else:
        entries.append(_skip("circle_plane_alignment", tol_align, "planar family member"))
        entries.append(_skip("polarity_in_plane", tol_circle, "planar family member"))
    return entries


def _classical_circle_residual(c: DiscreteCircle, sec: cl.SectionCircle) -> float:
    """Discrete-circle relation measured against the classical section circle."""
    e1, e2 = in_plane_frame(c.plane.normal)
    uv = np.column_stack([c.positions @ e1, c.positions @ e2])
    cen = np.array([sec.center @ e1, sec.center @ e2])
    return polar_circle_residual(uv, c.consecutive_pairs(), cen, sec.radius**2)


def check_degenerate_circles(pair: ClosedEllipsoidPair, tol: float = DEFAULT_TOL) -> CheckEntry:
    """Extreme levels are exactly an umbilic vertex with its umbilic edge, and the
    umbilic polar plane is parallel to the family's circle planes."""
    res, lab = [], []
    umb_v = set(pair.umbilic_vertices)
    umb_e = set(pair.umbilic_edges)
    for c in pair.circles:
        if not c.degenerate:
            continue
        prim = [v for v in c.vertices if v[0] % 2 == 0]
        dual = tuple(sorted(v for v in c.vertices if v[0] % 2))
        combinatorial = len(prim) == 1 and prim[0] in umb_v and dual in umb_e
        bad = 0.0 if combinatorial else 1.0
        others = [o for o in pair.circles if o.family == c.family and not o.degenerate]
        if c.umbilic_polar_plane is not None and others:
            bad = max(bad, float(np.linalg.norm(np.cross(c.umbilic_polar_plane.normal, others[0].plane.normal))))
        res.append(bad)
        lab.append(f"{'+' if c.family > 0 else '-'}{c.level}")
    return _entry("umbilic_degeneration", res, lab, tol)


# --------------------------------------------------------------------------
# cones, congruence, boundary, focal hyperbola, bcc


def _umbilic_line_keys(family: int, N1: int, N2: int) -> tuple[Key, Key]:
    if family > 0:
        return (2 * N1, 2 * N2), (-2 * N1, -2 * N2)
    return (2 * N1, -2 * N2), (-2 * N1, 2 * N2)


def check_cone_apex(pair: ClosedEllipsoidPair, tol: float = 1e-8) -> list[CheckEntry]:
    """Face planes along each circle meet in one point, the pole of the circle
    plane, which lies on the line through the family's opposite umbilic vertices.

    Computed projectively in coordinates scaled by the mesh radius, so points
    at infinity are handled without special cases.
    """
    names = ("cone_concurrency", "apex_is_pole", "apex_on_umbilic_line")
    if _flat(pair.quadric) or pair.quadric.degenerate:
        return [_skip(n, tol, "planar family member, all faces share one plane") for n in names]
    L = float(np.max(np.linalg.norm(pair.coords, axis=1)))
    N1, N2 = pair.shape.n1_max, pair.shape.n2_max
    conc, polr, line, labels = [], [], [], []
    at_infinity = 0
    for c in pair.circles:
        if c.degenerate:
            continue
        corner_sets = [pair.face_plane_of(v) for v in c.vertices]
        corner_sets = [cs for cs in corner_sets if cs is not None and len(cs) >= 3]
        if len(corner_sets) < 2:
            continue
        stack = np.array([pair.pos(list(cs)) for cs in corner_sets]) / L
        normals, offsets = face_planes(stack)
        X, r = homogeneous_intersection(normals, offsets)
        conc.append(r)
        if abs(X[3]) < 1e-12:
            at_infinity += 1
        Y = cl.pole_homogeneous(c.plane, pair.quadric)
        Y = np.append(Y[:3] / L, Y[3])
        polr.append(projective_distance(X, Y))
        k1, k2 = _umbilic_line_keys(c.family, N1, N2)
        U = np.array([np.append(pair.pos(k1) / L, 1.0), np.append(pair.pos(k2) / L, 1.0)])
        line.append(distance_to_span(X, U))
        labels.append(f"{'+' if c.family > 0 else '-'}{c.level}")
    note = f"{at_infinity} apexes at infinity" if at_infinity else ""
    return [_entry(n, r, labels, tol, note) for n, r in zip(names, (conc, polr, line))]


def check_congruence(obj_a, obj_b, tol: float = DEFAULT_TOL) -> list[CheckEntry]:
    """Matching circles (same family and level) of two deformation members have
    equal consecutive-vertex distances and align under a rigid motion."""
    ca = {(c.family, c.level): c for c in obj_a.circles}
    cb = {(c.family, c.level): c for c in obj_b.circles}
    dist_res, rigid_res, labels = [], [], []
    for key in sorted(set(ca) & set(cb)):
        A, B = ca[key], cb[key]
        if A.vertices != B.vertices:
            raise ValueError(f"circle {key} has different combinatorics")
        pa, pb = A.positions, B.positions
        pairs = A.consecutive_pairs()
        if len(pairs) == 0:
            continue
        da = np.linalg.norm(pa[pairs[:, 1]] - pa[pairs[:, 0]], axis=1)
        db = np.linalg.norm(pb[pairs[:, 1]] - pb[pairs[:, 0]], axis=1)
        scale = max(float(np.max(db)), 1e-300)
        dist_res.append(float(np.max(np.abs(da - db))) / scale)
        rigid_res.append(kabsch_residual(pa, pb))
        labels.append(f"{'+' if key[0] > 0 else '-'}{key[1]}")
    return [
        _entry("congruence_distances", dist_res, labels, tol),
        _entry("congruence_rigid", rigid_res, labels, tol),
    ]


def check_boundary_and_signs(g1: SampledFunction, g2: SampledFunction, p: ShapeParams, tol: float = DEFAULT_TOL) -> list[CheckEntry]:
    """``g1(±N1) = g2(±N2) = 0`` relative to √(a-c), and constant sign inside."""
    s = math.sqrt(p.a - p.c)
    bvals = [g1.values[0], g1.values[-1], g2.values[0], g2.values[-1]]
    blab = [f"g1({-p.n1_max})", f"g1({p.n1_max})", f"g2({-p.n2_max})", f"g2({p.n2_max})"]
    e1 = _entry("boundary_closure", np.abs(bvals) / s, blab, tol)
    sign_res, sign_lab = [], []
    for name, g in (("g1", g1), ("g2", g2)):
        inner = g.values[1:-1]
        ref = np.sign(g(0)) if g.contains(0) else np.sign(inner[0])
        flips = inner[np.sign(inner) != ref]
        sign_res.append(float(np.max(np.abs(flips)) / s) if flips.size else 0.0)
        sign_lab.append(name)
    # any interior value of the wrong sign, however small, is a failure
    e2 = CheckEntry("g_sign_constancy", max(sign_res), 0.0, all(r == 0 for r in sign_res),
                    [{"element": l, "residual": r} for l, r in zip(sign_lab, sign_res)])
    return [e1, e2]


def _corner_pairs(N1: int, N2: int) -> list[tuple[Key, Key]]:
    out = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            v = (2 * s1 * N1, 2 * s2 * N2)
            d = (v[0] - s1, v[1] - s2)
            out.append((v, d))
    return out


def check_focal_hyperbola(family: list, tol: float = DEFAULT_TOL) -> list[CheckEntry]:
    """Umbilic vertices and their umbilic-edge neighbours in the unscaled
    confocal family satisfy ``x x'/(a-b) - z z'/(b-c) = 1`` and ``y y' = 0``.

    The unscaled family exists only while ``f̂3² > 1``, i.e. ``0 < s3 < s3°``;
    other members are reported as skipped.
    """
    res, yres, labels = [], [], []
    skipped = 0
    for obj in family:
        p = obj.shape
        fh = obj.axes.f3_hat
        if not fh**2 > 1 or obj.axes.h3_hat == 0:
            skipped += 1
            continue
        g3 = math.sqrt((p.a - p.b) / (fh**2 - 1))
        for v, d in _corner_pairs(p.n1_max, p.n2_max):
            P = g3 * obj.pos(v)
            D = g3 * obj.pos(d)
            res.append(P[0] * D[0] / (p.a - p.b) - P[2] * D[2] / (p.b - p.c) - 1.0)
            yres.append(P[1] * D[1] / g3**2)
            labels.append(f"s3={obj.s3:.6g}:{format_key(v)}")
    note = f"{skipped} members outside the unscaled range skipped" if skipped else ""
    return [
        _entry("focal_hyperbola", res, labels, tol, note),
        _entry("focal_hyperbola_y", yres, labels, tol, note),
    ]


def check_bcc(lattice: ConfocalLattice3D, tol: float = DEFAULT_TOL) -> list[CheckEntry]:
    """Every ℤ³ edge is orthogonal to the four edges of the dual square it
    pierces, and the quads of the planes n_i = const are planar."""
    res, labels = [], []
    for (k, nb), duals in lattice.edge_dual_pairs():
        u = lattice.coords[lattice.index[nb]] - lattice.coords[lattice.index[k]]
        worst = 0.0
        for a, b in duals:
            v = lattice.coords[lattice.index[b]] - lattice.coords[lattice.index[a]]
            worst = max(worst, abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v)))
        res.append(worst)
        labels.append(f"{k}->{nb}")
    quads, qlab = [], []
    idx = lattice.index
    for k in lattice.keys:
        for ax in range(3):
            o1, o2 = [i for i in range(3) if i != ax]
            corners = []
            for s1, s2 in ((0, 0), (2, 0), (2, 2), (0, 2)):
                q = list(k)
                q[o1] += s1
                q[o2] += s2
                corners.append(tuple(q))
            if all(c in idx for c in corners):
                quads.append(lattice.coords[[idx[c] for c in corners]])
                qlab.append(f"{k}/{ax}")
    plan = face_planarity(np.array(quads)) if quads else np.zeros(0)
    return [_entry("bcc_orthogonality", res, labels, tol), _entry("bcc_planarity", plan, qlab, tol)]


# --------------------------------------------------------------------------
# suites


def verify_semi(binet: SemiBinet, tol: float = DEFAULT_TOL) -> VerificationReport:
    from .binet import extract_discrete_circles

    rep = VerificationReport()
    rep.extend(check_principal(binet, tol))
    rep.entries.append(check_polarity(binet, tol))
    rep.extend(check_circles(extract_discrete_circles(binet), binet.quadric, tol, binet.family_sign, binet.s3,
                             tol_circle=10 * tol, tol_align=tol))
    return rep


def verify_pair(pair: ClosedEllipsoidPair, tol: float = DEFAULT_TOL, scope: str | None = None) -> VerificationReport:
    """Every single-member check on a closed pair."""
    g = pair.g
    rep = VerificationReport()
    rep.extend(check_principal(pair, tol))
    rep.entries.append(check_polarity(pair, tol))
    rep.extend(check_circles(pair.circles, pair.quadric, tol, pair.family_sign, pair.s3,
                             tol_circle=10 * tol, tol_align=tol))
    rep.entries.append(check_degenerate_circles(pair, tol))
    rep.extend(check_cone_apex(pair, 10 * tol))
    rep.extend(check_boundary_and_signs(g.g1, g.g2, pair.shape, tol))
    rep.entries.append(check_topology(pair))
    scope = f"s3={pair.s3!r}" if scope is None else scope
    for e in rep.entries:
        e.scope = scope
    return rep


def check_topology(pair: ClosedEllipsoidPair) -> CheckEntry:
    """Sphere topology and the umbilic counts of a closed pair (exact)."""
    from collections import Counter

    pm, dm = pair.primal_mesh, pair.dual_mesh
    pv = Counter(pm.valence().values())
    dv = Counter(dm.valence().values())
    facts = {
        "primal_euler": pm.euler_characteristic() == 2,
        "dual_euler": dm.euler_characteristic() == 2,
        "primal_closed": pm.is_closed_surface(),
        "dual_closed": dm.is_closed_surface(),
        "primal_oriented": pm.is_consistently_oriented(),
        "dual_oriented": dm.is_consistently_oriented(),
        "primal_valence2": pv.get(2, 0) == 4,
        "dual_valence3": dv.get(3, 0) == 8,
        "umbilic_edges": len(pair.umbilic_edges) == 4,
    }
    bad = [k for k, ok in facts.items() if not ok]
    return CheckEntry("topology", float(len(bad)), 0.5, not bad, [{"element": k, "residual": 1.0} for k in bad])


def verify_family(pairs: list, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Pairwise congruence plus the focal-hyperbola relation across members."""
    rep = VerificationReport()
    for a, b in combinations(pairs, 2):
        for e in check_congruence(a, b, tol):
            e.scope = f"s3={a.s3!r}|s3={b.s3!r}"
            rep.entries.append(e)
    if pairs:
        rep.extend(check_focal_hyperbola(pairs, tol))
    return rep
