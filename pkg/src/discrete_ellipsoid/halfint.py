"""Half-integer lattice combinatorics for discrete ellipsoids.

Lattice points are stored as pairs of *doubled* integers, so ``(n1, n2)`` with
``n_i`` in ½ℤ becomes the key ``(2*n1, 2*n2)``.  Primal points (ℤ²) have even
keys, dual points ((ℤ²)*) have odd keys.  Nothing in this module touches
floating point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, NamedTuple

Key = tuple[int, int]
Edge = tuple[Key, Key]


@total_ordering
@dataclass(frozen=True)
class HalfIndex:
    """An exact element of ½ℤ, stored as ``twice_n = 2n``."""

    twice_n: int

    @classmethod
    def of(cls, value) -> "HalfIndex":
        twice = Fraction(value) * 2
        if twice.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_n, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice_n % 2 == 0

    @property
    def plus(self) -> "HalfIndex":
        return HalfIndex(self.twice_n + 1)

    @property
    def minus(self) -> "HalfIndex":
        return HalfIndex(self.twice_n - 1)

    def __add__(self, other: "HalfIndex") -> "HalfIndex":
        return HalfIndex(self.twice_n + other.twice_n)

    def __sub__(self, other: "HalfIndex") -> "HalfIndex":
        return HalfIndex(self.twice_n - other.twice_n)

    def __neg__(self) -> "HalfIndex":
        return HalfIndex(-self.twice_n)

    def __lt__(self, other: "HalfIndex") -> bool:
        return self.twice_n < other.twice_n

    def __float__(self) -> float:
        return self.twice_n / 2

    def __str__(self) -> str:
        return str(self.value)


def key(n1, n2) -> Key:
    """Doubled key of the lattice point ``(n1, n2)``; accepts ints, Fractions or .5 floats."""
    return (HalfIndex.of(n1).twice_n, HalfIndex.of(n2).twice_n)


def key_value(k: Key) -> tuple[Fraction, Fraction]:
    return (Fraction(k[0], 2), Fraction(k[1], 2))


def is_primal(k: Key) -> bool:
    return k[0] % 2 == 0 and k[1] % 2 == 0


def is_dual(k: Key) -> bool:
    return k[0] % 2 == 1 and k[1] % 2 == 1


def format_key(k: Key) -> str:
    a, b = key_value(k)
    return f"({a},{b})"


class DomainKind(enum.Enum):
    U = "U"
    U_STAR = "U*"
    V = "V"
    V_STAR = "V*"

    @property
    def is_dual(self) -> bool:
        return self in (DomainKind.U_STAR, DomainKind.V_STAR)


@dataclass(frozen=True)
class DomainSpec:
    n1_max: int
    n2_max: int
    kind: DomainKind

    def bounds(self) -> tuple[int, int, int, int]:
        """Inclusive doubled bounds ``(lo1, hi1, lo2, hi2)``."""
        N1, N2 = 2 * self.n1_max, 2 * self.n2_max
        if self.kind is DomainKind.U:
            return -N1, N1, -N2, N2
        if self.kind is DomainKind.U_STAR:
            return -N1 + 1, N1 - 1, -N2 + 1, N2 - 1
        if self.kind is DomainKind.V:
            return -N1, 3 * N1, -N2, N2
        # V*: strict bounds on half-odd points
        return -N1 + 1, 3 * N1 - 1, -N2 + 1, N2 - 1

    def __contains__(self, k: Key) -> bool:
        odd = self.kind.is_dual
        if (k[0] % 2 == 1) != odd or (k[1] % 2 == 1) != odd:
            return False
        lo1, hi1, lo2, hi2 = self.bounds()
        return lo1 <= k[0] <= hi1 and lo2 <= k[1] <= hi2

    def vertices(self) -> list[Key]:
        lo1, hi1, lo2, hi2 = self.bounds()
        return [(t1, t2) for t1 in range(lo1, hi1 + 1, 2) for t2 in range(lo2, hi2 + 1, 2)]

    def count(self) -> int:
        """Closed-form vertex count."""
        N1, N2 = self.n1_max, self.n2_max
        return {
            DomainKind.U: (2 * N1 + 1) * (2 * N2 + 1),
            DomainKind.U_STAR: (2 * N1) * (2 * N2),
            DomainKind.V: (4 * N1 + 1) * (2 * N2 + 1),
            DomainKind.V_STAR: (4 * N1) * (2 * N2),
        }[self.kind]


def _check_sizes(N1: int, N2: int) -> None:
    if int(N1) != N1 or int(N2) != N2 or N1 < 1 or N2 < 1:
        raise ValueError(f"N1, N2 must be positive integers, got {N1!r}, {N2!r}")


def make_domain(kind: DomainKind | str, N1: int, N2: int) -> DomainSpec:
    _check_sizes(N1, N2)
    if isinstance(kind, str):
        kind = DomainKind(kind) if kind in {k.value for k in DomainKind} else DomainKind[kind]
    return DomainSpec(int(N1), int(N2), kind)


# --------------------------------------------------------------------------
# Dual edges


class DualEdge(NamedTuple):
    edge: Edge
    complete: bool


def dual_edge(edge: Edge, domains: tuple[DomainSpec, DomainSpec] | None = None) -> DualEdge:
    """Return the crossing edge of the other sublattice.

    ``((n1-½, n2), (n1+½, n2))`` maps to ``((n1, n2-½), (n1, n2+½))`` and back.
    If ``domains`` is given, ``complete`` reports whether both endpoints of the
    result lie in the domain of the opposite parity.
    """
    p, q = sorted(edge)
    d = (q[0] - p[0], q[1] - p[1])
    if d not in ((2, 0), (0, 2)):
        raise ValueError(f"not a lattice edge: {edge}")
    m = ((p[0] + q[0]) // 2, (p[1] + q[1]) // 2)
    if d == (2, 0):
        out = ((m[0], m[1] - 1), (m[0], m[1] + 1))
    else:
        out = ((m[0] - 1, m[1]), (m[0] + 1, m[1]))
    complete = True
    if domains is not None:
        # primal edges cross dual-lattice edges and vice versa
        target = domains[1] if is_primal(p) else domains[0]
        complete = out[0] in target and out[1] in target
    return DualEdge(out, complete)


def lattice_edges(domain: DomainSpec) -> list[Edge]:
    """All unit edges of ``domain`` (sorted endpoint pairs, deterministic order)."""
    pts = set(domain.vertices())
    out = []
    for p in sorted(pts):
        for d in ((2, 0), (0, 2)):
            q = (p[0] + d[0], p[1] + d[1])
            if q in pts:
                out.append((p, q))
    return out


def face_corners(center: Key) -> tuple[Key, Key, Key, Key]:
    """Corners of the elementary quad centred at ``center`` in counter-clockwise order."""
    c1, c2 = center
    return ((c1 - 1, c2 - 1), (c1 + 1, c2 - 1), (c1 + 1, c2 + 1), (c1 - 1, c2 + 1))


# --------------------------------------------------------------------------
# Identification and quotient complexes


@dataclass(frozen=True)
class GlueEdge:
    """A dual edge not produced by a plain lattice step inside one semi-domain."""

    a: Key
    b: Key
    tag: str = "glue"
    umbilic: bool = False


@dataclass
class QuadComplex:
    """A polygonal complex on hashable vertex ids with oriented faces."""

    vertices: list[Key]
    faces: list[tuple[Key, ...]]
    edges: list[Edge]
    edge_tags: dict[Edge, str] = field(default_factory=dict)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def valence(self) -> dict[Key, int]:
        val = {v: 0 for v in self.vertices}
        for a, b in self.edges:
            val[a] += 1
            val[b] += 1
        return val

    def edge_face_counts(self) -> dict[Edge, int]:
        counts = {e: 0 for e in self.edges}
        for f in self.faces:
            for i in range(len(f)):
                counts[_sorted_edge(f[i], f[(i + 1) % len(f)])] += 1
        return counts

    def is_closed_surface(self) -> bool:
        return all(c == 2 for c in self.edge_face_counts().values())

    def is_consistently_oriented(self) -> bool:
        seen = set()
        for f in self.faces:
            for i in range(len(f)):
                he = (f[i], f[(i + 1) % len(f)])
                if he in seen:
                    return False
                seen.add(he)
        return True


def _sorted_edge(a: Key, b: Key) -> Edge:
    return (a, b) if a <= b else (b, a)


class _UnionFind:
    def __init__(self, items: Iterable[Key]):
        self.parent = {x: x for x in items}

    def find(self, x: Key) -> Key:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Key, b: Key) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # lexicographic minimum becomes the representative
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            self.parent[hi] = lo


@dataclass
class IdentificationMap:
    """Gluing of two semi-domains into a closed discrete sphere and its dual.

    ``canonical`` maps every point of V ∪ V* to its class representative
    (lexicographic minimum; V* points are never identified).
    ``extra_dual_edges`` lists the glue-tagged dual edges, including the four
    umbilic edges.
    """

    n1_max: int
    n2_max: int
    canonical: dict[Key, Key]
    extra_dual_edges: list[GlueEdge]
    primal: QuadComplex
    dual: QuadComplex
    umbilic_vertices: list[Key]
    umbilic_edges: list[Edge]
    dual_of_primal_edge: dict[Edge, Edge]
    primal_face_of_dual_vertex: dict[Key, tuple[Key, ...]]
    dual_face_of_primal_vertex: dict[Key, tuple[Key, ...]]

    def classes(self) -> dict[Key, list[Key]]:
        out: dict[Key, list[Key]] = {}
        for k, c in self.canonical.items():
            out.setdefault(c, []).append(k)
        return {c: sorted(m) for c, m in sorted(out.items())}

    def mirror(self, k: Key) -> Key:
        """V coordinates of the reflected copy: ``(n1, n2) -> (2N1 - n1, n2)``."""
        return (4 * self.n1_max - k[0], k[1])

    def is_minus_side(self, k: Key) -> bool:
        return k[0] > 2 * self.n1_max


def build_identification(N1: int, N2: int) -> IdentificationMap:
    _check_sizes(N1, N2)
    N1, N2 = int(N1), int(N2)
    V = make_domain(DomainKind.V, N1, N2)
    Vs = make_domain(DomainKind.V_STAR, N1, N2)
    tN1, tN2 = 2 * N1, 2 * N2

    uf = _UnionFind(V.vertices())
    for t1 in range(-tN1, 3 * tN1 + 1, 2):
        for t2 in (-tN2, tN2):
            uf.union((t1, t2), (2 * tN1 - t1, t2))
    for t2 in range(-tN2, tN2 + 1, 2):
        uf.union((-tN1, t2), (3 * tN1, t2))
    canonical = {k: uf.find(k) for k in V.vertices()}
    for k in Vs.vertices():
        canonical[k] = k

    # primal quotient: one quad per V* point, counter-clockwise in the V domain
    faces = [tuple(canonical[c] for c in face_corners(ctr)) for ctr in Vs.vertices()]
    edge_faces: dict[Edge, list[Key]] = {}
    for ctr, f in zip(Vs.vertices(), faces):
        for i in range(4):
            edge_faces.setdefault(_sorted_edge(f[i], f[(i + 1) % 4]), []).append(ctr)
    pverts = sorted(set(canonical[k] for k in V.vertices()))
    primal = QuadComplex(pverts, faces, sorted(edge_faces))

    # dual: Poincaré dual of the primal quotient; umbilic digons collapse
    dual_of_primal_edge: dict[Edge, Edge] = {}
    multiplicity: dict[Edge, int] = {}
    for e, fs in edge_faces.items():
        if len(fs) != 2:
            raise RuntimeError(f"primal edge {e} bounds {len(fs)} faces")
        de = _sorted_edge(fs[0], fs[1])
        dual_of_primal_edge[e] = de
        multiplicity[de] = multiplicity.get(de, 0) + 1
    umbilic_edges = sorted(e for e, m in multiplicity.items() if m == 2)

    def is_lattice_step(a: Key, b: Key) -> bool:
        step = (abs(a[0] - b[0]), abs(a[1] - b[1])) in ((2, 0), (0, 2))
        same_side = (a[0] < tN1) == (b[0] < tN1)
        return step and same_side

    dual_edges = sorted(multiplicity)
    tags = {}
    glue = []
    for de in dual_edges:
        if is_lattice_step(*de):
            tags[de] = "lattice"
        else:
            tags[de] = "glue"
            glue.append(GlueEdge(de[0], de[1], "glue", de in umbilic_edges))

    face_of_center = dict(zip(Vs.vertices(), faces))
    dual_faces_by_vertex = _rotations(faces, list(Vs.vertices()))
    dual_faces = []
    dual_face_of_primal_vertex = {}
    umbilic_vertices = []
    for v in pverts:
        cyc = dual_faces_by_vertex[v]
        if len(cyc) == 2:
            umbilic_vertices.append(v)
            continue
        dual_faces.append(cyc)
        dual_face_of_primal_vertex[v] = cyc
    dual = QuadComplex(sorted(Vs.vertices()), dual_faces, dual_edges, tags)

    return IdentificationMap(
        n1_max=N1,
        n2_max=N2,
        canonical=canonical,
        extra_dual_edges=glue,
        primal=primal,
        dual=dual,
        umbilic_vertices=sorted(umbilic_vertices),
        umbilic_edges=umbilic_edges,
        dual_of_primal_edge=dual_of_primal_edge,
        primal_face_of_dual_vertex=face_of_center,
        dual_face_of_primal_vertex=dual_face_of_primal_vertex,
    )


def _rotations(faces: list[tuple[Key, ...]], centers: list[Key]) -> dict[Key, tuple[Key, ...]]:
    """Cyclic order of face centres around every vertex of an oriented complex."""
    # half-edge (u, v) -> face index containing it
    he_face = {}
    for i, f in enumerate(faces):
        for j in range(len(f)):
            he_face[(f[j], f[(j + 1) % len(f)])] = i
    start: dict[Key, int] = {}
    for i, f in enumerate(faces):
        for v in f:
            start.setdefault(v, i)
    out = {}
    for v, i0 in start.items():
        cycle = []
        i = i0
        while True:
            cycle.append(centers[i])
            f = faces[i]
            j = f.index(v)
            prev = f[(j - 1) % len(f)]
            # the face across edge (prev, v) holds the half-edge (v, prev)
            i = he_face[(v, prev)]
            if i == i0:
                break
            if len(cycle) > len(faces):
                raise RuntimeError("rotation did not close")
        out[v] = tuple(cycle)
    return out


# --------------------------------------------------------------------------
# Diagonal polygons


@dataclass(frozen=True)
class DiagonalPath:
    """A diagonal polygon ``n1 + family*n2 = level`` (doubled level ``2*(n1 ± n2)``).

    ``level`` is stored as an integer ``k = n1 ± n2`` so that ``n± = k/2``.
    """

    family: int
    level: int
    vertices: tuple[Key, ...]
    closed: bool

    @property
    def n_level(self) -> HalfIndex:
        return HalfIndex(self.level)


def _semi_line(family: int, level: int, domain_kind_dual: bool, N1: int, N2: int) -> list[Key]:
    """Points of U (or U*) on ``n1 + family*n2 = level``, ordered by increasing n1."""
    tN1, tN2 = 2 * N1, 2 * N2
    if domain_kind_dual:
        lo1, hi1, lo2, hi2 = -tN1 + 1, tN1 - 1, -tN2 + 1, tN2 - 1
    else:
        lo1, hi1, lo2, hi2 = -tN1, tN1, -tN2, tN2
    tk = 2 * level
    out = []
    start = lo1
    for t1 in range(start, hi1 + 1, 2):
        t2 = family * (tk - t1)
        if lo2 <= t2 <= hi2:
            out.append((t1, t2))
    return out


def diagonal_levels(family: int, N1: int, N2: int, dual: bool = False) -> range:
    m = N1 + N2 - (1 if dual else 0)
    return range(-m, m + 1)


def diagonal_polygons(
    domain: DomainSpec, identification: IdentificationMap | None = None
) -> list[DiagonalPath]:
    """Diagonal polygons of both families.

    On U / U* these are open polylines ordered by increasing n1.  On V / V*
    (which need ``identification``) each level gives one closed loop: the
    semi-domain polyline followed by its mirror copy, which on the reflected
    half runs along the other lattice diagonal.  Dual loops close through two
    glue edges.
    """
    N1, N2 = domain.n1_max, domain.n2_max
    dual = domain.kind.is_dual
    out = []
    if domain.kind in (DomainKind.U, DomainKind.U_STAR):
        for family in (1, -1):
            for k in diagonal_levels(family, N1, N2, dual):
                pts = _semi_line(family, k, dual, N1, N2)
                if pts:
                    out.append(DiagonalPath(family, k, tuple(pts), False))
        return out
    if identification is None:
        raise ValueError("closed domains need an IdentificationMap")
    ident = identification
    for family in (1, -1):
        for k in diagonal_levels(family, N1, N2, dual):
            pts = _semi_line(family, k, dual, N1, N2)
            if not pts:
                continue
            if dual:
                loop = pts + [ident.mirror(p) for p in reversed(pts)]
            else:
                loop = pts + [ident.mirror(p) for p in reversed(pts[1:-1])]
                loop = [ident.canonical[p] for p in loop]
            out.append(DiagonalPath(family, k, tuple(loop), True))
    return out


def path_edges(path: DiagonalPath) -> list[Edge]:
    vs = path.vertices
    if len(vs) < 2:
        return []
    if len(vs) == 2 and (not path.closed or is_dual(vs[0])):
        # open segment, or the degenerate dual level: a single umbilic edge
        return [(vs[0], vs[1])]
    n = len(vs) if path.closed else len(vs) - 1
    return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(n)]
