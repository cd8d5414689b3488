"""Deterministic OBJ / PLY / JSON writers.

Floats are written with 17 significant digits so every file round-trips
bit-exactly.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .binet import ClosedEllipsoidPair
from .halfint import QuadComplex, format_key

FLOAT_FMT = "{:.17g}"
SCHEMA_VERSION = "1.0"


def fmt_float(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"  # drops the sign of -0.0
    return FLOAT_FMT.format(x)


# --------------------------------------------------------------------------
# JSON


def _encode(obj, out: io.StringIO, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        out.write(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        # JSON has no inf/nan; they only occur as failed residuals
        out.write(fmt_float(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.write(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{")
        for i, (k, v) in enumerate(obj.items()):
            out.write(("," if i else "") + pad + json.dumps(str(k), ensure_ascii=False) + ": ")
            _encode(v, out, indent, level + 1)
        out.write(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.write("[]")
            return
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            out.write("[")
            for i, v in enumerate(seq):
                out.write(", " if i else "")
                _encode(v, out, indent, level + 1)
            out.write("]")
            return
        out.write("[")
        for i, v in enumerate(seq):
            out.write(("," if i else "") + pad)
            _encode(v, out, indent, level + 1)
        out.write(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    out = io.StringIO()
    _encode(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


# --------------------------------------------------------------------------
# meshes


def signed_volume(coords: np.ndarray, faces: list[list[int]]) -> float:
    """Volume enclosed by a closed polygon mesh (faces fanned from vertex 0)."""
    vol = 0.0
    for f in faces:
        p0 = coords[f[0]]
        for i in range(1, len(f) - 1):
            vol += float(np.dot(p0, np.cross(coords[f[i]], coords[f[i + 1]])))
    return vol / 6.0


def oriented_faces(coords: np.ndarray, faces: list[list[int]]) -> list[list[int]]:
    """Faces wound so normals point outward (positive enclosed volume).

    The input must already be consistently oriented; only a global flip is
    applied.  Flat members (zero volume) keep their winding.
    """
    if signed_volume(coords, faces) < 0:
        return [list(reversed(f)) for f in faces]
    return [list(f) for f in faces]


def mesh_arrays(pair: ClosedEllipsoidPair, mesh: QuadComplex):
    """Vertex array in canonical id order and outward 0-based face indices."""
    ids = list(mesh.vertices)
    index = {k: i for i, k in enumerate(ids)}
    coords = pair.pos(ids)
    faces = [[index[k] for k in f] for f in mesh.faces]
    return ids, coords, oriented_faces(coords, faces)


def obj_text(ids, coords: np.ndarray, faces=(), lines=(), header: str = "") -> str:
    out = io.StringIO()
    for h in header.splitlines():
        out.write(f"# {h}\n")
    for k, p in zip(ids, coords):
        out.write(f"v {fmt_float(p[0])} {fmt_float(p[1])} {fmt_float(p[2])}\n")
    for f in faces:
        out.write("f " + " ".join(str(i + 1) for i in f) + "\n")
    for ln in lines:
        out.write("l " + " ".join(str(i + 1) for i in ln) + "\n")
    return out.getvalue()


def ply_text(coords: np.ndarray, faces, header: str = "") -> str:
    out = io.StringIO()
    out.write("ply\nformat ascii 1.0\n")
    for h in header.splitlines():
        out.write(f"comment {h}\n")
    out.write(f"element vertex {len(coords)}\nproperty double x\nproperty double y\nproperty double z\n")
    out.write(f"element face {len(faces)}\nproperty list uchar int vertex_indices\nend_header\n")
    for p in coords:
        out.write(f"{fmt_float(p[0])} {fmt_float(p[1])} {fmt_float(p[2])}\n")
    for f in faces:
        out.write(f"{len(f)} " + " ".join(str(i) for i in f) + "\n")
    return out.getvalue()


def circles_obj_text(pair: ClosedEllipsoidPair, header: str = "") -> str:
    """All diagonal circles as closed OBJ line elements over their own vertex list."""
    ids: list = []
    index: dict = {}
    lines = []
    for c in pair.circles:
        ln = []
        for k in c.vertices:
            if k not in index:
                index[k] = len(ids)
                ids.append(k)
            ln.append(index[k])
        if c.closed and len(ln) > 2:
            ln.append(ln[0])
        lines.append(ln)
    groups = "\n".join(
        f"line {i + 1}: family {'+' if c.family > 0 else '-'} level {c.level}" + (" degenerate" if c.degenerate else "")
        for i, c in enumerate(pair.circles)
    )
    return obj_text(ids, pair.pos(ids), (), lines, header + ("\n" if header else "") + groups)


def mesh_json(pair: ClosedEllipsoidPair) -> dict:
    out = {}
    for name, mesh in (("primal", pair.primal_mesh), ("dual", pair.dual_mesh)):
        ids, coords, faces = mesh_arrays(pair, mesh)
        out[name] = {
            "ids": [format_key(k) for k in ids],
            "vertices": coords.tolist(),
            "faces": faces,
        }
    out["circles"] = [
        {
            "family": c.family,
            "level": c.level,
            "closed": c.closed,
            "degenerate": c.degenerate,
            "vertices": [format_key(k) for k in c.vertices],
        }
        for c in pair.circles
    ]
    return out


def pair_metadata(pair: ClosedEllipsoidPair) -> dict:
    Q = pair.quadric
    return {
        "shape": pair.shape.to_dict(),
        "s3": pair.s3,
        "quadric": {"alpha": Q.alpha, "beta": Q.beta, "gamma": Q.gamma},
        "family_sign": pair.family_sign,
        "seam_deviation": pair.seam_deviation,
        "counts": {
            "primal_vertices": len(pair.primal_mesh.vertices),
            "primal_faces": len(pair.primal_mesh.faces),
            "dual_vertices": len(pair.dual_mesh.vertices),
            "dual_faces": len(pair.dual_mesh.faces),
            "circles": len(pair.circles),
        },
        "umbilic_vertices": [format_key(k) for k in pair.umbilic_vertices],
        "umbilic_edges": [[format_key(a), format_key(b)] for a, b in pair.umbilic_edges],
    }


def write_pair(pair: ClosedEllipsoidPair, out_dir: Path, stem: str, formats) -> list[Path]:
    """Write primal/dual meshes, the circle polylines and metadata for one member."""
    out_dir = Path(out_dir)
    header = f"discrete ellipsoid N1={pair.shape.n1_max} N2={pair.shape.n2_max} s3={fmt_float(pair.s3)}"
    written = []
    for name, mesh in (("primal", pair.primal_mesh), ("dual", pair.dual_mesh)):
        ids, coords, faces = mesh_arrays(pair, mesh)
        if "obj" in formats:
            written.append(write_text(out_dir / f"{stem}_{name}.obj", obj_text(ids, coords, faces, (), f"{header}\n{name} mesh")))
        if "ply" in formats:
            written.append(write_text(out_dir / f"{stem}_{name}.ply", ply_text(coords, faces, f"{header} {name} mesh")))
    written.append(write_text(out_dir / f"{stem}_circles.obj", circles_obj_text(pair, header)))
    if "json" in formats:
        written.append(write_text(out_dir / f"{stem}_mesh.json", dumps_json(mesh_json(pair))))
    written.append(write_text(out_dir / f"{stem}_meta.json", dumps_json(pair_metadata(pair))))
    return written


def polylines_obj_text(polylines, header: str = "") -> str:
    coords = np.vstack(polylines) if polylines else np.zeros((0, 3))
    lines, start = [], 0
    for pl in polylines:
        lines.append(list(range(start, start + len(pl))))
        start += len(pl)
    return obj_text(range(len(coords)), coords, (), lines, header)
