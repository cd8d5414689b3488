"""Command-line front end: generate meshes, verify invariants, compare
deformation members and sample the classical web."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import classical as cl
from .binet import ClosedEllipsoidPair, build_closed_ellipsoid, build_discrete_confocal_3d, default_confocal_samplers
from .export import SCHEMA_VERSION, dumps_json, polylines_obj_text, write_pair, write_text
from .shape import DegenerateRecurrenceError, closure_q, solve_boundary_shape
from .verify import DEFAULT_TOL, VerificationReport, check_bcc, verify_family, verify_pair

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FORMATS = ("obj", "ply", "json")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n1: int = 3
    n2: int = 2
    scale: float = 1.0
    s3_list: list = field(default_factory=lambda: [0.7])
    g_init: object = "natural"
    """Either ``"natural"`` or ``{"g1_0": float, "g2_0": float}``."""
    tol: float = DEFAULT_TOL
    output_dir: str = "out"
    formats: list = field(default_factory=lambda: ["obj", "json"])

    def validate(self) -> "RunConfig":
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not (isinstance(self.scale, (int, float)) and self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigError(f"scale must be positive, got {self.scale!r}")
        if not self.s3_list:
            raise ConfigError("need at least one s3 value")
        for s in self.s3_list:
            if not (isinstance(s, (int, float)) and 0 <= s < math.pi):
                raise ConfigError(f"s3 values must lie in [0, pi), got {s!r}")
        if self.g_init != "natural":
            if not (isinstance(self.g_init, dict) and set(self.g_init) == {"g1_0", "g2_0"}):
                raise ConfigError("g_init must be 'natural' or {'g1_0': .., 'g2_0': ..}")
            if any(not isinstance(v, (int, float)) or v == 0 for v in self.g_init.values()):
                raise ConfigError("custom g initial values must be non-zero numbers")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ConfigError(f"tol must be positive, got {self.tol!r}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or len(set(self.formats)) != len(self.formats):
            raise ConfigError(f"formats must be distinct values from {FORMATS}, got {self.formats!r}")
        return self

    @property
    def g_values(self) -> tuple[float | None, float | None]:
        if self.g_init == "natural":
            return None, None
        return float(self.g_init["g1_0"]), float(self.g_init["g2_0"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["s3_list"] = [float(s) for s in self.s3_list]
        d["scale"] = float(self.scale)
        d["tol"] = float(self.tol)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def load_schema() -> dict:
    text = resources.files("discrete_ellipsoid").joinpath("schema/report.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_report(doc: dict) -> None:
    import jsonschema

    jsonschema.validate(doc, load_schema())


# --------------------------------------------------------------------------
# commands


def _build(config: RunConfig, s3: float) -> ClosedEllipsoidPair:
    g1_0, g2_0 = config.g_values
    try:
        return build_closed_ellipsoid(config.n1, config.n2, float(s3), config.scale, g1_0, g2_0)
    except DegenerateRecurrenceError as exc:
        raise ConfigError(f"g initial values lead to a vanishing g inside the domain: {exc}") from exc


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not out.is_dir():
        raise ConfigError(f"{out} is not a directory")
    return out


def member_stem(config: RunConfig, index: int) -> str:
    return f"ellipsoid_n{config.n1}_n{config.n2}_s{index:02d}"


def cmd_generate(config: RunConfig) -> list[Path]:
    """Write meshes, circles and metadata for every s3 in the config."""
    config.validate()
    out = _out_dir(config)
    written = []
    try:
        for i, s3 in enumerate(config.s3_list):
            written += write_pair(_build(config, s3), out, member_stem(config, i), config.formats)
        written.append(write_text(out / "config.json", dumps_json(config.to_dict())))
    except OSError as exc:
        raise ConfigError(f"cannot write to {out}: {exc}") from exc
    return written


def _report_doc(command: str, config: RunConfig, report: VerificationReport) -> dict:
    d = report.to_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config.to_dict(),
        "overall_pass": d["overall_pass"],
        "entries": d["entries"],
    }


def run_verification(config: RunConfig) -> VerificationReport:
    """Full suite: every single-member check for each s3, the cross-member
    checks and the bcc orthogonality of a matching 3D lattice block."""
    config.validate()
    pairs = [_build(config, s3) for s3 in config.s3_list]
    report = VerificationReport()
    for pair in pairs:
        report.extend(verify_pair(pair, config.tol).entries)
    report.extend(verify_family(pairs, config.tol).entries)
    p = solve_boundary_shape(config.n1, config.n2, config.scale)
    bounds = ((0, 2), (0, 2), (1, 3))
    lattice = build_discrete_confocal_3d(p.a, p.b, p.c, default_confocal_samplers(p.a, p.b, p.c, p.delta, bounds), bounds)
    for e in check_bcc(lattice, config.tol):
        e.scope = "lattice"
        report.entries.append(e)
    return report


def cmd_verify(config: RunConfig) -> tuple[dict, int]:
    report = run_verification(config)
    doc = _report_doc("verify", config, report)
    write_text(_out_dir(config) / "report.json", dumps_json(doc))
    return doc, EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_deform(config: RunConfig) -> tuple[dict, int]:
    """Congruence of matching circles over all pairs of s3 values."""
    config.validate()
    pairs = [_build(config, s3) for s3 in config.s3_list]
    report = VerificationReport()
    if len(pairs) >= 2:
        report.extend(e for e in verify_family(pairs, config.tol).entries if e.name.startswith("congruence"))
    doc = _report_doc("deform", config, report)
    write_text(_out_dir(config) / "deform.json", dumps_json(doc))
    return doc, EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_web(m1: int, m2: int, scale: float = 1.0, s3: float | None = None, output_dir: str = "out") -> dict:
    """Sample the classical closed web and write it as polylines."""
    if m1 < 1 or m2 < 1:
        raise ConfigError("m1, m2 must be positive")
    web = cl.sample_web(m1, m2, scale, s3)
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    stem = f"web_m{m1}_m{m2}"
    header = f"classical web M1={m1} M2={m2}"
    write_text(out / f"{stem}_lines.obj", polylines_obj_text(web.curvature_lines, header + " curvature lines"))
    write_text(out / f"{stem}_circles.obj", polylines_obj_text(web.circles[1] + web.circles[-1], header + " circles"))
    every = web.curvature_lines + web.circles[1] + web.circles[-1]
    gap = max(float(np.max(np.abs(pl[0] - pl[-1]))) for pl in every)
    meta = {
        "m1": m1,
        "m2": m2,
        "a": web.a,
        "b": web.b,
        "c": web.c,
        "s3": web.s3,
        "step": web.step,
        "closing_ratio": cl.web_closing(m1, m2),
        "q": cl.web_q(m1, m2),
        "closure_gap": gap,
        "curvature_lines": len(web.curvature_lines),
        "circles": {"+": len(web.circles[1]), "-": len(web.circles[-1])},
    }
    if m1 % 2 == 0 and m2 % 2 == 0:
        # a discrete ellipsoid with N = M/2 has 2N curvature lines per direction
        meta["discrete_q"] = closure_q(m1 // 2, m2 // 2)
    write_text(out / f"{stem}.json", dumps_json(meta))
    return meta


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--s3", type=float, nargs="+", help="one or more deformation parameters in [0, pi)")
    p.add_argument("--scale", type=float, help="sets a - c")
    p.add_argument("--g-init", choices=["natural", "custom"])
    p.add_argument("--g1-0", type=float, help="g1(0) for --g-init custom")
    p.add_argument("--g2-0", type=float, help="g2(0) for --g-init custom")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", nargs="+", choices=FORMATS, dest="formats")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-ellipsoid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("generate", "write primal/dual meshes, circles and metadata"),
        ("verify", "run the invariant suite and write report.json"),
        ("deform", "compare circles across s3 values and write deform.json"),
    ):
        _common(sub.add_parser(name, help=text))
    w = sub.add_parser("web", help="sample the classical closed web")
    w.add_argument("--m1", type=int, required=True)
    w.add_argument("--m2", type=int, required=True)
    w.add_argument("--scale", type=float, default=1.0)
    w.add_argument("--s3", type=float, default=None)
    w.add_argument("--out", default="out")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config is not None:
        try:
            base = json.loads(Path(args.config).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    overrides = {
        "n1": args.n1,
        "n2": args.n2,
        "s3_list": args.s3,
        "scale": args.scale,
        "tol": args.tol,
        "formats": args.formats,
        "output_dir": args.out,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.g_init == "natural":
        base["g_init"] = "natural"
    elif args.g_init == "custom" or args.g1_0 is not None or args.g2_0 is not None:
        if args.g1_0 is None or args.g2_0 is None:
            raise ConfigError("--g-init custom needs both --g1-0 and --g2-0")
        base["g_init"] = {"g1_0": args.g1_0, "g2_0": args.g2_0}
    return RunConfig.from_dict(base).validate()


def _summary(doc: dict) -> str:
    lines = []
    for e in doc["entries"]:
        status = "SKIP" if e["skipped"] else ("PASS" if e["pass"] else "FAIL")
        res = "inf" if e["max_residual"] is None else f"{e['max_residual']:.3e}"
        lines.append(f"{status} {e['name']} [{e['scope']}] max={res} tol={e['tolerance']:.1e}")
    lines.append("overall: " + ("PASS" if doc["overall_pass"] else "FAIL"))
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if args.command == "web":
            meta = cmd_web(args.m1, args.m2, args.scale, args.s3, args.out)
            print(dumps_json(meta), end="")
            return EXIT_OK
        config = config_from_args(args)
        if args.command == "generate":
            for path in cmd_generate(config):
                print(path)
            return EXIT_OK
        doc, code = (cmd_verify if args.command == "verify" else cmd_deform)(config)
        print(_summary(doc))
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
