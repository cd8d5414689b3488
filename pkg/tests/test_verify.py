import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_ellipsoid import classical as cl
from discrete_ellipsoid.binet import (
    build_closed_ellipsoid,
    build_discrete_confocal_3d,
    build_semi_ellipsoid,
    default_confocal_samplers,
    scaled,
    with_positions,
)
from discrete_ellipsoid.shape import ShapeParams, g_recurrence, solve_boundary_shape
from discrete_ellipsoid.verify import (
    CheckEntry,
    VerificationReport,
    check_bcc,
    check_boundary_and_signs,
    check_cone_apex,
    check_congruence,
    check_focal_hyperbola,
    check_polarity,
    check_principal,
    verify_family,
    verify_pair,
    verify_semi,
)

from .conftest import SMALL_SIZES, closed_pair, s3_sphere


def residuals(report):
    return {(e.name, e.scope): e.max_residual for e in report.entries}


@pytest.mark.parametrize("N", SMALL_SIZES)
@pytest.mark.parametrize("s3", [0.3, "sphere", 1.2, 2.0])
def test_constructed_pairs_pass(N, s3):
    rep = verify_pair(closed_pair(*N, s3))
    assert rep.overall_pass, [e for e in rep.entries if not e.passed]
    assert all(e.max_residual >= 0 for e in rep.entries)


def test_semi_suite_passes():
    rep = verify_semi(build_semi_ellipsoid(solve_boundary_shape(3, 2), 0.7), 1e-10)
    assert rep.overall_pass


# -- defect injection ----------------------------------------------------------


def test_single_vertex_defect_magnitude(pair_32):
    semi = build_semi_ellipsoid(solve_boundary_shape(3, 2), 0.7)
    i = semi.index[(1, 1)]
    c = semi.coords.copy()
    c[i] += [0.0, 0.0, 1e-3]
    plan, _ = check_principal(with_positions(semi, c))
    assert not plan.passed
    assert 1e-4 < plan.max_residual < 1e-2


@settings(max_examples=30)
@given(st.data(), st.floats(1.01e-8, 1e-2), st.sampled_from([(2, 1), (3, 2), (1, 1)]))
def test_any_single_vertex_defect_is_caught(data, eta, N):
    pair = closed_pair(*N, 0.7)
    i = data.draw(st.integers(0, len(pair.keys) - 1))
    d = np.array(data.draw(st.tuples(*(st.floats(-1, 1) for _ in range(3)))))
    if np.linalg.norm(d) < 1e-3:
        d = np.array([0.0, 0.0, 1.0])
    d /= np.linalg.norm(d)
    L = float(np.max(np.linalg.norm(pair.coords, axis=1)))
    c = pair.coords.copy()
    c[i] += eta * L * d
    assert not verify_pair(with_positions(pair, c), 1e-9).overall_pass


def test_affine_perturbation_breaks_polarity(pair_32):
    rng = np.random.default_rng(7)
    A = np.eye(3) + 1e-4 * rng.normal(size=(3, 3))
    bad = with_positions(pair_32, pair_32.coords @ A.T)
    e = check_polarity(bad)
    assert not e.passed and e.max_residual > 1e-6


@pytest.mark.parametrize("factor", [1e-3, 7.5, 1e4])
def test_relative_residuals_scale_invariant(pair_32, factor):
    base = residuals(verify_pair(pair_32))
    big = residuals(verify_pair(scaled(pair_32, factor)))
    assert base.keys() == big.keys()
    for k in base:
        assert abs(base[k] - big[k]) < 1e-12, k


# -- degenerate members ----------------------------------------------------------


@pytest.mark.parametrize("s3", [0.0, math.pi / 2])
def test_planar_members_skip_undefined_checks(s3):
    pair = build_closed_ellipsoid(3, 2, s3)
    rep = verify_pair(pair)
    assert rep.overall_pass, [e for e in rep.entries if not e.passed]
    skipped = {e.name for e in rep.entries if e.skipped}
    assert "polarity" in skipped
    assert any(e.note for e in rep.entries if e.name == "circle_coplanarity")


def test_degenerate_levels_flagged(pair_32):
    e = [x for x in verify_pair(pair_32).entries if x.name == "circle_coplanarity"][0]
    assert e.note == "4 degenerate umbilic levels skipped"
    assert [x for x in verify_pair(pair_32).entries if x.name == "umbilic_degeneration"][0].passed


# -- cone apex -------------------------------------------------------------------


def test_cone_apex_32(pair_32):
    entries = {e.name: e for e in check_cone_apex(pair_32)}
    for name in ("cone_concurrency", "apex_is_pole", "apex_on_umbilic_line"):
        assert entries[name].passed and entries[name].max_residual < 1e-8


def test_cone_apex_detects_wrong_quadric(pair_32):
    Q = pair_32.quadric
    wrong = with_positions(pair_32, pair_32.coords, cl.QuadricForm(Q.alpha * 1.01, Q.beta, Q.gamma))
    entries = {e.name: e for e in check_cone_apex(wrong)}
    assert not entries["apex_is_pole"].passed


# -- congruence -------------------------------------------------------------------


def test_congruence_across_deformation():
    a, b = closed_pair(3, 2, 0.4), closed_pair(3, 2, 1.1)
    for e in check_congruence(a, b):
        assert e.passed and e.max_residual < 1e-12, e


def test_congruence_identity_is_zero(pair_32):
    for e in check_congruence(pair_32, pair_32):
        assert e.max_residual == 0.0


def test_congruence_distinguishes_levels(pair_32):
    live = [c for c in pair_32.circles if not c.degenerate and c.family == 1]
    radii = sorted({round(c.radius, 9) for c in live})
    # same-family circles at different |level| have different radii
    assert len(radii) >= (len(live) + 1) // 2
    other = closed_pair(3, 2, 1.1)
    shifted = [c for c in other.circles if c.family == 1 and not c.degenerate]
    for c in live:
        d = [s for s in shifted if s.level == c.level + 1]
        if d and abs(d[0].radius - c.radius) > 1e-6:
            break
    else:
        pytest.fail("no pair of neighbouring levels with different radii")


def test_congruence_rejects_different_combinatorics():
    with pytest.raises(ValueError):
        check_congruence(closed_pair(2, 1, 0.7), closed_pair(3, 2, 0.7))


# -- boundary and sign ----------------------------------------------------------------


def test_boundary_natural_and_perturbed():
    p = solve_boundary_shape(3, 2)
    g = g_recurrence(p)
    for e in check_boundary_and_signs(g.g1, g.g2, p, 1e-10):
        assert e.passed
    bad = ShapeParams(p.a, p.b, p.c, p.delta * 1.01, 3, 2)
    gb = g_recurrence(bad)
    e = check_boundary_and_signs(gb.g1, gb.g2, bad, 1e-10)[0]
    assert not e.passed and e.max_residual > 1e-4


# -- focal hyperbola ------------------------------------------------------------------


# x x'/(a-b) at the umbilic vertex (2, 1) and dual vertex (3/2, 1/2), s3 = 0.5,
# in the unscaled family; frozen from the 40-digit formula oracle
FOCAL_X_TERM_21 = 1.0757935736902376


def test_focal_hyperbola_spot_value():
    pair = closed_pair(2, 1, 0.5)
    p = pair.shape
    g3 = math.sqrt((p.a - p.b) / (pair.axes.f3_hat**2 - 1))
    P, D = g3 * pair.pos((4, 2)), g3 * pair.pos((3, 1))
    assert P[0] * D[0] / (p.a - p.b) == pytest.approx(FOCAL_X_TERM_21, abs=1e-14)
    entries = check_focal_hyperbola([pair])
    assert all(e.passed and e.max_residual < 1e-14 for e in entries)


def test_focal_hyperbola_independent_of_s3():
    s_max = s3_sphere(3, 2)
    family = [closed_pair(3, 2, float(s)) for s in np.linspace(0.05, 0.95, 6) * s_max]
    res = [check_focal_hyperbola([m])[0].max_residual for m in family]
    assert max(res) < 1e-13
    outside = check_focal_hyperbola([closed_pair(3, 2, 1.3)])
    assert outside[0].skipped and "skipped" in outside[0].note


# -- bcc lattice -------------------------------------------------------------------------


BOUNDS = ((0, 2), (0, 2), (1, 3))


def lattice():
    p = solve_boundary_shape(3, 2)
    return build_discrete_confocal_3d(p.a, p.b, p.c, default_confocal_samplers(p.a, p.b, p.c, p.delta, BOUNDS), BOUNDS)


def test_bcc_checks():
    lat = lattice()
    orth, plan = check_bcc(lat)
    assert orth.passed and plan.passed
    assert orth.max_residual < 1e-13 and plan.max_residual < 1e-13
    # in a 3x3x3 block only the two edges per axis through the centre line
    # pierce a complete dual square
    assert len(lat.edge_dual_pairs()) == 6
    c = lat.coords.copy()
    c[lat.index[(2, 2, 4)]] += [1e-5, 0, 0]
    lat.coords = c
    assert not all(e.passed for e in check_bcc(lat))


# -- report plumbing ------------------------------------------------------------------------


def test_report_ordering_and_round_trip():
    pairs = [closed_pair(2, 1, 0.7), closed_pair(2, 1, 1.3)]
    rep = VerificationReport()
    for pr in pairs:
        rep.extend(verify_pair(pr).entries)
    rep.extend(verify_family(pairs).entries)
    d = rep.to_dict()
    keys = [(e["name"], e["scope"]) for e in d["entries"]]
    assert keys == sorted(keys)
    back = VerificationReport.from_dict(d)
    assert back.to_dict() == d
    assert d["overall_pass"] is True
    rep.entries.append(CheckEntry("synthetic", math.inf, 1e-9, False))
    assert not rep.overall_pass
    assert VerificationReport.from_dict(rep.to_dict()).by_name("synthetic")[0].max_residual == math.inf


def test_entry_details_are_worst_first(pair_32):
    for e in verify_pair(pair_32).entries:
        r = [d["residual"] for d in e.details]
        assert r == sorted(r, reverse=True)
        assert len(r) <= 5
