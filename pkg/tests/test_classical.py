import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from discrete_ellipsoid import classical as cl
from discrete_ellipsoid.geometry import fit_plane
from discrete_ellipsoid.shape import closure_q

Q321 = cl.QuadricForm(3.0, 2.0, 1.0)


@st.composite
def ellipsoids(draw):
    g = draw(st.floats(0.2, 3))
    b = g + draw(st.floats(0.1, 3))
    a = b + draw(st.floats(0.1, 3))
    return cl.QuadricForm(a, b, g)


@st.composite
def confocal_chains(draw):
    c = draw(st.floats(0.1, 2))
    b = c + draw(st.floats(0.2, 2))
    a = b + draw(st.floats(0.2, 2))
    f1, f2, f3 = (draw(st.floats(0.05, 0.95)) for _ in range(3))
    u1 = -a + f1 * (a - b)
    u2 = -b + f2 * (b - c)
    u3 = -c + 0.1 + 3 * f3
    signs = tuple(draw(st.sampled_from([1, -1])) for _ in range(3))
    return (a, b, c), cl.ConfocalPoint(u1, u2, u3, signs)


# -- confocal coordinates ----------------------------------------------------


def test_confocal_point_examples():
    p = cl.confocal_point(cl.ConfocalPoint(-2.5, -1.5, 0.0), 3, 2, 1)
    assert p**2 == pytest.approx([1.125, 0.5, 0.375], abs=1e-15)
    assert p[0] ** 2 / 3 + p[1] ** 2 / 2 + p[2] ** 2 == pytest.approx(1, abs=1e-15)
    assert cl.confocal_point(cl.ConfocalPoint(-3, -1.5, 0.0), 3, 2, 1)[0] == 0.0
    with pytest.raises(ValueError):
        cl.confocal_point(cl.ConfocalPoint(-1.5, -2.5, 0.0), 3, 2, 1)
    with pytest.raises(ValueError):
        cl.confocal_point(cl.ConfocalPoint(-2.5, -1.5, 0.0), 1, 2, 3)


@given(confocal_chains())
def test_confocal_point_on_three_quadrics(data):
    (a, b, c), cp = data
    p = cl.confocal_point(cp, a, b, c)
    assert np.all(np.sign(p) == np.array(cp.signs))
    assert np.max(cl.confocal_residuals(p, cp, a, b, c)) < 1e-12


@given(confocal_chains())
def test_coordinate_lines_orthogonal(data):
    (a, b, c), cp = data
    h = 1e-4
    # stay at least a few steps away from the chamber walls
    assume(cp.u1 + a > 4 * h and -b - cp.u1 > 4 * h and cp.u2 + b > 4 * h and -c - cp.u2 > 4 * h)
    assert cl.coordinate_orthogonality(cp, a, b, c, h) < 1e-6


# -- circular sections -------------------------------------------------------


def test_circular_section_examples():
    pl = cl.circular_planes(Q321, 1, 0.0)
    sec = cl.section_circle(Q321, pl)
    assert sec.radius == pytest.approx(math.sqrt(2), abs=1e-15)
    pts = cl.sample_section(Q321, pl, 24)
    d = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    assert np.max(np.abs(d - math.sqrt(2))) < 1e-12
    m = cl.mu_max(Q321)
    top = cl.circular_planes(Q321, 1, m)
    tip = cl.section_circle(Q321, top)
    assert tip.radius < 1e-7
    assert np.min(np.linalg.norm(cl.umbilic_points(Q321) - tip.center, axis=1)) < 1e-12
    with pytest.raises(ValueError):
        cl.circular_planes(Q321, 1, 1.01 * m)
    with pytest.raises(ValueError):
        cl.circular_planes(Q321, 0, 0.0)


@given(ellipsoids(), st.sampled_from([1, -1]), st.floats(-0.95, 0.95))
def test_sections_are_circles(Q, sign, frac):
    pl = cl.circular_planes(Q, sign, frac * cl.mu_max(Q))
    pts = cl.sample_section(Q, pl, 16)
    centre = pts.mean(axis=0)
    d = np.linalg.norm(pts - centre, axis=1)
    assert np.max(np.abs(d - d.mean())) < 1e-10 * max(1.0, d.mean())
    assert np.max(np.abs(Q.value(pts) - 1)) < 1e-12
    assert np.max(np.abs(pl.distance(pts))) < 1e-12
    sec = cl.section_circle(Q, pl)
    assert np.linalg.norm(sec.center - centre) < 1e-10
    assert abs(sec.radius - d.mean()) < 1e-10


def test_umbilic_examples():
    u = cl.umbilic_points(Q321)
    assert np.allclose(np.abs(u), [math.sqrt(1.5), 0, math.sqrt(0.5)], atol=1e-15)
    assert np.allclose(Q321.value(u), 1, atol=1e-15)


@given(ellipsoids(), st.sampled_from([1, -1]))
def test_opposite_umbilic_tangent_planes(Q, sign):
    u1, u2 = cl.opposite_umbilics(Q, sign)
    t1, t2 = cl.polar_plane(u1, Q), cl.polar_plane(u2, Q)
    n = cl.circular_normal(Q, sign)
    n = n / np.linalg.norm(n)
    # opposite tangent planes are parallel to each other and to the family
    assert np.linalg.norm(np.cross(t1.normal, t2.normal)) < 1e-12
    assert np.linalg.norm(np.cross(t1.normal, n)) < 1e-12


# -- pole / polar -------------------------------------------------------------


def test_pole_examples():
    S = cl.QuadricForm(1, 1, 1)
    P = cl.pole(cl.PlaneH(0, 0, 1, 1), S)
    assert P.finite and np.allclose(P.coords, [0, 0, 1])
    inf = cl.pole(cl.PlaneH(0, 0, 1, 0), S)
    assert not inf.finite and np.allclose(inf.coords, [0, 0, 1])
    with pytest.raises(ValueError):
        cl.polar_plane([0, 0, 0], S)
    with pytest.raises(ValueError):
        cl.PlaneH.from_coeffs([0, 0, 0], 1)


@given(ellipsoids(), st.tuples(*(st.floats(-3, 3) for _ in range(3))))
def test_pole_polar_inverse(Q, v):
    v = np.array(v)
    assume(np.linalg.norm(v) > 1e-3)
    P = cl.pole(cl.polar_plane(v, Q), Q)
    assert P.finite
    assert np.allclose(P.coords, v, rtol=1e-12, atol=1e-12)


@given(ellipsoids(), st.floats(0, 2 * math.pi), st.floats(0.1, math.pi - 0.1))
def test_polar_of_surface_point_is_tangent_plane(Q, phi, theta):
    p = np.sqrt(Q.coeffs) * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    pl = cl.polar_plane(p, Q)
    grad = p / Q.coeffs
    assert abs(pl.distance(p)) < 1e-12
    assert np.linalg.norm(np.cross(pl.normal, grad / np.linalg.norm(grad))) < 1e-12


@given(ellipsoids(), st.sampled_from([1, -1]))
def test_poles_of_family_lie_on_umbilic_line(Q, sign):
    m = cl.mu_max(Q)
    u1, u2 = cl.opposite_umbilics(Q, sign)
    d = (u2 - u1) / np.linalg.norm(u2 - u1)
    for mu in [f * m for f in (-0.9, -0.6, -0.3, 0.3, 0.6, 0.9)] + [0.0]:
        if mu == 0.0:
            inf = cl.pole(cl.circular_planes(Q, sign, mu), Q)
            assert not inf.finite and np.linalg.norm(np.cross(inf.coords, d)) < 1e-12
            continue
        P = cl.pole(cl.circular_planes(Q, sign, mu), Q).coords
        r = P - u1
        assert np.linalg.norm(r - (r @ d) * d) < 1e-9 * max(1, np.linalg.norm(P))


# -- curvature-line parametrisations -------------------------------------------


def test_diag_param_pole_and_boundary():
    s1_0, s2_0 = cl.diag_bounds(Q321)
    top = cl.diag_param(Q321, 1, 0.0, 0.0)
    assert top[0] == 0 and top[2] == 0 and top[1] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert cl.diag_param(Q321, -1, 0.0, 0.0)[1] == pytest.approx(-math.sqrt(2), abs=1e-15)
    assert cl.diag_param(Q321, 1, s1_0, 0.3)[1] == 0.0
    assert cl.diag_param(Q321, 1, 0.2, -s2_0)[1] == 0.0
    with pytest.raises(ValueError):
        cl.diag_param(Q321, 1, 1.01 * s1_0, 0)


@given(ellipsoids(), st.sampled_from([1, -1]), st.floats(0, 1), st.floats(0, 1))
def test_diag_param_on_ellipsoid(Q, hemi, u, v):
    s1_0, s2_0 = cl.diag_bounds(Q)
    p = cl.diag_param(Q, hemi, (2 * u - 1) * s1_0, (2 * v - 1) * s2_0)
    assert abs(Q.value(p) - 1) < 1e-12
    assert hemi * p[1] >= 0


def diag_level_points(Q, family, level_frac, count=10, hemi=1):
    s1_0, s2_0 = cl.diag_bounds(Q)
    k = level_frac * (s1_0 + s2_0)
    lo = max(-s1_0, k - s2_0) if family > 0 else max(-s1_0, -k - s2_0)
    hi = min(s1_0, k + s2_0) if family > 0 else min(s1_0, -k + s2_0)
    s1 = np.linspace(lo, hi, count)
    s2 = (k - s1) if family > 0 else (s1 + k)
    s2 = np.clip(s2, -s2_0, s2_0)
    return np.array([cl.diag_param(Q, hemi, a, b) for a, b in zip(s1, s2)])


@given(ellipsoids(), st.sampled_from([1, -1]), st.floats(-0.8, 0.8))
def test_diag_levels_are_circular_sections(Q, family, frac):
    pts = diag_level_points(Q, family, frac)
    fit = fit_plane(pts)
    assert fit.residual < 1e-10
    n = cl.circular_normal(Q, family)
    assert np.linalg.norm(np.cross(fit.normal, n / np.linalg.norm(n))) < 1e-10
    sec = cl.section_circle(Q, cl.PlaneH.from_coeffs(fit.normal, fit.offset))
    d = np.linalg.norm(pts - sec.center, axis=1)
    assert np.max(np.abs(d - sec.radius)) < 1e-10


def test_family_param_examples():
    a, b, c = 1.5, 1.0, 0.5
    s3s = cl.s3_sphere(a, b, c)
    s1_0, s2_0 = cl.family_bounds(a, b, c)
    for s1, s2 in [(0.1, 0.2), (-0.5, 0.3), (s1_0, -0.2)]:
        p = cl.family_param(a, b, c, 1, s1, s2, s3s)
        assert np.linalg.norm(p) == pytest.approx(1, abs=1e-14)
        assert cl.family_param(a, b, c, 1, s1, s2, 0.0)[2] == 0.0
    with pytest.raises(ValueError):
        cl.family_param(a, b, c, 1, 0, 0, math.pi)


def family_level(a, b, c, family, k, s3, count=12):
    s1_0, s2_0 = cl.family_bounds(a, b, c)
    lo = max(-s1_0, family * k - s2_0) if family > 0 else max(-s1_0, -k - s2_0)
    hi = min(s1_0, k + s2_0) if family > 0 else min(s1_0, -k + s2_0)
    s1 = np.linspace(lo, hi, count)
    s2 = np.clip((k - s1) if family > 0 else (s1 + k), -s2_0, s2_0)
    return np.array([cl.family_param(a, b, c, 1, u, v, s3) for u, v in zip(s1, s2)])


@pytest.mark.parametrize("family", [1, -1])
@pytest.mark.parametrize("k", [-0.4, 0.0, 0.5])
def test_family_circles_congruent_across_s3(family, k):
    a, b, c = 1.5, 1.2, 0.5
    A = family_level(a, b, c, family, k, 0.3)
    B = family_level(a, b, c, family, k, 0.9)
    chords_a = np.linalg.norm(np.diff(A, axis=0), axis=1)
    chords_b = np.linalg.norm(np.diff(B, axis=0), axis=1)
    assert np.max(np.abs(chords_a - chords_b)) < 1e-10
    for pts, s3 in ((A, 0.3), (B, 0.9)):
        Q = cl.family_quadric(a, b, c, s3)
        fit = fit_plane(pts)
        assert np.linalg.norm(np.cross(fit.normal, cl.family_circle_normal(s3, family))) < 1e-10
        assert np.max(np.abs(Q.value(pts) - 1)) < 1e-12
    ra = cl.section_circle(cl.family_quadric(a, b, c, 0.3), cl.PlaneH.from_coeffs(*fit_plane(A)[:2])).radius
    rb = cl.section_circle(cl.family_quadric(a, b, c, 0.9), cl.PlaneH.from_coeffs(*fit_plane(B)[:2])).radius
    assert abs(ra - rb) < 1e-10


# -- affine deformation ------------------------------------------------------


def test_affine_identity_exact():
    ok, resid = cl.affine_isometric_check(Q321, 1.0, 1.0)
    assert ok and resid == 0.0
    with pytest.raises(ValueError):
        cl.affine_isometric_check(Q321, 0.0, 1.0)


@given(ellipsoids(), st.floats(0.05, 0.95))
def test_affine_isometry_preserves_circles(Q, t):
    a, b, g = Q.alpha, Q.beta, Q.gamma
    # parametrise the constraint α(β-γ)σ1² + γ(α-β)σ3² = β(α-γ)
    s1 = math.sqrt(t * b * (a - g) / (a * (b - g)))
    s3 = math.sqrt((1 - t) * b * (a - g) / (g * (a - b)))
    ok, _ = cl.affine_isometric_check(Q, s1, s3, 1e-12)
    assert ok
    ring = cl.sample_section(Q, cl.circular_planes(Q, 1, 0.0), 12)
    img = ring * np.array([s1, 1, s3])
    d = np.linalg.norm(img - img.mean(axis=0), axis=1)
    assert np.max(np.abs(d - math.sqrt(b))) < 1e-10
    Q2 = cl.affine_image(Q, s1, s3)
    assert np.allclose(Q2.value(img), 1, atol=1e-12)
    u = 0.5 * t + 0.3
    # t = (β-γ)/(α-γ) gives the sphere member, which has no confocal family
    t_sphere = (b - g) / (a - g)
    assume(abs(t - t_sphere) > 0.05 and abs(u - t_sphere) > 0.05)
    s1b = math.sqrt(u * b * (a - g) / (a * (b - g)))
    s3b = math.sqrt((1 - u) * b * (a - g) / (g * (a - b)))
    assert cl.confocal_up_to_scaling(Q2, cl.affine_image(Q, s1b, s3b), 1e-9)


def test_family_members_are_affine_images():
    a, b, c = 1.5, 1.2, 0.5
    Q1 = cl.family_quadric(a, b, c, 0.4)
    Q2 = cl.family_quadric(a, b, c, 1.1)
    assert cl.confocal_up_to_scaling(Q1, Q2, 1e-12)
    assert not cl.confocal_up_to_scaling(Q1, cl.QuadricForm(3, 2, 0.1), 1e-6)


# -- web closing ---------------------------------------------------------------


def test_web_closing_examples():
    for M in (1, 2, 5, 40):
        assert cl.web_closing(M, M) == 0.5
        assert cl.web_q(M, M) == 0.0
    assert cl.web_closing(4, 2) == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(ValueError):
        cl.web_closing(0, 3)


def test_web_q_asymptotics():
    prev = None
    for k in (5, 50, 500, 5000):
        diff = abs(cl.web_q(2 * 2 * k, 2 * k) - closure_q(2 * k, k))
        if prev is not None:
            assert diff < prev
        prev = diff
    assert prev < 1e-3


@pytest.mark.parametrize("M1,M2", [(3, 3), (4, 2), (5, 3)])
def test_sampled_web_closes(M1, M2):
    web = cl.sample_web(M1, M2, 1.0)
    assert len(web.curvature_lines) == (M1 + 1) + (M2 + 1)
    for pl in web.curvature_lines + web.circles[1] + web.circles[-1]:
        assert np.array_equal(pl[0], pl[-1])
    Q = cl.family_quadric(web.a, web.b, web.c, web.s3)
    for fam in (1, -1):
        for pl in web.circles[fam]:
            assert np.max(np.abs(Q.value(pl) - 1)) < 1e-12
            if len(pl) > 3:
                assert fit_plane(pl).residual < 1e-10
