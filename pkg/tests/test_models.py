from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from symcocycle.cohomology import (
    IdentityMap,
    Translation,
    cocycle_C,
    cocycle_cochain,
    group_coboundary,
    symplectic_residual,
)
from symcocycle.geometry import exterior_derivative_at, top_power_at
from symcocycle.models import (
    DiskTwist,
    Moebius,
    embed,
    gamma_cochain,
    geodesic,
    gw_cocycle,
    heisenberg_closed_form,
    hyperbolic_distance,
    make_disk,
    make_h2,
    make_r2n,
    moebius_act,
    parse_model,
    product_model,
    random_disk_twist,
    random_element,
    random_moebius,
    triangle_area_oracle,
)

I = np.array([0.0, 1.0])


# --- R^2n ------------------------------------------------------------------

def test_r2_form():
    np.testing.assert_array_equal(make_r2n(1).omega(np.array([3.0, -1.0])), [[0, 1], [-1, 0]])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_r2n_primitive(n, rng):
    model = make_r2n(n)
    for x in model.sample(rng, 5):
        d = exterior_derivative_at(model.omega1, x)
        assert np.max(np.abs(d - model.omega(x))) < 1e-9


def test_r4_top_power_sign():
    # w0 = dx1^dx3 + dx2^dx4 on R^4: its square is -2 dx1^dx2^dx3^dx4
    assert top_power_at(make_r2n(2).omega, np.zeros(4), 2) == pytest.approx(-2.0)


def test_heisenberg_closed_form_values():
    assert heisenberg_closed_form([1, 0], [0, 1]) == 0.5
    assert heisenberg_closed_form([1, 2, 3, 4], [1, 2, 3, 4]) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_heisenberg_agreement(n, rng):
    model = make_r2n(n)
    for _ in range(30):
        x, y = rng.uniform(-2, 2, (2, 2 * n))
        assert abs(cocycle_C(model, Translation(x), Translation(y)) - heisenberg_closed_form(x, y)) < 1e-9


# --- hyperbolic plane ------------------------------------------------------

def test_h2_form_and_primitive(rng):
    model = make_h2()
    assert model.omega(np.array([0.0, 2.0]))[0, 1] == pytest.approx(0.25)
    assert model.primitive_residual(model.sample(rng, 100)) < 1e-7


def test_moebius_preserves_form(rng):
    model = make_h2()
    for _ in range(5):
        assert symplectic_residual(model, random_moebius(rng)) < 1e-8


def test_moebius_action_examples():
    z = np.array([0.3, 1.7])
    np.testing.assert_allclose(moebius_act(Moebius(1.0, 0.0, 0.0, 1.0), z), z)
    np.testing.assert_allclose(moebius_act(Moebius(1.0, 1.0, 0.0, 1.0), I), [1.0, 1.0])
    np.testing.assert_allclose(moebius_act(Moebius(0.0, -1.0, 1.0, 0.0), [0.0, 2.0]), [0.0, 0.5])


def test_moebius_rejects_bad_determinant():
    with pytest.raises(ValueError):
        Moebius.from_matrix([[1.0, 2.0], [2.0, 4.0]])


def test_moebius_composition_matches_action(rng):
    g, h = random_moebius(rng), random_moebius(rng)
    z = np.array([0.4, 0.9])
    np.testing.assert_allclose((g * h).act(z), g.act(h.act(z)), atol=1e-12)
    np.testing.assert_allclose(g.inverse().act(g.act(z)), z, atol=1e-12)


def test_vertical_geodesic():
    c = geodesic(I, [0.0, 2.0])
    pts = c(np.linspace(0, 1, 7))
    assert np.all(pts[:, 0] == 0.0)


def test_semicircle_geodesic_against_bisector_oracle():
    a, b = sp.Point(-1, 2), sp.Point(1, 2)
    cx = sp.symbols("cx", real=True)
    centre = sp.solve(sp.Eq((a.x - cx) ** 2 + a.y**2, (b.x - cx) ** 2 + b.y**2), cx)[0]
    radius = float(sp.sqrt((a.x - centre) ** 2 + a.y**2))
    assert float(centre) == 0.0 and radius == pytest.approx(math.sqrt(5))
    c = geodesic([-1.0, 2.0], [1.0, 2.0])
    pts = c(np.linspace(0, 1, 11))
    np.testing.assert_allclose(np.hypot(pts[:, 0] - float(centre), pts[:, 1]), radius, atol=1e-12)
    assert np.array_equal(c(0.0), [-1.0, 2.0]) and np.array_equal(c(1.0), [1.0, 2.0])


def test_geodesic_endpoints_exact(rng):
    for z1, z2 in rng.uniform(0.2, 2.0, (5, 2, 2)):
        c = geodesic(z1, z2)
        assert np.array_equal(c(0.0), z1) and np.array_equal(c(1.0), z2)


def test_collinear_triangle_area():
    pts = geodesic([-1.0, 2.0], [1.0, 2.0])(np.array([0.0, 0.4, 1.0]))
    assert abs(triangle_area_oracle(*pts).area) < 1e-9


def test_triangle_area_stokes_vs_angle_defect(rng):
    model = make_h2()
    for _ in range(20):
        g1, g2 = random_moebius(rng), random_moebius(rng)
        assert abs(gw_cocycle(g1, g2, model) - gw_cocycle(g1, g2, model, method="angle_defect")) < 1e-7


def test_gw_degenerate_cases(rng):
    e = Moebius(1.0, 0.0, 0.0, 1.0)
    g = random_moebius(rng)
    assert gw_cocycle(e, g) == 0.0
    assert abs(gw_cocycle(g, Moebius.rotation(0.7))) < 1e-12


def test_gamma_cases():
    assert gamma_cochain(Moebius(1.0, 0.0, 0.0, 1.0)) == 0.0
    assert abs(gamma_cochain(Moebius.dilation(1.7))) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gw_bounded_by_pi(seed):
    r = np.random.default_rng(seed)
    assert abs(gw_cocycle(random_moebius(r), random_moebius(r))) < math.pi


def test_master_identity(rng):
    model = make_h2()
    for _ in range(10):
        g1, g2 = random_moebius(rng), random_moebius(rng)
        dgamma = gamma_cochain(g2, model) - gamma_cochain(g1 * g2, model) + gamma_cochain(g1, model)
        assert abs(cocycle_C(model, g1, g2) - (gw_cocycle(g1, g2, model) - dgamma)) < 1e-7


def test_isometry(rng):
    g = random_moebius(rng)
    z, w = make_h2().sample(rng, 2)
    assert hyperbolic_distance(g.act(z), g.act(w)) == pytest.approx(hyperbolic_distance(z, w), rel=1e-9)


# --- disk ------------------------------------------------------------------

def test_twists_preserve_area(rng):
    model = make_disk()
    for _ in range(5):
        assert symplectic_residual(model, random_disk_twist(rng)) < 1e-7
    assert symplectic_residual(model, DiskTwist.polynomial([0.3, -1.0, 2.0])) < 1e-7


def test_twists_at_fixed_point_give_zero(rng):
    model = make_disk()
    for _ in range(5):
        g1 = DiskTwist.polynomial(rng.uniform(-2, 2, 3))
        g2 = DiskTwist.polynomial(rng.uniform(-2, 2, 3))
        assert cocycle_C(model, g1, g2) == 0.0


def test_disk_cocycle_at_shifted_basepoint(rng):
    model = make_disk((0.3, 0.0))
    C = cocycle_cochain(model)
    for _ in range(10):
        assert abs(group_coboundary(C, *(random_disk_twist(rng) for _ in range(3)))) < 1e-8


def test_bump_support_must_fit():
    with pytest.raises(ValueError):
        DiskTwist.bump([0.5, 0.0], 0.6, 1.0)


def test_same_centre_twists_compose_additively():
    a = DiskTwist.bump([0.1, 0.2], 0.5, 0.7)
    b = DiskTwist.bump([0.1, 0.2], 0.5, -1.1)
    ab = DiskTwist.bump([0.1, 0.2], 0.5, -0.4)
    np.testing.assert_allclose((a * b).signature(), ab.signature(), atol=1e-14)
    np.testing.assert_allclose((a * b).signature(), (b * a).signature(), atol=1e-14)


# --- products --------------------------------------------------------------

def test_product_restriction(rng):
    A, B = make_r2n(1), make_h2()
    model = product_model(A, B)
    for _ in range(5):
        g, h = random_element(A, rng), random_element(A, rng)
        assert abs(cocycle_C(model, embed(model, g), embed(model, h)) - cocycle_C(A, g, h)) < 1e-9
        g, h = random_moebius(rng), random_moebius(rng)
        assert abs(cocycle_C(model, embed(model, g, 1), embed(model, h, 1)) - cocycle_C(B, g, h)) < 1e-9


def test_product_of_planes_matches_r4(rng):
    # product coordinates (x1, y1, x2, y2) versus R^4 coordinates (x1, x2, y1, y2)
    prod = product_model(make_r2n(1), make_r2n(1))
    r4 = make_r2n(2)
    perm = [0, 2, 1, 3]
    # after relabelling, both primitives are (1/2) sum (x_k dy_k - y_k dx_k); no gauge term remains
    for _ in range(10):
        u, v = rng.uniform(-2, 2, (2, 4))
        lhs = cocycle_C(prod, Translation(u), Translation(v))
        rhs = cocycle_C(r4, Translation(u[perm]), Translation(v[perm]))
        assert abs(lhs - rhs) < 1e-9


def test_product_identity():
    model = product_model(make_r2n(1), make_r2n(1))
    g = Translation([1.0, 2.0, 3.0, 4.0])
    assert cocycle_C(model, IdentityMap(4), g) == 0.0


def test_parse_model():
    assert parse_model("r2n:3").dim == 6
    assert parse_model("product:r2n:1,h2").dim == 4
    assert np.array_equal(parse_model("disk", (0.3, 0.0)).x0, [0.3, 0.0])
    with pytest.raises(ValueError):
        parse_model("sphere")
