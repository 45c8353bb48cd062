import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from a1euler.cech import (BoxTooSmall, CechCochain, CechComplex, NotACocycle, cech_cohomology, coboundary,
                          cocycle_class, cone_cohomology, default_character_box)
from a1euler.sheaf import (LaurentPoly, cotangent, differential_forms, face_rays, forms_pullback_map,
                           line_bundle, permutation_sign, pullback, regular_on, structure_sheaf, wedge_power,
                           zero_sheaf)
from a1euler.toric import ToricMorphism, builtin, star_subdivision, surface_intersection_matrix

SURFACES = ["P2", "P1xP1", "hirzebruch:1", "hirzebruch:2", "hirzebruch:3"]


def bott_line(n, d):
    """h^i(P^n, O(d)) from Bott's formula."""
    out = [0] * (n + 1)
    if d >= 0:
        out[0] = comb(n + d, n)
    if d <= -n - 1:
        out[n] = comb(-d - 1, n)
    return tuple(out)


def lattice_points(fan, a):
    """h^0(O(D)) = #{m : <m, v_i> >= -a_i}, by enumeration in a generous box.

    Vertices solve 2x2 systems with unimodular ray matrices whose entries are
    at most 3 here, so |m| <= 4 * sum |a_i| covers the polytope.
    """
    r = 4 * sum(abs(x) for x in a) + 1
    return sum(all(sum(mk * vk for mk, vk in zip(m, v)) >= -ai for v, ai in zip(fan.rays, a))
               for m in itertools.product(range(-r, r + 1), repeat=fan.dim))


# Laurent polynomials ------------------------------------------------------

polys = st.dictionaries(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.integers(-5, 5),
                        max_size=4).map(LaurentPoly.from_dict)


@given(polys, polys, polys)
def test_laurent_ring(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert (p - p).is_zero()


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((2, 0, 1)) == 1
    assert permutation_sign((0, 0)) == 0


# sheaves ------------------------------------------------------------------

@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P1xP1", "hirzebruch:1", "hirzebruch:3"])
def test_forms_are_valid_sheaves(name):
    fan = builtin(name)
    for j in range(fan.dim + 1):
        assert differential_forms(fan, j).validate() == []


def test_forms_degree_zero_is_structure_sheaf():
    fan = builtin("P2")
    assert differential_forms(fan, 0) == structure_sheaf(fan)
    assert wedge_power(cotangent(fan), 2) == differential_forms(fan, 2)
    with pytest.raises(ValueError):
        differential_forms(fan, 3)


@settings(max_examples=30)
@given(st.sampled_from(SURFACES), st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_line_bundles_valid(name, coeffs):
    fan = builtin(name)
    assert line_bundle(fan, coeffs[:fan.n_rays]).validate() == []


def test_pullback_identity_is_equal():
    fan = builtin("hirzebruch:1")
    for j in range(3):
        s = differential_forms(fan, j)
        assert pullback(ToricMorphism.identity(fan), s) == s


def test_pullback_along_blowup_is_valid():
    p2 = builtin("P2")
    f1, f = star_subdivision(p2, (0, 1))
    for j in range(3):
        assert pullback(f, differential_forms(p2, j)).validate() == []


# Čech cohomology ----------------------------------------------------------

def test_p1_line_bundles():
    p1 = builtin("P1")
    assert cech_cohomology(structure_sheaf(p1)).dims == (1, 0)
    r = cech_cohomology(line_bundle(p1, [-2, 0]))
    assert r.dims == (0, 1)
    assert r.characters(1) == [(1,)]
    assert cech_cohomology(cotangent(p1)).dims == (0, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("d", [-5, -4, -3, -2, -1, 0, 1, 2])
def test_bott_formula_line_bundles(n, d):
    fan = builtin(f"P{n}")
    a = [0] * fan.n_rays
    a[-1] = d
    assert cech_cohomology(line_bundle(fan, a), with_basis=False).dims == bott_line(n, d)


def test_p2_canonical_bundle():
    p2 = builtin("P2")
    r = cech_cohomology(line_bundle(p2, [-3, 0, 0]))
    assert r.dims == (0, 0, 1)
    r = cech_cohomology(line_bundle(p2, [-1, -1, -1]))
    assert r.dims == (0, 0, 1)
    (u,) = r.characters(2)
    assert u == (-1, -1) or u == (0, 0)


@pytest.mark.parametrize("a", [0, 1, -1, 2, -3])
@pytest.mark.parametrize("b", [0, 2, -2, -3])
def test_kunneth_p1xp1(a, b):
    fan = builtin("P1xP1")
    # rays (1,0),(0,1),(-1,0),(0,-1); D_0 ~ D_2 and D_1 ~ D_3
    got = cech_cohomology(line_bundle(fan, [a, b, 0, 0]), with_basis=False).dims
    p, q = bott_line(1, a), bott_line(1, b)
    want = tuple(sum(p[i] * q[k - i] for i in range(2) if 0 <= k - i < 2) for k in range(3))
    assert got == want


@settings(max_examples=25)
@example("hirzebruch:2", [0, 0, 0, 2])
@given(st.sampled_from(SURFACES), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_surface_line_bundles(name, coeffs):
    fan = builtin(name)
    a = coeffs[:fan.n_rays]
    dims = cech_cohomology(line_bundle(fan, a), with_basis=False).dims
    assert dims[0] == lattice_points(fan, a)
    # Riemann-Roch: chi = 1 + (D.D - D.K)/2 with K = -sum D_i
    m = surface_intersection_matrix(fan)
    n = fan.n_rays
    dd = sum(a[i] * a[j] * m[i][j] for i in range(n) for j in range(n))
    dk = -sum(a[i] * m[i][j] for i in range(n) for j in range(n))
    assert dims[0] - dims[1] + dims[2] == 1 + (dd - dk) // 2


@pytest.mark.parametrize("name,h11", [("P2", 1), ("P1xP1", 2), ("hirzebruch:1", 2), ("hirzebruch:3", 2)])
def test_cotangent_surfaces(name, h11):
    assert cech_cohomology(cotangent(builtin(name))).dims == (0, h11, 0)


def test_omega1_p2_class_at_character_zero():
    r = cech_cohomology(cotangent(builtin("P2")))
    assert r.characters(1) == [(0, 0)]


def test_pullbacks_on_blowup():
    p2 = builtin("P2")
    f1, f = star_subdivision(p2, (0, 1))
    assert cech_cohomology(pullback(f, cotangent(p2))).dims == (0, 1, 0)
    assert cech_cohomology(pullback(f, structure_sheaf(p2))).dims == (1, 0, 0)


def test_box():
    assert default_character_box(structure_sheaf(builtin("P1"))) >= 2
    p2 = builtin("P2")
    r = cech_cohomology(line_bundle(p2, [-3, 0, 0]))
    assert all(max(map(abs, u)) <= r.radius for u in r.characters(2))
    with pytest.raises(BoxTooSmall, match="character box too small"):
        cech_cohomology(line_bundle(p2, [-6, 0, 0]), box=1)


def test_threads_give_same_result():
    s = differential_forms(builtin("hirzebruch:2"), 1)
    assert cech_cohomology(s, threads=4).dims == cech_cohomology(s).dims


# cochains -----------------------------------------------------------------

@st.composite
def cochains(draw, sheaf, p):
    """A regular p-cochain supported on a few characters."""
    cx = CechComplex(sheaf)
    n = sheaf.fan.dim
    total = CechCochain.zero(sheaf, p)
    for _ in range(draw(st.integers(1, 3))):
        u = tuple(draw(st.integers(-3, 3)) for _ in range(n))
        vec = []
        for tup, a in cx.degrees[p].items:
            m = tuple(x - y for x, y in zip(u, sheaf.weights[tup[0]][a]))
            ok = regular_on(m, face_rays(sheaf.fan, tup))
            vec.append(Fraction(draw(st.integers(-3, 3))) if ok else Fraction(0))
        total = total + cx.cochain(p, u, vec)
    return total


SHEAVES = [differential_forms(builtin("P2"), 1), differential_forms(builtin("hirzebruch:1"), 1),
           line_bundle(builtin("P2"), [-3, 0, 0]), differential_forms(builtin("P1xP1"), 2)]


@settings(max_examples=30)
@given(st.data())
def test_coboundaries_are_trivial(data):
    sheaf = data.draw(st.sampled_from(SHEAVES))
    p = data.draw(st.integers(0, 1))
    b = data.draw(cochains(sheaf, p))
    assert b.check_regular() == []
    db = coboundary(b)
    assert coboundary(db).is_zero()
    result = cech_cohomology(sheaf)
    assert all(x == 0 for x in cocycle_class(db, result))


def test_zero_cochain_class():
    s = SHEAVES[0]
    assert cocycle_class(CechCochain.zero(s, 1), cech_cohomology(s)) == [0]


def test_basis_classes_are_independent():
    s = SHEAVES[1]
    r = cech_cohomology(s)
    for k, c in enumerate(r.basis(1)):
        coords = cocycle_class(c, r)
        assert coords == [1 if i == k else 0 for i in range(len(coords))]


def test_not_a_cocycle():
    s = SHEAVES[0]
    r = cech_cohomology(s)
    c = CechCochain(s, 0, {(0,): (LaurentPoly.constant(1, 2), LaurentPoly())})
    with pytest.raises(NotACocycle, match="not a cocycle"):
        cocycle_class(c, r)


def test_alternating_values():
    s = SHEAVES[0]
    c = CechComplex(s).cochain(1, (0, 0), [Fraction(1)] + [Fraction(0)] * 5)
    (key,) = c.values
    flipped = c.value(key[::-1])
    again = CechCochain.from_alternating(s, 1, {key[::-1]: flipped})
    assert again.values == c.values


# mapping cones ------------------------------------------------------------

def identity_map(sheaf):
    n = sheaf.fan.dim
    return [tuple(tuple(LaurentPoly.constant(1, n) if a == b else LaurentPoly() for a in range(sheaf.rank))
                  for b in range(sheaf.rank)) for _ in range(sheaf.n_charts)]


def test_cone_of_identity():
    s = cotangent(builtin("P2"))
    assert set(cone_cohomology(identity_map(s), s, s).values()) == {0}


def test_cone_from_zero():
    fan = builtin("P2")
    s, z = cotangent(fan), zero_sheaf(fan)
    phi = [tuple(() for _ in range(s.rank)) for _ in range(s.n_charts)]
    assert cone_cohomology(phi, z, s) == {-1: 0, 0: 0, 1: 1, 2: 0}


def test_cone_of_blowup_pullback():
    f1, f = star_subdivision(builtin("P2"), (0, 1))
    pulled, omega, phi = forms_pullback_map(f)
    assert cone_cohomology(phi, pulled, omega) == {-1: 0, 0: 0, 1: 1, 2: 0}


def test_cone_rejects_bad_map():
    s = cotangent(builtin("P2"))
    phi = identity_map(s)
    phi[0] = tuple(tuple(LaurentPoly.constant(2, 2) if a == b else LaurentPoly() for a in range(2))
                   for b in range(2))
    with pytest.raises(ValueError, match="does not commute"):
        cone_cohomology(phi, s, s)
