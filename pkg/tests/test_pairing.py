import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a1euler.acceptance import graded_commutativity_failures, p2_delta_alpha_cocycles, surface_corpus
from a1euler.cech import CechCochain, coboundary, cocycle_class
from a1euler.gw import H, ONE, diag, form_from_gram, gw_equal
from a1euler.k0var import orbit_chi
from a1euler.linalg import Matrix
from a1euler.pairing import (DegeneratePairing, GradedGram, c1_cocycle, chi_a1, class_of_graded_form, cup,
                             gram_matrix, hochschild_dims, hodge_table, trace_normalize)
from a1euler.sheaf import LaurentPoly, differential_forms
from a1euler.toric import ToricDivisor, builtin, star_subdivision, surface_intersection_matrix


@pytest.mark.parametrize("name,diagonal", [("P1", [1, 1]), ("P2", [1, 1, 1]), ("hirzebruch:1", [1, 2, 1]),
                                           ("P1xP1", [1, 2, 1]), ("P3", [1, 1, 1, 1])])
def test_hodge_diagonal(name, diagonal):
    t = hodge_table(builtin(name))
    assert t.is_diagonal() and t.diagonal() == diagonal
    assert t.serre_symmetric()


@pytest.mark.parametrize("name,hh0", [("P1", 2), ("P2", 3), ("hirzebruch:1", 4)])
def test_hochschild(name, hh0):
    hh = hochschild_dims(builtin(name))
    assert hh[0] == hh0 and not any(v for t, v in hh.items() if t)


@st.composite
def surfaces(draw):
    fan = builtin(draw(st.sampled_from(["P2", "P1xP1", "hirzebruch:1", "hirzebruch:2"])))
    for _ in range(draw(st.integers(0, 2))):
        fan, _ = star_subdivision(fan, draw(st.sampled_from(fan.max_cones)))
    return fan


@settings(max_examples=8)
@given(surfaces())
def test_random_surfaces(fan):
    t = hodge_table(fan)
    assert t.diagonal() == [1, fan.n_rays - 2, 1] and t.serre_symmetric()
    chi = chi_a1(fan)
    assert gw_equal(chi, orbit_chi(fan))
    rho = fan.n_rays - 2
    assert chi.rank == len(fan.max_cones) and chi.signature == 2 - rho


def test_cup_unit():
    fan = builtin("hirzebruch:1")
    one = CechCochain(differential_forms(fan, 0), 0,
                      {(k,): (LaurentPoly.constant(1, 2),) for k in range(len(fan.max_cones))})
    for c in hodge_table(fan).basis(1, 1):
        assert cup(one, c).values == c.values
        assert cup(c, one).values == c.values


def test_delta_cocycle_on_p2():
    p2, delta, alpha = p2_delta_alpha_cocycles()
    assert coboundary(delta).is_zero() and coboundary(alpha).is_zero()
    table = hodge_table(p2)
    assert cocycle_class(delta, table.results[1]) != [0]
    dd = cup(delta, delta)
    assert cocycle_class(dd + alpha, table.results[2]) == [0]
    norm = trace_normalize(p2)
    assert norm.trace(dd) == 1 and norm.trace(alpha) == -1


@pytest.mark.parametrize("name", ["P2", "P1xP1", "hirzebruch:1", "hirzebruch:2", "hirzebruch:3"])
def test_c1_cup_is_intersection(name):
    fan = builtin(name)
    norm = trace_normalize(fan)
    m = surface_intersection_matrix(fan)
    c = [c1_cocycle(fan, ToricDivisor.ray(fan, i)) for i in range(fan.n_rays)]
    for i in range(fan.n_rays):
        for j in range(fan.n_rays):
            assert norm.trace(cup(c[i], c[j])) == m[i][j]


def test_exceptional_self_pairing():
    fan = builtin("hirzebruch:1")
    norm = trace_normalize(fan)
    e = c1_cocycle(fan, ToricDivisor.ray(fan, 1))
    assert norm.trace(cup(e, e)) == -1
    assert len(norm.constraints) == 10


def test_trivial_divisor():
    assert c1_cocycle(builtin("P2"), [0, 0, 0]).is_zero()


@pytest.mark.parametrize("name", ["pt", "P1", "P2", "P3", "P1xP1", "hirzebruch:1", "hirzebruch:2"])
def test_trace_scale_is_one(name):
    assert trace_normalize(builtin(name)).lam == 1


def test_gram_p1():
    g = gram_matrix(builtin("P1"))
    assert g.full == Matrix.from_rows([[0, 1], [1, 0]])
    assert gw_equal(form_from_gram(g.full), H)


def test_gram_p2_middle():
    g = gram_matrix(builtin("P2"))
    assert g.block(0) == Matrix.from_rows([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    k = [i for i, lab in enumerate(g.labels) if lab[:2] == (1, 1)]
    middle = g.full.submatrix(k, k)
    assert gw_equal(form_from_gram(middle), ONE)


def test_gram_f1_middle():
    g = gram_matrix(builtin("hirzebruch:1"))
    k = [i for i, lab in enumerate(g.labels) if lab[:2] == (1, 1)]
    assert gw_equal(form_from_gram(g.full.submatrix(k, k)), diag(1, -1))


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P1xP1", "hirzebruch:2"])
def test_gram_nondegenerate_and_symmetric(name):
    g = gram_matrix(builtin(name))
    assert g.full.det() != 0 and g.full.is_symmetric()


def test_graded_commutativity():
    for name in ["P2", "hirzebruch:1"]:
        assert graded_commutativity_failures(builtin(name)) == []


def test_class_of_graded_form():
    g = GradedGram([], Matrix.zeros(2, 2), {}, {1: 1, -1: 1})
    assert gw_equal(class_of_graded_form(g), -H)
    g = GradedGram([], Matrix.zeros(2, 2), {}, {2: 1, -2: 1})
    assert gw_equal(class_of_graded_form(g), H)
    with pytest.raises(DegeneratePairing):
        class_of_graded_form(GradedGram([], Matrix.zeros(1, 1), {}, {1: 1}))


@pytest.mark.parametrize("name,want", [("pt", ONE), ("P1", H), ("P2", H + ONE), ("hirzebruch:1", H * 2),
                                       ("P3", H * 2), ("P1xP1", H * 2)])
def test_chi(name, want):
    assert gw_equal(chi_a1(builtin(name)), want)


def test_trace_scale_hook_flips_sign():
    assert gw_equal(chi_a1(builtin("P2"), trace_scale=-1), H + diag(-1))


def test_chi_agrees_with_orbits_on_corpus():
    for fan in surface_corpus():
        assert gw_equal(chi_a1(fan), orbit_chi(fan))


def test_dimension_three_blowup_rejected():
    p3 = builtin("P3")
    fan, _ = star_subdivision(p3, p3.max_cones[0])
    with pytest.raises(ValueError):
        chi_a1(fan)
    assert hodge_table(fan).diagonal() == [1, 2, 2, 1]
