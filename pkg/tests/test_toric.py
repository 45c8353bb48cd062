import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a1euler.toric import (BUILTIN_NAMES, Fan, FanError, FanFormatError, ToricMorphism, builtin, format_fan,
                           hirzebruch, load_fan, orbit_counts, parse_fan, self_intersection_coefficients,
                           star_subdivision, surface_intersection_matrix, validate)

NAMES = ["pt", "P1", "P2", "P3", "P1xP1", "hirzebruch:1", "hirzebruch:2", "hirzebruch:3"]


@st.composite
def blown_up(draw, bases=("P2", "P1xP1", "hirzebruch:1", "hirzebruch:2"), max_steps=3):
    fan = builtin(draw(st.sampled_from(bases)))
    for _ in range(draw(st.integers(0, max_steps))):
        fan, _ = star_subdivision(fan, draw(st.sampled_from(fan.max_cones)))
    return fan


def test_p2_fan():
    p2 = builtin("P2")
    assert p2.rays == ((1, 0), (0, 1), (-1, -1))
    assert p2.max_cones == ((0, 1), (0, 2), (1, 2))
    assert validate(p2) == []


def test_incomplete():
    p2 = builtin("P2")
    problems = validate(Fan(2, p2.rays, ((0, 1), (1, 2))))
    assert problems and all(p.startswith("not complete") for p in problems)


def test_not_smooth():
    assert validate(Fan(2, ((1, 0), (1, 2), (-1, -1)), ((0, 1), (1, 2), (0, 2)))) == \
        ["not smooth: cone (0, 1) (det 2)"]


def test_not_primitive():
    problems = validate(Fan(1, ((2,), (-1,)), ((0,), (1,))))
    assert any("not primitive" in p for p in problems)


def test_overlap_detected():
    # the cones of P2 plus a duplicate covering of the first quadrant
    rays = ((1, 0), (0, 1), (-1, -1), (1, 1))
    cones = ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3))
    assert validate(Fan(2, rays, cones))


def test_make_raises_with_all_problems():
    with pytest.raises(FanError) as err:
        Fan.make(2, [(1, 0), (1, 2), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    assert err.value.problems


def test_p1_fan():
    assert builtin("P1").rays == ((1,), (-1,))


def test_hirzebruch_one_is_blowup_of_p2():
    f1, f = star_subdivision(builtin("P2"), (0, 1))
    assert f1.same_as(hirzebruch(1))
    assert f1.n_rays == 4 and len(f1.max_cones) == 4
    assert f.target == builtin("P2")


def test_blowup_of_p3():
    b, _ = star_subdivision(builtin("P3"), builtin("P3").max_cones[2])
    assert (b.n_rays, len(b.max_cones)) == (5, 6)
    assert validate(b) == []


def test_star_subdivision_errors():
    with pytest.raises(ValueError, match="dimension ≥ 2 required"):
        star_subdivision(builtin("P1"), (0,))
    with pytest.raises(ValueError, match="not a maximal cone"):
        star_subdivision(builtin("P2"), (0,))


@pytest.mark.parametrize("name,counts", [("P2", (1, 3, 3)), ("hirzebruch:1", (1, 4, 4)), ("P1", (1, 2)),
                                         ("P3", (1, 4, 6, 4)), ("pt", (1,))])
def test_orbit_counts(name, counts):
    assert orbit_counts(builtin(name)) == counts


def test_intersection_matrices():
    assert surface_intersection_matrix(builtin("P2")) == [[1] * 3] * 3
    m = surface_intersection_matrix(builtin("P1xP1"))
    assert [m[i][i] for i in range(4)] == [0, 0, 0, 0]
    for a in (1, 2, 3):
        m = surface_intersection_matrix(hirzebruch(a))
        assert sorted(m[i][i] for i in range(4)) == sorted([0, 0, a, -a])
        # the ray (1, 1) carries the negative section
        assert m[1][1] == -a
    assert self_intersection_coefficients(hirzebruch(1))[1] == 1


@settings(max_examples=40)
@given(blown_up())
def test_intersection_matrix_relations(fan):
    m = surface_intersection_matrix(fan)
    n = fan.n_rays
    # principal divisors sum_i <e_k, v_i> D_i are numerically trivial
    for k in range(2):
        for j in range(n):
            assert sum(fan.rays[i][k] * m[i][j] for i in range(n)) == 0
    # Noether: K^2 = 12 - e for a rational surface, K = -sum D_i
    assert sum(map(sum, m)) == 12 - n
    assert all(m[i][j] == m[j][i] for i in range(n) for j in range(n))


@settings(max_examples=40)
@given(blown_up())
def test_random_blowups_valid(fan):
    assert validate(fan) == []
    assert orbit_counts(fan) == (1, fan.n_rays, fan.n_rays)


@settings(max_examples=25)
@given(blown_up(bases=("P3",), max_steps=2))
def test_threefold_blowups(fan):
    assert validate(fan) == []
    c = orbit_counts(fan)
    # the link is a triangulated 2-sphere: V - E + F = 2, E = 3V - 6
    assert c[1] - c[2] + c[3] == 2 and c[2] == 3 * c[1] - 6


@settings(max_examples=40)
@given(blown_up())
def test_refinement_morphism(fan):
    target = fan
    fan2, f = star_subdivision(target, target.max_cones[0])
    assert ToricMorphism.refinement(fan2, target).cone_map == f.cone_map
    assert ToricMorphism.identity(target).cone_map == tuple(range(len(target.max_cones)))


def test_dual_bases():
    for name in NAMES[1:]:
        fan = builtin(name)
        for k, cone in enumerate(fan.max_cones):
            for i, m in enumerate(fan.dual_bases[k]):
                for j, r in enumerate(fan.cone_rays(k)):
                    assert sum(a * b for a, b in zip(m, r)) == (1 if i == j else 0)


@pytest.mark.parametrize("name", NAMES)
def test_round_trip(name, tmp_path):
    fan = builtin(name)
    again = parse_fan(format_fan(fan), name)
    assert again == fan and validate(again) == [] or fan.dim == 0
    path = tmp_path / "fan.txt"
    path.write_text(format_fan(fan))
    assert load_fan(str(path)) == fan


@settings(max_examples=30)
@given(blown_up())
def test_round_trip_random(fan):
    assert parse_fan(format_fan(fan)) == fan


def test_ccw_normalization():
    fan = Fan.make(2, [(0, -1), (-1, 0), (0, 1), (1, 0)], [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert fan.rays == ((1, 0), (0, 1), (-1, 0), (0, -1))
    assert fan.same_as(builtin("P1xP1"))


@pytest.mark.parametrize("text,line,token", [
    ("dim 2\nrays: 1 0; 0 x; -1 -1\ncones: 0 1; 1 2; 0 2\n", 2, "x"),
    ("dim 2\nrays: 1 0; 0 1; -1 -1\ncones: 0 1; 1 5; 0 2\n", 3, "5"),
    ("dimension 2\nrays: 1 0\ncones: 0\n", 1, "dimension"),
    ("dim 2\nrays: 1 0; 0 1 1; -1 -1\ncones: 0 1; 1 2; 0 2\n", 2, None),
    ("dim 2\nrays: 1 0; 0 1\n", 2, None),
])
def test_parse_errors(text, line, token):
    with pytest.raises(FanFormatError) as err:
        parse_fan(text)
    assert err.value.line == line
    if token is not None:
        assert err.value.token == token


def test_parse_comments_and_validation():
    fan = parse_fan("# P2\ndim 2\nrays: 1 0; 0 1; -1 -1  # three rays\ncones: 0 1; 1 2; 2 0\n")
    assert fan == builtin("P2")
    with pytest.raises(FanError):
        parse_fan("dim 2\nrays: 1 0; 0 1; -1 -1\ncones: 0 1; 1 2\n")


def test_builtin_names():
    assert "P1xP1" in BUILTIN_NAMES
    assert builtin("F2") == builtin("Hirzebruch(2)") == builtin("hirzebruch:2")
    with pytest.raises(ValueError):
        builtin("P7")
    with pytest.raises(ValueError):
        load_fan("no/such/file")
