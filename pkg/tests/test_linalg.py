from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from a1euler.linalg import (FACTOR_LIMIT, Matrix, congruence_diagonalize, factorize, format_rational,
                            is_prime, parse_rational, rank_kernel_image, solve, square_class)

small = st.integers(-6, 6)


@st.composite
def matrices(draw, max_dim=5):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    return Matrix.from_rows([[draw(small) for _ in range(c)] for _ in range(r)])


@st.composite
def symmetric(draw, max_dim=5):
    n = draw(st.integers(1, max_dim))
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            rows[i][j] = rows[j][i] = draw(small)
    return Matrix.from_rows(rows)


def test_identity_rank():
    r, k, _ = rank_kernel_image(Matrix.identity(2))
    assert r == 2 and k.cols == 0


def test_rank_one_kernel():
    r, k, _ = rank_kernel_image(Matrix.from_rows([[1, 1], [1, 1]]))
    assert r == 1
    col = [k[i, 0] for i in range(2)]
    assert col[0] == -col[1] != 0


def test_p1_structure_sheaf_differential():
    # C^0 = k + k -> C^1 = k, (f, g) -> g - f at the character 0
    r, k, _ = rank_kernel_image(Matrix.from_rows([[-1, 1]]))
    assert r == 1 and k.cols == 1


@given(matrices())
def test_rank_matches_sympy(m):
    r, k, im = rank_kernel_image(m)
    assert r == sympy.Matrix(m.to_rows()).rank()
    assert k.cols == m.cols - r
    assert im.cols == r
    if k.cols:
        assert all(x == 0 for row in (m @ k).to_rows() for x in row)


@given(matrices(4))
def test_det_and_inverse_match_sympy(m):
    if m.rows != m.cols:
        return
    d = m.det()
    assert d == Fraction(int(sympy.Matrix(m.to_rows()).det()))
    if d:
        assert m @ m.inverse() == Matrix.identity(m.rows)


@given(matrices(4), st.lists(small, min_size=4, max_size=4))
def test_solve(a, x):
    x = x[:a.cols]
    b = [sum(a[i, j] * x[j] for j in range(a.cols)) for i in range(a.rows)]
    y = solve(a, b)
    assert y is not None
    assert [sum(a[i, j] * y[j] for j in range(a.cols)) for i in range(a.rows)] == b


def test_solve_inconsistent():
    assert solve(Matrix.from_rows([[1, 1], [1, 1]]), [1, 2]) is None


@pytest.mark.parametrize("rows,want", [([[0, 1], [1, 0]], [2, -2]), ([[1, 2], [2, 1]], [1, -3]),
                                       ([[3, 0], [0, -5]], [3, -5])])
def test_congruence_examples(rows, want):
    d, _ = congruence_diagonalize(Matrix.from_rows(rows))
    assert d == want


def test_congruence_rejects_asymmetric():
    with pytest.raises(ValueError, match="not symmetric"):
        congruence_diagonalize(Matrix.from_rows([[0, 1], [2, 0]]))


@settings(max_examples=1000)
@given(symmetric())
def test_congruence_diagonalize(s):
    d, p = congruence_diagonalize(s)
    assert p.det() != 0
    assert p.T @ s @ p == Matrix.diagonal(d)


@pytest.mark.parametrize("q,want", [(4, 1), (Fraction(-8, 9), -2), (12, 3), (Fraction(1, 2), 2), (-1, -1)])
def test_square_class_examples(q, want):
    assert square_class(q) == want


def test_square_class_zero():
    with pytest.raises(ValueError, match="zero has no square class"):
        square_class(0)


@given(st.integers(1, 10 ** 6), st.integers(-10 ** 6, 10 ** 6).filter(bool), st.integers(1, 10 ** 4))
def test_square_class_invariance(a, b, c):
    q = Fraction(b, a)
    assert square_class(q * c * c) == square_class(q)
    sq = square_class(q)
    assert sympy.factorint(abs(sq)) == {p: 1 for p in sympy.factorint(abs(sq))}
    assert (sq > 0) == (q > 0)


@given(st.integers(2, 10 ** 15))
def test_factorize_matches_sympy(n):
    assert factorize(n) == sympy.factorint(n)


def test_factorize_large_semiprime():
    p, q = 1_000_000_007, 998_244_353
    assert factorize(p * q) == {q: 1, p: 1}
    assert factorize(p * p * 3) == {3: 1, p: 2}


def test_factorize_limit():
    n = sympy.nextprime(10 ** 13) * sympy.nextprime(2 * 10 ** 13)
    assert n > FACTOR_LIMIT
    with pytest.raises(ValueError):
        factorize(n)


@given(st.integers(0, 10 ** 12))
def test_is_prime(n):
    assert is_prime(n) == sympy.isprime(n)


@given(st.fractions())
def test_rational_round_trip(x):
    assert parse_rational(format_rational(x)) == x
