"""The acceptance checklist, shared by the test suite and ``a1euler verify``.

Each check returns a :class:`Check` with a one-line detail.  Checks never
raise for a wrong answer; exceptions inside a check are reported as failures.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .cech import cech_cohomology, coboundary, cocycle_class, cone_cohomology
from .gw import INF, H, ONE, ZERO, form_from_gram, gw_equal, hilbert_symbol
from .k0var import bittner_grid, bittner_residual, chi_c, orbit_chi, parse_expr
from .linalg import Matrix, factorize, format_rational
from .pairing import (chi_a1, cup, dlog_cochain, gram_matrix, hochschild_dims, hodge_table)
from .sheaf import cotangent, forms_pullback_map, pullback
from .toric import Fan, builtin, star_subdivision

__all__ = ["Check", "CRITERIA", "run_all", "surface_corpus", "p2_delta_alpha_cocycles"]


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail}"

    def to_record(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail}


def surface_corpus() -> list[Fan]:
    """P2, P1xP1, F_1..F_3 and a double blow-up of P2."""
    f1 = builtin("hirzebruch:1")
    double, _ = star_subdivision(f1, f1.max_cones[0])
    return [builtin("P2"), builtin("P1xP1"), f1, builtin("hirzebruch:2"), builtin("hirzebruch:3"), double]


def p2_delta_alpha_cocycles():
    """The cochains delta(1) in C^1(Omega^1) and alpha in C^2(Omega^2) on P2.

    In homogeneous coordinates x, y, z the torus coordinates are t1 = x/z,
    t2 = y/z.  delta(1) is dlog(x/y), dlog(y/z), dlog(x/z) on the pairs
    (U_x, U_y), (U_y, U_z), (U_x, U_z), and alpha = dlog t1 ^ dlog t2 on the
    triple (U_x, U_y, U_z).
    """
    p2 = builtin("P2")
    coords = {"x": (1, 0), "y": (0, 1), "z": (-1, -1)}

    def chart(nonvanishing: str) -> int:
        # U_x is the chart of the cone not containing the ray of {x = 0}
        idx = tuple(i for i, r in enumerate(p2.rays) if r != coords[nonvanishing])
        return p2.max_cones.index(idx)

    ux, uy, uz = chart("x"), chart("y"), chart("z")
    delta = dlog_cochain(p2, 1, 1, {(ux, uy): {(0,): 1, (1,): -1}, (uy, uz): {(1,): 1}, (ux, uz): {(0,): 1}})
    alpha = dlog_cochain(p2, 2, 2, {(ux, uy, uz): {(0, 1): 1}})
    return p2, delta, alpha


# individual criteria ---------------------------------------------------------

def _reference_values(trace_scale) -> tuple[bool, str]:
    expected = {"pt": ONE, "P1": H, "P2": H + ONE, "hirzebruch:1": H * 2}
    bad, seen = [], []
    for name, want in expected.items():
        got = chi_a1(builtin(name), trace_scale=trace_scale)
        seen.append(f"{name}={got}")
        if not gw_equal(got, want):
            bad.append(f"{name}: got {got}, expected {want}")
    return not bad, "; ".join(bad) if bad else ", ".join(seen)


def _blowup_relation(trace_scale) -> tuple[bool, str]:
    c = lambda n: chi_a1(builtin(n), trace_scale=trace_scale)
    lhs, rhs = c("P1") + c("P2"), c("pt") + c("hirzebruch:1")
    k = lambda s: chi_c(parse_expr(s))
    lhs2, rhs2 = k("P^1") + k("P^2"), k("pt") + k("bl(P^2; pt; 2)")
    ok = gw_equal(lhs, rhs) and gw_equal(lhs2, rhs2)
    return ok, f"cohomological {lhs} = {rhs}; cut-and-paste {lhs2} = {rhs2}"


def _hodge() -> tuple[bool, str]:
    want = {"P1": [1, 1], "P2": [1, 1, 1], "hirzebruch:1": [1, 2, 1]}
    bad, seen = [], []
    for name, diag_ in want.items():
        t = hodge_table(builtin(name))
        seen.append(f"{name} {t.diagonal()}")
        if not t.is_diagonal() or t.diagonal() != diag_:
            bad.append(f"{name}: {t.h}")
    hh = hochschild_dims(builtin("hirzebruch:1"))
    if hh[0] != 4 or any(v for t, v in hh.items() if t):
        bad.append(f"F1 Hochschild dims {hh}")
    return not bad, "; ".join(bad) if bad else ", ".join(seen) + ", total rank 4 in degree 0"


def _blowup_pullbacks() -> tuple[bool, str]:
    p2 = builtin("P2")
    f1, f = star_subdivision(p2, (0, 1))
    pulled_dims = cech_cohomology(pullback(f, cotangent(p2))).dims
    pulled, omega, phi = forms_pullback_map(f)
    cone = cone_cohomology(phi, pulled, omega)
    cone_dims = tuple(cone[k] for k in range(3))
    ok = pulled_dims == (0, 1, 0) and cone_dims == (0, 1, 0) and cone[-1] == 0
    return ok, f"H(F1, f*Omega1_P2) = {pulled_dims}; H(cone of f*Omega1 -> Omega1) = {cone_dims}"


def _delta_cocycle(trace_scale) -> tuple[bool, str]:
    p2, delta, alpha = p2_delta_alpha_cocycles()
    g = gram_matrix(p2, trace_scale=trace_scale)
    norm = g.normalization
    table = hodge_table(p2)
    is_cocycle = coboundary(delta).is_zero()
    coords = cocycle_class(delta, table.results[1])
    generates = table.h[1][1] == 1 and coords != [0]
    dd = cup(delta, delta)
    tr_dd, tr_alpha = norm.trace(dd), norm.trace(alpha)
    minus_alpha = cocycle_class(dd + alpha, table.results[2]) == [0]
    ok = is_cocycle and generates and tr_dd == 1 and tr_alpha == -1 and minus_alpha
    return ok, (f"cocycle={is_cocycle}, class={[str(x) for x in coords]}, Tr(d1 cup d1)={tr_dd}, "
                f"Tr(alpha)={tr_alpha}, d1 cup d1 ~ -alpha: {minus_alpha}")


def _p1_gram() -> tuple[bool, str]:
    g = gram_matrix(builtin("P1"))
    want = Matrix.from_rows([[0, 1], [1, 0]])
    ok = g.full == want and gw_equal(form_from_gram(g.full), form_from_gram(want))
    return ok, "Gram matrix " + str([[format_rational(x) for x in row] for row in g.full.to_rows()]).replace("'", "")


def _two_oracles() -> tuple[bool, str]:
    bad, n = [], 0
    for fan in surface_corpus() + [builtin("P1")]:
        a, b = chi_a1(fan), orbit_chi(fan)
        n += 1
        if not gw_equal(a, b):
            bad.append(f"{fan}: {a} vs {b}")
    return not bad, "; ".join(bad) if bad else f"{n} fans agree"


def _bittner() -> tuple[bool, str]:
    grid = list(bittner_grid())
    bad = [f"{x}, {y}, {c}" for x, y, c in grid if not gw_equal(bittner_residual(x, y, c), ZERO)]
    ok = len(grid) >= 50 and not bad
    return ok, f"{len(grid)} triples, {len(bad)} nonzero residuals" + (f": {bad[:3]}" if bad else "")


def _random_symmetric(rng: random.Random, size: int) -> Matrix:
    while True:
        rows = [[0] * size for _ in range(size)]
        for i in range(size):
            for j in range(i, size):
                rows[i][j] = rows[j][i] = rng.randint(-9, 9)
        m = Matrix.from_rows(rows)
        if m.det() != 0:
            return m


def _random_invertible(rng: random.Random, size: int) -> Matrix:
    while True:
        m = Matrix.from_rows([[rng.randint(-3, 3) for _ in range(size)] for _ in range(size)])
        if m.det() != 0:
            return m


def gw_invariant_suite(seed: int = 2024, transforms: int = 1000, hilbert_cases: int = 200) -> list[str]:
    """Random congruence invariance and the Hilbert product formula; returns failures."""
    rng = random.Random(seed)
    bad = []
    for _ in range(transforms):
        size = rng.randint(1, 5)
        s = _random_symmetric(rng, size)
        g = _random_invertible(rng, size)
        if not gw_equal(form_from_gram(g.T @ s @ g), form_from_gram(s)):
            bad.append(f"congruence invariance fails for {s.to_rows()}")
    values = [x for x in range(-30, 31) if x]
    for _ in range(hilbert_cases):
        a, b = rng.choice(values), rng.choice(values)
        places = [INF] + sorted(factorize(2 * a * b))
        prod = 1
        for p in places:
            prod *= hilbert_symbol(a, b, p)
        if prod != 1:
            bad.append(f"product formula fails for ({a}, {b})")
    return bad


def _properties() -> tuple[bool, str]:
    bad = []
    fans = surface_corpus() + [builtin("P1"), builtin("P3")]
    for fan in fans:
        t = hodge_table(fan)
        if not t.serre_symmetric():
            bad.append(f"Serre symmetry fails on {fan}")
        # box doubling: rescan at twice the default radius
        for j in range(fan.dim + 1):
            r = t.results[j]
            again = cech_cohomology(r.sheaf, box=2 * r.radius, with_basis=False).dims
            if again != r.dims:
                bad.append(f"box doubling changes H(Omega^{j}) on {fan}")
        g = gram_matrix(fan)
        if g.full.det() == 0:
            bad.append(f"degenerate Gram matrix on {fan}")
        bad += graded_commutativity_failures(fan)
    for fan in surface_corpus():
        chi = chi_a1(fan)
        rho = fan.n_rays - 2
        if chi.rank != len(fan.max_cones) or chi.signature != 2 - rho:
            bad.append(f"rank/signature wrong on {fan}: {chi.rank}, {chi.signature}")
    bad += gw_invariant_suite()
    return not bad, "; ".join(bad[:4]) if bad else (
        f"Serre symmetry, box doubling, nondegeneracy, graded commutativity on {len(fans)} fans; "
        "1000 congruence transforms; 200 product-formula cases; rank and signature on surfaces")


def graded_commutativity_failures(fan: Fan) -> list[str]:
    t = hodge_table(fan)
    n = fan.dim
    classes = [(i, j, c) for i in range(n + 1) for j in range(n + 1) for c in t.basis(i, j)]
    bad = []
    for (p, j, a) in classes:
        for (q, k, b) in classes:
            if p + q > n or j + k > n:
                continue
            target = t.results[j + k]
            ab = cocycle_class(cup(a, b), target)
            ba = cocycle_class(cup(b, a), target)
            sign = (-1) ** (p * q + j * k)
            if ab != [sign * x for x in ba]:
                bad.append(f"graded commutativity fails on {fan} for H^{p}(Omega^{j}) x H^{q}(Omega^{k})")
    return bad


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "reference values of chi (pt, P1, P2, Bl0P2)", lambda s: _reference_values(s)),
    (2, "blow-up relation chi(P1)+chi(P2) = chi(pt)+chi(Bl0P2)", lambda s: _blowup_relation(s)),
    (3, "Hodge tables and total rank", lambda s: _hodge()),
    (4, "pullback and cone cohomology on Bl0P2", lambda s: _blowup_pullbacks()),
    (5, "delta(1) cocycle and trace on P2", lambda s: _delta_cocycle(s)),
    (6, "P1 Gram matrix", lambda s: _p1_gram()),
    (7, "two-oracle agreement on the fan corpus", lambda s: _two_oracles()),
    (8, "Bittner residual grid", lambda s: _bittner()),
    (9, "property suites", lambda s: _properties()),
]


def run_all(trace_scale=1, only: list[int] | None = None) -> list[Check]:
    out = []
    for number, name, fn in CRITERIA:
        if only and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(Fraction(trace_scale))
        except Exception as exc:  # a crash is a failure, reported with its message
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(number, name, bool(ok), detail, time.perf_counter() - t0))
    return out
