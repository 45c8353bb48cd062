"""Hodge tables, the cup/trace pairing and the resulting class in GW(Q).

The Hodge complex of X is the graded space with H^i(X, Omega^j) in degree
j - i, paired with H^{n-i}(X, Omega^{n-j}) by cup product followed by the
trace H^n(X, Omega^n) -> Q.  The trace is pinned down by intersection
numbers: for surfaces ``Tr(c1(D_i) c1(D_j)) = D_i . D_j`` for every pair of
boundary divisors, for P^n-type fans ``Tr(c1(D_0)^n) = 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .cech import CechCochain, CohomologyResult, cech_cohomology, chart_tuples, cocycle_class
from .gw import GWClass, H, ZERO, form_from_gram
from .linalg import Matrix, format_rational
from .sheaf import LaurentPoly, differential_forms, line_bundle, permutation_sign
from .toric import Fan, ToricDivisor, surface_intersection_matrix

__all__ = [
    "HodgeTable",
    "GradedGram",
    "TraceNormalization",
    "DegeneratePairing",
    "hodge_table",
    "cup",
    "dlog_cochain",
    "c1_cocycle",
    "trace_normalize",
    "gram_matrix",
    "class_of_graded_form",
    "chi_a1",
    "hochschild_dims",
]


class DegeneratePairing(ValueError):
    pass


# forms -----------------------------------------------------------------------

def _wedge(fan: Fan, j1: int, a: Sequence[LaurentPoly], j2: int, b: Sequence[LaurentPoly]) -> list[LaurentPoly]:
    n = fan.dim
    s1 = list(itertools.combinations(range(n), j1))
    s2 = list(itertools.combinations(range(n), j2))
    s3 = {S: i for i, S in enumerate(itertools.combinations(range(n), j1 + j2))}
    out = [LaurentPoly()] * len(s3)
    for S, x in zip(s1, a):
        if not x:
            continue
        for T, y in zip(s2, b):
            if not y:
                continue
            sign = permutation_sign(S + T)
            if sign:
                k = s3[tuple(sorted(S + T))]
                out[k] = out[k] + x * y * sign
    return out


def cup(a: CechCochain, b: CechCochain) -> CechCochain:
    """Front-face/back-face cup product followed by the wedge of forms.

    ``(a cup b)(s_0..s_{p+q}) = (-1)^{j q} a(s_0..s_p) ^ b(s_p..s_{p+q})``
    with ``a`` a p-cochain of j-forms and ``b`` a q-cochain; the value of
    ``b`` is moved into the frame of ``s_0`` before wedging.
    """
    fa, fb = a.sheaf, b.sheaf
    if fa.fan != fb.fan:
        raise ValueError("cochains live on different fans")
    if fa.form_degree is None or fb.form_degree is None:
        raise ValueError("cup product needs sheaves of differential forms")
    fan = fa.fan
    j1, j2 = fa.form_degree, fb.form_degree
    if j1 + j2 > fan.dim:
        raise ValueError(f"form degree {j1 + j2} exceeds dimension {fan.dim}")
    p, q = a.degree, b.degree
    target = differential_forms(fan, j1 + j2)
    sign = -1 if (j1 * q) % 2 else 1
    out = {}
    for tup in chart_tuples(fa.n_charts, p + q):
        left = a.values.get(tup[:p + 1])
        right = b.values.get(tup[p:])
        if left is None or right is None:
            continue
        moved = [LaurentPoly()] * fb.rank
        trans = fb.transition(tup[p], tup[0])
        for r, row in enumerate(trans):
            acc = LaurentPoly()
            for e, x in zip(row, right):
                if e and x:
                    acc = acc + e * x
            moved[r] = acc
        val = _wedge(fan, j1, left, j2, moved)
        out[tup] = tuple(x * sign for x in val)
    return CechCochain(target, p + q, out)


def dlog_cochain(fan: Fan, j: int, p: int, values: Mapping[Sequence[int], Mapping[Sequence[int], object]]) -> CechCochain:
    """A p-cochain of j-forms given by constant-coefficient dlog forms.

    ``values`` maps chart tuples (any order, read alternatingly) to
    ``{K: c}`` meaning ``sum c * dlog t_{k_1} ^ ... ^ dlog t_{k_j}`` in the
    global torus coordinates ``t_k = chi^{e_k}``.  Such forms are global, so
    only the permutation sign of the tuple matters.
    """
    sheaf = differential_forms(fan, j)
    subsets = list(itertools.combinations(range(fan.dim), j))
    out: dict[tuple, tuple[LaurentPoly, ...]] = {}
    for tup, form in values.items():
        tup = tuple(tup)
        sign = permutation_sign(tup)
        if not sign:
            continue
        key = tuple(sorted(tup))
        chart = key[0]
        rays = fan.cone_rays(chart)
        dual = fan.dual_bases[chart]
        vec = []
        for I in subsets:
            coeff = Fraction(0)
            for K, c in form.items():
                K = tuple(K)
                s = permutation_sign(K)
                if not s:
                    continue
                Ks = tuple(sorted(K))
                minor = Matrix.from_rows([[rays[i][k] for i in I] for k in Ks], len(I)).det() if I else Fraction(1)
                coeff += s * Fraction(c) * minor
            m_I = tuple(-sum(dual[i][k] for i in I) for k in range(fan.dim))
            vec.append(LaurentPoly.monomial(m_I, coeff * sign) if coeff else LaurentPoly())
        out[key] = tuple(vec)
    return CechCochain(sheaf, p, out)


def c1_cocycle(fan: Fan, divisor: ToricDivisor | Sequence[int]) -> CechCochain:
    """First Chern class of O(D): dlog chi^{m_t - m_s} on each pair s < t."""
    lb = line_bundle(fan, divisor)
    N = len(fan.max_cones)
    values = {}
    for s, t in chart_tuples(N, 1):
        m = [x - y for x, y in zip(lb.weights[t][0], lb.weights[s][0])]
        if any(m):
            values[(s, t)] = {(k,): m[k] for k in range(fan.dim) if m[k]}
    return dlog_cochain(fan, 1, 1, values)


# Hodge table -----------------------------------------------------------------

@dataclass
class HodgeTable:
    fan: Fan
    h: list[list[int]]                      # h[i][j] = dim H^i(Omega^j)
    results: dict[int, CohomologyResult] = field(repr=False)

    @property
    def n(self) -> int:
        return self.fan.dim

    def is_diagonal(self) -> bool:
        return all(self.h[i][j] == 0 for i in range(self.n + 1) for j in range(self.n + 1) if i != j)

    def diagonal(self) -> list[int]:
        return [self.h[i][i] for i in range(self.n + 1)]

    def serre_symmetric(self) -> bool:
        n = self.n
        return all(self.h[i][j] == self.h[n - i][n - j] for i in range(n + 1) for j in range(n + 1))

    def basis(self, i: int, j: int) -> list[CechCochain]:
        return self.results[j].basis(i)

    def to_record(self) -> dict:
        return {"h": self.h, "diagonal": self.diagonal() if self.is_diagonal() else None}


def hodge_table(fan: Fan, box: int | None = None, threads: int = 1) -> HodgeTable:
    if fan.dim > 3:
        raise ValueError("dimension at most 3 supported")
    results = {j: cech_cohomology(differential_forms(fan, j), box=box, threads=threads)
               for j in range(fan.dim + 1)}
    h = [[results[j].dims[i] for j in range(fan.dim + 1)] for i in range(fan.dim + 1)]
    return HodgeTable(fan, h, results)


@lru_cache(maxsize=64)
def _cached_table(fan: Fan, box: int | None, threads: int) -> HodgeTable:
    return hodge_table(fan, box, threads)


def hochschild_dims(fan_or_table) -> dict[int, int]:
    """dim HH_t = sum of h^{i,j} over j - i = t, for -n <= t <= n."""
    table = fan_or_table if isinstance(fan_or_table, HodgeTable) else _cached_table(fan_or_table, None, 1)
    n = table.n
    out = {t: 0 for t in range(-n, n + 1)}
    for i in range(n + 1):
        for j in range(n + 1):
            out[j - i] += table.h[i][j]
    return out


# trace -----------------------------------------------------------------------

@dataclass
class TraceNormalization:
    """Tr(c) = lam * (coordinate of [c] along ``top``)."""

    fan: Fan
    top: CechCochain
    lam: Fraction
    constraints: list[tuple[str, Fraction, Fraction]]   # (label, coordinate, required trace)
    top_result: CohomologyResult = field(repr=False)

    def trace(self, c: CechCochain) -> Fraction:
        (x,) = cocycle_class(c, self.top_result)
        return self.lam * x

    def to_record(self) -> dict:
        return {"lambda": format_rational(self.lam),
                "constraints": [[lab, format_rational(x), format_rational(v)] for lab, x, v in self.constraints]}


def _is_projective_space(fan: Fan) -> bool:
    return fan.n_rays == fan.dim + 1


def trace_normalize(fan: Fan, table: HodgeTable | None = None, trace_scale=1) -> TraceNormalization:
    """Fix the scalar of the trace map by intersection numbers.

    Every constraint reads ``lam * x = value``; the system must have exactly
    one consistent nonzero solution.  ``trace_scale`` multiplies the result
    (a hook for covariance tests).
    """
    n = fan.dim
    table = table or _cached_table(fan, None, 1)
    top_result = table.results[n]
    if top_result.dims[n] != 1:
        raise ValueError(f"H^{n}(Omega^{n}) has dimension {top_result.dims[n]}, expected 1")
    (top,) = top_result.basis(n)
    constraints: list[tuple[str, Fraction, Fraction]] = []

    def coord(c: CechCochain) -> Fraction:
        return cocycle_class(c, top_result)[0]

    if n == 0:
        one = CechCochain(differential_forms(fan, 0), 0, {(0,): (LaurentPoly.constant(1, 0),)})
        constraints.append(("Tr(1)", coord(one), Fraction(1)))
    elif n == 2:
        inter = surface_intersection_matrix(fan)
        c1 = [c1_cocycle(fan, ToricDivisor.ray(fan, i)) for i in range(fan.n_rays)]
        for i in range(fan.n_rays):
            for j in range(i, fan.n_rays):
                constraints.append((f"D{i}.D{j}", coord(cup(c1[i], c1[j])), Fraction(inter[i][j])))
    elif n == 1 or _is_projective_space(fan):
        c = c1_cocycle(fan, ToricDivisor.ray(fan, 0))
        power = c
        for _ in range(n - 1):
            power = cup(power, c)
        constraints.append((f"D0^{n}", coord(power), Fraction(1)))
    else:
        raise ValueError("trace normalization is available for dim <= 2 and projective spaces only")

    lam = None
    for label, x, v in constraints:
        if x == 0:
            if v != 0:
                raise ValueError(f"inconsistent trace constraints: {label} has zero class but value {v}")
            continue
        cand = v / x
        if lam is None:
            lam = cand
        elif cand != lam:
            raise ValueError(f"inconsistent trace constraints: {label} needs {cand}, others {lam}")
    if not lam:
        raise ValueError("trace constraints do not determine a nonzero scalar")
    return TraceNormalization(fan, top, lam * Fraction(trace_scale), constraints, top_result)


# Gram matrices ---------------------------------------------------------------

@dataclass
class GradedGram:
    """Pairing matrices on the Hodge complex.

    ``labels[k] = (i, j, index)`` names the k-th basis class, a class in
    H^i(Omega^j) of degree j - i.  ``blocks[t]`` pairs degree t (rows) with
    degree -t (columns).  The class spanning H^n(Omega^n) is rescaled to
    have trace 1.
    """

    labels: list[tuple[int, int, int]]
    full: Matrix
    blocks: dict[int, Matrix]
    dims: dict[int, int]
    normalization: TraceNormalization | None = field(default=None, repr=False)

    def block(self, t: int) -> Matrix:
        if t in self.blocks:
            return self.blocks[t]
        return Matrix.zeros(self.dims.get(t, 0), self.dims.get(-t, 0))

    def to_record(self) -> dict:
        return {
            "basis": [f"H^{i}(Omega^{j})#{k}" for i, j, k in self.labels],
            "full": [[format_rational(x) for x in row] for row in self.full.to_rows()],
            "blocks": {str(t): [[format_rational(x) for x in row] for row in m.to_rows()]
                       for t, m in sorted(self.blocks.items())},
            "trace": self.normalization.to_record() if self.normalization else None,
        }


def gram_matrix(fan: Fan, box: int | None = None, threads: int = 1, trace_scale=1) -> GradedGram:
    table = _cached_table(fan, box, threads)
    norm = trace_normalize(fan, table, trace_scale)
    n = fan.dim
    classes: list[tuple[tuple[int, int, int], CechCochain]] = []
    for i in range(n + 1):
        for j in range(n + 1):
            for k, c in enumerate(table.basis(i, j)):
                if (i, j) == (n, n):
                    c = c.scale(1 / norm.trace(c))
                classes.append(((i, j, k), c))
    size = len(classes)
    entries = [[Fraction(0)] * size for _ in range(size)]
    for x, (la, a) in enumerate(classes):
        for y, (lb, b) in enumerate(classes):
            if la[0] + lb[0] == n and la[1] + lb[1] == n:
                entries[x][y] = norm.trace(cup(a, b))
    full = Matrix.from_rows(entries, size)
    for x, (la, _) in enumerate(classes):
        for y, (lb, _) in enumerate(classes):
            sign = (-1) ** (la[0] * lb[0] + la[1] * lb[1])
            if entries[y][x] != sign * entries[x][y]:
                raise ValueError(f"pairing is not graded-symmetric at {la}, {lb}")
    if size and full.det() == 0:
        raise DegeneratePairing("degenerate pairing: Gram matrix is singular")
    labels = [lab for lab, _ in classes]
    dims: dict[int, int] = {}
    for i, j, _ in labels:
        dims[j - i] = dims.get(j - i, 0) + 1
    blocks = {}
    for t in sorted(dims):
        rows = [x for x, (i, j, _) in enumerate(labels) if j - i == t]
        cols = [y for y, (i, j, _) in enumerate(labels) if j - i == -t]
        blocks[t] = full.submatrix(rows, cols)
    return GradedGram(labels, full, blocks, dims, norm)


def class_of_graded_form(g: GradedGram) -> GWClass:
    """[degree-0 block] + sum over t > 0 of (-1)^t dim(V^t) H."""
    out = form_from_gram(g.block(0)) if g.dims.get(0) else ZERO
    for t, d in sorted(g.dims.items()):
        if t > 0 and d:
            if g.dims.get(-t, 0) != d:
                raise DegeneratePairing(f"degrees {t} and {-t} have different dimensions")
            out = out + (H * d if t % 2 == 0 else -(H * d))
    return out


def chi_a1(fan: Fan, box: int | None = None, threads: int = 1, trace_scale=1) -> GWClass:
    """The A^1-Euler characteristic from the Hodge complex with the trace pairing."""
    if fan.dim == 3 and not _is_projective_space(fan):
        raise ValueError("pairing in dimension 3 is only available for projective space")
    return class_of_graded_form(gram_matrix(fan, box, threads, trace_scale))
