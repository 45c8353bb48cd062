"""Torus-equivariant locally free sheaves on smooth complete toric varieties.

Everything is written in global torus characters: a monomial is ``c * chi^m``
with ``m`` in the character lattice M = Z^n.  On the chart of a maximal cone
with rays ``v_1..v_n`` the coordinates are ``u_i = chi^{m_i}`` where the
``m_i`` are the dual basis, and ``chi^m`` is regular on the chart iff
``<m, v_i> >= 0`` for all i.

A sheaf is given by a basis ``e_{s,a}`` on each chart ``s`` together with a
weight ``w(s,a)``: the sections of character ``u`` over an open ``U`` inside
the chart are the ``c * chi^{u - w(s,a)} e_{s,a}`` with that monomial regular
on ``U``.  The transition ``T[(s, t)]`` rewrites coefficients in the frame of
chart ``s`` as coefficients in the frame of chart ``t``.  Its entry
``(b, a)`` is a monomial of character ``w(s,a) - w(t,b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

from .linalg import Matrix, format_rational
from .toric import Fan, ToricDivisor, ToricMorphism

__all__ = [
    "LaurentPoly",
    "EquivariantSheaf",
    "structure_sheaf",
    "line_bundle",
    "cotangent",
    "differential_forms",
    "wedge_power",
    "pullback",
    "zero_sheaf",
    "forms_pullback_map",
    "regular_on",
    "face_rays",
    "permutation_sign",
]

Vec = tuple[int, ...]


def _add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def _dot(a: Vec, b: Vec) -> int:
    return sum(x * y for x, y in zip(a, b))


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (0 if it has repeats)."""
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def regular_on(m: Vec, rays: Iterable[Vec]) -> bool:
    return all(_dot(m, v) >= 0 for v in rays)


def face_rays(fan: Fan, charts: Sequence[int]) -> list[Vec]:
    """Rays of the common face of the given maximal cones."""
    common = set(fan.max_cones[charts[0]])
    for c in charts[1:]:
        common &= set(fan.max_cones[c])
    return [fan.rays[i] for i in sorted(common)]


@dataclass(frozen=True)
class LaurentPoly:
    """Finite sum of ``coefficient * chi^exponent`` with rational coefficients."""

    terms: tuple[tuple[Vec, Fraction], ...] = ()

    @classmethod
    def from_dict(cls, d: Mapping[Vec, object]) -> "LaurentPoly":
        return cls(tuple(sorted((tuple(m), Fraction(c)) for m, c in d.items() if c != 0)))

    @classmethod
    def monomial(cls, m: Sequence[int], c=1) -> "LaurentPoly":
        return cls.from_dict({tuple(m): c})

    @classmethod
    def constant(cls, c, n: int) -> "LaurentPoly":
        return cls.monomial((0,) * n, c)

    def as_dict(self) -> dict[Vec, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        d = self.as_dict()
        for m, c in other.terms:
            d[m] = d.get(m, 0) + c
        return LaurentPoly.from_dict(d)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return LaurentPoly.from_dict({m: c * Fraction(other) for m, c in self.terms})
        d: dict[Vec, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _add(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return LaurentPoly.from_dict(d)

    __rmul__ = __mul__

    def shift(self, m: Vec) -> "LaurentPoly":
        return LaurentPoly(tuple((_add(e, m), c) for e, c in self.terms))

    def exponents(self) -> list[Vec]:
        return [m for m, _ in self.terms]

    def coefficient(self, m: Vec) -> Fraction:
        return self.as_dict().get(tuple(m), Fraction(0))

    def single(self) -> tuple[Vec | None, Fraction]:
        """(exponent, coefficient) of a monomial; (None, 0) for zero."""
        if not self.terms:
            return None, Fraction(0)
        if len(self.terms) > 1:
            raise ValueError(f"{self} is not a monomial")
        return self.terms[0]

    def to_record(self) -> list:
        return [[list(m), format_rational(c)] for m, c in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            mono = "chi^(" + ",".join(map(str, m)) + ")" if any(m) else ""
            coef = format_rational(c)
            if mono and c == 1:
                parts.append(mono)
            elif mono and c == -1:
                parts.append("-" + mono)
            else:
                parts.append(coef + ("*" + mono if mono else ""))
        return " + ".join(parts).replace("+ -", "- ")


PolyMatrix = tuple[tuple[LaurentPoly, ...], ...]


def _matmul(a: PolyMatrix, b: PolyMatrix, inner: int) -> PolyMatrix:
    rows = len(a)
    cols = len(b[0]) if b else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = LaurentPoly()
            for k in range(inner):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _identity(r: int, n: int) -> PolyMatrix:
    one, zero = LaurentPoly.constant(1, n), LaurentPoly()
    return tuple(tuple(one if i == j else zero for j in range(r)) for i in range(r))


def _poly_det(m: list[list[LaurentPoly]], n: int) -> LaurentPoly:
    k = len(m)
    if k == 0:
        return LaurentPoly.constant(1, n)
    acc = LaurentPoly()
    for perm in itertools.permutations(range(k)):
        term = LaurentPoly.constant(permutation_sign(perm), n)
        for i, j in enumerate(perm):
            if not m[i][j]:
                term = LaurentPoly()
                break
            term = term * m[i][j]
        if term:
            acc = acc + term
    return acc


@dataclass(frozen=True)
class EquivariantSheaf:
    """Chart bases with weights and monomial transition matrices.

    ``weights[s][a]`` is the weight of basis element ``a`` on chart ``s``.
    ``transitions[(s, t)]`` has rows indexed by the basis on ``t`` and columns
    by the basis on ``s``.  ``form_degree`` is set for the sheaves of
    differential forms, whose basis labels are the ``du_S`` for sorted index
    sets ``S``.
    """

    fan: Fan
    labels: tuple[str, ...]
    weights: tuple[tuple[Vec, ...], ...]
    transitions: Mapping[tuple[int, int], PolyMatrix] = field(compare=False, hash=False)
    form_degree: int | None = None
    name: str = field(default="", compare=False)

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def n_charts(self) -> int:
        return len(self.fan.max_cones)

    def transition(self, src: int, dst: int) -> PolyMatrix:
        if src == dst:
            return _identity(self.rank, self.fan.dim)
        return self.transitions[(src, dst)]

    @cached_property
    def scalar_transitions(self) -> dict[tuple[int, int], list[list[Fraction]]]:
        """Coefficients of the (monomial) transition entries."""
        out = {}
        for s in range(self.n_charts):
            for t in range(self.n_charts):
                out[(s, t)] = [[e.single()[1] for e in row] for row in self.transition(s, t)]
        return out

    @cached_property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        if self.form_degree is None:
            raise ValueError("not a sheaf of differential forms")
        return tuple(itertools.combinations(range(self.fan.dim), self.form_degree))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, EquivariantSheaf):
            return NotImplemented
        if (self.fan, self.labels, self.weights, self.form_degree) != \
                (other.fan, other.labels, other.weights, other.form_degree):
            return False
        return all(self.transition(s, t) == other.transition(s, t)
                   for s in range(self.n_charts) for t in range(self.n_charts))

    def __hash__(self) -> int:
        return hash((self.fan, self.labels, self.weights, self.form_degree))

    # checks ------------------------------------------------------------------

    def check_homogeneous(self) -> list[str]:
        problems = []
        for (s, t), mat in sorted(self.transitions.items()):
            for b, row in enumerate(mat):
                for a, entry in enumerate(row):
                    want = _sub(self.weights[s][a], self.weights[t][b])
                    for m in entry.exponents():
                        if m != want:
                            problems.append(f"T[{s}->{t}][{b},{a}] has exponent {m}, expected {want}")
        return problems

    def check_regular(self) -> list[str]:
        problems = []
        for (s, t), mat in sorted(self.transitions.items()):
            rays = face_rays(self.fan, (s, t))
            for b, row in enumerate(mat):
                for a, entry in enumerate(row):
                    for m in entry.exponents():
                        if not regular_on(m, rays):
                            problems.append(f"T[{s}->{t}][{b},{a}] not regular on the overlap")
        return problems

    def check_cocycle(self) -> list[str]:
        problems = []
        r = self.rank
        for s, t, u in itertools.product(range(self.n_charts), repeat=3):
            lhs = _matmul(self.transition(t, u), self.transition(s, t), r)
            if lhs != self.transition(s, u):
                problems.append(f"cocycle condition fails on charts ({s}, {t}, {u})")
        return problems

    def validate(self) -> list[str]:
        problems = []
        if len(self.weights) != self.n_charts or any(len(w) != self.rank for w in self.weights):
            return ["weights do not match charts and rank"]
        if self.n_charts > 1 and len(self.transitions) != self.n_charts * (self.n_charts - 1):
            problems.append("missing transitions")
            return problems
        return problems + self.check_homogeneous() + self.check_regular() + self.check_cocycle()

    def max_weight_norm(self) -> int:
        return max((abs(x) for ws in self.weights for w in ws for x in w), default=0)


def _build(fan: Fan, labels, weights, entry, form_degree=None, name="") -> EquivariantSheaf:
    """Assemble monomial transitions from the scalar ``entry(s, t, b, a)``."""
    trans = {}
    r = len(labels)
    for s in range(len(fan.max_cones)):
        for t in range(len(fan.max_cones)):
            if s == t:
                continue
            rows = []
            for b in range(r):
                row = []
                for a in range(r):
                    c = entry(s, t, b, a)
                    row.append(LaurentPoly.monomial(_sub(weights[s][a], weights[t][b]), c) if c else LaurentPoly())
                rows.append(tuple(row))
            trans[(s, t)] = tuple(rows)
    return EquivariantSheaf(fan, tuple(labels), tuple(tuple(w) for w in weights), trans, form_degree, name)


def zero_sheaf(fan: Fan) -> EquivariantSheaf:
    return EquivariantSheaf(fan, (), tuple(() for _ in fan.max_cones),
                            {(s, t): () for s in range(len(fan.max_cones))
                             for t in range(len(fan.max_cones)) if s != t}, None, "0")


def line_bundle(fan: Fan, divisor: ToricDivisor | Sequence[int]) -> EquivariantSheaf:
    """O(D) for D = sum a_rho D_rho, with local generator chi^{m_s}, <m_s, v_rho> = -a_rho."""
    if not isinstance(divisor, ToricDivisor):
        divisor = ToricDivisor(tuple(divisor))
    divisor.check(fan)
    a = divisor.coefficients
    weights = []
    for s, cone in enumerate(fan.max_cones):
        m = [0] * fan.dim
        for i, ray in zip(cone, fan.dual_bases[s]):
            for k in range(fan.dim):
                m[k] += -a[i] * ray[k]
        weights.append((tuple(m),))
    name = "O" if not any(a) else f"O({','.join(map(str, a))})"
    return _build(fan, ("e",), weights, lambda s, t, b, c: 1, name=name)


def structure_sheaf(fan: Fan) -> EquivariantSheaf:
    sheaf = line_bundle(fan, [0] * fan.n_rays)
    return EquivariantSheaf(fan, sheaf.labels, sheaf.weights, sheaf.transitions, 0, "O")


def _frame_change(fan: Fan, s: int, t: int) -> Matrix:
    """(M_s M_t^{-1})[i, j]: dlog u^{(s)}_i = sum_j (.)[i, j] dlog u^{(t)}_j."""
    ms = Matrix.from_rows(fan.dual_bases[s])
    mt = Matrix.from_rows(fan.dual_bases[t])
    return ms @ mt.inverse()


@lru_cache(maxsize=256)
def differential_forms(fan: Fan, j: int) -> EquivariantSheaf:
    """Omega^j with basis du_S and transitions det((M_s M_t^{-1})[S, S'])."""
    n = fan.dim
    if not 0 <= j <= n:
        raise ValueError(f"form degree {j} out of range 0..{n}")
    if j == 0:
        return structure_sheaf(fan)
    subsets = list(itertools.combinations(range(n), j))
    weights = []
    for s in range(len(fan.max_cones)):
        mb = fan.dual_bases[s]
        weights.append(tuple(tuple(sum(mb[i][k] for i in S) for k in range(n)) for S in subsets))
    changes = {}

    def entry(s, t, b, a):
        if (s, t) not in changes:
            changes[(s, t)] = _frame_change(fan, s, t)
        return changes[(s, t)].submatrix(subsets[a], subsets[b]).det()

    labels = tuple("^".join(f"du{i}" for i in S) for S in subsets)
    return _build(fan, labels, weights, entry, form_degree=j, name=f"Omega^{j}")


def cotangent(fan: Fan) -> EquivariantSheaf:
    return differential_forms(fan, 1)


def wedge_power(sheaf: EquivariantSheaf, j: int) -> EquivariantSheaf:
    """Exterior power: basis j-subsets, weights subset sums, transitions j x j minors."""
    r, n = sheaf.rank, sheaf.fan.dim
    if not 0 <= j <= r:
        raise ValueError(f"exterior power {j} out of range 0..{r}")
    if sheaf.form_degree == 1:
        return differential_forms(sheaf.fan, j)
    subsets = list(itertools.combinations(range(r), j))
    weights = tuple(
        tuple(tuple(sum(ws[i][k] for i in S) for k in range(n)) for S in subsets) for ws in sheaf.weights)
    trans = {}
    for (s, t), mat in sheaf.transitions.items():
        trans[(s, t)] = tuple(
            tuple(_poly_det([[mat[b][a] for a in S] for b in Sp], n) for S in subsets) for Sp in subsets)
    labels = tuple("^".join(sheaf.labels[i] for i in S) or "1" for S in subsets)
    return EquivariantSheaf(sheaf.fan, labels, weights, trans, None, f"wedge^{j}({sheaf.name})")


def pullback(morphism: ToricMorphism, sheaf: EquivariantSheaf) -> EquivariantSheaf:
    """Pull back along a refinement: each source chart inherits its target chart's frame."""
    if sheaf.fan != morphism.target:
        raise ValueError("sheaf does not live on the morphism's target")
    src = morphism.source
    cmap = morphism.cone_map
    weights = tuple(sheaf.weights[cmap[k]] for k in range(len(src.max_cones)))
    trans = {}
    for k in range(len(src.max_cones)):
        for l in range(len(src.max_cones)):
            if k != l:
                trans[(k, l)] = sheaf.transition(cmap[k], cmap[l])
    # forms keep their chart-local meaning only on the identity morphism
    degree = sheaf.form_degree if src == morphism.target and cmap == tuple(range(len(cmap))) else None
    return EquivariantSheaf(src, sheaf.labels, weights, trans, degree, f"f*{sheaf.name}")


def forms_pullback_map(morphism: ToricMorphism, j: int = 1) -> tuple[EquivariantSheaf, EquivariantSheaf, list[PolyMatrix]]:
    """The natural map f^* Omega^j_target -> Omega^j_source, chart by chart.

    On a source chart ``k`` inside the target chart ``t`` the target form
    ``du^{(t)}_S`` is rewritten in the frame ``du^{(k)}``, exactly as a chart
    transition would do it.
    """
    src = morphism.source
    source_forms = differential_forms(src, j)
    pulled = pullback(morphism, differential_forms(morphism.target, j))
    n = src.dim
    subsets = list(itertools.combinations(range(n), j))
    phi = []
    for k in range(len(src.max_cones)):
        t = morphism.cone_map[k]
        change = Matrix.from_rows(morphism.target.dual_bases[t]) @ Matrix.from_rows(src.dual_bases[k]).inverse()
        rows = []
        for b, Sp in enumerate(subsets):
            row = []
            for a, S in enumerate(subsets):
                c = change.submatrix(S, Sp).det()
                m = _sub(pulled.weights[k][a], source_forms.weights[k][b])
                row.append(LaurentPoly.monomial(m, c) if c else LaurentPoly())
            rows.append(tuple(row))
        phi.append(tuple(rows))
    return pulled, source_forms, phi
