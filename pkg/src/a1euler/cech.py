"""Character-graded Čech cohomology of equivariant sheaves.

Cochains live on strictly increasing tuples of charts, with values in the
frame of the first chart.  The differential is

    (dc)(s_0..s_{p+1}) = T_{s_0 <- s_1} c(s_1..s_{p+1}) + sum_{k>=1} (-1)^k c(..^s_k..)

and a value on an arbitrary ordered tuple is obtained by sorting, moving to
the frame of the new first chart and multiplying by the permutation sign.

For a character ``u`` a basis element ``(tuple, a)`` contributes exactly when
``chi^{u - w(s_0, a)}`` is regular on the overlap, i.e. pairs non-negatively
with every ray of the common face.  Because transition entries are monomials
of matching character, the differential restricted to character ``u`` is a
fixed scalar matrix with rows and columns masked by regularity.  Characters
with the same regularity pattern share all linear algebra, so the box is
scanned with numpy and the exact ranks are computed once per pattern.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .linalg import Matrix, rank_kernel_image, solve
from .sheaf import (EquivariantSheaf, LaurentPoly, PolyMatrix, _matmul, face_rays,
                    permutation_sign, regular_on)

__all__ = [
    "CechComplex",
    "CechCochain",
    "CohomologyResult",
    "BoxTooSmall",
    "NotACocycle",
    "default_character_box",
    "cech_cohomology",
    "cocycle_class",
    "coboundary",
    "cone_cohomology",
    "chart_tuples",
]

Vec = tuple[int, ...]


class BoxTooSmall(RuntimeError):
    pass


class NotACocycle(ValueError):
    pass


def chart_tuples(n_charts: int, p: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n_charts), p + 1))


def default_character_box(sheaf: EquivariantSheaf) -> int:
    """Radius of the cube [-R, R]^n scanned for contributing characters."""
    return sheaf.max_weight_norm() + sheaf.fan.dim + 1


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


# complexes -------------------------------------------------------------------

@dataclass
class _Degree:
    items: list                    # opaque labels
    weights: np.ndarray            # (items, n) integer
    faces: list[list[Vec]]         # rays of the overlap for each item


class _Complex:
    """A finite complex of character-graded pieces with scalar differentials.

    ``degrees[k]`` describes the basis of the k-th term; ``diffs[k]`` maps
    term k to term k+1 as a dense list of Fraction rows.
    """

    def __init__(self, n: int, degrees: list[_Degree], diffs: list[list[list[Fraction]]], offset: int = 0):
        self.n = n
        self.degrees = degrees
        self.diffs = diffs
        self.offset = offset  # degree label of degrees[0]
        self._memo: dict[bytes, "_PatternData"] = {}
        self._prepare_constraints()

    def _prepare_constraints(self):
        # unique (ray, threshold) inequalities <u, ray> >= threshold
        index: dict[tuple[Vec, int], int] = {}
        self._item_constraints: list[list[list[int]]] = []
        for deg in self.degrees:
            per_item = []
            for w, face in zip(deg.weights, deg.faces):
                cons = []
                for v in face:
                    key = (v, int(np.dot(w, v)))
                    cons.append(index.setdefault(key, len(index)))
                per_item.append(cons)
            self._item_constraints.append(per_item)
        keys = sorted(index, key=index.get)
        self._rays = np.array([k[0] for k in keys], dtype=np.int64).reshape(len(keys), self.n)
        self._thresholds = np.array([k[1] for k in keys], dtype=np.int64)

    def masks(self, chars: np.ndarray) -> list[np.ndarray]:
        """Per degree, a (characters, items) boolean regularity mask."""
        sat = (chars @ self._rays.T) >= self._thresholds if len(self._thresholds) else np.zeros((len(chars), 0), bool)
        out = []
        for per_item in self._item_constraints:
            m = np.ones((len(chars), len(per_item)), dtype=bool)
            for i, cons in enumerate(per_item):
                if cons:
                    m[:, i] = sat[:, cons].all(axis=1)
            out.append(m)
        return out

    def pattern_of(self, u: Sequence[int]) -> tuple[np.ndarray, ...]:
        chars = np.array([tuple(u)], dtype=np.int64).reshape(1, self.n)
        return tuple(m[0] for m in self.masks(chars))

    @staticmethod
    def _key(pattern: Sequence[np.ndarray]) -> bytes:
        return b"|".join(np.packbits(p.astype(np.uint8)).tobytes() + bytes([len(p) % 256]) for p in pattern)

    def analyze(self, pattern: Sequence[np.ndarray]) -> "_PatternData":
        key = self._key(pattern)
        data = self._memo.get(key)
        if data is None:
            data = _PatternData(self, [np.flatnonzero(p) for p in pattern])
            self._memo[key] = data
        return data


class _PatternData:
    """Exact linear algebra of one regularity pattern."""

    def __init__(self, cx: _Complex, regular: list[np.ndarray]):
        self.cx = cx
        self.regular = [list(map(int, r)) for r in regular]
        k = len(regular)
        self.blocks = []
        self.ranks = []
        for d in range(k - 1):
            rows, cols = self.regular[d + 1], self.regular[d]
            full = cx.diffs[d]
            m = Matrix.from_rows([[full[r][c] for c in cols] for r in rows], len(cols))
            self.blocks.append(m)
            self.ranks.append(m.rank())
        self.dims = []
        for d in range(k):
            r_out = self.ranks[d] if d < k - 1 else 0
            r_in = self.ranks[d - 1] if d > 0 else 0
            self.dims.append(len(self.regular[d]) - r_out - r_in)
        self._bases: dict[int, list[list[Fraction]]] = {}

    def _image(self, d: int) -> Matrix:
        if d == 0:
            return Matrix(len(self.regular[0]), 0)
        return rank_kernel_image(self.blocks[d - 1])[2]

    def basis(self, d: int) -> list[list[Fraction]]:
        """Cocycles (on the regular items of degree d) spanning a complement of the coboundaries."""
        if d in self._bases:
            return self._bases[d]
        size = len(self.regular[d])
        if d < len(self.blocks):
            kernel = rank_kernel_image(self.blocks[d])[1]
        else:
            kernel = Matrix.identity(size)
        chosen: list[list[Fraction]] = []
        span = self._image(d).columns()
        rank = len(span)
        for v in kernel.columns():
            if len(chosen) == self.dims[d]:
                break
            trial = span + [v]
            if Matrix.from_columns(trial, size).rank() > rank:
                span, rank = trial, rank + 1
                chosen.append(v)
        self._bases[d] = chosen
        return chosen

    def coordinates(self, d: int, vec: list[Fraction]) -> list[Fraction] | None:
        """Coordinates of a cocycle vector in ``basis(d)``, or None if not a cocycle here."""
        basis = self.basis(d)
        image = self._image(d).columns()
        cols = basis + image
        size = len(self.regular[d])
        if not cols:
            return [] if not any(vec) else None
        x = solve(Matrix.from_columns(cols, size), vec)
        if x is None:
            return None
        return x[:len(basis)]


class CechComplex(_Complex):
    """The Čech complex of a sheaf on the chart cover of its fan."""

    def __init__(self, sheaf: EquivariantSheaf):
        self.sheaf = sheaf
        fan = sheaf.fan
        N, r, n = len(fan.max_cones), sheaf.rank, fan.dim
        self.tuples = [chart_tuples(N, p) for p in range(N)]
        degrees = []
        self.index: list[dict[tuple, int]] = []
        for p in range(N):
            items, weights, faces = [], [], []
            for tup in self.tuples[p]:
                face = face_rays(fan, tup)
                for a in range(r):
                    items.append((tup, a))
                    weights.append(sheaf.weights[tup[0]][a])
                    faces.append(face)
            degrees.append(_Degree(items, np.array(weights, dtype=np.int64).reshape(len(items), n), faces))
            self.index.append({it: i for i, it in enumerate(items)})
        diffs = []
        for p in range(N - 1):
            src, dst = degrees[p], degrees[p + 1]
            mat = [[Fraction(0)] * len(src.items) for _ in dst.items]
            for tup in self.tuples[p + 1]:
                for k in range(len(tup)):
                    face = tup[:k] + tup[k + 1:]
                    if k == 0:
                        block = sheaf.scalar_transitions[(tup[1], tup[0])]
                        for b in range(r):
                            for a in range(r):
                                if block[b][a]:
                                    mat[self.index[p + 1][(tup, b)]][self.index[p][(face, a)]] += block[b][a]
                    else:
                        sign = -1 if k % 2 else 1
                        for a in range(r):
                            mat[self.index[p + 1][(tup, a)]][self.index[p][(face, a)]] += sign
            diffs.append(mat)
        super().__init__(n, degrees, diffs)

    def vector(self, cochain: "CechCochain", u: Vec) -> list[Fraction]:
        """Full-length scalar vector of the character-u part of a cochain."""
        p = cochain.degree
        out = [Fraction(0)] * len(self.degrees[p].items)
        for tup, vals in cochain.values.items():
            for a, poly in enumerate(vals):
                m = _sub(u, self.sheaf.weights[tup[0]][a])
                c = poly.coefficient(m)
                if c:
                    out[self.index[p][(tup, a)]] = c
        return out

    def cochain(self, p: int, u: Vec, vec: Sequence[Fraction]) -> "CechCochain":
        values: dict[tuple, list[LaurentPoly]] = {}
        for (tup, a), c in zip(self.degrees[p].items, vec):
            if c:
                vals = values.setdefault(tup, [LaurentPoly()] * self.sheaf.rank)
                vals[a] = LaurentPoly.monomial(_sub(u, self.sheaf.weights[tup[0]][a]), c)
        return CechCochain(self.sheaf, p, {t: tuple(v) for t, v in values.items()})


# cochains --------------------------------------------------------------------

def _apply(mat: PolyMatrix, vec: Sequence[LaurentPoly]) -> tuple[LaurentPoly, ...]:
    out = []
    for row in mat:
        acc = LaurentPoly()
        for e, x in zip(row, vec):
            if e and x:
                acc = acc + e * x
        out.append(acc)
    return tuple(out)


@dataclass
class CechCochain:
    """A p-cochain: increasing chart tuple -> coefficients in the first chart's frame."""

    sheaf: EquivariantSheaf
    degree: int
    values: Mapping[tuple[int, ...], tuple[LaurentPoly, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for tup, vals in self.values.items():
            tup = tuple(tup)
            if len(tup) != self.degree + 1 or list(tup) != sorted(set(tup)):
                raise ValueError(f"cochain key {tup} is not an increasing {self.degree + 1}-tuple")
            if len(vals) != self.sheaf.rank:
                raise ValueError(f"value on {tup} has {len(vals)} entries, sheaf rank is {self.sheaf.rank}")
            if any(vals):
                clean[tup] = tuple(vals)
        self.values = clean

    @classmethod
    def zero(cls, sheaf: EquivariantSheaf, p: int) -> "CechCochain":
        return cls(sheaf, p, {})

    @classmethod
    def from_alternating(cls, sheaf: EquivariantSheaf, p: int,
                         values: Mapping[Sequence[int], Sequence[LaurentPoly]]) -> "CechCochain":
        """Accept values on arbitrarily ordered tuples, each in the frame of its own first chart."""
        out: dict[tuple, tuple[LaurentPoly, ...]] = {}
        for tup, vals in values.items():
            tup = tuple(tup)
            sign = permutation_sign(tup)
            if sign == 0:
                continue
            key = tuple(sorted(tup))
            moved = _apply(sheaf.transition(tup[0], key[0]), vals)
            moved = tuple(x * sign for x in moved)
            if key in out and out[key] != moved:
                raise ValueError(f"inconsistent values given for {key}")
            out[key] = moved
        return cls(sheaf, p, out)

    def value(self, tup: Sequence[int]) -> tuple[LaurentPoly, ...]:
        """Value on any ordered tuple, in the frame of its first chart."""
        tup = tuple(tup)
        sign = permutation_sign(tup)
        if sign == 0:
            return tuple(LaurentPoly() for _ in range(self.sheaf.rank))
        key = tuple(sorted(tup))
        vals = self.values.get(key)
        if vals is None:
            return tuple(LaurentPoly() for _ in range(self.sheaf.rank))
        moved = _apply(self.sheaf.transition(key[0], tup[0]), vals)
        return tuple(x * sign for x in moved)

    def __add__(self, other: "CechCochain") -> "CechCochain":
        self._compatible(other)
        out = dict(self.values)
        for k, v in other.values.items():
            out[k] = tuple(a + b for a, b in zip(out[k], v)) if k in out else v
        return CechCochain(self.sheaf, self.degree, out)

    def scale(self, c) -> "CechCochain":
        return CechCochain(self.sheaf, self.degree, {k: tuple(x * c for x in v) for k, v in self.values.items()})

    def __neg__(self) -> "CechCochain":
        return self.scale(-1)

    def __sub__(self, other: "CechCochain") -> "CechCochain":
        return self + (-other)

    def _compatible(self, other: "CechCochain"):
        if other.sheaf != self.sheaf or other.degree != self.degree:
            raise ValueError("cochains of different sheaves or degrees")

    def is_zero(self) -> bool:
        return not self.values

    def characters(self) -> list[Vec]:
        """Characters u present in the cochain (exponent + basis weight)."""
        out = set()
        for tup, vals in self.values.items():
            for a, poly in enumerate(vals):
                w = self.sheaf.weights[tup[0]][a]
                out.update(tuple(x + y for x, y in zip(m, w)) for m in poly.exponents())
        return sorted(out)

    def check_regular(self) -> list[str]:
        problems = []
        for tup, vals in self.values.items():
            rays = face_rays(self.sheaf.fan, tup)
            for a, poly in enumerate(vals):
                for m in poly.exponents():
                    if not regular_on(m, rays):
                        problems.append(f"entry {a} on {tup} is not regular on the overlap")
        return problems

    def to_record(self) -> list:
        return [{"charts": list(k), "value": [p.to_record() for p in v]} for k, v in sorted(self.values.items())]


def coboundary(c: CechCochain) -> CechCochain:
    sheaf = c.sheaf
    N = sheaf.n_charts
    p = c.degree
    out = {}
    for tup in chart_tuples(N, p + 1):
        head = c.values.get(tup[1:])
        acc = list(_apply(sheaf.transition(tup[1], tup[0]), head)) if head else [LaurentPoly()] * sheaf.rank
        for k in range(1, len(tup)):
            face = tup[:k] + tup[k + 1:]
            vals = c.values.get(face)
            if vals is None:
                continue
            sign = -1 if k % 2 else 1
            acc = [x + y * sign for x, y in zip(acc, vals)]
        out[tup] = tuple(acc)
    return CechCochain(sheaf, p + 1, out)


# cohomology ------------------------------------------------------------------

@dataclass
class CohomologyResult:
    """Dimensions and an explicit basis of H^i, character by character.

    ``classes[i]`` lists ``(u, cochain)`` pairs; together they form a basis of
    H^i ordered by character, then by position within the character.
    """

    sheaf: EquivariantSheaf
    dims: tuple[int, ...]
    radius: int
    stable: bool
    classes: list[list[tuple[Vec, CechCochain]]]
    complex: CechComplex = field(repr=False)

    def basis(self, i: int) -> list[CechCochain]:
        return [c for _, c in self.classes[i]]

    def characters(self, i: int) -> list[Vec]:
        return sorted({u for u, _ in self.classes[i]})


def _box(n: int, radius: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = [np.arange(-radius, radius + 1, dtype=np.int64)] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def _scan(cx: _Complex, radius: int, threads: int = 1):
    """Sum per-character dimensions over the box; return dims and contributing characters."""
    chars = _box(cx.n, radius)
    masks = cx.masks(chars)
    packed = np.concatenate([np.packbits(m, axis=1) for m in masks], axis=1) if masks else np.zeros((len(chars), 0))
    uniq, first, inverse = np.unique(packed, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    patterns = [tuple(m[i] for m in masks) for i in first]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            datas = list(pool.map(cx.analyze, patterns))
    else:
        datas = [cx.analyze(p) for p in patterns]

    counts = np.bincount(inverse, minlength=len(patterns))
    dims = [0] * len(cx.degrees)
    contributing: list[tuple[Vec, _PatternData]] = []
    for k, data in enumerate(datas):
        for d, x in enumerate(data.dims):
            dims[d] += int(counts[k]) * x
        if any(data.dims):
            for idx in np.flatnonzero(inverse == k):
                contributing.append((tuple(int(x) for x in chars[idx]), data))
    contributing.sort(key=lambda t: t[0])
    return dims, contributing


def cech_cohomology(sheaf: EquivariantSheaf, box: int | None = None, threads: int = 1,
                    check_stability: bool = True, with_basis: bool = True) -> CohomologyResult:
    """Dimensions of H^i(X, sheaf) for 0 <= i <= n and explicit bases.

    The box of characters is rescanned at twice the radius; a change in any
    dimension raises :class:`BoxTooSmall`.
    """
    radius = default_character_box(sheaf) if box is None else int(box)
    cx = CechComplex(sheaf)
    n = sheaf.fan.dim
    dims, contributing = _scan(cx, radius, threads)
    stable = True
    if check_stability:
        dims2, _ = _scan(cx, 2 * radius, threads)
        if dims2 != dims:
            raise BoxTooSmall(f"character box too small: radius {radius} gives {dims}, {2 * radius} gives {dims2}")
    if any(dims[n + 1:]):
        raise RuntimeError(f"Čech cohomology above degree {n}: {dims}")
    dims = (dims + [0] * (n + 1))[:n + 1]
    classes: list[list[tuple[Vec, CechCochain]]] = [[] for _ in range(n + 1)]
    if with_basis:
        for u, data in contributing:
            for d in range(n + 1):
                if d < len(data.dims) and data.dims[d]:
                    size = len(cx.degrees[d].items)
                    for v in data.basis(d):
                        full = [Fraction(0)] * size
                        for pos, x in zip(data.regular[d], v):
                            full[pos] = x
                        classes[d].append((u, cx.cochain(d, u, full)))
    return CohomologyResult(sheaf, tuple(dims), radius, stable, classes, cx)


def cocycle_class(c: CechCochain, result: CohomologyResult) -> list[Fraction]:
    """Coordinates of [c] in the basis of ``result`` (same sheaf and degree)."""
    if c.sheaf != result.sheaf:
        raise ValueError("cochain and cohomology result belong to different sheaves")
    p = c.degree
    bad = c.check_regular()
    if bad:
        raise ValueError(bad[0])
    dc = coboundary(c)
    if not dc.is_zero():
        tup, vals = min(dc.values.items())
        comp = next(i for i, v in enumerate(vals) if v)
        raise NotACocycle(f"not a cocycle: coboundary is {vals[comp]} on charts {tup}, component "
                          f"{c.sheaf.labels[comp]}")
    cx = result.complex
    basis_chars = [u for u, _ in result.classes[p]] if p < len(result.classes) else []
    coords: list[Fraction] = [Fraction(0)] * len(basis_chars)
    for u in c.characters():
        data = cx.analyze(cx.pattern_of(u))
        vec = cx.vector(c, u)
        local = [vec[i] for i in data.regular[p]]
        x = data.coordinates(p, local)
        if x is None:
            raise NotACocycle(f"character {u} component is not a cocycle")
        if any(x):
            slots = [i for i, w in enumerate(basis_chars) if w == u]
            if len(slots) != len(x):
                raise BoxTooSmall(f"class at character {u} lies outside the scanned box")
            for i, xi in zip(slots, x):
                coords[i] = xi
    return coords


# mapping cone ----------------------------------------------------------------

def _check_map(s: EquivariantSheaf, t: EquivariantSheaf, phi: Sequence[PolyMatrix]) -> None:
    if s.fan != t.fan:
        raise ValueError("sheaves live on different fans")
    N = s.n_charts
    if len(phi) != N:
        raise ValueError("one matrix per chart required")
    for k in range(N):
        for b, row in enumerate(phi[k]):
            for a, e in enumerate(row):
                want = _sub(s.weights[k][a], t.weights[k][b])
                if any(m != want for m in e.exponents()):
                    raise ValueError(f"map entry ({b},{a}) on chart {k} is not homogeneous")
    for k in range(N):
        for l in range(N):
            if k == l:
                continue
            lhs = _matmul(t.transition(k, l), phi[k], t.rank) if t.rank else ()
            rhs = _matmul(phi[l], s.transition(k, l), s.rank) if s.rank else tuple(() for _ in range(t.rank))
            if t.rank and s.rank and lhs != rhs:
                raise ValueError(f"map does not commute with transitions on charts ({k}, {l})")


def cone_cohomology(phi: Sequence[PolyMatrix], s: EquivariantSheaf, t: EquivariantSheaf,
                    box: int | None = None, threads: int = 1) -> dict[int, int]:
    """Hypercohomology of the two-term complex [s -> t] (t in degree 0).

    Cone^k = C^{k+1}(s) + C^k(t) with d(a, b) = (-da, phi(a) + db).  When phi
    is injective these are the cohomology dimensions of its cokernel.
    Returns dimensions for degrees -1..n.
    """
    _check_map(s, t, phi)
    cs, ct = CechComplex(s), CechComplex(t)
    n = s.fan.dim
    N = s.n_charts
    degrees, ranges = [], []
    for k in range(-1, N):
        parts_s = cs.degrees[k + 1] if k + 1 < N else _Degree([], np.zeros((0, n), np.int64), [])
        parts_t = ct.degrees[k] if k >= 0 else _Degree([], np.zeros((0, n), np.int64), [])
        items = [("s", it) for it in parts_s.items] + [("t", it) for it in parts_t.items]
        weights = np.concatenate([parts_s.weights.reshape(-1, n), parts_t.weights.reshape(-1, n)])
        degrees.append(_Degree(items, weights, parts_s.faces + parts_t.faces))
        ranges.append((len(parts_s.items), len(parts_t.items)))

    scal_phi = [[[e.single()[1] for e in row] for row in m] for m in phi]
    diffs = []
    for idx in range(len(degrees) - 1):
        k = idx - 1
        ns, nt = ranges[idx]
        ns2, nt2 = ranges[idx + 1]
        mat = [[Fraction(0)] * (ns + nt) for _ in range(ns2 + nt2)]
        # -d_s : C^{k+1}(s) -> C^{k+2}(s)
        if ns and ns2:
            ds = cs.diffs[k + 1]
            for r in range(ns2):
                for c in range(ns):
                    if ds[r][c]:
                        mat[r][c] = -ds[r][c]
        # phi : C^{k+1}(s) -> C^{k+1}(t)
        if ns and nt2:
            for c, (tup, a) in enumerate(cs.degrees[k + 1].items):
                for b in range(t.rank):
                    x = scal_phi[tup[0]][b][a]
                    if x:
                        mat[ns2 + ct.index[k + 1][(tup, b)]][c] += x
        # d_t : C^k(t) -> C^{k+1}(t)
        if nt and nt2:
            dt = ct.diffs[k]
            for r in range(nt2):
                for c in range(nt):
                    if dt[r][c]:
                        mat[ns2 + r][ns + c] = dt[r][c]
        diffs.append(mat)

    cx = _Complex(n, degrees, diffs, offset=-1)
    radius = box if box is not None else max(default_character_box(s), default_character_box(t))
    dims, _ = _scan(cx, radius, threads)
    dims2, _ = _scan(cx, 2 * radius, threads)
    if dims != dims2:
        raise BoxTooSmall(f"character box too small: radius {radius} gives {dims}, {2 * radius} gives {dims2}")
    out = {k: dims[k + 1] for k in range(-1, n + 1)}
    if any(dims[n + 2:]):
        raise RuntimeError(f"cone cohomology above degree {n}: {dims}")
    return out
