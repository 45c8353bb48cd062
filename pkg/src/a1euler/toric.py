"""Fans of smooth complete toric varieties.

A fan lives in N = Z^n with 0 <= n <= 3.  Rays are primitive integer vectors
and every maximal cone is a list of n ray indices forming a lattice basis.
The dimension-0 fan (no rays, one empty cone) presents a point.

Surface fans are stored with their rays in counterclockwise order, starting
from the positive x-axis, so that neighbouring rays in the list span the
maximal cones and the self-intersection recurrence is well posed.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .linalg import Matrix, solve

__all__ = [
    "Fan",
    "FanError",
    "FanFormatError",
    "ToricDivisor",
    "ToricMorphism",
    "validate",
    "builtin",
    "BUILTIN_NAMES",
    "star_subdivision",
    "orbit_counts",
    "self_intersection_coefficients",
    "surface_intersection_matrix",
    "parse_fan",
    "format_fan",
    "load_fan",
]

Vec = tuple[int, ...]


class FanError(ValueError):
    """Raised for invalid fans; ``problems`` lists every failed check."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class FanFormatError(ValueError):
    def __init__(self, line: int, token: str, message: str):
        self.line, self.token = line, token
        super().__init__(f"line {line}, token {token!r}: {message}")


def _det(vectors: Sequence[Vec]) -> int:
    if not vectors:
        return 1
    return int(Matrix.from_rows(vectors).det())


def _ccw_key(v: Vec):
    # Exact angle order from the positive x-axis.  On each open half plane
    # cot(angle) = x/y decreases with the angle; the axis directions sort first.
    x, y = v
    upper = y > 0 or (y == 0 and x > 0)
    return (0 if upper else 1, Fraction(-x, y) if y else -math.inf)


@dataclass(frozen=True)
class Fan:
    dim: int
    rays: tuple[Vec, ...]
    max_cones: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(int(c) for c in r) for r in self.rays))
        object.__setattr__(self, "max_cones", tuple(tuple(sorted(int(i) for i in c)) for c in self.max_cones))

    @classmethod
    def make(cls, dim: int, rays, cones, name: str = "") -> "Fan":
        """Build, normalize (CCW for surfaces) and validate a fan."""
        fan = cls(dim, rays, cones, name)
        if dim == 2:
            fan = fan.counterclockwise()
        problems = validate(fan)
        if problems:
            raise FanError(problems)
        return fan

    def counterclockwise(self) -> "Fan":
        if self.dim != 2:
            return self
        order = sorted(range(len(self.rays)), key=lambda i: _ccw_key(self.rays[i]))
        new_index = {old: new for new, old in enumerate(order)}
        cones = sorted(tuple(sorted(new_index[i] for i in c)) for c in self.max_cones)
        return Fan(2, tuple(self.rays[i] for i in order), tuple(cones), self.name)

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def cone_rays(self, k: int) -> list[Vec]:
        return [self.rays[i] for i in self.max_cones[k]]

    @cached_property
    def dual_bases(self) -> tuple[tuple[Vec, ...], ...]:
        """Per maximal cone, the characters m_1..m_n with <m_i, v_j> = delta_ij.

        ``m_i`` pairs to 1 with the i-th ray of the (sorted) cone, so the chart
        coordinate ``u_i = chi^{m_i}`` vanishes on the divisor of that ray.
        """
        out = []
        for k in range(len(self.max_cones)):
            if self.dim == 0:
                out.append(())
                continue
            v = Matrix.from_rows(self.cone_rays(k))
            inv = v.inverse()  # columns of V^{-1} pair with rows of V
            out.append(tuple(tuple(int(inv[r, c]) for r in range(self.dim)) for c in range(self.dim)))
        return tuple(out)

    @cached_property
    def all_cones(self) -> tuple[tuple[int, ...], ...]:
        seen = set()
        for c in self.max_cones:
            for d in range(len(c) + 1):
                seen.update(itertools.combinations(c, d))
        return tuple(sorted(seen, key=lambda c: (len(c), c)))

    def cone_set(self) -> frozenset:
        return frozenset(frozenset(self.rays[i] for i in c) for c in self.max_cones)

    def same_as(self, other: "Fan") -> bool:
        """Equality as sets of cones of ray vectors, ignoring ray order."""
        return self.dim == other.dim and set(self.rays) == set(other.rays) and self.cone_set() == other.cone_set()

    def __str__(self) -> str:
        return self.name or format_fan(self).replace("\n", " | ")


def _generic_point(fan: Fan) -> tuple[Fraction, ...] | None:
    """A point avoiding the boundary of every maximal cone."""
    n = fan.dim
    for t in range(2, 200):
        x = tuple(Fraction(t ** k + k, 3 * k + 1) * (-1) ** (k * t) for k in range(n))
        ok = True
        for k in range(len(fan.max_cones)):
            v = Matrix.from_rows(fan.cone_rays(k))
            coeffs = solve(v.T, x)
            if coeffs is None or any(c == 0 for c in coeffs):
                ok = False
                break
        if ok:
            return x
    return None


def validate(fan: Fan) -> list[str]:
    """Check every fan invariant; return the list of failures (empty if ok)."""
    n = fan.dim
    problems: list[str] = []
    if not 0 <= n <= 3:
        return [f"dimension {n} unsupported (0..3)"]
    if n == 0:
        if fan.rays or fan.max_cones != ((),):
            problems.append("dimension 0 fan must have no rays and one empty cone")
        return problems
    for i, r in enumerate(fan.rays):
        if len(r) != n:
            problems.append(f"ray {i} has {len(r)} coordinates, expected {n}")
        elif not any(r):
            problems.append(f"ray {i} is zero")
        elif math.gcd(*r) != 1:
            problems.append(f"not primitive: ray {i} {r}")
    if len(set(fan.rays)) != len(fan.rays):
        problems.append("repeated ray")
    if problems:
        return problems
    if not fan.max_cones:
        return ["not complete: no cones"]
    for c in fan.max_cones:
        if len(c) != n or len(set(c)) != n:
            problems.append(f"cone {c} must list {n} distinct rays")
        elif any(not 0 <= i < fan.n_rays for i in c):
            problems.append(f"cone {c} references a missing ray")
    if problems:
        return problems
    if len(set(fan.max_cones)) != len(fan.max_cones):
        problems.append("repeated cone")
    for c in fan.max_cones:
        d = _det([fan.rays[i] for i in c])
        if abs(d) != 1:
            problems.append(f"not smooth: cone {c} (det {d})")
    if problems:
        return problems
    used = set(itertools.chain.from_iterable(fan.max_cones))
    for i in range(fan.n_rays):
        if i not in used:
            problems.append(f"ray {i} lies in no cone")

    facets: dict[tuple[int, ...], list[int]] = {}
    for k, c in enumerate(fan.max_cones):
        for f in itertools.combinations(c, n - 1):
            facets.setdefault(f, []).append(k)
    for f, owners in sorted(facets.items()):
        if len(owners) == 1:
            problems.append(f"not complete: facet {f} bounds only cone {fan.max_cones[owners[0]]}")
        elif len(owners) > 2:
            problems.append(f"overlapping: facet {f} shared by {len(owners)} cones")
        else:
            # the two cones must lie on opposite sides of the common facet
            a, b = (fan.max_cones[k] for k in owners)
            (pa,) = set(a) - set(f)
            (pb,) = set(b) - set(f)
            fr = [fan.rays[i] for i in f]
            if _det(fr + [fan.rays[pa]]) * _det(fr + [fan.rays[pb]]) > 0:
                problems.append(f"overlapping: cones {a} and {b} on the same side of facet {f}")
    if problems:
        return problems
    # Pseudomanifold with consistent sides: the covering degree is constant,
    # so one generic point covered exactly once settles completeness.
    x = _generic_point(fan)
    if x is None:
        return ["could not find a generic point"]
    hits = []
    for k in range(len(fan.max_cones)):
        coeffs = solve(Matrix.from_rows(fan.cone_rays(k)).T, x)
        if all(c > 0 for c in coeffs):
            hits.append(fan.max_cones[k])
    if len(hits) == 0:
        problems.append("not complete: generic point uncovered")
    elif len(hits) > 1:
        problems.append(f"overlapping: cones {hits} share interior points")
    return problems


@dataclass(frozen=True)
class ToricDivisor:
    """A torus-invariant divisor sum a_rho D_rho."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(a) for a in self.coefficients))

    @classmethod
    def ray(cls, fan: Fan, i: int, a: int = 1) -> "ToricDivisor":
        c = [0] * fan.n_rays
        c[i] = a
        return cls(tuple(c))

    def check(self, fan: Fan) -> None:
        if len(self.coefficients) != fan.n_rays:
            raise ValueError(f"divisor has {len(self.coefficients)} coefficients, fan has {fan.n_rays} rays")


def _cone_contains(outer: Sequence[Vec], inner: Sequence[Vec]) -> bool:
    v = Matrix.from_rows(outer).T
    for r in inner:
        coeffs = solve(v, r)
        if coeffs is None or any(c < 0 for c in coeffs):
            return False
    return True


@dataclass(frozen=True)
class ToricMorphism:
    """Identity-on-lattice morphism from a refinement ``source`` to ``target``."""

    source: Fan
    target: Fan
    cone_map: tuple[int, ...]

    def __post_init__(self):
        if self.source.dim != self.target.dim:
            raise ValueError("source and target dimensions differ")
        if len(self.cone_map) != len(self.source.max_cones):
            raise ValueError("cone_map must cover every source cone")
        for k, t in enumerate(self.cone_map):
            if not _cone_contains(self.target.cone_rays(t), self.source.cone_rays(k)):
                raise ValueError(f"source cone {self.source.max_cones[k]} not contained in target cone "
                                 f"{self.target.max_cones[t]}")

    @classmethod
    def refinement(cls, source: Fan, target: Fan) -> "ToricMorphism":
        cone_map = []
        for k in range(len(source.max_cones)):
            for t in range(len(target.max_cones)):
                if _cone_contains(target.cone_rays(t), source.cone_rays(k)):
                    cone_map.append(t)
                    break
            else:
                raise ValueError(f"source cone {source.max_cones[k]} lies in no target cone")
        return cls(source, target, tuple(cone_map))

    @classmethod
    def identity(cls, fan: Fan) -> "ToricMorphism":
        return cls(fan, fan, tuple(range(len(fan.max_cones))))


def star_subdivision(fan: Fan, cone: Sequence[int]) -> tuple[Fan, ToricMorphism]:
    """Blow up the torus-fixed point of a maximal cone."""
    if fan.dim < 2:
        raise ValueError("dimension ≥ 2 required")
    key = tuple(sorted(cone))
    if key not in fan.max_cones:
        raise ValueError(f"cone {tuple(cone)} is not a maximal cone")
    new_ray = tuple(sum(fan.rays[i][a] for i in key) for a in range(fan.dim))
    rays = list(fan.rays) + [new_ray]
    new = len(fan.rays)
    cones = [c for c in fan.max_cones if c != key]
    for i in key:
        cones.append(tuple(sorted([j for j in key if j != i] + [new])))
    name = f"{fan.name or 'fan'}/star{list(key)}"
    out = Fan.make(fan.dim, rays, cones, name)
    return out, ToricMorphism.refinement(out, fan)


def orbit_counts(fan: Fan) -> tuple[int, ...]:
    """Number of cones of each dimension 0..n."""
    counts = [0] * (fan.dim + 1)
    for c in fan.all_cones:
        counts[len(c)] += 1
    return tuple(counts)


def self_intersection_coefficients(fan: Fan) -> list[int]:
    """The a_i with v_{i-1} + v_{i+1} = a_i v_i for a CCW surface fan."""
    if fan.dim != 2:
        raise ValueError("surface fan (dim 2) required")
    r = fan.n_rays
    out = []
    for i in range(r):
        w = tuple(fan.rays[i - 1][k] + fan.rays[(i + 1) % r][k] for k in range(2))
        v = fan.rays[i]
        k = 0 if v[0] != 0 else 1
        a, rem = divmod(w[k], v[k])
        if rem or tuple(a * c for c in v) != w:
            raise ValueError(f"recurrence fails at ray {i}")
        out.append(a)
    return out


def surface_intersection_matrix(fan: Fan) -> list[list[int]]:
    """Intersection numbers D_i . D_j of the toric boundary divisors."""
    a = self_intersection_coefficients(fan)
    r = fan.n_rays
    cones = set(fan.max_cones)
    m = [[0] * r for _ in range(r)]
    for i in range(r):
        m[i][i] = -a[i]
        for j in range(r):
            if i != j and tuple(sorted((i, j))) in cones:
                m[i][j] = 1
    return m


# builtins --------------------------------------------------------------------

def _projective(n: int) -> Fan:
    rays = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    rays.append(tuple([-1] * n))
    cones = list(itertools.combinations(range(n + 1), n))
    return Fan.make(n, rays, cones, f"P{n}")


def hirzebruch(a: int) -> Fan:
    """F_a with rays (1,0), (1,1), (a-1,a), (-1,-1).

    The ray (1,1) carries the curve of self-intersection -a, so F_1 is the
    star subdivision of P2 at the cone spanned by (1,0) and (0,1).
    """
    if a < 0:
        raise ValueError("Hirzebruch parameter must be non-negative")
    rays = [(1, 0), (1, 1), (a - 1, a), (-1, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (3, 0)]
    return Fan.make(2, rays, cones, f"hirzebruch:{a}")


BUILTIN_NAMES = ("pt", "P1", "P2", "P3", "P1xP1", "hirzebruch:<a>")
_HIRZ = re.compile(r"^(?:hirzebruch:(\d+)|hirzebruch\((\d+)\)|f(\d+))$")


def builtin(name: str) -> Fan:
    key = name.strip()
    low = key.lower()
    if low in ("pt", "point", "p0"):
        return Fan(0, (), ((),), "pt")
    if low in ("p1", "p2", "p3"):
        return _projective(int(low[1]))
    if low in ("p1xp1", "p1*p1"):
        return Fan.make(2, [(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)], "P1xP1")
    m = _HIRZ.match(low)
    if m:
        return hirzebruch(int(next(g for g in m.groups() if g is not None)))
    raise ValueError(f"unknown fan {name!r}; builtins are {', '.join(BUILTIN_NAMES)}")


# text format -----------------------------------------------------------------

def _ints(text: str, line: int, expect: int | None) -> list[list[int]]:
    groups = []
    for chunk in text.split(";"):
        toks = chunk.split()
        if not toks:
            if chunk.strip() == "" and text.strip() == "":
                continue
            raise FanFormatError(line, ";", "empty entry")
        row = []
        for t in toks:
            try:
                row.append(int(t))
            except ValueError:
                raise FanFormatError(line, t, "expected an integer") from None
        if expect is not None and len(row) != expect:
            raise FanFormatError(line, chunk.strip(), f"expected {expect} integers, got {len(row)}")
        groups.append(row)
    return groups


def parse_fan(text: str, name: str = "") -> Fan:
    """Parse the three-line ``dim`` / ``rays:`` / ``cones:`` format."""
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if len(lines) != 3:
        last = lines[-1][0] if lines else 1
        raise FanFormatError(last, lines[-1][1] if lines else "", f"expected 3 lines, found {len(lines)}")
    (l1, s1), (l2, s2), (l3, s3) = lines
    toks = s1.split()
    if toks[0] != "dim":
        raise FanFormatError(l1, toks[0], "expected 'dim'")
    if len(toks) != 2:
        raise FanFormatError(l1, s1, "expected 'dim <n>'")
    try:
        n = int(toks[1])
    except ValueError:
        raise FanFormatError(l1, toks[1], "expected an integer") from None
    if not 0 <= n <= 3:
        raise FanFormatError(l1, toks[1], "dimension must be 0..3")
    head, _, body = s2.partition(":")
    if head.strip() != "rays" or not _:
        raise FanFormatError(l2, head.strip() or s2, "expected 'rays:'")
    rays = _ints(body, l2, n) if n else []
    head, _, body = s3.partition(":")
    if head.strip() != "cones" or not _:
        raise FanFormatError(l3, head.strip() or s3, "expected 'cones:'")
    cones = _ints(body, l3, n) if n else [[]]
    for c in cones:
        for i in c:
            if not 0 <= i < len(rays):
                raise FanFormatError(l3, str(i), f"ray index out of range 0..{len(rays) - 1}")
    if n == 0:
        return Fan(0, (), ((),), name or "pt")
    return Fan.make(n, rays, cones, name)


def format_fan(fan: Fan) -> str:
    rays = "; ".join(" ".join(str(c) for c in r) for r in fan.rays)
    cones = "; ".join(" ".join(str(i) for i in c) for c in fan.max_cones)
    return f"dim {fan.dim}\nrays: {rays}\ncones: {cones}\n".replace(": \n", ":\n")


def load_fan(source: str) -> Fan:
    """A builtin name, or the path of a fan file."""
    try:
        return builtin(source)
    except ValueError:
        pass
    path = Path(source)
    if not path.is_file():
        raise ValueError(f"unknown fan {source!r}: not a builtin and no such file")
    return parse_fan(path.read_text(), name=path.stem)
