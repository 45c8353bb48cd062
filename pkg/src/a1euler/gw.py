"""The Grothendieck-Witt ring GW(Q).

A class is stored as a formal difference ``pos - neg`` of diagonal forms with
square-free integer entries.  Two classes are compared only through their
invariants: rank, signature, discriminant square class, and a Hasse
invariant at each prime.  By Hasse-Minkowski these determine the class.

The Hasse invariant of a genuine form ``<a_1,...,a_r>`` is the usual
``prod_{i<j} (a_i, a_j)_p``.  It is not stable under adding hyperbolic
planes, so the value cached on a class is normalized::

    h_p = eps_p(G) * (d(G), -1)_p ** (r // 2) * (-1, -1)_p ** T(r // 2)

where ``G = pos + <-b for b in neg>`` is a genuine form, ``r`` its rank,
``d`` its discriminant and ``T(t) = t(t+1)/2``.  Adding ``H`` to ``G``
leaves ``h`` unchanged, which makes ``h`` an invariant of the virtual class.
The reported ``hasse`` map undoes the same correction using the rank and
discriminant of the class itself, so on effective classes it coincides with
the raw invariant of any diagonal representative.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence, Union

from .linalg import Matrix, congruence_diagonalize, factorize, square_class

__all__ = [
    "GWClass",
    "HyperbolicPart",
    "INF",
    "hilbert_symbol",
    "hilbert_symbol_search",
    "hasse_epsilon",
    "form_from_gram",
    "gw_equal",
    "witt_decompose",
    "to_canonical_string",
    "is_isotropic",
    "diag",
    "H",
    "ZERO",
    "ONE",
]

INF = "inf"
Place = Union[int, str]


def _primes(n: int) -> set[int]:
    return set(factorize(n)) if n not in (0, 1, -1) else set()


def _split(a: int, p: int) -> tuple[int, int]:
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


def _legendre(u: int, p: int) -> int:
    r = pow(u % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else 1


def _as_integer(x) -> int:
    """An integer in the square class of ``x`` (a/b ~ ab); no factoring needed."""
    if isinstance(x, int):
        if x == 0:
            raise ValueError("Hilbert symbol of zero")
        return x
    q = Fraction(x)
    return q.numerator * q.denominator


def hilbert_symbol(a, b, place: Place) -> int:
    """The Hilbert symbol ``(a, b)`` at a prime ``place`` or at ``INF``."""
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol is undefined for zero arguments")
    a, b = _as_integer(a), _as_integer(b)
    if place == INF or place == math.inf:
        return -1 if a < 0 and b < 0 else 1
    p = int(place)
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps = lambda x: ((x - 1) // 2) % 2
        omega = lambda x: ((x * x - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * _legendre(u, p) ** beta * _legendre(v, p) ** alpha


def hilbert_symbol_search(a, b, p: int) -> int:
    """Reference value of ``(a, b)_p`` by exhaustive search.

    After reducing to square-free representatives the valuations of ``a``
    and ``b`` are 0 or 1, so a primitive solution of ``z^2 = a x^2 + b y^2``
    modulo ``p**3`` (``2**5`` for ``p = 2``) lifts by Hensel's lemma.
    """
    a, b = square_class(a), square_class(b)
    mod = 2 ** 5 if p == 2 else p ** 3
    squares = [x * x % mod for x in range(mod)]
    all_sq = set(squares)
    unit_sq = {squares[z] for z in range(mod) if z % p}
    for x, y in itertools.product(range(mod), repeat=2):
        target = all_sq if (x % p or y % p) else unit_sq
        if (a * squares[x] + b * squares[y]) % mod in target:
            return 1
    return -1


def hasse_epsilon(entries: Sequence[int], p: Place) -> int:
    """Raw Hasse invariant ``prod_{i<j} (a_i, a_j)_p`` of a diagonal form.

    By bilinearity this is ``prod_j (a_j, a_1 ... a_{j-1})_p``.
    """
    out, prefix = 1, 1
    for x in entries:
        x = _as_integer(x)
        if prefix != 1:
            out *= hilbert_symbol(x, prefix, p)
        prefix = _sq_mul(prefix, square_class(x))
    return out


def _is_local_square(x: int, p: Place) -> bool:
    x = square_class(x)
    if p == INF:
        return x > 0
    v, u = _split(x, p)
    if v % 2:
        return False
    if p == 2:
        return u % 8 == 1
    return _legendre(u, p) == 1


def _tri(t: int) -> int:
    return t * (t + 1) // 2


def _normalizer(r: int, d: int, p: Place) -> int:
    t = r // 2
    out = hilbert_symbol(d, -1, p) if t % 2 else 1
    return -out if _tri(t) % 2 and hilbert_symbol(-1, -1, p) == -1 else out


def _sq_mul(a: int, b: int) -> int:
    """Product of two square-free integers, reduced to its square class."""
    g = math.gcd(a, b)
    return (a // g) * (b // g)


def _prod(xs: Iterable[int]) -> int:
    """Square class of a product of square-free integers (no factoring needed)."""
    return reduce(_sq_mul, xs, 1)


def _canon(entries: Iterable) -> tuple[int, ...]:
    return tuple(sorted((square_class(x) for x in entries), key=lambda d: (abs(d), d < 0)))


@dataclass(frozen=True)
class GWClass:
    """A virtual form ``pos - neg`` over Q."""

    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pos", _canon(self.pos))
        object.__setattr__(self, "neg", _canon(self.neg))

    # invariants ------------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.pos) - len(self.neg)

    @property
    def signature(self) -> int:
        sig = lambda xs: sum(1 if x > 0 else -1 for x in xs)
        return sig(self.pos) - sig(self.neg)

    @cached_property
    def discriminant(self) -> int:
        return _sq_mul(_prod(self.pos), _prod(self.neg))

    @property
    def genuine(self) -> tuple[int, ...]:
        """Entries of the genuine form ``pos + <-b>``, equal to ``self + len(neg) * H``."""
        return self.pos + tuple(-b for b in self.neg)

    @cached_property
    def support(self) -> frozenset[int]:
        primes = {2}
        for x in self.pos + self.neg:
            primes |= _primes(x)
        return frozenset(primes)

    @cached_property
    def stable_hasse(self) -> Mapping[int, int]:
        """Hasse invariant normalized to be unchanged by adding ``H``."""
        g = self.genuine
        d = _prod(g)
        return {p: hasse_epsilon(g, p) * _normalizer(len(g), d, p) for p in sorted(self.support)}

    @cached_property
    def hasse(self) -> Mapping[int, int]:
        r, d = self.rank, self.discriminant
        return {p: v * _normalizer(r, d, p) for p, v in self.stable_hasse.items()}

    def hasse_at(self, p: int) -> int:
        return self.hasse.get(p, 1)

    def invariants(self) -> tuple:
        return (self.rank, self.signature, self.discriminant,
                tuple(sorted((p, v) for p, v in self.hasse.items() if v != 1)))

    def reduced(self) -> "GWClass":
        """Cancel entries common to ``pos`` and ``neg`` (Witt cancellation)."""
        pos, neg = list(self.pos), list(self.neg)
        for x in list(neg):
            if x in pos:
                pos.remove(x)
                neg.remove(x)
        return GWClass(tuple(pos), tuple(neg))

    # ring structure ----------------------------------------------------------

    def __add__(self, other: "GWClass") -> "GWClass":
        return GWClass(self.pos + other.pos, self.neg + other.neg).reduced()

    def __neg__(self) -> "GWClass":
        return GWClass(self.neg, self.pos)

    def __sub__(self, other: "GWClass") -> "GWClass":
        return self + (-other)

    def __mul__(self, other) -> "GWClass":
        if isinstance(other, int):
            return sum_classes([self] * other) if other >= 0 else -(self * -other)
        prod = lambda xs, ys: tuple(x * y for x in xs for y in ys)
        return GWClass(prod(self.pos, other.pos) + prod(self.neg, other.neg),
                       prod(self.pos, other.neg) + prod(self.neg, other.pos)).reduced()

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "GWClass":
        if k < 0:
            raise ValueError("negative power")
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    def same_as(self, other: "GWClass") -> bool:
        return gw_equal(self, other)

    def __str__(self) -> str:
        return to_canonical_string(self, invariants=False)

    def to_record(self) -> dict:
        return {
            "rank": self.rank,
            "signature": self.signature,
            "discriminant": self.discriminant,
            "hasse": [[p, v] for p, v in sorted(self.hasse.items()) if v != 1],
            "pos": list(self.pos),
            "neg": list(self.neg),
            "canonical": to_canonical_string(self, invariants=False),
        }


def diag(*entries) -> GWClass:
    return GWClass(tuple(entries))


def sum_classes(classes: Iterable[GWClass]) -> GWClass:
    out = ZERO
    for c in classes:
        out = out + c
    return out


ZERO = GWClass()
ONE = GWClass((1,))
H = GWClass((1, -1))


def gw_equal(a: GWClass, b: GWClass) -> bool:
    """Equality in GW(Q): rank, signature, discriminant and all Hasse invariants agree."""
    if (a.rank, a.signature, a.discriminant) != (b.rank, b.signature, b.discriminant):
        return False
    return all(a.hasse_at(p) == b.hasse_at(p) for p in a.support | b.support)


def form_from_gram(s: Matrix) -> GWClass:
    """Class of the symmetric nondegenerate form with Gram matrix ``s``."""
    if not s.is_symmetric():
        raise ValueError("not symmetric")
    d, _ = congruence_diagonalize(s)
    if any(x == 0 for x in d):
        raise ValueError("degenerate form")
    return GWClass(tuple(d))


# -- existence, isotropy and Witt decomposition ------------------------------

def _neg_count(r: int, sig: int) -> int:
    return (r - sig) // 2


def _form_exists(r: int, sig: int, d: int, eps: Mapping[int, int]) -> bool:
    """Whether a form over Q with these invariants exists (raw Hasse ``eps``)."""
    if r < 0 or abs(sig) > r or (r - sig) % 2:
        return False
    k = _neg_count(r, sig)
    if (d < 0) != (k % 2 == 1):
        return False
    eps_inf = -1 if _tri(k - 1) % 2 else 1
    bad = [p for p, v in eps.items() if v == -1]
    if eps_inf * (-1) ** len(bad) != 1:
        return False
    if r == 0:
        return d == 1 and not bad
    if r == 1:
        return not bad and eps_inf == 1
    if r == 2:
        return all(not _is_local_square(-d, p) for p in bad)
    return True


def _squarefree_candidates(limit: int = 10 ** 4):
    for n in range(1, limit + 1):
        if all(e == 1 for e in factorize(n).values()):
            yield n
            yield -n


def _construct(r: int, sig: int, d: int, eps: Mapping[int, int]) -> list[int]:
    """Deterministic diagonal form with the given invariants (greedy search)."""
    if not _form_exists(r, sig, d, eps):
        raise ValueError(f"no form with invariants r={r} sig={sig} d={d} eps={dict(eps)}")
    out: list[int] = []
    while r > 1:
        for a in _squarefree_candidates():
            d2 = _sq_mul(d, a)
            sig2 = sig - (1 if a > 0 else -1)
            primes = {2} | set(eps) | _primes(a) | _primes(d)
            eps2 = {p: eps.get(p, 1) * hilbert_symbol(a, d2, p) for p in primes}
            eps2 = {p: v for p, v in eps2.items() if v == -1}
            if _form_exists(r - 1, sig2, d2, eps2):
                out.append(a)
                r, sig, d, eps = r - 1, sig2, d2, eps2
                break
        else:
            raise ValueError("square-free search exhausted")
    if r == 1:
        out.append(d)
    return out


def is_isotropic(entries: Sequence[int]) -> bool:
    """Whether the diagonal form represents zero nontrivially over Q."""
    g = [square_class(x) for x in entries]
    r = len(g)
    if r < 2:
        return False
    if all(x > 0 for x in g) or all(x < 0 for x in g):
        return False
    if r >= 5:
        return True
    d = _prod(g)
    if r == 2:
        return d == -1
    primes = {2}
    for x in g:
        primes |= _primes(x)
    for p in primes:
        eps = hasse_epsilon(g, p)
        if r == 3 and hilbert_symbol(-1, -d, p) != eps:
            return False
        if r == 4 and _is_local_square(d, p) and eps != hilbert_symbol(-1, -1, p):
            return False
    return True


def _witt_split(a: GWClass) -> tuple[int, tuple[int, ...]]:
    """Write ``a = m H + R`` with ``R`` anisotropic; ``m`` may be negative."""
    g = a.genuine
    n = len(g)
    sig = a.signature
    d = _prod(g)
    h = a.stable_hasse
    for rr in range(abs(sig), n + 1, 2):
        w = (n - rr) // 2
        dr = d * (-1) ** w
        eps = {p: h.get(p, 1) * _normalizer(rr, dr, p) for p in a.support}
        eps = {p: v for p, v in eps.items() if v == -1}
        if _form_exists(rr, sig, dr, eps):
            if rr > 4:
                # only definite forms are anisotropic in rank >= 5;
                # they represent +-1, so peel those off first
                e = 1 if sig > 0 else -1
                rest = _construct_peeled(rr, sig, dr, eps, e)
            else:
                rest = _construct(rr, sig, dr, eps)
            return w - len(a.neg), _canon(rest)
    raise AssertionError("no residue found")


def _construct_peeled(r: int, sig: int, d: int, eps: Mapping[int, int], e: int) -> list[int]:
    out = []
    while r > 4:
        # <e> + q' : d' = d e, eps' = eps * (e, d')
        d2 = _sq_mul(d, e)
        primes = {2} | set(eps) | _primes(d)
        eps = {p: eps.get(p, 1) * hilbert_symbol(e, d2, p) for p in primes}
        eps = {p: v for p, v in eps.items() if v == -1}
        out.append(e)
        r, sig, d = r - 1, sig - e, d2
    return out + _construct(r, sig, d, eps)


@dataclass(frozen=True)
class HyperbolicPart:
    copies: int
    residue: tuple[int, ...] = field(default=())

    def as_class(self) -> GWClass:
        return H * self.copies + GWClass(self.residue)


def witt_decompose(a: GWClass) -> HyperbolicPart:
    """``a = copies * H + residue`` with an anisotropic residue."""
    m, residue = _witt_split(a)
    if m < 0:
        raise ValueError("not effective")
    return HyperbolicPart(m, residue)


def to_canonical_string(a: GWClass, invariants: bool = True) -> str:
    """Deterministic rendering ``mH + <d1,...,dr>`` plus the invariant record."""
    m, residue = _witt_split(a)
    parts = []
    if m:
        parts.append("H" if m == 1 else "-H" if m == -1 else f"{m}H")
    if residue:
        parts.append("⟨" + ", ".join(str(x) for x in residue) + "⟩")
    body = " + ".join(parts) if parts else "0"
    if not invariants:
        return body
    hasse = ",".join(f"{p}:-1" for p, v in sorted(a.hasse.items()) if v == -1)
    return f"{body} [rank={a.rank}, sig={a.signature}, disc={a.discriminant}, hasse={{{hasse}}}]"
