"""Free graded associative algebras over Z/p^n with a weight grading.

Elements are noncommutative polynomials stored as ``{word: coefficient}``
dicts, a word being a tuple of generator names (``()`` is the unit).
Degrees are cohomological: a differential raises degree by one.  Every
generator has weight >= 1 and every derivation preserves weight, which is
what keeps the cyclic bar complex finite in each weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, Mapping, Tuple

from .errors import (
    DegreeViolation,
    DifferentialNotSquareZero,
    InputError,
    NotLiftOfSquareZero,
    ReducedDifferentialNotSquareZero,
    UnknownGenerator,
    WeightViolation,
)
from .ring import BaseRing

Word = Tuple[str, ...]
NCPoly = Dict[Word, int]


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    degree: int
    weight: int

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise InputError(f"bad generator name {self.name!r}")
        if self.weight < 1:
            raise WeightViolation(f"generator {self.name} has weight {self.weight} < 1")


# ---------------------------------------------------------------- polynomials


def poly_clean(poly: Mapping[Word, int], q: int) -> NCPoly:
    out = {}
    for w, c in poly.items():
        c %= q
        if c:
            out[w] = c
    return out


def poly_add(a: Mapping[Word, int], b: Mapping[Word, int], q: int, scale: int = 1) -> NCPoly:
    out = {w: c % q for w, c in a.items()}
    for w, c in b.items():
        out[w] = (out.get(w, 0) + scale * c) % q
    return {w: c for w, c in out.items() if c}


def poly_mul(a: Mapping[Word, int], b: Mapping[Word, int], q: int) -> NCPoly:
    out: Dict[Word, int] = {}
    for w1, c1 in a.items():
        for w2, c2 in b.items():
            w = w1 + w2
            out[w] = (out.get(w, 0) + c1 * c2) % q
    return {w: c for w, c in out.items() if c}


# ------------------------------------------------------------------ algebras


@dataclass(frozen=True)
class FreeAlgebra:
    """The free graded algebra on ``generators`` over ``base`` (no differential)."""

    base: BaseRing
    generators: Tuple[GeneratorSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate generator names in {names}")

    @cached_property
    def _by_name(self) -> Dict[str, GeneratorSpec]:
        return {g.name: g for g in self.generators}

    @cached_property
    def _order(self) -> Dict[str, int]:
        return {g.name: i for i, g in enumerate(self.generators)}

    def gen(self, name: str) -> GeneratorSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    def degree(self, word: Iterable[str]) -> int:
        return sum(self.gen(x).degree for x in word)

    def weight(self, word: Iterable[str]) -> int:
        return sum(self.gen(x).weight for x in word)

    def word_key(self, word: Word):
        """Sort key: weight, then length, then generator order."""
        return (self.weight(word), len(word), tuple(self._order[x] for x in word))

    def words_of_weight(self, w: int) -> list[Word]:
        """All words of exact weight ``w`` in canonical order."""
        return list(self._words_by_weight(w))

    def _words_by_weight(self, w: int) -> Tuple[Word, ...]:
        cache = self.__dict__.setdefault("_wcache", {})
        if w not in cache:
            if w == 0:
                cache[w] = ((),)
            else:
                out = []
                for g in self.generators:
                    if g.weight <= w:
                        out.extend((g.name,) + rest for rest in self._words_by_weight(w - g.weight))
                out.sort(key=self.word_key)
                cache[w] = tuple(out)
        return cache[w]

    def with_base(self, base: BaseRing) -> "FreeAlgebra":
        return FreeAlgebra(base, self.generators)

    def check_poly(self, poly: Mapping[Word, int]) -> None:
        for w in poly:
            for x in w:
                self.gen(x)


@dataclass(frozen=True)
class Derivation:
    """A derivation of given cohomological degree, determined by its values on generators.

    Generators absent from ``values`` are sent to zero.
    """

    degree: int
    values: Mapping[str, NCPoly] = field(default_factory=dict)

    def on(self, name: str) -> NCPoly:
        return self.values.get(name, {})

    def is_zero(self) -> bool:
        return not any(self.values.values())

    def reduced(self, q: int) -> "Derivation":
        return Derivation(self.degree, {x: poly_clean(v, q) for x, v in self.values.items()})

    def scaled(self, c: int, q: int) -> "Derivation":
        return Derivation(self.degree, {x: poly_clean({w: c * a for w, a in v.items()}, q) for x, v in self.values.items()})

    def plus(self, other: "Derivation", q: int, scale: int = 1) -> "Derivation":
        if other.degree != self.degree and not other.is_zero() and not self.is_zero():
            raise DegreeViolation("cannot add derivations of different degrees")
        deg = self.degree if not self.is_zero() else other.degree
        keys = set(self.values) | set(other.values)
        return Derivation(deg, {x: poly_add(self.on(x), other.on(x), q, scale) for x in sorted(keys)})

    def to_json(self) -> dict:
        return {x: [[c, list(w)] for w, c in sorted(v.items())] for x, v in sorted(self.values.items()) if v}


def zero_derivation(degree: int) -> Derivation:
    return Derivation(degree, {})


def validate_derivation(alg: FreeAlgebra, D: Derivation) -> None:
    """Raise unless D is weight-preserving and homogeneous of its degree."""
    for x, val in D.values.items():
        g = alg.gen(x)
        for w in val:
            alg.check_poly({w: 1})
            if alg.weight(w) != g.weight:
                raise WeightViolation(
                    f"D({x}) contains {'*'.join(w) or '1'} of weight {alg.weight(w)}, expected {g.weight}"
                )
            if alg.degree(w) != g.degree + D.degree:
                raise DegreeViolation(
                    f"D({x}) contains {'*'.join(w) or '1'} of degree {alg.degree(w)}, expected {g.degree + D.degree}"
                )


def apply_derivation(alg: FreeAlgebra, D: Derivation, f: Mapping[Word, int]) -> NCPoly:
    """Extend D to ``f`` by the graded Leibniz rule.

    On a word the i-th letter is hit with sign (-1)^(deg D * deg(prefix)).
    """
    q = alg.base.q
    out: Dict[Word, int] = {}
    odd = D.degree % 2
    for word, c in f.items():
        sign = 1
        for i, x in enumerate(word):
            g = alg.gen(x)
            val = D.on(x)
            if val:
                pre, post = word[:i], word[i + 1 :]
                s = c * sign
                for w, a in val.items():
                    key = pre + w + post
                    out[key] = (out.get(key, 0) + s * a) % q
            if odd and g.degree % 2:
                sign = -sign
    return {w: c for w, c in out.items() if c}


def compose(alg: FreeAlgebra, D1: Derivation, D2: Derivation, x: str) -> NCPoly:
    """(D1 o D2)(x) for a generator x."""
    return apply_derivation(alg, D1, D2.on(x))


def bracket(alg: FreeAlgebra, D1: Derivation, D2: Derivation) -> Derivation:
    """Graded commutator D1 D2 - (-1)^(|D1||D2|) D2 D1, evaluated on generators."""
    q = alg.base.q
    sign = -1 if (D1.degree * D2.degree) % 2 else 1
    vals = {}
    for g in alg.generators:
        v = poly_add(compose(alg, D1, D2, g.name), compose(alg, D2, D1, g.name), q, -sign)
        if v:
            vals[g.name] = v
    return Derivation(D1.degree + D2.degree, vals)


def square_on_generators(alg: FreeAlgebra, D: Derivation) -> Dict[str, NCPoly]:
    return {g.name: compose(alg, D, D, g.name) for g in alg.generators}


@dataclass(frozen=True)
class FreeDGA:
    algebra: FreeAlgebra
    differential: Derivation

    @property
    def base(self) -> BaseRing:
        return self.algebra.base

    @property
    def generators(self) -> Tuple[GeneratorSpec, ...]:
        return self.algebra.generators


def make_algebra(base: BaseRing, gens: Iterable[GeneratorSpec], d: Derivation | None = None) -> FreeDGA:
    """Validate and build a free DGA; d must have degree +1, preserve weight and square to zero."""
    alg = FreeAlgebra(base, tuple(gens))
    d = zero_derivation(1) if d is None else d
    if d.degree != 1:
        raise DegreeViolation(f"differential has degree {d.degree}, expected +1")
    for x in d.values:
        alg.gen(x)
    d = d.reduced(base.q)
    validate_derivation(alg, d)
    for x, sq in square_on_generators(alg, d).items():
        if sq:
            raise DifferentialNotSquareZero(f"d^2({x}) = {format_poly(sq)} != 0")
    return FreeDGA(alg, d)


def format_poly(poly: Mapping[Word, int]) -> str:
    if not poly:
        return "0"
    return " + ".join(f"{c}*{'*'.join(w) or '1'}" for w, c in sorted(poly.items()))


# ------------------------------------------------------- reduction and lifts


def reduce_mod_p(alg: FreeAlgebra, dtilde: Derivation) -> FreeDGA:
    """Reduce an algebra over Z/p^2 with derivation dtilde to the DGA over F_p."""
    if alg.base.n != 2:
        raise InputError(f"reduce_mod_p expects base Z/p^2, got {alg.base}")
    p = alg.base.p
    for x, sq in square_on_generators(alg, dtilde).items():
        bad = {w: c for w, c in sq.items() if c % p}
        if bad:
            raise ReducedDifferentialNotSquareZero(f"dtilde^2({x}) = {format_poly(sq)} is not divisible by p")
    fp = BaseRing(p, 1)
    return make_algebra(fp, alg.generators, dtilde.reduced(p))


def verbatim_lift(dga: FreeDGA, n: int = 2) -> Tuple[FreeAlgebra, Derivation]:
    """Reinterpret the structure constants (0..p-1) over Z/p^n."""
    base = BaseRing(dga.base.p, n)
    return dga.algebra.with_base(base), Derivation(1, {x: dict(v) for x, v in dga.differential.values.items()})


def extract_obstruction(alg: FreeAlgebra, dtilde: Derivation) -> Derivation:
    """The degree +2 derivation D over F_p with p*D = dtilde^2 on generators.

    ``alg`` is over Z/p^2.  Also checks that D commutes with the reduced
    differential, which always holds for a genuine lift.
    """
    if alg.base.n != 2:
        raise InputError(f"extract_obstruction expects base Z/p^2, got {alg.base}")
    if dtilde.degree != 1:
        raise DegreeViolation(f"lift has degree {dtilde.degree}, expected +1")
    validate_derivation(alg, dtilde)
    p = alg.base.p
    vals = {}
    for x, sq in square_on_generators(alg, dtilde).items():
        units = {w: c for w, c in sq.items() if c % p}
        if units:
            raise NotLiftOfSquareZero(f"dtilde^2({x}) = {format_poly(sq)} has unit coefficients")
        v = {w: c // p for w, c in sq.items()}
        if v:
            vals[x] = v
    D = Derivation(2, vals)
    fp = alg.base.residue(1)
    red = alg.with_base(fp)
    comm = bracket(red, dtilde.reduced(p), D.reduced(p))
    if not comm.is_zero():
        # unreachable for a valid lift: p D d = dtilde^3 = p d D
        raise NotLiftOfSquareZero(f"[d, D] != 0 over F_p: {comm.values}")
    return D


def random_poly_of(alg: FreeAlgebra, rng, weight: int, degree: int, density: float = 0.5) -> NCPoly:
    q = alg.base.q
    out = {}
    for w in alg.words_of_weight(weight):
        if alg.degree(w) == degree and rng.random() < density:
            c = int(rng.integers(0, q))
            if c:
                out[w] = c
    return out


def random_derivation(alg: FreeAlgebra, rng, degree: int, density: float = 0.5) -> Derivation:
    """A random weight-preserving derivation of the given degree."""
    vals = {}
    for g in alg.generators:
        v = random_poly_of(alg, rng, g.weight, g.degree + degree, density)
        if v:
            vals[g.name] = v
    return Derivation(degree, vals)
