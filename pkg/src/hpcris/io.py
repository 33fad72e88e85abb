"""JSON reading and writing of algebras and lifts.

Schema::

    {"base": {"p": 3, "n": 1},
     "generators": [{"name": "w", "degree": 0, "weight": 1}, ...],
     "differential": {"v": [[1, ["u"]], ...], ...}}

A word is a list of generator names, ``[]`` being the unit.  Lift files use
the same schema with ``n = 2``.  ``dumps`` is canonical, so
``dumps(loads(dumps(A))) == dumps(A)`` byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import re
from typing import Any, Tuple

from .dga import Derivation, FreeAlgebra, FreeDGA, GeneratorSpec, make_algebra
from .errors import InputError, ParseError
from .ring import BaseRing


def _line_of(text: str, needle: str) -> int | None:
    m = re.search(re.escape(needle), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text: str, msg: str, needle: str | None = None):
    line = _line_of(text, needle) if needle else None
    where = f"line {line}: " if line else ""
    raise ParseError(f"{where}{msg}")


def _int(text, v, what, needle=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(text, f"{what} must be an integer, got {v!r}", needle)
    return v


def parse_document(text: str) -> Tuple[BaseRing, Tuple[GeneratorSpec, ...], Derivation]:
    """Parse without the square-zero check; returns (base, generators, differential)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        _fail(text, "top level must be an object")
    unknown = set(doc) - {"base", "generators", "differential"}
    if unknown:
        k = sorted(unknown)[0]
        _fail(text, f"unknown field {k!r}", f'"{k}"')
    base = doc.get("base")
    if not isinstance(base, dict) or "p" not in base or "n" not in base:
        _fail(text, "base must be an object with fields p and n", '"base"')
    try:
        ring = BaseRing(_int(text, base["p"], "base.p", '"p"'), _int(text, base["n"], "base.n", '"n"'))
    except ParseError:
        raise
    except (InputError, ValueError) as exc:
        _fail(text, str(exc), '"base"')
    gens = doc.get("generators", [])
    if not isinstance(gens, list):
        _fail(text, "generators must be a list", '"generators"')
    specs = []
    for i, g in enumerate(gens):
        if not isinstance(g, dict) or set(g) != {"name", "degree", "weight"}:
            _fail(text, f"generators[{i}] must have exactly name, degree, weight", '"generators"')
        name = g["name"]
        needle = f'"{name}"' if isinstance(name, str) else '"generators"'
        if not isinstance(name, str):
            _fail(text, f"generators[{i}].name must be a string", needle)
        try:
            specs.append(
                GeneratorSpec(name, _int(text, g["degree"], f"degree of {name}", needle), _int(text, g["weight"], f"weight of {name}", needle))
            )
        except ParseError:
            raise
        except InputError as exc:
            _fail(text, str(exc), needle)
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        _fail(text, f"duplicate generator {dup!r}", f'"{dup}"')
    diff = doc.get("differential", {})
    if not isinstance(diff, dict):
        _fail(text, "differential must be an object", '"differential"')
    vals = {}
    for x, terms in diff.items():
        needle = f'"{x}":'
        if x not in names:
            _fail(text, f"differential given for unknown generator {x!r}", needle)
        if not isinstance(terms, list):
            _fail(text, f"d({x}) must be a list of [coefficient, word] pairs", needle)
        poly: dict = {}
        for t in terms:
            if not (isinstance(t, list) and len(t) == 2 and isinstance(t[1], list)):
                _fail(text, f"bad term {t!r} in d({x})", needle)
            c = _int(text, t[0], f"coefficient in d({x})", needle)
            word = tuple(t[1])
            for letter in word:
                if letter not in names:
                    _fail(text, f"unknown generator {letter!r} in d({x})", needle)
            poly[word] = (poly.get(word, 0) + c) % ring.q
        poly = {w: c for w, c in poly.items() if c}
        if poly:
            vals[x] = poly
    return ring, tuple(specs), Derivation(1, vals)


def loads_algebra(text: str) -> FreeDGA:
    ring, gens, d = parse_document(text)
    return make_algebra(ring, gens, d)


def loads_lift(text: str, A: FreeDGA) -> Derivation:
    """A lift file for ``A``: same generators, base n = 2; square-zero not required."""
    ring, gens, d = parse_document(text)
    if ring != BaseRing(A.base.p, 2):
        _fail(text, f"lift must be over Z/{A.base.p}^2, got {ring}", '"base"')
    if gens != A.generators:
        _fail(text, "lift generators differ from the algebra's", '"generators"')
    return d


def _doc(alg: FreeAlgebra, d: Derivation) -> dict:
    q = alg.base.q
    diff = {}
    for g in alg.generators:
        poly = {w: c % q for w, c in d.on(g.name).items() if c % q}
        if poly:
            diff[g.name] = [[c, list(w)] for w, c in sorted(poly.items(), key=lambda wc: alg.word_key(wc[0]))]
    return {
        "base": {"p": alg.base.p, "n": alg.base.n},
        "generators": [{"name": g.name, "degree": g.degree, "weight": g.weight} for g in alg.generators],
        "differential": diff,
    }


def dumps_algebra(A: FreeDGA) -> str:
    return dumps_canonical(_doc(A.algebra, A.differential))


def dumps_lift(A: FreeDGA, lift: Derivation) -> str:
    return dumps_canonical(_doc(A.algebra.with_base(BaseRing(A.base.p, 2)), lift))


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
