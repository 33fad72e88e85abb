"""Seeded random instances and the identity suite behind ``hpcris check``.

Instance grammar (all choices drawn from one ``numpy`` generator seeded by
the user's seed):

* 1 to 3 generators (probabilities 0.1, 0.45, 0.45), the first of weight 1,
  the others of weight 1 to 3; degrees in {-2, -1, 0, 1}, except that with
  probability 0.7 a later generator takes the degree that lets its
  differential hit a random word in the earlier ones;
* base Z/p^n with (p, n) cycling through (3,1), (3,2), (5,1), (5,2);
* a random weight-preserving degree-1 differential, resampled until it
  squares to zero (density halves every 10 rejections, zero as last resort);
* coefficients uniform in [0, p^n).

Every check returns :class:`CheckResult` records; a failure carries a
witness naming the slice, the matrix entry and the basis chains involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .cris import compare_lifts
from .cyclic import MixedSlice, build_cyclic_bar, cartan_residuals, graded_commutator, operator_iota, operator_L
from .dga import (
    Derivation,
    FreeAlgebra,
    FreeDGA,
    GeneratorSpec,
    bracket,
    make_algebra,
    random_derivation,
    square_on_generators,
    verbatim_lift,
)
from .oracle import enumerate_homology, oracle_hh_profile, oracle_homology, oracle_hp_profile
from .periodic import hh_profile, hp_profile
from .ring import BaseRing, HomologyGroup, complex_homology, smith_decompose

RING_CYCLE = ((3, 1), (3, 2), (5, 1), (5, 2))
DEGREES = (-2, -1, 0, 1)
FAULTS = ("cartan-sign",)
GEN_COUNT_P = {1: [1.0], 2: [0.3, 0.7], 3: [0.1, 0.45, 0.45]}


@dataclass(frozen=True)
class Instance:
    name: str
    algebra: FreeDGA


@dataclass(frozen=True)
class LiftInstance:
    name: str
    algebra: FreeDGA
    lift: Derivation


@dataclass
class CheckResult:
    check: str
    instance: str
    ok: bool
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"check": self.check, "instance": self.instance, "ok": self.ok}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


# ------------------------------------------------------------- instances


def random_algebra(rng: np.random.Generator, p: int, n: int, max_gens: int = 3, max_weight: int = 3) -> FreeDGA:
    ring = BaseRing(p, n)
    k = int(rng.choice(np.arange(1, max_gens + 1), p=GEN_COUNT_P[max_gens]))
    gens: List[GeneratorSpec] = []
    for i, nm in enumerate(["x", "y", "z"][:k]):
        # the first generator is light so that products occur below weight_max
        wt = 1 if i == 0 else int(rng.integers(1, max_weight + 1))
        deg = int(rng.choice(DEGREES))
        if gens and rng.random() < 0.7:
            # aim d(nm) at a word in the earlier generators
            prev = FreeAlgebra(ring, tuple(gens))
            words = [w for w in prev.words_of_weight(wt) if w]
            if words:
                deg = prev.degree(words[int(rng.integers(len(words)))]) - 1
        gens.append(GeneratorSpec(nm, deg, wt))
    alg = FreeAlgebra(ring, tuple(gens))
    density = 0.6
    for attempt in range(40):
        if attempt and attempt % 10 == 0:
            density /= 2
        d = random_derivation(alg, rng, 1, density)
        if not d.is_zero() and not any(square_on_generators(alg, d).values()):
            return make_algebra(ring, gens, d)
    return make_algebra(ring, gens)


def suite_instances(seed: int, count: int = 20) -> List[Instance]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        p, n = RING_CYCLE[i % len(RING_CYCLE)]
        out.append(Instance(f"rand{i}[Z/{p}^{n}]", random_algebra(rng, p, n)))
    return out


def wuv_example(p: int = 3) -> Tuple[FreeDGA, Derivation, Derivation]:
    """w(0,1), u(-1,2), v(-2,2) over F_p with d v = u; the plain lift and the one with u -> p w w."""
    ring = BaseRing(p, 1)
    gens = [GeneratorSpec("w", 0, 1), GeneratorSpec("u", -1, 2), GeneratorSpec("v", -2, 2)]
    A = make_algebra(ring, gens, Derivation(1, {"v": {("u",): 1}}))
    plain = Derivation(1, {"v": {("u",): 1}})
    twisted = Derivation(1, {"v": {("u",): 1}, "u": {("w", "w"): p}})
    return A, plain, twisted


def commutator_example(p: int = 3) -> Tuple[FreeDGA, Derivation]:
    """x, y (0,1), a(-1,2), c(-2,2), d c = a; the lift twists a -> p(xy - yx)."""
    ring = BaseRing(p, 1)
    gens = [GeneratorSpec("x", 0, 1), GeneratorSpec("y", 0, 1), GeneratorSpec("a", -1, 2), GeneratorSpec("c", -2, 2)]
    A = make_algebra(ring, gens, Derivation(1, {"c": {("a",): 1}}))
    q = p * p
    lift = Derivation(1, {"c": {("a",): 1}, "a": {("x", "y"): p, ("y", "x"): q - p}})
    return A, lift


def twisted_lift(A: FreeDGA, rng: np.random.Generator, density: float = 0.6) -> Derivation:
    """Verbatim lift plus p times a random degree-1 derivation over F_p."""
    lifted, dv = verbatim_lift(A)
    E = random_derivation(A.algebra, rng, 1, density)
    return dv.plus(E, lifted.base.q, A.base.p)


def lift_instances(seed: int, count: int = 10, p_values: Sequence[int] = (3, 5)) -> List[LiftInstance]:
    """The (w,u,v) and commutator examples, then seeded random lifts (twists with D != 0 preferred)."""
    from .dga import extract_obstruction

    out = []
    A, _, tw = wuv_example(3)
    out.append(LiftInstance("wuv[p=3]", A, tw))
    A, lift = commutator_example(3)
    out.append(LiftInstance("commutator[p=3]", A, lift))
    rng = np.random.default_rng(seed)
    i = 0
    while len(out) < count:
        p = p_values[i % len(p_values)]
        lifted = best = A = None
        # resample until the twist has a nonzero obstruction D (bounded effort)
        for _ in range(30):
            A = random_algebra(rng, p, 1)
            lifted, _ = verbatim_lift(A)
            best = twisted_lift(A, rng)
            if not extract_obstruction(lifted, best).is_zero():
                break
        out.append(LiftInstance(f"lift{i}[p={p}]", A, best))
        i += 1
    return out


# ------------------------------------------------------------- witnesses


def chain_str(ch) -> str:
    a0 = "".join(ch[0]) or "1"
    return a0 + ("[" + "|".join("".join(w) for w in ch[1:]) + "]" if len(ch) > 1 else "")


def matrix_witness(M: np.ndarray, sl: MixedSlice, what: str) -> Optional[dict]:
    nz = np.argwhere(M)
    if not nz.size:
        return None
    i, j = map(int, nz[0])
    return {
        "identity": what,
        "weight": sl.weight,
        "column": chain_str(sl.basis[j]),
        "row": chain_str(sl.basis[i]),
        "value": int(M[i, j]),
    }


def _slices_ok(name: str, inst: str, slices, fn: Callable[[MixedSlice], Iterable[Tuple[str, np.ndarray]]]) -> CheckResult:
    for sl in slices:
        for what, M in fn(sl):
            w = matrix_witness(M, sl, what)
            if w:
                return CheckResult(name, inst, False, w)
    return CheckResult(name, inst, True)


# ------------------------------------------------------------- checks


def check_mixed(inst: Instance, slices) -> CheckResult:
    def fn(sl):
        r = sl.ring
        yield "b^2", r.matmul(sl.b, sl.b)
        yield "B^2", r.matmul(sl.B, sl.B)
        yield "bB+Bb", graded_commutator(r, sl.b, 1, sl.B, 1)

    return _slices_ok("mixed complex identities", inst.name, slices, fn)


def check_hp_square(inst: Instance, slices) -> CheckResult:
    def fn(sl):
        M = sl.b + sl.B + sl.op("L_d")
        yield "(b+B+L_d)^2", sl.ring.matmul(sl.ring.reduce(M), sl.ring.reduce(M))

    return _slices_ok("(b+B+L_d)^2 = 0", inst.name, slices, fn)


def derivation_degrees(alg: FreeAlgebra) -> List[int]:
    """Degrees r for which some generator has a nonzero candidate value."""
    out = set()
    for g in alg.generators:
        out |= {alg.degree(w) - g.degree for w in alg.words_of_weight(g.weight)}
    return sorted(out)


def random_derivations(A: FreeDGA, rng: np.random.Generator, count: int = 3) -> List[Derivation]:
    degs = derivation_degrees(A.algebra) or [0]
    return [random_derivation(A.algebra, rng, int(rng.choice(degs)), 0.7) for _ in range(count)]


def check_cartan(inst: Instance, slices, derivations: Sequence[Derivation], fault: Optional[str] = None) -> List[CheckResult]:
    A = inst.algebra
    out = []
    for k, D in enumerate(derivations):

        def fn(sl, D=D):
            res = cartan_residuals(sl, A.algebra, A.differential, D)
            if fault == "cartan-sign":
                # flip the sign of E_D: the u^0 component picks up 2[b + L_d, E_D]
                _, E = operator_iota(sl, A.algebra, D)
                Ld = sl.op("L_d")
                r = D.degree % 2
                extra = graded_commutator(sl.ring, sl.b + Ld, 1, E, (r + 1) % 2)
                res["u^0"] = sl.ring.reduce(res["u^0"] - 2 * extra)
                res["u^1"] = sl.ring.reduce(-res["u^1"])
            for key in ("u^-1", "u^0", "u^1"):
                yield f"Cartan relation, {key} component, D of degree {D.degree}", res[key]

        out.append(_slices_ok("Cartan relation", f"{inst.name}/D{k}", slices, fn))
    return out


def check_L_antihom(inst: Instance, slices, D1: Derivation, D2: Derivation) -> CheckResult:
    """L_[D1,D2] = -[L_D1, L_D2] and L_(D1+D2) = L_D1 + L_D2 (when degrees agree)."""
    alg = inst.algebra.algebra
    br = bracket(alg, D1, D2)

    def fn(sl):
        r = sl.ring
        L1, L2 = operator_L(sl, alg, D1), operator_L(sl, alg, D2)
        yield "L_[D1,D2] + [L_D1, L_D2]", r.reduce(operator_L(sl, alg, br) + graded_commutator(r, L1, D1.degree % 2, L2, D2.degree % 2))
        if D1.degree == D2.degree:
            yield "L_(D1+D2) - L_D1 - L_D2", r.reduce(operator_L(sl, alg, D1.plus(D2, r.q)) - L1 - L2)

    return _slices_ok("L anti-homomorphism", inst.name, slices, fn)


def check_oracle(inst: Instance, slices, weight_max: int) -> List[CheckResult]:
    A = inst.algebra
    out = []
    for label, ours, theirs in (
        ("HH", hh_profile(A, weight_max, slices), oracle_hh_profile(A, weight_max)),
        ("HP", hp_profile(A, weight_max, slices), oracle_hp_profile(A, weight_max)),
    ):
        mine = ours.nonzero()
        ref = {k: g for k, g in theirs.items() if not g.is_zero}
        if mine == ref:
            out.append(CheckResult(f"oracle {label}", inst.name, True))
        else:
            key = sorted(set(mine) ^ set(ref) | {k for k in mine if k in ref and mine[k] != ref[k]})[0]
            out.append(
                CheckResult(
                    f"oracle {label}",
                    inst.name,
                    False,
                    {"weight": key[0], "key": key[1], "engine": ours.at(*key).to_dict(), "oracle": theirs.get(key, HomologyGroup()).to_dict()},
                )
            )
    return out


def random_matrix(rng, ring: BaseRing, rows: int, cols: int) -> np.ndarray:
    """Random entries with a bias towards high valuation so torsion shows up."""
    M = rng.integers(0, ring.q, size=(rows, cols))
    scale = ring.p ** rng.integers(0, ring.n + 1, size=(rows, cols))
    return ring.reduce(M * scale)


def _det_unit(ring: BaseRing, M: np.ndarray) -> bool:
    from .ring import smith_profile

    return M.shape[0] == M.shape[1] and all(v == 0 for v in smith_profile(ring, M))


def check_snf(rng, rings: Sequence[BaseRing], count: int, max_dim: int = 8) -> List[CheckResult]:
    out = []
    for k in range(count):
        ring = rings[k % len(rings)]
        r, c = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        M = random_matrix(rng, ring, r, c)
        sd = smith_decompose(ring, M)
        name = f"snf{k}[{ring} {r}x{c}]"
        rec = ring.matmul(ring.matmul(sd.U, sd.D), sd.V)
        off = sd.D.copy()
        np.fill_diagonal(off, 0)
        diag = np.diag(sd.D)
        pure = all(x == 0 or x == ring.p ** int(ring.valuation(np.array([x]))[0]) for x in diag)
        if not np.array_equal(rec, ring.reduce(M)):
            i, j = map(int, np.argwhere(rec != ring.reduce(M))[0])
            out.append(CheckResult("SNF U D V = M", name, False, {"entry": [i, j], "matrix": M.tolist()}))
        elif off.any() or not pure or not _det_unit(ring, sd.U) or not _det_unit(ring, sd.V):
            out.append(CheckResult("SNF U D V = M", name, False, {"matrix": M.tolist(), "diagonal": diag.tolist()}))
        elif list(sd.profile) != sorted(sd.profile):
            out.append(CheckResult("SNF U D V = M", name, False, {"matrix": M.tolist(), "profile": list(sd.profile)}))
        else:
            out.append(CheckResult("SNF U D V = M", name, True))
    return out


def random_complex(rng, ring: BaseRing, a: int, b: int, c: int) -> Tuple[np.ndarray, np.ndarray]:
    """C_a -> C_b -> C_c with d_out d_in = 0, built from a random chain-homotopy-free recipe."""
    # d_out = X P, d_in = Q Y with P Q = 0: take P = [I 0] S^-1-ish block, Q complementary
    r = int(rng.integers(0, b + 1))
    S = random_invertible(rng, ring, b)
    Sinv = inverse_unimodular(ring, S)
    X = random_matrix(rng, ring, c, r)
    Y = random_matrix(rng, ring, b - r, a)
    d_out = ring.matmul(X, Sinv[:r])
    d_in = ring.matmul(S[:, r:], Y)
    return d_in, d_out


def random_invertible(rng, ring: BaseRing, size: int) -> np.ndarray:
    while True:
        M = ring.reduce(rng.integers(0, ring.q, size=(size, size)))
        if _det_unit(ring, M):
            return M


def inverse_unimodular(ring: BaseRing, M: np.ndarray) -> np.ndarray:
    from .pd_cyclic import solve_unimodular

    return solve_unimodular(ring, M, ring.identity(M.shape[0]))


def check_complex_oracle(rng, rings: Sequence[BaseRing], count: int, max_dim: int = 6) -> List[CheckResult]:
    out = []
    for k in range(count):
        ring = rings[k % len(rings)]
        a, b, c = (int(x) for x in rng.integers(0, max_dim + 1, size=3))
        d_in, d_out = random_complex(rng, ring, a, b, c)
        h = complex_homology(ring, d_in, d_out)
        refs = {"rank route": oracle_homology(ring, d_in, d_out)}
        if ring.q ** (a + b) <= 200_000:
            refs["enumeration"] = enumerate_homology(ring, d_in, d_out)
        name = f"complex{k}[{ring} {a}-{b}-{c}]"
        bad = {k2: g.to_dict() for k2, g in refs.items() if g != h}
        if bad:
            out.append(CheckResult("complex_homology oracle", name, False, {"engine": h.to_dict(), **bad, "d_in": d_in.tolist(), "d_out": d_out.tolist()}))
        else:
            out.append(CheckResult("complex_homology oracle", name, True))
    return out


def check_lift_change(inst: LiftInstance, weight_max: int, other: Optional[Derivation] = None) -> CheckResult:
    """compare_lifts against ``other`` (default: the verbatim lift)."""
    from .errors import MathFailure

    A = inst.algebra
    if other is None:
        other = verbatim_lift(A)[1]
    try:
        cmp = compare_lifts(A, inst.lift, other, weight_max)
    except MathFailure as exc:
        return CheckResult("lift change intertwining", inst.name, False, {"error": str(exc)})
    if not cmp.equal:
        return CheckResult("lift change intertwining", inst.name, False, {"profile1": cmp.profile1.to_json(), "profile2": cmp.profile2.to_json()})
    return CheckResult("lift change intertwining", inst.name, True)


# ------------------------------------------------------------- the suite


def run_identity_suite(seed: int, sizes: Sequence[int] = (4,), count: int = 20, fault: Optional[str] = None,
                       lift_count: int = 5) -> List[CheckResult]:
    """Run every identity on the seeded instances, once per weight bound in ``sizes``."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; known: {FAULTS}")
    results: List[CheckResult] = []
    for wmax in sizes:
        rng = np.random.default_rng([seed, wmax])
        for inst in suite_instances(seed, count):
            slices = build_cyclic_bar(inst.algebra, wmax, check=False)
            results.append(check_mixed(inst, slices))
            results.append(check_hp_square(inst, slices))
            Ds = random_derivations(inst.algebra, rng, 3)
            results += check_cartan(inst, slices, Ds, fault)
            low = [sl for sl in slices if sl.weight <= min(wmax, 3)]
            results.append(check_L_antihom(inst, low, Ds[0], Ds[1]))
            results += check_oracle(inst, slices, wmax)
        rings = [BaseRing(3, 2), BaseRing(5, 2)]
        results += check_snf(rng, rings, 20)
        results += check_complex_oracle(rng, [BaseRing(3, 1), BaseRing(3, 2), BaseRing(5, 2), BaseRing(2, 3)], 20)
        for li in lift_instances(seed, lift_count):
            results.append(check_lift_change(li, wmax))
    return results


def summarize(results: Sequence[CheckResult]) -> Dict[str, Dict[str, int]]:
    out: Dict[str, Dict[str, int]] = {}
    for r in results:
        d = out.setdefault(r.check, {"passed": 0, "failed": 0})
        d["passed" if r.ok else "failed"] += 1
    return dict(sorted(out.items()))
