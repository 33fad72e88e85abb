"""Normalized cyclic bar complexes of free graded algebras, one weight at a time.

A basis chain is a tuple of words ``(a0, a1, ..., am)``: ``a0`` may be the
unit ``()``, the bar slots ``a1..am`` are nonempty words.  Its total degree
is ``m - deg(a0 ... am)`` (so ``b`` lowers it by one and ``B`` raises it by
one), and it sits in the slice of weight ``weight(a0) + ... + weight(am)``.

Sign bookkeeping uses the shifted degrees ``|a_j| + 1`` of the bar slots;
``eps(i) = |a0| + sum_{j=1..i} (|a_j| + 1)``.

Operators built here, for a derivation D of degree r:

* ``b``, ``B``       -- Hochschild boundary and normalized Connes operator;
* ``L_D``            -- minus the Leibniz action of D on all slots;
* ``e_D``            -- contraction ``a0[a1|...] -> +-a0 D(a1)[a2|...]``;
* ``E_D``            -- the cyclic insertion operator (raises m by one);
* ``iota_D = E_D + u^-1 e_D`` (after the overall sign below).

With ``L_D`` the negated Leibniz action and ``iota`` negated likewise, the
relation ``[b + uB + L_d, iota_D] = L_D + iota_[d,D]`` holds on the nose for
every odd d, and D -> L_D is a Lie anti-homomorphism.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .dga import Derivation, FreeAlgebra, FreeDGA, Word, apply_derivation, validate_derivation
from .errors import MathFailure
from .ring import BaseRing

Chain = Tuple[Word, ...]


def _as_algebra(A: Union[FreeAlgebra, FreeDGA]) -> FreeAlgebra:
    return A.algebra if isinstance(A, FreeDGA) else A


@dataclass(frozen=True)
class MixedSlice:
    """One weight of the normalized cyclic bar complex, with operator matrices.

    Matrices act on column vectors indexed by ``basis``.
    """

    weight: int
    ring: BaseRing
    basis: Tuple[Chain, ...]
    degrees: np.ndarray
    simplicial: np.ndarray
    b: np.ndarray
    B: np.ndarray
    ops: Mapping[str, np.ndarray] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.basis)

    def op(self, name: str) -> np.ndarray:
        if name == "b":
            return self.b
        if name == "B":
            return self.B
        return self.ops[name]

    def with_ops(self, **mats: np.ndarray) -> "MixedSlice":
        return replace(self, ops={**self.ops, **mats})

    def degree_block(self, t: int) -> np.ndarray:
        return np.nonzero(self.degrees == t)[0]

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "basis": [[list(w) for w in ch] for ch in self.basis],
            "degrees": self.degrees.tolist(),
            "matrices": {name: self.op(name).tolist() for name in ["b", "B", *sorted(self.ops)]},
        }


# ------------------------------------------------------------- chain algebra


class ChainOps:
    """Operators on single chains of a fixed free algebra, as sparse dicts."""

    def __init__(self, alg: FreeAlgebra):
        self.alg = alg
        self.q = alg.base.q
        self._par: Dict[Word, int] = {}

    def par(self, w: Word) -> int:
        v = self._par.get(w)
        if v is None:
            v = self._par[w] = self.alg.degree(w) % 2
        return v

    def shifted(self, ch: Chain) -> List[int]:
        return [(self.par(w) + 1) % 2 for w in ch]

    def eps(self, ch: Chain) -> List[int]:
        """eps[i] = |a0| + sum_{1..i}(|a_j|+1) mod 2."""
        out = [self.par(ch[0])]
        for w in ch[1:]:
            out.append((out[-1] + self.par(w) + 1) % 2)
        return out

    def _add(self, out: dict, ch: Chain, c: int) -> None:
        out[ch] = (out.get(ch, 0) + c) % self.q

    def b(self, ch: Chain) -> dict:
        out: dict = {}
        m = len(ch) - 1
        if m == 0:
            return out
        eps = self.eps(ch)
        for i in range(m):
            new = ch[:i] + (ch[i] + ch[i + 1],) + ch[i + 2 :]
            self._add(out, new, -1 if eps[i] else 1)
        s = ((self.par(ch[m]) + 1) * eps[m - 1]) % 2
        self._add(out, (ch[m] + ch[0],) + ch[1:m], 1 if s else -1)
        return out

    def B(self, ch: Chain) -> dict:
        out: dict = {}
        if ch[0] == ():
            return out
        sh = self.shifted(ch)
        total = sum(sh)
        left = 0
        for i in range(len(ch)):
            s = (left * (total - left)) % 2
            self._add(out, ((),) + ch[i:] + ch[:i], -1 if s else 1)
            left += sh[i]
        return out

    def _d(self, D: Derivation, w: Word) -> dict:
        return apply_derivation(self.alg, D, {w: 1})

    def leibniz(self, D: Derivation, ch: Chain) -> dict:
        """The natural (Koszul-signed) action of D on every slot."""
        out: dict = {}
        r = D.degree % 2
        eps = self.eps(ch)
        for i, w in enumerate(ch):
            img = self._d(D, w)
            if not img:
                continue
            sgn = -1 if r and (i > 0 and (eps[i - 1] + 1) % 2) else 1
            for nw, c in img.items():
                self._add(out, ch[:i] + (nw,) + ch[i + 1 :], sgn * c)
        return out

    def contraction(self, D: Derivation, ch: Chain) -> dict:
        """Natural e_D: a0[a1|a2|...] -> (-1)^(r|a0| + |a0| + r) a0 D(a1)[a2|...]."""
        out: dict = {}
        if len(ch) < 2:
            return out
        r = D.degree % 2
        q0 = self.par(ch[0])
        sgn = -1 if (r * q0 + q0 + r) % 2 else 1
        for nw, c in self._d(D, ch[1]).items():
            self._add(out, (ch[0] + nw,) + ch[2:], sgn * c)
        return out

    def insertion(self, D: Derivation, ch: Chain) -> dict:
        """Natural E_D: sum over i <= k of 1[a_{k+1}|..|a_m|a_0|..|D a_i|..|a_k]."""
        out: dict = {}
        if ch[0] == ():
            return out
        r = D.degree % 2
        m = len(ch) - 1
        sh = self.shifted(ch)
        total = sum(sh)
        left = 0
        for k in range(m + 1):
            left += sh[k]
            rot = (left * (total - left)) % 2
            seq = ch[k + 1 :] + ch[: k + 1]
            seq_sh = sh[k + 1 :] + sh[: k + 1]
            pre = sum(seq_sh[: m - k + 1])
            for pos in range(m - k + 1, m + 1):
                img = self._d(D, seq[pos])
                if img:
                    sgn = -1 if (rot + r * pre) % 2 else 1
                    for nw, c in img.items():
                        self._add(out, ((),) + seq[:pos] + (nw,) + seq[pos + 1 :], sgn * c)
                pre += seq_sh[pos]
        return out


# ------------------------------------------------------------------- builders


def cyclic_basis(alg: FreeAlgebra, weight: int) -> List[Chain]:
    """All normalized chains of the given weight, ordered by (total degree, m, words)."""
    out: List[Chain] = []

    def rec(rem: int, acc: Tuple[Word, ...]):
        if rem == 0:
            out.append(acc)
            return
        for w in range(1, rem + 1):
            for word in alg.words_of_weight(w):
                rec(rem - w, acc + (word,))

    for w0 in range(weight + 1):
        for a0 in alg.words_of_weight(w0):
            rec(weight - w0, (a0,))

    def key(ch: Chain):
        m = len(ch) - 1
        return (m - alg.degree(w for s in ch for w in s), m, tuple(alg.word_key(w) for w in ch))

    out.sort(key=key)
    return out


def _matrix(ring: BaseRing, index: Dict[Chain, int], basis: Sequence[Chain], fn) -> np.ndarray:
    N = len(basis)
    M = np.zeros((N, N), dtype=np.int64)
    for j, ch in enumerate(basis):
        for img, c in fn(ch).items():
            if c:
                M[index[img], j] = c
    return M


def _check_zero(ring: BaseRing, M: np.ndarray, what: str, sl: "MixedSlice") -> None:
    M = ring.reduce(M)
    if M.any():
        i, j = map(int, np.argwhere(M)[0])
        raise MathFailure(
            f"{what} != 0 in weight {sl.weight}: entry {int(M[i, j])} at "
            f"row {sl.basis[i]} col {sl.basis[j]}"
        )


def graded_commutator(ring: BaseRing, P: np.ndarray, pP: int, Q: np.ndarray, pQ: int) -> np.ndarray:
    sign = -1 if (pP * pQ) % 2 else 1
    return ring.reduce(ring.matmul(P, Q) - sign * ring.matmul(Q, P))


def build_slice(A: Union[FreeAlgebra, FreeDGA], weight: int, check: bool = True) -> MixedSlice:
    alg = _as_algebra(A)
    ring = alg.base
    basis = cyclic_basis(alg, weight)
    index = {ch: i for i, ch in enumerate(basis)}
    ops = ChainOps(alg)
    simp = np.array([len(ch) - 1 for ch in basis], dtype=np.int64)
    deg = np.array([len(ch) - 1 - alg.degree(w for s in ch for w in s) for ch in basis], dtype=np.int64)
    sl = MixedSlice(
        weight=weight,
        ring=ring,
        basis=tuple(basis),
        degrees=deg,
        simplicial=simp,
        b=_matrix(ring, index, basis, ops.b),
        B=_matrix(ring, index, basis, ops.B),
    )
    if check:
        _check_zero(ring, ring.matmul(sl.b, sl.b), "b^2", sl)
        _check_zero(ring, ring.matmul(sl.B, sl.B), "B^2", sl)
        _check_zero(ring, graded_commutator(ring, sl.b, 1, sl.B, 1), "bB + Bb", sl)
    if isinstance(A, FreeDGA):
        sl = sl.with_ops(L_d=operator_L(sl, alg, A.differential))
    return sl


def build_cyclic_bar(A: Union[FreeAlgebra, FreeDGA], weight_max: int, check: bool = True) -> List[MixedSlice]:
    """Slices of weight 0..weight_max; for a DGA the operator ``L_d`` is attached."""
    if weight_max < 0:
        raise ValueError("weight_max must be >= 0")
    return [build_slice(A, w, check) for w in range(weight_max + 1)]


def _index(sl: MixedSlice) -> Dict[Chain, int]:
    return {ch: i for i, ch in enumerate(sl.basis)}


def operator_L(sl: MixedSlice, alg: FreeAlgebra, D: Derivation) -> np.ndarray:
    validate_derivation(alg, D)
    ops = ChainOps(alg)
    return sl.ring.reduce(-_matrix(sl.ring, _index(sl), sl.basis, lambda ch: ops.leibniz(D, ch)))


def operator_iota(sl: MixedSlice, alg: FreeAlgebra, D: Derivation) -> Tuple[np.ndarray, np.ndarray]:
    """(e_D, E_D) as matrices, signs fixed so that iota_D = E_D + u^-1 e_D."""
    validate_derivation(alg, D)
    ops = ChainOps(alg)
    idx = _index(sl)
    e = _matrix(sl.ring, idx, sl.basis, lambda ch: ops.contraction(D, ch))
    E = _matrix(sl.ring, idx, sl.basis, lambda ch: ops.insertion(D, ch))
    return sl.ring.reduce(-e), sl.ring.reduce(-E)


def attach_L(slices: Iterable[MixedSlice], A, D: Derivation, name: str = "L_D") -> List[MixedSlice]:
    alg = _as_algebra(A)
    return [sl.with_ops(**{name: operator_L(sl, alg, D)}) for sl in slices]


def attach_iota(slices: Iterable[MixedSlice], A, D: Derivation, suffix: str = "D") -> List[MixedSlice]:
    """Attach ``e_<suffix>`` (lowers m) and ``E_<suffix>`` (raises m)."""
    alg = _as_algebra(A)
    out = []
    for sl in slices:
        e, E = operator_iota(sl, alg, D)
        out.append(sl.with_ops(**{f"e_{suffix}": e, f"E_{suffix}": E}))
    return out


def cartan_residuals(sl: MixedSlice, alg: FreeAlgebra, d: Derivation, D: Derivation) -> Dict[str, np.ndarray]:
    """Each u-component of [b + uB + L_d, iota_D] - L_D - iota_[d,D]; all must vanish.

    ``d`` must be odd.  Components are keyed by the power of u.
    """
    from .dga import bracket

    ring = sl.ring
    r = D.degree % 2
    Ld = operator_L(sl, alg, d)
    LD = operator_L(sl, alg, D)
    e, E = operator_iota(sl, alg, D)
    dD = bracket(alg, d, D)
    e2, E2 = operator_iota(sl, alg, dD)
    pi = (r + 1) % 2
    comm = lambda P, Q: graded_commutator(ring, P, 1, Q, pi)
    return {
        "u^-1": ring.reduce(comm(sl.b + Ld, e) - e2),
        "u^0": ring.reduce(comm(sl.B, e) + comm(sl.b + Ld, E) - LD - E2),
        "u^1": ring.reduce(comm(sl.B, E)),
    }
