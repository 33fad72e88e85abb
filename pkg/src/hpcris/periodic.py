"""2-periodic folding of mixed slices and per-weight HH / HP homology."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .cyclic import MixedSlice, build_cyclic_bar
from .dga import FreeDGA
from .errors import DifferentialNotSquareZero
from .ring import BaseRing, HomologyGroup, complex_homology


@dataclass(frozen=True)
class FoldedComplex:
    """A slice with u set to 1: a Z/2-graded complex over the slice's ring.

    ``d_even`` maps even chains to odd ones, ``d_odd`` odd to even.
    """

    weight: int
    ring: BaseRing
    even: np.ndarray
    odd: np.ndarray
    matrix: np.ndarray

    @property
    def d_even(self) -> np.ndarray:
        return self.matrix[np.ix_(self.odd, self.even)]

    @property
    def d_odd(self) -> np.ndarray:
        return self.matrix[np.ix_(self.even, self.odd)]

    def homology(self) -> Dict[int, HomologyGroup]:
        return {
            0: complex_homology(self.ring, self.d_odd, self.d_even),
            1: complex_homology(self.ring, self.d_even, self.d_odd),
        }


def combine(sl: MixedSlice, op_names: Sequence[str], coefficients: Sequence[int]) -> np.ndarray:
    if len(op_names) != len(coefficients):
        raise ValueError("op_names and coefficients must align")
    ring = sl.ring
    M = np.zeros((sl.size, sl.size), dtype=np.int64)
    for name, c in zip(op_names, coefficients):
        M = M + int(c) * sl.op(name)
    return ring.reduce(M)


def fold(sl: MixedSlice, op_names: Sequence[str], coefficients: Sequence[int] | None = None) -> FoldedComplex:
    """Sum the named operators (u := 1) and check the result squares to zero."""
    coefficients = [1] * len(op_names) if coefficients is None else coefficients
    ring = sl.ring
    M = combine(sl, op_names, coefficients)
    par = sl.degrees % 2
    even = np.nonzero(par == 0)[0]
    odd = np.nonzero(par == 1)[0]
    if M[np.ix_(even, even)].any() or M[np.ix_(odd, odd)].any():
        raise DifferentialNotSquareZero(f"operator sum {list(op_names)} does not change parity")
    sq = ring.matmul(M, M)
    if sq.any():
        i, j = map(int, np.argwhere(sq)[0])
        raise DifferentialNotSquareZero(
            f"weight {sl.weight}: ({' + '.join(f'{c}*{n}' for n, c in zip(op_names, coefficients))})^2 "
            f"sends {sl.basis[j]} to a combination with coefficient {int(sq[i, j])} on {sl.basis[i]}"
        )
    return FoldedComplex(sl.weight, ring, even, odd, M)


@dataclass(frozen=True)
class HomologyProfile:
    """Homology per (weight, key); key is the parity (HP) or total degree (HH)."""

    kind: str
    ring: BaseRing
    groups: Dict[Tuple[int, int], HomologyGroup] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, HomologyProfile):
            return NotImplemented
        return self.kind == other.kind and self.ring == other.ring and self.nonzero() == other.nonzero()

    def nonzero(self) -> Dict[Tuple[int, int], HomologyGroup]:
        return {k: g for k, g in self.groups.items() if not g.is_zero}

    def weights(self) -> List[int]:
        return sorted({w for w, _ in self.groups})

    def at(self, weight: int, key: int) -> HomologyGroup:
        return self.groups.get((weight, key), HomologyGroup())

    def restrict(self, weights: Iterable[int]) -> "HomologyProfile":
        ws = set(weights)
        return HomologyProfile(self.kind, self.ring, {k: g for k, g in self.groups.items() if k[0] in ws})

    def to_json(self) -> list:
        label = "parity" if self.kind == "HP" else "degree"
        return [
            {"weight": w, label: k, **g.to_dict()}
            for (w, k), g in sorted(self.groups.items())
        ]


def hh_of_slice(sl: MixedSlice, op_names=("b", "L_d"), coefficients=None) -> Dict[int, HomologyGroup]:
    """Homology of (b + L_d) on one slice, per total degree."""
    ring = sl.ring
    M = combine(sl, op_names, coefficients or [1] * len(op_names))
    out = {}
    if sl.size == 0:
        return out
    lo, hi = int(sl.degrees.min()), int(sl.degrees.max())
    blocks = {t: sl.degree_block(t) for t in range(lo - 1, hi + 2)}
    for t in range(lo, hi + 1):
        cur = blocks[t]
        if cur.size == 0:
            continue
        d_out = M[np.ix_(blocks[t - 1], cur)]
        d_in = M[np.ix_(cur, blocks[t + 1])]
        out[t] = complex_homology(ring, d_in, d_out)
    return out


def _slices_for(A: FreeDGA, weight_max: int, slices):
    if slices is None:
        slices = build_cyclic_bar(A, weight_max)
    return [sl for sl in slices if sl.weight <= weight_max]


def hh_profile(A: FreeDGA, weight_max: int, slices: Sequence[MixedSlice] | None = None) -> HomologyProfile:
    groups = {}
    for sl in _slices_for(A, weight_max, slices):
        for t, g in hh_of_slice(sl).items():
            groups[(sl.weight, t)] = g
    return HomologyProfile("HH", A.base, groups)


def hp_of_slices(slices: Iterable[MixedSlice], op_names, coefficients=None, ring: BaseRing | None = None) -> HomologyProfile:
    groups = {}
    for sl in slices:
        ring = sl.ring
        for par, g in fold(sl, op_names, coefficients).homology().items():
            groups[(sl.weight, par)] = g
    return HomologyProfile("HP", ring, groups)


def hp_profile(A: FreeDGA, weight_max: int, slices: Sequence[MixedSlice] | None = None) -> HomologyProfile:
    """Z/2-graded homology of b + B + L_d per weight."""
    return hp_of_slices(_slices_for(A, weight_max, slices), ("b", "B", "L_d"), ring=A.base)
