"""Crystalline periodic cyclic complex over Z/p^2 from a mod-p free DGA and a lift.

Given a free DGA ``A`` over F_p and a lift ``dtilde`` of its differential
to the free algebra over Z/p^2, the complex is the cyclic bar complex of the
lifted algebra with differential ``b + B + L_dtilde + p*(e_D + E_D)`` where
``dtilde^2 = p*D``.  Two lifts are compared through ``id + p*iota_D'``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .cyclic import MixedSlice, attach_iota, attach_L, build_cyclic_bar
from .dga import (
    Derivation,
    FreeAlgebra,
    FreeDGA,
    extract_obstruction,
    format_poly,
    make_algebra,
    poly_add,
    square_on_generators,
    validate_derivation,
    verbatim_lift,
)
from .errors import (
    DifferentialNotSquareZero,
    LiftsNotCongruentModP,
    MathFailure,
    NotLiftOfSquareZero,
    NotVerbatimLiftable,
)
from .periodic import FoldedComplex, HomologyProfile, fold, hp_of_slices, hp_profile
from .ring import BaseRing

CRIS_OPS = ("b", "B", "L_dt", "e_D", "E_D")


class P2Warning(UserWarning):
    """p = 2: the complex is well formed but the comparison theorems need p odd."""


def _lifted_algebra(A: FreeDGA) -> FreeAlgebra:
    return A.algebra.with_base(BaseRing(A.base.p, 2))


def check_lift(A: FreeDGA, dtilde: Derivation) -> None:
    """Raise unless dtilde is a weight-preserving degree-1 lift of A's differential."""
    if A.base.n != 1:
        raise NotLiftOfSquareZero(f"the algebra must be over F_p, got {A.base}")
    p = A.base.p
    lifted = _lifted_algebra(A)
    if dtilde.degree != 1:
        raise NotLiftOfSquareZero(f"lift has degree {dtilde.degree}, expected 1")
    validate_derivation(lifted, dtilde)
    for g in A.generators:
        diff = poly_add(dtilde.on(g.name), A.differential.on(g.name), p, -1)
        if diff:
            raise NotLiftOfSquareZero(
                f"lift of d({g.name}) = {format_poly(dtilde.on(g.name))} does not reduce to "
                f"{format_poly(A.differential.on(g.name))} mod {p}"
            )


@dataclass(frozen=True)
class CrisComplex:
    algebra: FreeDGA
    lift: Derivation
    obstruction: Derivation
    slices: List[MixedSlice]
    folded: List[FoldedComplex]

    @property
    def ring(self) -> BaseRing:
        return self.slices[0].ring

    def profile(self) -> HomologyProfile:
        groups = {}
        for fc in self.folded:
            for par, g in fc.homology().items():
                groups[(fc.weight, par)] = g
        return HomologyProfile("HP", self.ring, groups)


def hp_cris_obj(A: FreeDGA, dtilde: Derivation, weight_max: int) -> CrisComplex:
    if A.base.p == 2:
        warnings.warn(
            "p = 2: the complex is built, but its comparison with TP and lifts is only known for odd p",
            P2Warning,
            stacklevel=2,
        )
    check_lift(A, dtilde)
    lifted = _lifted_algebra(A)
    dtilde = dtilde.reduced(lifted.base.q)
    D = extract_obstruction(lifted, dtilde)
    slices = build_cyclic_bar(lifted, weight_max)
    slices = attach_L(slices, lifted, dtilde, "L_dt")
    slices = attach_iota(slices, lifted, D, "D")
    p = A.base.p
    folded = []
    for sl in slices:
        try:
            folded.append(fold(sl, CRIS_OPS, (1, 1, 1, p, p)))
        except DifferentialNotSquareZero as exc:
            raise MathFailure(f"crystalline differential does not square to zero: {exc}") from exc
    return CrisComplex(A, dtilde, D, slices, folded)


def reduction_matches(cc: CrisComplex) -> bool:
    """The complex mod p coincides with the HP fold of A over F_p, matrix for matrix."""
    A = cc.algebra
    p = A.base.p
    for fc, sl in zip(cc.folded, build_cyclic_bar(A, len(cc.folded) - 1)):
        ref = fold(sl, ("b", "B", "L_d")).matrix
        if not np.array_equal(fc.matrix % p, ref):
            return False
    return True


@dataclass(frozen=True)
class LiftComparison:
    connecting: Derivation
    phi: List[np.ndarray]
    profile1: HomologyProfile
    profile2: HomologyProfile

    @property
    def equal(self) -> bool:
        return self.profile1 == self.profile2


def lift_difference(A: FreeDGA, lift1: Derivation, lift2: Derivation) -> Derivation:
    """D' over F_p with p*D' = lift1 - lift2."""
    p = A.base.p
    q = p * p
    vals = {}
    for g in A.generators:
        diff = poly_add(lift1.on(g.name), lift2.on(g.name), q, -1)
        bad = {w: c for w, c in diff.items() if c % p}
        if bad:
            raise LiftsNotCongruentModP(f"lifts of d({g.name}) differ by {format_poly(bad)}, not divisible by {p}")
        if diff:
            vals[g.name] = {w: c // p for w, c in diff.items()}
    return Derivation(1, vals)


def compare_lifts(A: FreeDGA, lift1: Derivation, lift2: Derivation, weight_max: int) -> LiftComparison:
    """Check that id + p*iota_D' carries the first complex onto the second, exactly."""
    Dp = lift_difference(A, lift1, lift2)
    c1 = hp_cris_obj(A, lift1, weight_max)
    c2 = hp_cris_obj(A, lift2, weight_max)
    ring = c1.ring
    p = A.base.p
    lifted = _lifted_algebra(A)
    phis = []
    for sl, f1, f2 in zip(attach_iota(c1.slices, lifted, Dp, "Dp"), c1.folded, c2.folded):
        phi = ring.reduce(ring.identity(sl.size) + p * (sl.op("e_Dp") + sl.op("E_Dp")))
        if np.any(phi % p != ring.identity(sl.size)):
            raise MathFailure(f"weight {sl.weight}: id + p*iota is not the identity mod p")
        lhs = ring.matmul(phi, f1.matrix)
        rhs = ring.matmul(f2.matrix, phi)
        if not np.array_equal(lhs, rhs):
            i, j = map(int, np.argwhere(lhs != rhs)[0])
            raise MathFailure(
                f"weight {sl.weight}: id + p*iota does not intertwine at row {sl.basis[i]}, col {sl.basis[j]}"
            )
        phis.append(phi)
    return LiftComparison(Dp, phis, c1.profile(), c2.profile())


@dataclass(frozen=True)
class DirectComparison:
    direct: HomologyProfile
    crystalline: HomologyProfile
    direct_lift: str

    @property
    def equal(self) -> bool:
        return self.direct == self.crystalline

    def mismatches(self) -> Dict:
        keys = sorted(set(self.direct.groups) | set(self.crystalline.groups))
        return {k: (self.direct.at(*k), self.crystalline.at(*k)) for k in keys if self.direct.at(*k) != self.crystalline.at(*k)}


def genuine_lift(A: FreeDGA, lift: Optional[Derivation] = None) -> tuple[FreeDGA, str]:
    """A square-zero lift of A to Z/p^2: the verbatim one if possible, else ``lift``."""
    lifted, dv = verbatim_lift(A)
    if not any(square_on_generators(lifted, dv).values()):
        return make_algebra(lifted.base, lifted.generators, dv), "verbatim"
    if lift is not None and not any(square_on_generators(lifted, lift.reduced(lifted.base.q)).values()):
        return make_algebra(lifted.base, lifted.generators, lift), "user"
    raise NotVerbatimLiftable("the verbatim lift of d does not square to zero over Z/p^2")


def theorem43_check(A: FreeDGA, lift: Derivation, weight_max: int) -> DirectComparison:
    """Compare the crystalline profile for ``lift`` with HP of a genuine Z/p^2 lift."""
    genuine, how = genuine_lift(A, lift)
    direct = hp_profile(genuine, weight_max)
    cris = hp_cris_obj(A, lift, weight_max).profile()
    return DirectComparison(direct, cris, how)
