"""Exact arithmetic and dense linear algebra over the chain rings Z/p^n.

Matrices are plain ``numpy`` int64 arrays whose entries are kept reduced
into ``[0, p^n)``.  Column-vector convention throughout: a map ``R^a -> R^b``
is a ``b x a`` array.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CompositionNotZero


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class BaseRing:
    """The ring Z/p^n; ``n == 1`` is the prime field F_p."""

    p: int
    n: int = 1

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.n < 1:
            raise ValueError(f"n={self.n} must be >= 1")

    @property
    def q(self) -> int:
        return self.p**self.n

    @cached_property
    def _val_table(self) -> np.ndarray:
        table = np.full(self.q, self.n, dtype=np.int64)
        for x in range(1, self.q):
            v = 0
            while x % self.p == 0:
                x //= self.p
                v += 1
            table[x * self.p**v] = v
        return table

    def reduce(self, x):
        if isinstance(x, np.ndarray):
            return np.mod(x, self.q).astype(np.int64, copy=False)
        return x % self.q

    def valuation(self, x):
        """p-adic valuation of ``x``; returns ``n`` for zero. Works elementwise."""
        return self._val_table[self.reduce(x)]

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise ZeroDivisionError(f"{x} is not a unit mod {self.q}")
        return pow(int(x), -1, self.q)

    def residue(self, n: int) -> "BaseRing":
        """The quotient Z/p^n for n <= self.n."""
        return BaseRing(self.p, n)

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=np.int64)

    def identity(self, size: int) -> np.ndarray:
        return np.eye(size, dtype=np.int64)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = self.reduce(a)
        b = self.reduce(b)
        # float64 BLAS is exact while every partial sum stays below 2^53
        if a.shape[1] * (self.q - 1) ** 2 < 2**52:
            return np.mod(a.astype(np.float64) @ b.astype(np.float64), self.q).astype(np.int64)
        return np.mod(a @ b, self.q)

    def matrix(self, entries) -> np.ndarray:
        return self.reduce(np.array(entries, dtype=np.int64))

    def __str__(self):
        return f"Z/{self.p}^{self.n}" if self.n > 1 else f"F_{self.p}"


def p_valuation(ring: BaseRing, x: int) -> int:
    return int(ring.valuation(x))


@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ D @ V == M`` with U, V invertible and D diagonal with entries p^e or 0."""

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    profile: tuple[int, ...]


def _smith(ring: BaseRing, M: np.ndarray, track: bool):
    A = ring.reduce(np.array(M, dtype=np.int64, copy=True))
    rows, cols = A.shape
    U = ring.identity(rows) if track else None
    V = ring.identity(cols) if track else None
    q, p, n = ring.q, ring.p, ring.n
    vals = []
    for t in range(min(rows, cols)):
        sub = A[t:, t:]
        if not sub.any():
            break
        sv = ring.valuation(sub)
        v = int(sv.min())
        i, j = divmod(int(np.argmax(sv.ravel() == v)), sub.shape[1])
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
            if track:
                U[:, [t, i]] = U[:, [i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            if track:
                V[[t, j]] = V[[j, t]]
        pv = p**v
        unit = int(A[t, t]) // pv
        if unit != 1:
            A[t] = (A[t] * ring.inverse(unit)) % q
            if track:
                U[:, t] = (U[:, t] * unit) % q
        c = A[t + 1 :, t] // pv
        if c.any():
            A[t + 1 :] = (A[t + 1 :] - np.outer(c, A[t])) % q
            if track:
                U[:, t] = (U[:, t] + U[:, t + 1 :] @ c) % q
        r = A[t, t + 1 :] // pv
        if r.any():
            A[t, t + 1 :] = 0
            if track:
                V[t] = (V[t] + r @ V[t + 1 :]) % q
        vals.append(v)
    vals.extend([n] * (min(rows, cols) - len(vals)))
    return A, U, V, tuple(vals)


def smith_decompose(ring: BaseRing, M: np.ndarray) -> SmithDecomposition:
    """Diagonalize M by invertible row/column operations.

    Pivots on an entry of minimal valuation (ties: lowest row, then column),
    so the diagonal valuations come out non-decreasing.
    """
    D, U, V, profile = _smith(ring, M, track=True)
    return SmithDecomposition(U, D, V, profile)


def smith_profile(ring: BaseRing, M: np.ndarray) -> tuple[int, ...]:
    """Diagonal valuations only (no transforms); ``n`` marks zero entries."""
    return _smith(ring, M, track=False)[3]


@dataclass(frozen=True)
class HomologyGroup:
    """Canonical form of a finite Z/p^n-module: sum of Z/p^e plus free summands.

    ``divisors`` holds the torsion exponents 1 <= e < n (sorted); summands
    Z/p^n are counted by ``free_rank``.
    """

    divisors: tuple[int, ...] = ()
    free_rank: int = 0

    @classmethod
    def from_exponents(cls, n: int, exponents) -> "HomologyGroup":
        c = Counter(int(e) for e in exponents if e > 0)
        if any(e > n for e in c):
            raise ValueError("exponent exceeds ring length")
        return cls(tuple(sorted(e for e in c.elements() if e < n)), c.get(n, 0))

    def exponents(self, n: int) -> list[int]:
        return sorted(list(self.divisors) + [n] * self.free_rank)

    @property
    def num_summands(self) -> int:
        return len(self.divisors) + self.free_rank

    def length(self, n: int) -> int:
        """Composition length, i.e. log_p of the order."""
        return sum(self.divisors) + n * self.free_rank

    @property
    def is_zero(self) -> bool:
        return self.num_summands == 0

    def to_dict(self) -> dict:
        return {"divisors": list(self.divisors), "free_rank": self.free_rank}

    def describe(self, ring: BaseRing) -> str:
        if self.is_zero:
            return "0"
        parts = [f"Z/{ring.p}^{e}" for e in self.divisors]
        if self.free_rank:
            parts.append(f"({ring})^{self.free_rank}")
        return " + ".join(parts)


def complex_homology(ring: BaseRing, d_in: np.ndarray, d_out: np.ndarray) -> HomologyGroup:
    """ker(d_out) / im(d_in) for ``C_prev --d_in--> C --d_out--> C_next``.

    ``d_in`` is ``rank(C) x rank(C_prev)`` and ``d_out`` is
    ``rank(C_next) x rank(C)``; either may have zero rows or columns.
    """
    d_in = ring.reduce(np.asarray(d_in, dtype=np.int64))
    d_out = ring.reduce(np.asarray(d_out, dtype=np.int64))
    c = d_in.shape[0]
    if d_out.shape[1] != c:
        raise ValueError(f"shape mismatch: d_in {d_in.shape}, d_out {d_out.shape}")
    comp = ring.matmul(d_out, d_in)
    if comp.any():
        i, j = map(int, np.argwhere(comp)[0])
        raise CompositionNotZero(f"d_out @ d_in has nonzero entry {int(comp[i, j])} at ({i}, {j})")
    n = ring.n
    if c == 0:
        return HomologyGroup()
    # In coordinates y = V x the kernel of d_out = U D V splits as a sum of
    # p^(n - f_i) R, each isomorphic to R / p^(f_i).
    _, _, V, prof = _smith(ring, d_out, track=True)
    f = np.full(c, n, dtype=np.int64)
    f[: len(prof)] = prof
    keep = np.nonzero(f > 0)[0]
    if keep.size == 0:
        return HomologyGroup()
    f = f[keep]
    if d_in.shape[1]:
        G = ring.matmul(V, d_in)[keep]
        G = (G // (ring.p ** (n - f))[:, None]) % ring.q
    else:
        G = ring.zeros(keep.size, 0)
    pres = np.concatenate([np.diag(ring.reduce(ring.p**f)), G], axis=1)
    return HomologyGroup.from_exponents(n, smith_profile(ring, pres))
