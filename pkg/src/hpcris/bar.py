"""Two-sided bar construction B(M, A, N) for a free DGA and weight-graded modules.

Modules are free over the base ring with finitely many basis elements in
each weight, given up to a weight bound W; everything of weight above W is
dropped, which is a quotient module since the generators have weight >= 1.
The normalized bar complex in weight w <= W only sees the given part.

A chain ``(m, a1, ..., as, n)`` has bar slots ``a_i`` that are nonempty
words, simplicial level ``s`` and total degree ``s - |m| - sum|a_i| - |n|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .dga import FreeAlgebra, FreeDGA, Word, apply_derivation, zero_derivation
from .errors import NotAModule
from .ring import BaseRing, HomologyGroup, complex_homology


@dataclass(frozen=True)
class DGModule:
    """A free weight-graded DG module over a free DGA.

    ``action[g]`` is the matrix of the generator ``g`` (right action for
    side ``"right"``, left for ``"left"``), ``d`` the differential.
    """

    ring: BaseRing
    labels: Tuple[str, ...]
    degrees: Tuple[int, ...]
    weights: Tuple[int, ...]
    action: Mapping[str, np.ndarray]
    d: np.ndarray
    side: str = "right"
    weight_bound: int = 0

    @property
    def rank(self) -> int:
        return len(self.labels)

    def act_word(self, word: Word) -> np.ndarray:
        """Matrix of the action of a word (composition of generator actions)."""
        M = self.ring.identity(self.rank)
        # right module: m.(x y) = (m.x).y, so apply x first
        seq = word if self.side == "right" else tuple(reversed(word))
        for g in seq:
            M = self.ring.matmul(self.action[g], M)
        return M

    def act_poly(self, poly: Mapping[Word, int]) -> np.ndarray:
        M = np.zeros((self.rank, self.rank), dtype=np.int64)
        for w, c in poly.items():
            M = M + c * self.act_word(w)
        return self.ring.reduce(M)


def _gen_table(A) -> Tuple[FreeAlgebra, object]:
    if isinstance(A, FreeDGA):
        return A.algebra, A.differential
    return A, zero_derivation(1)


def validate_module(A, M: DGModule) -> None:
    alg, dA = _gen_table(A)
    ring = M.ring
    if ring != alg.base:
        raise NotAModule("module and algebra have different base rings")
    if M.side not in ("left", "right"):
        raise NotAModule(f"side must be 'left' or 'right', got {M.side!r}")
    r = M.rank
    deg = np.array(M.degrees)
    wt = np.array(M.weights)
    for g in alg.generators:
        X = M.action.get(g.name)
        if X is None or X.shape != (r, r):
            raise NotAModule(f"missing or misshapen action matrix for {g.name}")
        for i, j in np.argwhere(ring.reduce(X)):
            if deg[i] != deg[j] + g.degree or wt[i] != wt[j] + g.weight:
                raise NotAModule(f"{g.name} sends {M.labels[j]} to {M.labels[i]}: not homogeneous")
    extra = set(M.action) - {g.name for g in alg.generators}
    if extra:
        raise NotAModule(f"action given for unknown generators {sorted(extra)}")
    dM = ring.reduce(M.d)
    for i, j in np.argwhere(dM):
        if deg[i] != deg[j] + 1 or wt[i] != wt[j]:
            raise NotAModule(f"d sends {M.labels[j]} to {M.labels[i]}: not homogeneous")
    if ring.matmul(dM, dM).any():
        raise NotAModule("module differential does not square to zero")
    # d(m.x) = d(m).x + (-1)^|m| m.d(x)    (right)
    # d(x.n) = d(x).n + (-1)^|x| x.d(n)    (left)
    sgn_m = np.where(deg % 2 == 1, -1, 1)
    for g in alg.generators:
        X = ring.reduce(M.action[g.name])
        dX = M.act_poly(dA.on(g.name))
        if M.side == "right":
            lhs = ring.matmul(dM, X)
            rhs = ring.matmul(X, dM) + dX * sgn_m[None, :]
        else:
            lhs = ring.matmul(dM, X)
            rhs = dX + (-1 if g.degree % 2 else 1) * ring.matmul(X, dM)
        diff = ring.reduce(lhs - rhs)
        # entries landing above the weight bound are truncated away
        diff[wt > M.weight_bound, :] = 0
        if diff.any():
            i, j = map(int, np.argwhere(diff)[0])
            raise NotAModule(f"Leibniz rule fails for {g.name} on {M.labels[j]} (entry at {M.labels[i]})")


def base_module(ring: BaseRing, alg: FreeAlgebra, side: str = "right", weight_bound: int = 0) -> DGModule:
    """The base ring, every generator acting by zero."""
    return DGModule(
        ring,
        ("1",),
        (0,),
        (0,),
        {g.name: ring.zeros(1, 1) for g in alg.generators},
        ring.zeros(1, 1),
        side,
        weight_bound,
    )


def free_module(A, weight_bound: int, side: str = "right") -> DGModule:
    """A itself, truncated above ``weight_bound``."""
    alg, dA = _gen_table(A)
    ring = alg.base
    words = [w for k in range(weight_bound + 1) for w in alg.words_of_weight(k)]
    pos = {w: i for i, w in enumerate(words)}
    r = len(words)
    action = {}
    for g in alg.generators:
        X = ring.zeros(r, r)
        for w, i in pos.items():
            new = w + (g.name,) if side == "right" else (g.name,) + w
            if new in pos:
                X[pos[new], i] = 1
        action[g.name] = X
    d = ring.zeros(r, r)
    for w, i in pos.items():
        for nw, c in apply_derivation(alg, dA, {w: 1}).items():
            d[pos[nw], i] = (d[pos[nw], i] + c) % ring.q
    return DGModule(
        ring,
        tuple("".join(w) or "1" for w in words),
        tuple(alg.degree(w) for w in words),
        tuple(alg.weight(w) for w in words),
        action,
        d,
        side,
        weight_bound,
    )


BarChain = Tuple[int, Tuple[Word, ...], int]


@dataclass
class BarComplex:
    """Weight-graded normalized two-sided bar complex, levels 0..s_max."""

    ring: BaseRing
    s_max: int
    weight_max: int
    basis: Dict[Tuple[int, int], List[BarChain]] = field(default_factory=dict)  # (weight, s) -> chains
    faces: Dict[Tuple[int, int, int], np.ndarray] = field(default_factory=dict)  # (weight, s, i): level s -> s-1
    internal: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)  # (weight, s)
    degrees: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def total(self, weight: int) -> Tuple[List[Tuple[int, BarChain]], np.ndarray, np.ndarray]:
        """Total complex in one weight: (basis, total degrees, differential)."""
        ring = self.ring
        blocks = [(s, self.basis[(weight, s)]) for s in range(self.s_max + 1)]
        offs, basis = {}, []
        for s, chs in blocks:
            offs[s] = len(basis)
            basis += [(s, ch) for ch in chs]
        N = len(basis)
        D = np.zeros((N, N), dtype=np.int64)
        degs = np.concatenate([self.degrees[(weight, s)] for s, _ in blocks]) if N else np.zeros(0, dtype=np.int64)
        for s, chs in blocks:
            n_s = len(chs)
            if not n_s:
                continue
            o = offs[s]
            D[o : o + n_s, o : o + n_s] += self.internal[(weight, s)]
            if s >= 1:
                n_t = len(self.basis[(weight, s - 1)])
                t = offs[s - 1]
                D[t : t + n_t, o : o + n_s] += self._signed_faces(weight, s)
        return basis, degs, ring.reduce(D)

    def _signed_faces(self, weight: int, s: int) -> np.ndarray:
        return self.ring.reduce(sum(self.faces[(weight, s, -1 - i)] for i in range(s + 1)))

    def homology(self, weight: int) -> Dict[int, HomologyGroup]:
        _, degs, D = self.total(weight)
        out = {}
        if not degs.size:
            return out
        for t in range(int(degs.min()), int(degs.max()) + 1):
            cur = np.nonzero(degs == t)[0]
            if not cur.size:
                continue
            lo = np.nonzero(degs == t - 1)[0]
            hi = np.nonzero(degs == t + 1)[0]
            out[t] = complex_homology(self.ring, D[np.ix_(cur, hi)], D[np.ix_(lo, cur)])
        return out

    def check_simplicial(self) -> List[str]:
        """d_i d_j = d_{j-1} d_i for i < j, on the unsigned faces."""
        bad = []
        for (w, s, i), Di in list(self.faces.items()):
            if i < 0 or s < 2:
                continue
            for j in range(i + 1, s + 1):
                lhs = self.ring.matmul(self.faces[(w, s - 1, i)], self.faces[(w, s, j)])
                rhs = self.ring.matmul(self.faces[(w, s - 1, j - 1)], Di)
                if not np.array_equal(lhs, rhs):
                    bad.append(f"weight {w}, level {s}: d{i} d{j} != d{j - 1} d{i}")
        return bad


def two_sided_bar(M: DGModule, A, N: DGModule, s_max: int, weight_max: int | None = None) -> BarComplex:
    """Normalized B(M, A, N) truncated to levels <= s_max and weights <= weight_max."""
    alg, dA = _gen_table(A)
    ring = alg.base
    if M.side != "right" or N.side != "left":
        raise NotAModule("M must be a right module and N a left module")
    validate_module(A, M)
    validate_module(A, N)
    if weight_max is None:
        weight_max = min(M.weight_bound, N.weight_bound)
    if weight_max > min(M.weight_bound, N.weight_bound):
        raise NotAModule(f"modules are only given up to weight {min(M.weight_bound, N.weight_bound)}")
    q = ring.q
    bar = BarComplex(ring, s_max, weight_max)

    def bars(rem: int, s: int):
        if s == 0:
            if rem == 0:
                yield ()
            return
        for w in range(1, rem + 1):
            for word in alg.words_of_weight(w):
                for rest in bars(rem - w, s - 1):
                    yield (word,) + rest

    for w in range(weight_max + 1):
        for s in range(s_max + 1):
            chs = []
            for i in range(M.rank):
                for j in range(N.rank):
                    rem = w - M.weights[i] - N.weights[j]
                    if rem < 0:
                        continue
                    chs += [(i, a, j) for a in bars(rem, s)]
            bar.basis[(w, s)] = chs
            bar.degrees[(w, s)] = np.array(
                [s - M.degrees[i] - sum(alg.degree(x) for x in a) - N.degrees[j] for i, a, j in chs], dtype=np.int64
            )

    Mw = {w: M.act_word(w) for k in range(weight_max + 1) for w in alg.words_of_weight(k)}
    Nw = {w: N.act_word(w) for k in range(weight_max + 1) for w in alg.words_of_weight(k)}
    dM, dN = ring.reduce(M.d), ring.reduce(N.d)

    def par(x: int) -> int:
        return x % 2

    for w in range(weight_max + 1):
        for s in range(s_max + 1):
            src = bar.basis[(w, s)]
            sidx = {ch: k for k, ch in enumerate(src)}
            # internal differential with Koszul signs, items m, s a1, ..., s as, n
            Dint = np.zeros((len(src), len(src)), dtype=np.int64)
            for col, (i, a, j) in enumerate(src):
                for r in np.nonzero(dM[:, i])[0]:
                    Dint[sidx[(int(r), a, j)], col] += dM[r, i]
                left = M.degrees[i]
                for t, word in enumerate(a):
                    left += 1
                    sg = -1 if par(left) else 1
                    for nw, c in apply_derivation(alg, dA, {word: 1}).items():
                        Dint[sidx[(i, a[:t] + (nw,) + a[t + 1 :], j)], col] += sg * c
                    left += alg.degree(word)
                sg = -1 if par(left) else 1
                for r in np.nonzero(dN[:, j])[0]:
                    Dint[sidx[(i, a, int(r))], col] += sg * dN[r, j]
            bar.internal[(w, s)] = ring.reduce(Dint)
            if s == 0:
                continue
            tgt = bar.basis[(w, s - 1)]
            tidx = {ch: k for k, ch in enumerate(tgt)}
            for f in range(s + 1):
                Dpl = np.zeros((len(tgt), len(src)), dtype=np.int64)
                Dsg = np.zeros((len(tgt), len(src)), dtype=np.int64)
                for col, (i, a, j) in enumerate(src):
                    # alternating in f, twisted by the degrees passed over
                    eps = M.degrees[i] + sum(alg.degree(x) + 1 for x in a[:f])
                    if f == s:
                        eps = M.degrees[i] + sum(alg.degree(x) + 1 for x in a[: s - 1]) + 1
                    sg = -1 if par(eps) else 1
                    if f == 0:
                        X = Mw[a[0]]
                        for r in np.nonzero(X[:, i])[0]:
                            Dpl[tidx[(int(r), a[1:], j)], col] += X[r, i]
                    elif f == s:
                        X = Nw[a[-1]]
                        for r in np.nonzero(X[:, j])[0]:
                            Dpl[tidx[(i, a[:-1], int(r))], col] += X[r, j]
                    else:
                        Dpl[tidx[(i, a[: f - 1] + (a[f - 1] + a[f],) + a[f + 1 :], j)], col] += 1
                    Dsg[:, col] = sg * Dpl[:, col]
                bar.faces[(w, s, f)] = ring.reduce(Dpl)
                bar.faces[(w, s, -1 - f)] = ring.reduce(Dsg)
    return bar


def bar_relations(bar: BarComplex, weight: int) -> np.ndarray:
    """Presentation of M (x)_A N in one weight: level-0 chains modulo the image of level 1."""
    return bar._signed_faces(weight, 1) if bar.s_max >= 1 else bar.ring.zeros(len(bar.basis[(weight, 0)]), 0)


def tor_minimal(A, N: DGModule, weight_max: int) -> Dict[Tuple[int, int], HomologyGroup]:
    """Tor^A(base, N) for d = 0 on A and N, from 0 -> (+)_x A(-x) -> A -> base.

    Returns groups keyed by (weight, total degree).
    """
    alg, dA = _gen_table(A)
    ring = alg.base
    if any(dA.on(g.name) for g in alg.generators) or ring.reduce(N.d).any():
        raise ValueError("the minimal-resolution route needs zero differentials")
    out: Dict[Tuple[int, int], HomologyGroup] = {}
    for w in range(weight_max + 1):
        c0 = [j for j in range(N.rank) if N.weights[j] == w]
        c1 = [(g, j) for g in alg.generators for j in range(N.rank) if N.weights[j] + g.weight == w]
        # C1 -> C0, (x, n) -> x.n
        D = np.zeros((len(c0), len(c1)), dtype=np.int64)
        pos0 = {j: i for i, j in enumerate(c0)}
        for col, (g, j) in enumerate(c1):
            X = N.action[g.name]
            for r in np.nonzero(X[:, j])[0]:
                D[pos0[int(r)], col] += X[r, j]
        D = ring.reduce(D)
        deg0 = np.array([-N.degrees[j] for j in c0], dtype=np.int64)
        deg1 = np.array([1 - g.degree - N.degrees[j] for g, j in c1], dtype=np.int64)
        for t in sorted(set(deg0.tolist()) | set(deg1.tolist())):
            i0 = np.nonzero(deg0 == t)[0]
            i1 = np.nonzero(deg1 == t)[0]
            i1_above = np.nonzero(deg1 == t + 1)[0]
            # degree-t part: C0_t (receives C1_{t+1}) plus C1_t (maps to C0_{t-1})
            i0_below = np.nonzero(deg0 == t - 1)[0]
            d_in = np.zeros((len(i0) + len(i1), len(i1_above)), dtype=np.int64)
            d_in[: len(i0)] = D[np.ix_(i0, i1_above)]
            d_out = np.zeros((len(i0_below), len(i0) + len(i1)), dtype=np.int64)
            d_out[:, len(i0) :] = D[np.ix_(i0_below, i1)]
            g = complex_homology(ring, d_in, d_out)
            if not g.is_zero:
                out[(w, t)] = g
    return out
