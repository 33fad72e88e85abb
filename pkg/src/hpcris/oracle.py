"""Independent brute-force routes used to cross-check the main engine.

The homology and chain routes below never call the Smith-form code in
``ring`` or the chain operators in ``cyclic``:

* ``fp_rref`` / ``fp_rank`` / ``fp_nullspace``: row reduction over F_p;
* ``log_image``: log_p of |im M| over Z/p^n (F_p ranks for n <= 2, the
  integer lattice index for larger n);
* ``oracle_homology``: module structure of ker/im from the orders of the
  p^j-torsion subgroups;
* ``enumerate_homology``: literal enumeration of a tiny finite module;
* ``oracle_hh_profile`` / ``oracle_hp_profile``: chains, b, B and L_d rebuilt
  from item-level Koszul signs;
* ``pd_quotient``: R_n^(x)k / J^[2] computed from the ideal generators
  (this one does use the Smith form; it checks the divided-power side).
"""
from __future__ import annotations

from itertools import product
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .ring import BaseRing, HomologyGroup


# ------------------------------------------------------------ F_p linear algebra


def fp_rref(M: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        col = A[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            A[nzr] = (A[nzr] - np.outer(col[nzr], A[r])) % p
        pivots.append(c)
        r += 1
    return A, pivots


def fp_rank(M: np.ndarray, p: int) -> int:
    if M.size == 0:
        return 0
    return len(fp_rref(M, p)[1])


def fp_nullspace(M: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning {x : M x = 0} over F_p."""
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = fp_rref(M, p)
    free = [c for c in range(cols) if c not in set(piv)]
    out = np.zeros((cols, len(free)), dtype=np.int64)
    for t, f in enumerate(free):
        out[f, t] = 1
        for r, pc in enumerate(piv):
            out[pc, t] = (-R[r, f]) % p
    return out


def log_image(ring: BaseRing, M: np.ndarray) -> int:
    """log_p |M (Z/p^n)^cols|."""
    p, n, q = ring.p, ring.n, ring.q
    M = np.array(M, dtype=np.int64) % q
    if M.size == 0:
        return 0
    if n == 1:
        return fp_rank(M, p)
    if n == 2:
        # im M has p^r0 residues mod p; the part inside p(Z/p^2) is p times the
        # span of M0 and of (M K)/p, K lifting ker(M mod p).
        M0 = M % p
        K = fp_nullspace(M0, p)
        r0 = M.shape[1] - K.shape[1]
        MK = (M @ K) % q
        assert not (MK % p).any()
        return r0 + fp_rank(np.concatenate([MK // p, M0], axis=1), p)
    return _log_image_lattice(ring, M)


def _log_image_lattice(ring: BaseRing, M: np.ndarray) -> int:
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import hermite_normal_form

    rows = M.shape[0]
    L = Matrix(np.concatenate([M, ring.q * np.eye(rows, dtype=np.int64)], axis=1).tolist())
    H = hermite_normal_form(L, D=ZZ(ring.q) ** rows)
    index = 1
    for i in range(H.shape[0]):
        index *= int(H[i, i])
    v = 0
    while index % ring.p == 0:
        index //= ring.p
        v += 1
    assert index == 1
    return ring.n * rows - v


def oracle_homology(ring: BaseRing, d_in: np.ndarray, d_out: np.ndarray) -> HomologyGroup:
    """ker(d_out)/im(d_in) from log_p |H[p^j]| = n c - log_p |im Phi_j|,
    Phi_j = [[p^j, -d_in], [d_out, 0]]."""
    n, p, q = ring.n, ring.p, ring.q
    d_in = np.array(d_in, dtype=np.int64) % q
    d_out = np.array(d_out, dtype=np.int64) % q
    c = d_in.shape[0]
    if c == 0:
        return HomologyGroup()
    k, r = d_in.shape[1], d_out.shape[0]
    sizes = [0]
    for j in range(1, n + 1):
        top = np.concatenate([(p**j % q) * np.eye(c, dtype=np.int64), (-d_in) % q], axis=1)
        bot = np.concatenate([d_out, np.zeros((r, k), dtype=np.int64)], axis=1)
        Phi = np.concatenate([top, bot], axis=0)
        sizes.append(n * c - log_image(ring, Phi))
    at_least = [sizes[j] - sizes[j - 1] for j in range(1, n + 1)]  # #summands with exponent >= j
    exps = []
    for j in range(1, n + 1):
        nxt = at_least[j] if j < n else 0
        exps += [j] * (at_least[j - 1] - nxt)
    return HomologyGroup.from_exponents(n, exps)


def enumerate_homology(ring: BaseRing, d_in: np.ndarray, d_out: np.ndarray, limit: int = 200_000) -> HomologyGroup:
    """Literal enumeration of cycles and boundaries; only for tiny modules."""
    q, p, n = ring.q, ring.p, ring.n
    c = d_in.shape[0]
    if q**c > limit:
        raise ValueError("module too large to enumerate")
    if c == 0:
        return HomologyGroup()
    allx = np.array(list(product(range(q), repeat=c)), dtype=np.int64)
    Z = allx[~((allx @ np.array(d_out, dtype=np.int64).T) % q).any(axis=1)] if d_out.shape[0] else allx
    # boundaries: subgroup generated by the columns of d_in
    bnd = {tuple([0] * c)}
    frontier = list(bnd)
    gens = [tuple(int(v) for v in col) for col in (np.array(d_in, dtype=np.int64) % q).T]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % q for a, b in zip(x, g))
                if y not in bnd:
                    bnd.add(y)
                    new.append(y)
        frontier = new
    order_B = len(bnd)

    def logp(x: int) -> int:
        v = 0
        while x > 1:
            x //= p
            v += 1
        return v

    sizes = [0]
    for j in range(1, n + 1):
        cnt = sum(1 for z in Z if tuple(int(v) for v in (p**j * z) % q) in bnd)
        sizes.append(logp(cnt // order_B))
    at_least = [sizes[j] - sizes[j - 1] for j in range(1, n + 1)]
    exps = []
    for j in range(1, n + 1):
        nxt = at_least[j] if j < n else 0
        exps += [j] * (at_least[j - 1] - nxt)
    return HomologyGroup.from_exponents(n, exps)


# ------------------------------------------------------------ naive cyclic complex


def _koszul(degs: Sequence[int], perm: Sequence[int]) -> int:
    """Sign of listing items in the order ``perm`` (old indices)."""
    s = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                s += degs[perm[a]] * degs[perm[b]]
    return -1 if s % 2 else 1


class NaiveCyclic:
    """Normalized cyclic chains with signs from explicit item permutations.

    A chain ``(a0, a1, ..., am)`` is the item list ``a0, s, a1, ..., s, am``
    where ``s`` is a formal symbol of degree 1.
    """

    def __init__(self, gens: Sequence[Tuple[str, int, int]], q: int):
        self.gens = {g: (deg, wt) for g, deg, wt in gens}
        self.order = [g for g, _, _ in gens]
        self.q = q

    def deg(self, w) -> int:
        return sum(self.gens[x][0] for x in w)

    def words(self, weight: int) -> List[tuple]:
        if weight == 0:
            return [()]
        out = []
        for g in self.order:
            wt = self.gens[g][1]
            if wt <= weight:
                out += [(g,) + rest for rest in self.words(weight - wt)]
        return out

    def chains(self, weight: int) -> List[tuple]:
        out = []

        def bars(rem):
            if rem == 0:
                yield ()
                return
            for w in range(1, rem + 1):
                for word in self.words(w):
                    for rest in bars(rem - w):
                        yield (word,) + rest

        for w0 in range(weight + 1):
            for a0 in self.words(w0):
                for bs in bars(weight - w0):
                    out.append((a0,) + bs)
        return sorted(set(out))

    def total_degree(self, ch) -> int:
        return len(ch) - 1 - sum(self.deg(w) for w in ch)

    def _items(self, ch):
        degs = [self.deg(ch[0])]
        for w in ch[1:]:
            degs += [1, self.deg(w)]
        return degs

    def b(self, ch) -> Dict[tuple, int]:
        out: Dict[tuple, int] = {}
        m = len(ch) - 1
        if m == 0:
            return out
        degs = self._items(ch)
        for i in range(m):
            # remove the s in item position 2i+1, merging a_i and a_{i+1}
            sign = -1 if sum(degs[: 2 * i + 1]) % 2 else 1
            new = ch[:i] + (ch[i] + ch[i + 1],) + ch[i + 2 :]
            out[new] = (out.get(new, 0) + sign) % self.q
        L = len(degs)
        perm = [L - 2, L - 1] + list(range(L - 2))
        sign = -_koszul(degs, perm)
        new = (ch[m] + ch[0],) + ch[1:m]
        out[new] = (out.get(new, 0) + sign) % self.q
        return out

    def B(self, ch) -> Dict[tuple, int]:
        out: Dict[tuple, int] = {}
        if ch[0] == ():
            return out
        m = len(ch) - 1
        sdegs = [self.deg(w) + 1 for w in ch]
        for i in range(m + 1):
            perm = list(range(i, m + 1)) + list(range(i))
            new = ((),) + ch[i:] + ch[:i]
            out[new] = (out.get(new, 0) + _koszul(sdegs, perm)) % self.q
        return out

    def d_word(self, D: Dict[str, Dict[tuple, int]], r: int, w) -> Dict[tuple, int]:
        out: Dict[tuple, int] = {}
        left = 0
        for t, x in enumerate(w):
            sign = -1 if (r * left) % 2 else 1
            for nw, c in D.get(x, {}).items():
                key = w[:t] + tuple(nw) + w[t + 1 :]
                out[key] = (out.get(key, 0) + sign * c) % self.q
            left += self.gens[x][0]
        return {k: v for k, v in out.items() if v}

    def L(self, D, r: int, ch) -> Dict[tuple, int]:
        """Minus the Koszul-signed Leibniz action (the engine's convention)."""
        out: Dict[tuple, int] = {}
        degs = self._items(ch)
        for i, w in enumerate(ch):
            pos = 0 if i == 0 else 2 * i
            sign = -1 if (r * sum(degs[:pos])) % 2 else 1
            for nw, c in self.d_word(D, r, w).items():
                new = ch[:i] + (nw,) + ch[i + 1 :]
                out[new] = (out.get(new, 0) - sign * c) % self.q
        return out

    def matrix(self, basis, fn) -> np.ndarray:
        idx = {ch: i for i, ch in enumerate(basis)}
        M = np.zeros((len(basis), len(basis)), dtype=np.int64)
        for j, ch in enumerate(basis):
            for new, c in fn(ch).items():
                if c % self.q:
                    M[idx[new], j] = (M[idx[new], j] + c) % self.q
        return M


def _naive_from_dga(A) -> Tuple[NaiveCyclic, Dict[str, Dict[tuple, int]]]:
    gens = [(g.name, g.degree, g.weight) for g in A.generators]
    D = {name: dict(poly) for name, poly in A.differential.values.items()}
    return NaiveCyclic(gens, A.base.q), D


def oracle_hh_profile(A, weight_max: int) -> Dict[Tuple[int, int], HomologyGroup]:
    nc, D = _naive_from_dga(A)
    ring = A.base
    out = {}
    for w in range(weight_max + 1):
        basis = nc.chains(w)
        M = (nc.matrix(basis, nc.b) + nc.matrix(basis, lambda ch: nc.L(D, 1, ch))) % ring.q
        degs = np.array([nc.total_degree(ch) for ch in basis])
        for t in sorted(set(degs.tolist())):
            cur = np.nonzero(degs == t)[0]
            lo = np.nonzero(degs == t - 1)[0]
            hi = np.nonzero(degs == t + 1)[0]
            out[(w, t)] = oracle_homology(ring, M[np.ix_(cur, hi)], M[np.ix_(lo, cur)])
    return out


def oracle_hp_profile(A, weight_max: int) -> Dict[Tuple[int, int], HomologyGroup]:
    nc, D = _naive_from_dga(A)
    ring = A.base
    out = {}
    for w in range(weight_max + 1):
        basis = nc.chains(w)
        M = (nc.matrix(basis, nc.b) + nc.matrix(basis, nc.B) + nc.matrix(basis, lambda ch: nc.L(D, 1, ch))) % ring.q
        par = np.array([nc.total_degree(ch) % 2 for ch in basis])
        ev, od = np.nonzero(par == 0)[0], np.nonzero(par == 1)[0]
        out[(w, 0)] = oracle_homology(ring, M[np.ix_(ev, od)], M[np.ix_(od, ev)])
        out[(w, 1)] = oracle_homology(ring, M[np.ix_(od, ev)], M[np.ix_(ev, od)])
    return out


# ------------------------------------------------------------ divided powers


def pd_quotient(ring: BaseRing, n: int, k: int):
    """R_n^(x)k / J^[2] from ideal generators, plus the images of 1, x_j^[m].

    Returns (quotient homology group, whether 1 and the x_j^[m] span it).
    J is generated by g = x_j^[l] - x_0^[l]; J^[2] by the products g g' and
    the divided powers g^[m], m >= 2.
    """
    from .ring import smith_profile

    q = ring.q
    monos = list(product(range(n + 1), repeat=k))
    pos = {e: i for i, e in enumerate(monos)}
    N = len(monos)

    def mul(u: Dict[tuple, int], v: Dict[tuple, int]) -> Dict[tuple, int]:
        out: Dict[tuple, int] = {}
        for e1, c1 in u.items():
            for e2, c2 in v.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if max(e) > n:
                    continue
                c = c1 * c2
                for a, b in zip(e1, e2):
                    c *= comb(a + b, a)
                out[e] = (out.get(e, 0) + c) % q
        return {e: c for e, c in out.items() if c}

    def x(j, l):
        e = [0] * k
        e[j] = l
        return {tuple(e): 1} if l <= n else {}

    def gamma_power(j, l, a):
        """(x_j^[l])^[a] = (al)! / (a! (l!)^a) x_j^[al]."""
        from math import factorial

        if a * l > n:
            return {}
        c = factorial(a * l) // (factorial(a) * factorial(l) ** a)
        return {e: c % q for e, v in x(j, a * l).items()} if c % q else {}

    gens = [(j, l) for j in range(1, k) for l in range(1, n + 1)]
    rels: List[Dict[tuple, int]] = []
    for (j, l) in gens:
        g = {**x(j, l)}
        for e, c in x(0, l).items():
            g[e] = (g.get(e, 0) - c) % q
        for (j2, l2) in gens:
            g2 = {**x(j2, l2)}
            for e, c in x(0, l2).items():
                g2[e] = (g2.get(e, 0) - c) % q
            rels.append(mul(g, g2))
        for m in range(2, 2 * n // l + 1):
            # (u - v)^[m] = sum_a u^[a] (-v)^[m-a]
            tot: Dict[tuple, int] = {}
            for a in range(m + 1):
                term = mul(gamma_power(j, l, a) if a else {(0,) * k: 1}, gamma_power(0, l, m - a) if m - a else {(0,) * k: 1})
                sgn = -1 if (m - a) % 2 else 1
                for e, c in term.items():
                    tot[e] = (tot.get(e, 0) + sgn * c) % q
            rels.append({e: c for e, c in tot.items() if c})
    cols = []
    for r in rels:
        for e in monos:
            v = mul(r, {e: 1})
            if v:
                col = np.zeros(N, dtype=np.int64)
                for e2, c in v.items():
                    col[pos[e2]] = c
                cols.append(col)
    S = np.stack(cols, axis=1) if cols else np.zeros((N, 0), dtype=np.int64)
    prof = list(smith_profile(ring, S)) if S.shape[1] else []
    prof += [ring.n] * (N - len(prof))
    quotient = HomologyGroup.from_exponents(ring.n, prof)
    decl = [x(0, 0)] + [x(j, m) for j in range(k) for m in range(1, n + 1)]
    D = np.zeros((N, len(decl)), dtype=np.int64)
    for t, v in enumerate(decl):
        for e, c in v.items():
            D[pos[e], t] = c
    spans = all(v == 0 for v in smith_profile(ring, np.concatenate([S, D], axis=1)))
    return quotient, spans, (S, D, pos)


def in_span(ring: BaseRing, S: np.ndarray, v: np.ndarray) -> bool:
    from .ring import smith_profile

    return smith_profile(ring, S) == smith_profile(ring, np.concatenate([S, v.reshape(-1, 1)], axis=1))
