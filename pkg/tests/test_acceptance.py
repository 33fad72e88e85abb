"""Acceptance criteria 1-10, one PASS/FAIL line each (shown in the terminal summary).

Every check here is exact: matrices are compared entrywise over Z/p^n and
homology is compared as elementary-divisor profiles.
"""
import time

import numpy as np
import pytest

from hpcris.cli import main
from hpcris.cris import compare_lifts, genuine_lift, hp_cris_obj, reduction_matches, theorem43_check
from hpcris.cyclic import build_cyclic_bar, cartan_residuals
from hpcris.dga import make_algebra, verbatim_lift
from hpcris.errors import DifferentialNotSquareZero
from hpcris.oracle import enumerate_homology, fp_rank, oracle_hh_profile, oracle_homology, oracle_hp_profile
from hpcris.pd_cyclic import binomial_law, check_binomial_law, pd_module_report, printed_binomial_law
from hpcris.periodic import fold, hh_profile, hp_profile
from hpcris.ring import BaseRing, HomologyGroup, complex_homology, smith_decompose
from hpcris.suite import lift_instances, random_derivations, random_matrix, suite_instances, twisted_lift

SEED = 20240601
WEIGHT_MAX = 4
ENUM_LIMIT = 200_000


@pytest.fixture
def record(request):
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def rec(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {detail}"
        print(line)
        lines.append((n, line))

    return rec


@pytest.fixture(scope="module")
def instances():
    return suite_instances(SEED, 20)


@pytest.fixture(scope="module")
def slices(instances):
    return {inst.name: build_cyclic_bar(inst.algebra, WEIGHT_MAX, check=False) for inst in instances}


@pytest.fixture(scope="module")
def lifts():
    return lift_instances(SEED, 10)


def _nonzero(profile):
    return {k: g for k, g in profile.items() if not g.is_zero}


def test_criterion_01_mixed_identities(record, instances):
    t0 = time.perf_counter()
    bad = []
    nslices = 0
    for inst in instances:
        A = inst.algebra
        assert A.base.p in (3, 5) and A.base.n in (1, 2)
        assert len(A.generators) <= 3 and all(g.weight <= 3 for g in A.generators)
        for sl in build_cyclic_bar(A, WEIGHT_MAX):
            r = sl.ring
            nslices += 1
            for name, M in (
                ("b^2", r.matmul(sl.b, sl.b)),
                ("B^2", r.matmul(sl.B, sl.B)),
                ("bB+Bb", r.reduce(r.matmul(sl.b, sl.B) + r.matmul(sl.B, sl.b))),
            ):
                if M.any():
                    bad.append((inst.name, sl.weight, name))
    elapsed = time.perf_counter() - t0
    nontrivial = sum(not inst.algebra.differential.is_zero() for inst in instances)
    ok = not bad and elapsed < 60 and len(instances) >= 20
    record(1, ok, f"b^2 = B^2 = bB+Bb = 0 on {nslices} slices of {len(instances)} algebras ({nontrivial} with d != 0), {elapsed:.1f}s")
    assert not bad, bad[:5]
    assert elapsed < 60
    assert nontrivial >= 10


def test_criterion_02_cartan(record, instances, slices):
    rng = np.random.default_rng([SEED, 2])
    bad = []
    nder = 0
    for inst in instances:
        A = inst.algebra
        for D in random_derivations(A, rng, 3):
            nder += 1
            for sl in slices[inst.name]:
                for key, M in cartan_residuals(sl, A.algebra, A.differential, D).items():
                    if M.any():
                        bad.append((inst.name, D.degree, sl.weight, key))
    record(2, not bad, f"Cartan relation exact in u^-1, u^0, u^1 for {nder} derivations on {len(instances)} algebras")
    assert not bad, bad[:5]
    assert nder >= 3 * len(instances)


def test_criterion_03_cris_square_zero(record, lifts):
    bad, detected, with_D = [], 0, 0
    for li in lifts:
        cc = hp_cris_obj(li.algebra, li.lift, WEIGHT_MAX)
        for fc in cc.folded:
            if cc.ring.matmul(fc.matrix, fc.matrix).any():
                bad.append((li.name, fc.weight))
        if not cc.obstruction.is_zero():
            with_D += 1
            # the same complex without p*iota_D must fail somewhere
            try:
                for sl in cc.slices:
                    fold(sl, ("b", "B", "L_dt"))
            except DifferentialNotSquareZero:
                detected += 1
    names = [li.name for li in lifts]
    ok = not bad and len(lifts) >= 10 and "wuv[p=3]" in names and detected == with_D >= 1
    record(3, ok, f"(b+B+L_dt+p iota_D)^2 = 0 on {len(lifts)} lifts; dropping p iota_D detected on {detected}/{with_D} with D != 0")
    assert not bad
    assert len(lifts) >= 10 and "wuv[p=3]" in names
    assert detected == with_D >= 1


def test_criterion_04_lift_change(record, lifts):
    rng = np.random.default_rng([SEED, 4])
    npairs, bad = 0, []
    for li in lifts:
        A = li.algebra
        for other in (verbatim_lift(A)[1], twisted_lift(A, rng)):
            cmp = compare_lifts(A, li.lift, other, WEIGHT_MAX)
            npairs += 1
            p = A.base.p
            if not all(np.array_equal(phi % p, np.eye(phi.shape[0], dtype=np.int64)) for phi in cmp.phi):
                bad.append((li.name, "phi != id mod p"))
            if cmp.profile1 != cmp.profile2:
                bad.append((li.name, "profiles differ"))
    record(4, not bad and npairs >= 5, f"id + p iota_D' intertwines and is id mod p for {npairs} lift pairs; profiles equal")
    assert not bad
    assert npairs >= 5


def test_criterion_05_direct_comparison(record, lifts):
    t0 = time.perf_counter()
    used, bad = 0, []
    for li in lifts:
        A = li.algebra
        try:
            _, how = genuine_lift(A)
        except Exception:
            continue
        if li.lift == verbatim_lift(A)[1]:
            continue
        v = theorem43_check(A, li.lift, WEIGHT_MAX)
        used += 1
        if not (v.equal and v.direct_lift == "verbatim"):
            bad.append((li.name, v.mismatches()))
    elapsed = time.perf_counter() - t0
    ok = not bad and used >= 3 and elapsed < 300
    record(5, ok, f"crystalline profile = HP of the verbatim Z/p^2 lift on {used} twisted lifts, {elapsed:.1f}s")
    assert not bad, bad[:3]
    assert used >= 3 and elapsed < 300


BASES = [BaseRing(p, e) for p in (2, 3, 5) for e in (1, 2)]


def test_criterion_06_divided_power_module(record):
    t0 = time.perf_counter()
    bad = []
    for base in BASES:
        for n in range(1, 6):
            rep = pd_module_report(n, 5, base)
            if [row["rank"] for row in rep["rank_table"]] != [1 + k * n for k in range(1, 6)]:
                bad.append((str(base), n, "rank"))
            for key in ("basis: invertible change of basis", "products and structure maps match centered model"):
                if rep[key] is not True:
                    bad.append((str(base), n, key))
            fil, tfil = rep["Fil"], rep["Fil~"]
            if not all(fil["checks"].values()):
                bad.append((str(base), n, "Fil"))
            for k in range(1, 6):
                if fil["gr_ranks"][str(k)][: n + 1] != [1] + [k] * n:
                    bad.append((str(base), n, k, "gr Fil"))
                if tfil["gr_ranks"][str(k)] != [k] * (n * (n + 1)):
                    bad.append((str(base), n, k, "gr Fil~"))
            if tfil["length"] != n * (n + 1) or not all(tfil["checks"].values()):
                bad.append((str(base), n, "Fil~"))
        if check_binomial_law(base, 8, 3, binomial_law):
            bad.append((str(base), "corrected binomial law"))
    elapsed = time.perf_counter() - t0
    stated = {str(b): len(check_binomial_law(b, 8, 3, printed_binomial_law)) for b in BASES}
    clauses_ok = not bad and elapsed < 120
    detail = (
        f"rank, basis, Fil, Fil~ (length n(n+1)) pass for k,n <= 5 on {len(BASES)} bases, {elapsed:.1f}s; "
        f"law as stated, C(r+l,l) x_i^[r+l] + C(r+l-1,l) x_j^[r+l], fails on l+r <= 8 "
        f"({', '.join(f'{b}: {c} pairs' for b, c in stated.items())}); C(r+l-1,l-1) in place of C(r+l,l) holds"
    )
    record(6, clauses_ok and not any(stated.values()), detail)
    assert not bad, bad[:5]
    assert elapsed < 120


@pytest.mark.xfail(strict=True, reason="the stated first coefficient C(r+l, l) is wrong; C(r+l-1, l-1) is correct")
def test_criterion_06_stated_binomial_law():
    for base in BASES:
        assert check_binomial_law(base, 8, 3, printed_binomial_law) == []


def test_criterion_07_oracle(record, instances, slices):
    bad = []
    ncomplex = nenum = 0
    for inst in instances:
        A = inst.algebra
        sls = slices[inst.name]
        if _nonzero(hh_profile(A, WEIGHT_MAX, sls).groups) != _nonzero(oracle_hh_profile(A, WEIGHT_MAX)):
            bad.append((inst.name, "HH"))
        if _nonzero(hp_profile(A, WEIGHT_MAX, sls).groups) != _nonzero(oracle_hp_profile(A, WEIGHT_MAX)):
            bad.append((inst.name, "HP"))
        for sl in sls:
            fc = fold(sl, ("b", "B", "L_d"))
            M, ring = fc.matrix, fc.ring
            for par, (src, tgt) in enumerate(((fc.even, fc.odd), (fc.odd, fc.even))):
                d_in, d_out = M[np.ix_(src, tgt)], M[np.ix_(tgt, src)]
                h = complex_homology(ring, d_in, d_out)
                ncomplex += 1
                if h != oracle_homology(ring, d_in, d_out):
                    bad.append((inst.name, sl.weight, par, "rank route"))
                if ring.q ** (len(src) + len(tgt)) <= ENUM_LIMIT:
                    nenum += 1
                    if h != enumerate_homology(ring, d_in, d_out):
                        bad.append((inst.name, sl.weight, par, "enumeration"))
    record(
        7,
        not bad,
        f"HH/HP profiles and {ncomplex} folded complexes match the independent oracle; {nenum} small enough for literal enumeration",
    )
    assert not bad, bad[:5]


def test_criterion_08_snf(record):
    rng = np.random.default_rng([SEED, 8])
    bad = []
    rings = (BaseRing(3, 2), BaseRing(5, 2))
    for k in range(100):
        ring = rings[k % 2]
        r, c = (int(x) for x in rng.integers(1, 9, size=2))
        M = random_matrix(rng, ring, r, c)
        sd = smith_decompose(ring, M)
        if not np.array_equal(ring.matmul(ring.matmul(sd.U, sd.D), sd.V), ring.reduce(M)):
            bad.append((k, "UDV != M"))
        # a matrix over Z/p^n is invertible iff it is invertible mod p
        if fp_rank(sd.U, ring.p) != r or fp_rank(sd.V, ring.p) != c:
            bad.append((k, "U or V singular"))
        off = sd.D.copy()
        np.fill_diagonal(off, 0)
        if off.any():
            bad.append((k, "D not diagonal"))
    record(8, not bad, "U D V = M with invertible U, V on 100 random matrices up to 8x8 over Z/9 and Z/25")
    assert not bad, bad[:5]


def test_criterion_09_trivial_anchors(record, instances, lifts):
    bad = []
    for ring in (BaseRing(2, 1), BaseRing(3, 1), BaseRing(3, 2), BaseRing(5, 2), BaseRing(2, 3)):
        A = make_algebra(ring, [])
        anchor = {(0, 0): HomologyGroup((), 1)}
        if hh_profile(A, 3).nonzero() != anchor or hp_profile(A, 3).nonzero() != anchor:
            bad.append(str(ring))
    for inst in instances:
        hp = hp_profile(inst.algebra, WEIGHT_MAX)
        if hp.at(0, 0) != HomologyGroup((), 1) or not hp.at(0, 1).is_zero:
            bad.append(inst.name)
    for li in lifts:
        prof = hp_cris_obj(li.algebra, li.lift, 2).profile()
        if prof.at(0, 0) != HomologyGroup((), 1) or not prof.at(0, 1).is_zero:
            bad.append(li.name)
    record(9, not bad, "base ring HH = HP = base in degree 0; weight-0 HP = base (even), 0 (odd) for every instance")
    assert not bad


def test_criterion_10_determinism(record, tmp_path, lifts):
    from pathlib import Path

    data = Path(__file__).resolve().parent.parent / "data"
    runs = {
        "check": ["check", "--seed", str(SEED)],
        "hpcris": ["hpcris", str(data / "wuv.json"), str(data / "wuv_lift.json")],
        "pd": ["pd", "--n", "3", "--k-max", "4", "--p", "2", "--ring-n", "2"],
        "hp": ["hp", str(data / "xy_square.json")],
    }
    same = {}
    for name, argv in runs.items():
        texts = []
        for i in range(2):
            out = tmp_path / f"{name}{i}.json"
            main(argv + ["--out", str(out)])
            texts.append(out.read_bytes())
        same[name] = texts[0] == texts[1]
    ok = all(same.values())
    record(10, ok, f"byte-identical reruns for {', '.join(same)}")
    assert ok, same
