import random

import pytest
from hypothesis import given, settings, strategies as st

from f2hom.ainfty import ground_algebra, truncated_polynomial
from f2hom.chain import cohomology, cohomology_dims
from f2hom.f2linalg import bits_of
from f2hom.random_instances import coconnective_algebras, random_twisted_complex
from f2hom.twisted import (
    TwistedComplex,
    TwistedError,
    coconnective_witness,
    differential_terms,
    end_complex,
    mc_check,
    mc_residue,
)

ALGS = coconnective_algebras()


def test_zero_delta_passes():
    for s in ALGS.values():
        assert mc_check(TwistedComplex(s, (2, 1, 1), {})).ok


def test_degree_and_triangularity_enforced():
    s = ALGS["u2"]
    with pytest.raises(TwistedError):
        TwistedComplex(s, (1, 1), {(1, 0): {(0, 0): 0b10}})
    with pytest.raises(TwistedError):
        TwistedComplex(s, (1, 1), {(0, 1): {(0, 0): 0b01}})  # unit has degree 0, not 2


def test_two_term_square_zero():
    s = ALGS["u2"]  # u² = 0
    t = TwistedComplex(s, (1, 1), {(0, 1): {(0, 0): 0b10}})
    assert mc_check(t).ok


def test_mc_violation_detected_with_block():
    s = ALGS["u3"]  # u² ≠ 0
    t = TwistedComplex(s, (1, 1, 1), {(0, 1): {(0, 0): 0b010}, (1, 2): {(0, 0): 0b010}})
    r = mc_check(t)
    assert not r.ok
    assert r.violations[0][:2] == (0, 2)


def test_triple_product_enters_mc():
    s = ALGS["triple"]
    u = 1 << s.index("u")
    deltas = {(0, 1): {(0, 0): u}, (1, 2): {(0, 0): u}, (2, 3): {(0, 0): u}}
    t = TwistedComplex(s, (1, 1, 1, 1), deltas)
    r = mc_check(t)
    assert not r.ok and r.violations[0][:2] == (0, 3)
    assert r.violations[0][2] == ((0, 0, "v"),)


def test_mutation_caught():
    rng = random.Random(1)
    caught = 0
    for _ in range(30):
        s = ALGS[rng.choice(["u3", "u4", "torus", "rp2"])]
        t = random_twisted_complex(rng, s, 2)
        if not t.deltas:
            continue
        # flip one coefficient of δ_{0,1}; its square with δ_{1,2} is then usually nonzero
        deltas = {k: dict(v) for k, v in t.deltas.items()}
        cands = [c for c, g in enumerate(s.degrees) if g == 2]
        blk = deltas.setdefault((0, 1), {})
        key = (0, 0)
        blk[key] = blk.get(key, 0) ^ (1 << rng.choice(cands))
        m = TwistedComplex(s, t.dims, deltas)
        # oracle: recompute the (0, 2) block by explicit matrix products over S
        d01, d12 = m.deltas.get((0, 1), {}), m.deltas.get((1, 2), {})
        acc = {}
        for (p, q), a in d12.items():
            for (q2, r), b in d01.items():
                if q != q2:
                    continue
                for x in bits_of(a):
                    for y in bits_of(b):
                        acc[(p, r)] = acc.get((p, r), 0) ^ s.op(2, (x, y))
        bad = any(acc.values())
        assert (not mc_check(m).ok) == bad
        expected = {(m.offsets[2] + p, r, c) for (p, r), v in acc.items() for c in bits_of(v)}
        assert mc_residue(m) == expected
        caught += bad
    assert caught > 0


def test_single_summand_end_complex():
    for s in ALGS.values():
        t = TwistedComplex(s, (2,), {})
        e = end_complex(t)
        dims = cohomology_dims(e.complex)
        want = {}
        for g in s.degrees:
            want[g] = want.get(g, 0) + 4
        assert dims == want


def test_ground_field_end_complex():
    s = ground_algebra()
    t = TwistedComplex(s, (1, 2, 1), {})
    dims = cohomology_dims(end_complex(t).complex)
    # Hom(V_i, V_j) sits in degree i − j
    want = {}
    for i, a in enumerate(t.dims):
        for j, b in enumerate(t.dims):
            want[i - j] = want.get(i - j, 0) + a * b
    assert dims == want


def test_identity_is_cocycle():
    rng = random.Random(2)
    for _ in range(10):
        s = ALGS[rng.choice(sorted(ALGS))]
        t = random_twisted_complex(rng, s, rng.randint(1, 3))
        e = end_complex(t)
        ident = e.identity()
        assert e.complex.d(0).apply(ident) == 0
        assert cohomology(e.complex).coordinates(0, ident) != 0


def test_witness_absent_for_single_summand():
    assert coconnective_witness(TwistedComplex(ALGS["u2"], (3,), {})) is None


def test_witness_two_term():
    s = ALGS["u2"]
    t = TwistedComplex(s, (1, 1), {(0, 1): {(0, 0): 0b10}})
    w = coconnective_witness(t)
    assert w.degree == -1 and w.nonzero_in_cohomology


def test_witness_preconditions():
    s = truncated_polynomial(2, -1)
    with pytest.raises(TwistedError, match="non-negative"):
        coconnective_witness(TwistedComplex(s, (1, 1), {}))
    with pytest.raises(TwistedError, match="V_0"):
        coconnective_witness(TwistedComplex(ALGS["u2"], (0, 1), {}))


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(ALGS)), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_random_twisted(seed, name, length):
    rng = random.Random(seed)
    t = random_twisted_complex(rng, ALGS[name], length)
    assert mc_check(t).ok
    e = end_complex(t)  # construction checks d∘d = 0
    w = coconnective_witness(t)
    assert w.degree == -length and w.nonzero_in_cohomology
    assert min(cohomology_dims(e.complex)) < 0


def test_differential_raises_degree():
    rng = random.Random(4)
    t = random_twisted_complex(rng, ALGS["uw"], 3)
    e = end_complex(t)
    for g, lst in e.terms.items():
        for term in lst:
            for r in differential_terms(t, [term]):
                assert t.term_degree(r) == g + 1
