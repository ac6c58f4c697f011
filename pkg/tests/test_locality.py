import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelrc import constructions as K
from curvelrc.codes import FormatError, dual_code, from_generator, random_codewords
from curvelrc.gf import gf
from curvelrc.locality import (
    AllRecoverySetsErased, RecoverySet, RecoveryStructure, apply_set, availability, certify_recovery_set,
    certify_structure, check_repair_weights, disjointness_violations, dumps_structure, lagrange_repair,
    linear_recovery_structure, loads_structure, product_recovery_structure, repair, repetition_structure,
)


def dual_words(C):
    """Every dual codeword, by enumeration (tiny codes only)."""
    D = dual_code(C)
    F = C.field
    out = []
    for c in itertools.product(range(F.order), repeat=D.k):
        v = np.zeros(C.n, dtype=np.int64)
        for a, row in zip(c, D.gen):
            v = F.add(v, F.mul(a, row))
        out.append(v)
    return out


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.integers(1, 3), st.integers(3, 6), st.integers(0, 2**31))
def test_certify_matches_dual_support_enumeration(order, k, n, seed):
    F = gf(order)
    rng = np.random.default_rng(seed)
    C = from_generator(F, rng.integers(0, order, (k, n)))
    duals = dual_words(C)
    for _ in range(6):
        j = int(rng.integers(n))
        others = [p for p in range(n) if p != j]
        A = sorted(rng.choice(others, int(rng.integers(1, n)), replace=False).tolist())
        allowed = set(A) | {j}
        want = any(v[j] != 0 and all(v[p] == 0 for p in range(n) if p not in allowed) for v in duals)
        assert certify_recovery_set(C, j, A) == want


def test_certify_examples():
    F = gf(27)
    rep = from_generator(F, np.ones((1, 6), dtype=np.int64))
    assert certify_recovery_set(rep, 0, [3])
    rs = K.tb(27, "trace", 8, k_prime=25, s_excluded=None).code
    assert (rs.n, rs.k) == (27, 25)
    gp = K.tb_partition(F, "trace", 8)
    coset = [int(np.flatnonzero(K.grid_points(F, [gp.support()]).coord("x") == a)[0]) for a in gp.parts[0]]
    assert not certify_recovery_set(rs, coset[0], coset[1:])
    tb = K.tb(27, "trace", 8, k_prime=10)
    assert (tb.code.n, tb.code.k) == (27, 9)
    assert certify_recovery_set(tb.code, coset[0], coset[1:])
    assert not certify_recovery_set(tb.code, coset[0], coset)


@pytest.fixture(scope="module")
def tb9():
    return K.tb(27, "trace", 8, k_prime=10)


@pytest.fixture(scope="module")
def fiber():
    return K.suzuki_fiber(8, 1)


def test_tb_structure(tb9):
    st_ = tb9.structure
    assert st_.sizes() == {8}
    cert = certify_structure(tb9.code, st_)
    assert len(cert) == 27 and all(cert.values())
    assert all(check_repair_weights(tb9.code, st_).values())
    assert availability(st_, cert)[1] == 1


def test_fiber_structure(fiber):
    st_ = fiber.structure
    assert st_.sizes() == {4, 7}
    assert all(len(p) == 2 for p in st_.sets)
    assert disjointness_violations(st_) == []
    cert = certify_structure(fiber.code, st_)
    assert all(cert.values())
    assert availability(st_, cert)[1] == 2


def test_repair_paths_agree(fiber):
    C, st_ = fiber.code, fiber.structure
    rng = np.random.default_rng(0)
    words = random_codewords(C, 100, rng)
    for w in words:
        j = int(rng.integers(C.n))
        vals = {apply_set(C.field, s, w) for s in st_.sets[j]}
        vals |= {lagrange_repair(C.field, s, w) for s in st_.sets[j]}
        assert vals == {int(w[j])}


def test_repair_with_small_set_erased(fiber):
    C, st_ = fiber.code, fiber.structure
    rng = np.random.default_rng(1)
    for w in random_codewords(C, 30, rng):
        j = int(rng.integers(C.n))
        small = min(st_.sets[j], key=lambda s: s.size)
        erased = np.zeros(C.n, dtype=bool)
        erased[j] = True
        erased[small.positions] = True
        assert repair(C, st_, np.where(erased, 0, w), erased, j) == w[j]
        for s in st_.sets[j]:
            erased[s.positions] = True
        with pytest.raises(AllRecoverySetsErased):
            repair(C, st_, np.where(erased, 0, w), erased, j)


def test_constant_word_repair(tb9):
    C, st_ = tb9.code, tb9.structure
    w = np.full(C.n, 5, dtype=np.int64)
    assert C.contains(w)
    erased = np.zeros(C.n, dtype=bool)
    erased[3] = True
    assert repair(C, st_, np.where(erased, 0, w), erased, 3) == 5


def test_faults_are_detected(tb9):
    C = tb9.code
    sets = [[RecoverySet(s.target_pos, s.positions.copy(), s.coeffs.copy(), s.var, s.abscissae, s.target,
                         s.exponents) for s in per] for per in tb9.structure.sets]
    # drop one position from a set: 7 positions cannot carry degree-9 data
    s = sets[0][0]
    sets[0][0] = RecoverySet(0, s.positions[1:], s.coeffs[1:])
    # wrong weight on another set
    sets[1][0].coeffs[0] = C.field.add(int(sets[1][0].coeffs[0]), 1)
    bad = RecoveryStructure(C.n, sets)
    cert = certify_structure(C, bad)
    assert not cert[(0, 0)]
    assert cert[(1, 0)]
    reps = check_repair_weights(C, bad)
    assert not reps[(1, 0)] and not reps[(0, 0)]
    assert sum(not v for v in reps.values()) == 2


def test_overlap_reported():
    F = gf(8)
    C = from_generator(F, np.ones((1, 4), dtype=np.int64))
    st_ = RecoveryStructure(4, [[RecoverySet(0, np.array([1, 2]), np.array([1, 0])),
                                 RecoverySet(0, np.array([2, 3]), np.array([1, 0]))], [], [], []])
    assert disjointness_violations(st_) == [(0, 0, 1)]
    assert availability(st_)[0][0] == 1


def test_repetition_structure():
    F = gf(16)
    C = from_generator(F, [[1, 3, 7, 9, 2]])
    st_ = repetition_structure(C)
    assert st_.sizes() == {1}
    assert all(certify_structure(C, st_).values())
    assert all(check_repair_weights(C, st_).values())


def test_product_structure():
    a = K.tb(16, "subspace", 3, k=2, n_parts=2)
    b = K.tb(16, "subspace", 3, k=3, n_parts=2)
    p = K.product([a, b])
    assert (p.code.n, p.code.k) == (64, 6)
    st_ = p.structure
    assert st_.sizes() == {3}
    assert all(len(x) == 2 for x in st_.sets)
    cert = certify_structure(p.code, st_)
    assert all(cert.values())
    assert all(check_repair_weights(p.code, st_).values())
    assert availability(st_, cert)[1] == 2
    # row set of position (i, j) is I x {j}
    s = st_.sets[1 * 8 + 5][0]
    assert set(s.positions % 8) == {5}


def test_linear_recovery_structure():
    b = K.tb(27, "trace", 8, k_prime=10)
    groups = [np.flatnonzero(np.isin(b.points.coord("x"), part))
              for part in K.tb_partition(gf(27), "trace", 8).parts]
    st_ = linear_recovery_structure(b.code, groups)
    assert st_.sizes() == {8}
    assert all(check_repair_weights(b.code, st_).values())


def test_sidecar_roundtrip(fiber, tb9):
    for b in (tb9, K.product([K.tb(16, "subspace", 3, k=2, n_parts=2)] * 2)):
        F = b.code.field
        data = dumps_structure(b.structure, F)
        back = loads_structure(data, F)
        assert back.n == b.structure.n
        for p, q in zip(back.sets, b.structure.sets):
            assert len(p) == len(q)
            for s, t in zip(p, q):
                assert np.array_equal(s.positions, t.positions)
                assert np.array_equal(s.coeffs, t.coeffs)
                assert s.exponents == t.exponents and s.var == t.var and s.target == t.target
        assert dumps_structure(back, F) == data
    data = dumps_structure(fiber.structure, fiber.code.field)
    assert data[:5] == b"LRCR\x01"


@pytest.mark.parametrize("cut", [0, 3, 7, 20, -1])
def test_sidecar_corruption(tb9, cut):
    F = tb9.code.field
    data = dumps_structure(tb9.structure, F)
    with pytest.raises(FormatError):
        loads_structure(data[:cut] if cut >= 0 else data + b"\x00", F)
