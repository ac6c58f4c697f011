"""End-to-end acceptance checks, one group per criterion.

Each check records PASS or FAIL; the summary is printed at the end of the
run (see conftest.py).  Checks that cannot be met are left failing.
"""
import functools
import itertools
import time

import numpy as np
import pytest

from curvelrc import analysis as A
from curvelrc import constructions as K
from curvelrc import linalg
from curvelrc.codes import evaluate_code, from_generator, product_code, random_codewords
from curvelrc.curves import grid_points, hermitian_points, ree_points, suzuki_points, suzuki_S, suzuki_tilde_D
from curvelrc.funcspace import FunctionSet, FunctionTerm, product_functions, ree_affine_dim, ree_affine_L
from curvelrc.gf import gf
from curvelrc.locality import (
    availability, certify_structure, check_repair_weights, disjointness_violations, interpolation_weights,
    repair,
)

TITLES = {
    1: "point counts",
    2: "suzuki cyclic-extension code, alpha 1 and 2",
    3: "suzuki fiber-product code, availability 2",
    4: "product-code law",
    5: "Tamo-Barg list over F_27",
    6: "Suzuki F_8 table",
    7: "Ree F_27 constructions",
    8: "certification and repair agree on every build",
    9: "parameter formulas",
}
RESULTS = {}
NOTES = []


def criterion(n):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            label = fn.__name__ + "".join(f"[{_tag(v)}]" for v in kwargs.values() if _tag(v) is not None)
            try:
                fn(*args, **kwargs)
            except pytest.skip.Exception:
                raise
            except BaseException as exc:
                msg = str(exc).strip().splitlines()[0] if str(exc).strip() else ""
                RESULTS.setdefault(n, []).append((False, f"{label}: {type(exc).__name__} {msg}"[:200]))
                print(f"criterion {n}: FAIL {label}")
                raise
            RESULTS.setdefault(n, []).append((True, label))
            print(f"criterion {n}: PASS {label}")
        return wrapper
    return deco


def _tag(v):
    if isinstance(v, (int, str)):
        return v
    if isinstance(v, (tuple, list)) and v and isinstance(v[0], int):
        return v[0] if isinstance(v, tuple) else "k" + str(v[1])
    return None


def all_true(d):
    bad = [k for k, v in d.items() if not v]
    assert not bad, f"{len(bad)} failures, first {bad[0]}"


def witnessed_weights(C, count, seed):
    w = random_codewords(C, count, np.random.default_rng(seed))
    w = w[np.any(w, axis=1)]
    return np.count_nonzero(w, axis=1)


# -- 1 -------------------------------------------------------------------------

@criterion(1)
def test_c1_point_counts():
    t = time.time()
    assert len(suzuki_points(8)) == 64
    assert len(suzuki_points(8, gf(4096))) == 5888
    assert len(suzuki_S(8)) == 5824
    assert len(suzuki_tilde_D(8)) == 29120
    assert len(ree_points(27)) == 19683
    assert len(hermitian_points(4, True)) == 64
    assert time.time() - t < 60


# -- 2 -------------------------------------------------------------------------

@pytest.fixture(scope="module", params=[1, 2])
def tilde(request):
    return request.param, K.suzuki_tilde(8, request.param)


@criterion(2)
def test_c2_dimension(tilde):
    alpha, b = tilde
    q, q0 = 8, 2
    assert b.code.n == 29120
    assert b.code.k == (q - 2 * q0) * (alpha * (q * q + 1) - q0 * (q - 1) + 1) == {1: 208, 2: 468}[alpha]


@criterion(2)
def test_c2_every_position_has_certified_set_of_size_4(tilde):
    _, b = tilde
    cert = certify_structure(b.code, b.structure)
    all_true(cert)
    assert all(any(s.size == 4 and cert[(j, i)] for i, s in enumerate(per))
               for j, per in enumerate(b.structure.sets))


@criterion(2)
def test_c2_single_erasure_repairs(tilde):
    _, b = tilde
    C, st = b.code, b.structure
    rng = np.random.default_rng(2)
    words = random_codewords(C, 1000, rng)
    good = 0
    for w in words:
        j = int(rng.integers(C.n))
        erased = np.zeros(C.n, dtype=bool)
        erased[j] = True
        good += repair(C, st, np.where(erased, 0, w), erased, j) == w[j]
    assert good == 1000


@criterion(2)
def test_c2_designed_bound_alpha_1():
    b = K.suzuki_tilde(8, 1)
    assert b.designed_d == A.designed_bound("thm1", q=8, alpha=1) == 28603
    assert witnessed_weights(b.code, 500, 0).min() >= 28603
    # raises BoundViolation if any witness is lighter than the bound
    rep = A.min_weight_search(b.code, trials=1, seed=0, lower_bound=28603)
    NOTES.append(f"suzuki cyclic-extension alpha=1: lightest witnessed codeword {rep.upper_bound} >= 28603")


# -- 3 -------------------------------------------------------------------------

@pytest.fixture(scope="module", params=[0, 1, 2])
def fiber(request):
    return request.param, K.suzuki_fiber(8, request.param)


@criterion(3)
def test_c3_dimension(fiber):
    alpha, b = fiber
    assert b.code.n == 29120
    assert b.code.k == (8 - 4) * (alpha + 1) * (8 - 1) == {0: 28, 1: 56, 2: 84}[alpha]


@criterion(3)
def test_c3_availability_2(fiber):
    _, b = fiber
    st = b.structure
    cert = certify_structure(b.code, st)
    all_true(cert)
    all_true(check_repair_weights(b.code, st))
    assert disjointness_violations(st) == []
    assert all(sorted(s.size for s in per) == [4, 7] for per in st.sets)
    assert availability(st, cert)[1] == 2


@criterion(3)
def test_c3_repair_with_small_set_erased(fiber):
    _, b = fiber
    C, st = b.code, b.structure
    rng = np.random.default_rng(3)
    for w in random_codewords(C, 200, rng):
        j = int(rng.integers(C.n))
        small = min(st.sets[j], key=lambda s: s.size)
        erased = np.zeros(C.n, dtype=bool)
        erased[j] = True
        erased[small.positions] = True
        assert repair(C, st, np.where(erased, 0, w), erased, j) == w[j]


@criterion(3)
def test_c3_designed_bound_alpha_1():
    b = K.suzuki_fiber(8, 1)
    assert b.designed_d == A.designed_bound("thm3", q=8, alpha=1) == 28588
    assert witnessed_weights(b.code, 500, 0).min() >= 28588
    rep = A.min_weight_search(b.code, trials=2, seed=0, lower_bound=28588)
    NOTES.append(f"suzuki fiber alpha=1: lightest witnessed codeword {rep.upper_bound} >= 28588")


# -- 4 -------------------------------------------------------------------------

def brute_distance(C):
    F = C.field
    best = C.n
    for msg in itertools.product(range(F.order), repeat=C.k):
        if any(msg):
            best = min(best, int(np.count_nonzero(C.encode(np.array(msg)))))
    return best


def random_factor(F, rng, kmax):
    while True:
        n = int(rng.integers(3, 9))
        k = int(rng.integers(1, min(kmax, n - 1) + 1))
        C = from_generator(F, rng.integers(0, F.order, (k, n)))
        if C.k == k:
            return C


@criterion(4)
@pytest.mark.parametrize("seed", range(20))
def test_c4_product_distance(seed):
    rng = np.random.default_rng(seed)
    order = (8, 16)[seed % 2]
    F = gf(order)
    kmax = 8 if order == 8 else 6  # keeps |F|^(k1 k2) <= 2^24
    C1 = random_factor(F, rng, 3)
    C2 = random_factor(F, rng, max(1, kmax // C1.k))
    assert order ** (C1.k * C2.k) <= 2**24
    P = product_code(C1, C2)
    assert P.k == C1.k * C2.k
    d1, d2 = brute_distance(C1), brute_distance(C2)
    assert A.min_distance_exhaustive(P, budget=2**24).exact == d1 * d2


@criterion(4)
@pytest.mark.parametrize("seed", range(10))
def test_c4_span_of_products(seed):
    rng = np.random.default_rng(100 + seed)
    order = (8, 16)[seed % 2]
    F = gf(order)

    def monos(count):
        return FunctionSet([FunctionTerm.mono(x=int(e)) for e in sorted(rng.choice(order, count, replace=False))])

    V1 = np.sort(rng.choice(order, int(rng.integers(2, 7)), replace=False))
    V2 = np.sort(rng.choice(order, int(rng.integers(2, 7)), replace=False))
    L1, L2 = monos(int(rng.integers(1, 5))), monos(int(rng.integers(1, 5)))
    C1 = evaluate_code(grid_points(F, [V1]), L1)
    C2 = evaluate_code(grid_points(F, [V2]), L2)
    grid = grid_points(F, [V1, V2], names=("x", "y"))
    assert product_code(C1, C2) == evaluate_code(grid, product_functions(L1, L2, rename2={"x": "y"}))


# -- 5 -------------------------------------------------------------------------

TB_LIST = A.reference_table("tb_f27")


@criterion(5)
@pytest.mark.parametrize("row", TB_LIST, ids=[f"k{r[1]}" for r in TB_LIST])
def test_c5_tamo_barg_list(row):
    n, k, d = row
    b = K.tb(27, "trace", 8, k=k)
    assert (b.code.n, b.code.k) == (n, k)
    if k <= 5:
        assert A.min_distance_exhaustive(b.code).exact == d
        return
    # BoundViolation if a witness undercuts the listed value
    rep = A.min_weight_search(b.code, trials=3, seed=k, lower_bound=d)
    assert rep.upper_bound >= d
    if d == A.lrc_singleton(n, k, min(8, k)):
        assert b.designed_d == d == rep.upper_bound


# -- 6 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def suzuki_table():
    t = time.time()
    recs = A.table_report("suzuki_f8", budget=2**24, trials=2, compare=True)
    return recs, time.time() - t


@criterion(6)
def test_c6_dimensions(suzuki_table):
    recs, secs = suzuki_table
    want = [tuple(r["lrc"][:2]) for r in A.reference_table("suzuki_f8")]
    assert [(r.n, r.k) for r in recs] == want
    assert secs < 30 * 60


@criterion(6)
def test_c6_exact_distance_small_k(suzuki_table):
    recs, _ = suzuki_table
    pub = {r["lrc"][1]: r["lrc"][2] for r in A.reference_table("suzuki_f8")}
    for r in recs:
        if r.k <= 8:
            assert r.d_exact is not None, f"k={r.k} not exhausted"
            assert r.d_exact >= pub[r.k], f"k={r.k}: exact {r.d_exact} below listed {pub[r.k]}"
            if r.d_exact != pub[r.k]:
                NOTES.append(f"Suzuki F_8 table k={r.k}: exact d {r.d_exact}, listed {pub[r.k]} "
                             f"(designed {r.d_designed})")
    exact = {r.k: r.d_exact for r in recs}
    assert exact[7] == 44 and exact[8] == 40


@criterion(6)
def test_c6_designed_below_witnessed(suzuki_table):
    recs, _ = suzuki_table
    pub = {r["lrc"][1]: r["lrc"][2] for r in A.reference_table("suzuki_f8")}
    for r in recs:
        assert r.d_designed == pub[r.k]
        assert r.d_upper >= r.d_designed


# -- 7 -------------------------------------------------------------------------

def brute_ree_count(s):
    return sum(1 for a, b, c in itertools.product(range(27), repeat=3) if 27 * a + 30 * b + 33 * c <= s)


@criterion(7)
@pytest.mark.parametrize("k,d", [(201, 13086), (2937, 600)])
def test_c7_affine_dimension(k, d):
    s = 19683 - d
    got = ree_affine_dim(27, s)
    assert got == len(ree_affine_L(27, s)) == brute_ree_count(s)
    assert got == k, f"s={s}: |L(s)| = {got}, listed k = {k}"


@criterion(7)
def test_c7_availability_3_on_all_positions():
    b = K.ree_affine_lrc(27, 733)
    st = b.structure
    assert st.n == 19683
    cert = certify_structure(b.code, st)
    all_true(cert)
    all_true(check_repair_weights(b.code, st))
    assert all(len(per) == 3 and all(s.size == 8 for s in per) for per in st.sets)
    assert disjointness_violations(st) == []
    assert availability(st, cert)[1] == 3


@criterion(7)
@pytest.mark.slow
def test_c7_dual_rank_identity():
    s = 19683 - 600
    k = 19683 - K.ree_dual_sum_rank(27, s)
    assert k == 15434, f"s={s}: 19683 - rank = {k}"


# -- 8 -------------------------------------------------------------------------

BUILDS = {
    "tb_f27": lambda: K.tb(27, "trace", 8, k_prime=10),
    "tb_f16": lambda: K.tb(16, "subspace", 3, k=3, n_parts=2),
    "suzuki_affine_lrc": lambda: K.suzuki_affine_lrc(8, 28),
    "hermitian_additive": lambda: K.hermitian_avail2(4, 18),
    "hermitian_power": lambda: K.hermitian_avail2(4, 18, r1=4, s1=4, x_kind="power"),
    "suzuki_tilde": lambda: K.suzuki_tilde(8, 1),
    "suzuki_cm": lambda: K.suzuki_cm(8, 10),
    "suzuki_fiber": lambda: K.suzuki_fiber(8, 1),
    "ree_affine_lrc": lambda: K.ree_affine_lrc(27, 733),
    "product": lambda: K.product([K.tb(16, "subspace", 3, k=2, n_parts=2),
                                  K.tb(16, "subspace", 3, k=3, n_parts=2)]),
}


def set_table(st):
    """Group sets by size and exponent list for batched evaluation."""
    groups = {}
    for per in st.sets:
        for s in per:
            groups.setdefault((s.size, s.exponents), []).append(s)
    return groups


@criterion(8)
@pytest.mark.parametrize("name", list(BUILDS))
def test_c8_certifier_and_repairer_agree(name):
    b = BUILDS[name]()
    C, st, F = b.code, b.structure, b.code.field
    cert = certify_structure(C, st)
    assert cert, "no recovery sets emitted"
    all_true(cert)
    words = random_codewords(C, 100, np.random.default_rng(8))
    for (size, exps), sets in set_table(st).items():
        pos = np.array([s.positions for s in sets])
        coef = np.array([s.coeffs for s in sets])
        tgt = np.array([s.target_pos for s in sets])
        for w in words:
            got = F.sum(F.mul(w[pos], coef), axis=1)
            assert np.array_equal(got, w[tgt]), f"weights disagree on a set of size {size}"
        if exps is None or sets[0].abscissae is None:
            continue
        # refit the interpolating polynomial from scratch on ten words
        xs = np.array([s.abscissae for s in sets], dtype=np.int64)
        ts = np.array([s.target for s in sets], dtype=np.int64)
        V = np.stack([F.pow(xs, e) for e in exps], axis=2)
        tp = np.stack([F.pow(ts, e) for e in exps], axis=1)
        for w in words[:10]:
            ok, c = linalg.batched_solve(F, V, w[pos])
            assert ok.all()
            assert np.array_equal(F.sum(F.mul(c, tp), axis=1), w[tgt])
        ok, wts = interpolation_weights(F, xs, ts, exps)
        assert ok.all() and np.array_equal(wts, coef)


# -- 9 -------------------------------------------------------------------------

def suzuki_forms(q):
    q0 = {8: 2, 32: 4}[q]
    m = q - 2 * q0 + 1
    n = m * (q**4 + 2 * q0 * q * q * (q - 1) - q * q)
    return q0, m, n


@criterion(9)
@pytest.mark.parametrize("q", [8, 32])
def test_c9_suzuki_formulas(q):
    q0, m, n = suzuki_forms(q)
    for alpha in range(0, 8):
        if alpha:
            r = A.theorem_params("thm1", q, alpha)
            assert (r.n, r.k, r.locality, r.availability) == (
                n, (q - 2 * q0) * (alpha * (q * q + 1) - q0 * (q - 1) + 1), q - 2 * q0, 1)
            assert r.d_designed == n - (m * alpha * q * q + m * alpha + (m - 2) * q * q)
            assert all(type(v) is int for v in (r.n, r.k, r.d_designed))
        r = A.theorem_params("thm3", q, alpha)
        assert (r.n, r.k, r.locality, r.availability) == (
            n, (q - 2 * q0) * (alpha + 1) * (q - 1), {q - 2 * q0, q - 1}, 2)
        assert r.d_designed == n - (alpha * m * q + (q - 2) * m * (q + q0) + (m - 2) * q * q)
        assert all(type(v) is int for v in (r.n, r.k, r.d_designed))
    assert A.theorem_params("thm1", 8, 1).n == 29120


@criterion(9)
def test_c9_ree_formulas():
    q, q0 = 27, 3
    m = q - 3 * q0 + 1
    n = q**7 - q**6 + q**4 - q**3
    for ell in (1, 2, 5, 100, 10**6):
        r = A.theorem_params("prop1", q, ellG=ell)
        assert (r.n, r.k, r.locality, r.availability) == (n, (m - 1) * ell, q - 3 * q0, 1)
        r = A.theorem_params("ree_fiber", q, ellG=ell)
        assert (r.n, r.k, r.locality, r.availability) == (n, ell * (q - 1) * (q - 3 * q0), {q - 3 * q0, q - 1}, 2)
        assert type(r.n) is int and type(r.k) is int
    assert n == 10073444472
