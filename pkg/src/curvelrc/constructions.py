"""Named code constructions with their points, functions and recovery sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .codes import LinearCode, code_intersection, evaluate_code, product_code
from .curves import (BadCurveParams, CurvePointSet, grid_points, hermitian_points, ree_points,
                     suzuki_points, suzuki_q0, suzuki_tilde_D)
from .funcspace import (BadPartition, FunctionSet, VarConstraint, cm_projection_V, fiber_product_V, hermitian_M,
                        lrc_filter, product_functions, ree_affine_L, suzuki_affine_L, suzuki_tilde_V,
                        tb_functions, tb_partition)
from .gf import FieldCtx, gf
from .locality import (AxisSpec, RecoveryStructure, build_recovery_structure,
                       product_recovery_structure)

CONSTRUCTIONS = ("suzuki_tilde", "suzuki_cm", "suzuki_fiber", "tb", "hermitian_avail2",
                 "suzuki_affine_lrc", "ree_affine", "ree_affine_lrc", "ree_dual_lrc", "product",
                 "params_only")


class ConstructionError(ValueError):
    pass


@dataclass
class Build:
    name: str
    code: LinearCode
    structure: RecoveryStructure | None
    params: dict
    points: CurvePointSet | None = None
    functions: FunctionSet | None = None
    designed_d: int | None = None
    expected_k: int | None = None
    notes: list = field(default_factory=list)


def bare_exponents(fs: FunctionSet, var: str) -> tuple:
    """Exponents of `var` outside any good-polynomial factor."""
    return tuple(sorted({t.exponent(var) for t in fs.terms}))


def _m(q):
    return q - 2 * suzuki_q0(q) + 1


# -- Suzuki cyclic extension --------------------------------------------------

def suzuki_tilde(q: int = 8, alpha: int = 1) -> Build:
    from .analysis import designed_bound, theorem_params

    D = suzuki_tilde_D(q)
    V = suzuki_tilde_V(q, alpha)
    rec = theorem_params("thm1", q, alpha)
    code = evaluate_code(D, V, expected_k=rec.k)
    axes = [AxisSpec("t", ("x", "y"), tuple(range(_m(q) - 1)))]
    st = build_recovery_structure(code, D, axes)
    return Build("suzuki_tilde", code, st, {"q": q, "alpha": alpha}, D, V,
                 designed_bound("thm1", q=q, alpha=alpha), rec.k)


def suzuki_cm(q: int = 8, alpha: int = 10) -> Build:
    D = suzuki_tilde_D(q)
    V = cm_projection_V(q, alpha)
    code = evaluate_code(D, V)
    axes = [AxisSpec("y", ("x", "t"), tuple(range(q - 1)))]
    st = build_recovery_structure(code, D, axes)
    return Build("suzuki_cm", code, st, {"q": q, "alpha": alpha}, D, V, None, None,
                 ["no designed distance is stated for this construction"])


def suzuki_fiber(q: int = 8, alpha: int = 1) -> Build:
    from .analysis import designed_bound, theorem_params

    D = suzuki_tilde_D(q)
    V = fiber_product_V(q, alpha)
    rec = theorem_params("thm3", q, alpha)
    code = evaluate_code(D, V, expected_k=rec.k)
    axes = [AxisSpec("t", ("x", "y"), tuple(range(_m(q) - 1))),
            AxisSpec("y", ("x", "t"), tuple(range(q - 1)))]
    st = build_recovery_structure(code, D, axes)
    return Build("suzuki_fiber", code, st, {"q": q, "alpha": alpha}, D, V,
                 designed_bound("thm3", q=q, alpha=alpha), rec.k)


# -- Tamo-Barg and products ----------------------------------------------------

def tb_k_prime(k: int, r: int, s_excluded: int | None) -> int:
    """Smallest k' whose Tamo-Barg set has k functions."""
    allowed = [i + (r + 1) * j for j in range(k + 1) for i in range(r + 1) if i != s_excluded]
    allowed.sort()
    if k < 1:
        raise ConstructionError("k must be positive")
    return allowed[k - 1] + 1


def _tb_partition(F: FieldCtx, kind: str, r: int, n_parts=None, basis=None):
    if kind == "trace":
        return tb_partition(F, kind, r, n_parts=n_parts)
    return tb_partition(F, kind, r, basis=basis, n_parts=n_parts)


def tb(q: int = 27, kind: str = "trace", r: int = 8, k_prime: int | None = None, k: int | None = None,
       s_excluded: int | None = -1, n_parts: int | None = None, var: str = "x") -> Build:
    """Tamo-Barg code on the union of the partition's parts.

    s_excluded defaults to r.  Give either k' or the target dimension k.
    """
    F = gf(q)
    gp = _tb_partition(F, kind, r, n_parts)
    if s_excluded == -1:
        s_excluded = r
    if k_prime is None:
        if k is None:
            raise ConstructionError("tb needs k_prime or k")
        k_prime = tb_k_prime(k, r, s_excluded)
    pts = grid_points(F, [gp.support()], names=(var,))
    fs = tb_functions(gp, r, k_prime, s_excluded, var=var)
    code = evaluate_code(pts, fs)
    exps = bare_exponents(fs, var)
    st = build_recovery_structure(code, pts, [AxisSpec(var, (), exps, gp)])
    top = max(t.exponent(var) + gp.degree * (t.good[0][2] if t.good else 0) for t in fs.terms)
    return Build("tb", code, st, {"q": q, "kind": kind, "r": r, "k_prime": k_prime,
                                  "s_excluded": s_excluded, "n_parts": n_parts},
                 pts, fs, max(len(pts) - top, 1), len(fs))


def product(builds) -> Build:
    """Tensor product of two or more builds, recovery sets inherited."""
    builds = list(builds)
    if len(builds) < 2:
        raise ConstructionError("a product needs at least two factors")
    cur = builds[0]
    code, st = cur.code, cur.structure
    d = cur.designed_d
    for b in builds[1:]:
        code = product_code(code, b.code)
        st = product_recovery_structure(st, b.structure) if st is not None and b.structure is not None else None
        d = d * b.designed_d if d is not None and b.designed_d is not None else None
    params = {"factors": [dict(b.params, construction=b.name) for b in builds]}
    return Build("product", code, st, params, None, None, d,
                 int(np.prod([b.code.k for b in builds])))


# -- affine curve codes ----------------------------------------------------------

def suzuki_affine(q: int = 8, s: int = 0) -> Build:
    P = suzuki_points(q)
    fs = suzuki_affine_L(q, s)
    code = evaluate_code(P, fs)
    return Build("suzuki_affine", code, None, {"q": q, "s": s}, P, fs, max(len(P) - s, 1))


def suzuki_affine_lrc(q: int = 8, s: int = 0, r: int = 3, s1: int | None = 3, s2: int | None = 3,
                      k_prime: int | None = None) -> Build:
    """Suzuki code of weight s intersected with the product of Tamo-Barg
    codes in x and y (additive cosets, locality r)."""
    F = gf(q)
    P = suzuki_points(q)
    gp = tb_partition(F, "subspace", r)
    kp = k_prime or q
    fx = tb_functions(gp, r, kp, s1, var="x")
    fy = tb_functions(gp, r, kp, s2, var="y")
    lrc_fs = product_functions(fx, fy)
    suz = evaluate_code(P, suzuki_affine_L(q, s))
    code = code_intersection(suz, evaluate_code(P, lrc_fs))
    code.provenance.update(points=P, functions=lrc_fs, weight_cap=s)
    axes = [AxisSpec("x", ("y",), bare_exponents(lrc_fs, "x"), gp),
            AxisSpec("y", ("x",), bare_exponents(lrc_fs, "y"), gp)]
    st = build_recovery_structure(code, P, axes)
    return Build("suzuki_affine_lrc", code, st, {"q": q, "s": s, "r": r, "s1": s1, "s2": s2, "k_prime": kp},
                 P, lrc_fs, max(len(P) - s, 1))


def hermitian_affine(q: int = 4, s: int = 0, include_x_zero: bool = True) -> Build:
    P = hermitian_points(q, include_x_zero)
    fs = hermitian_M(q, s)
    return Build("hermitian_affine", evaluate_code(P, fs), None, {"q": q, "s": s}, P, fs, max(len(P) - s, 1))


def hermitian_avail2(q: int = 4, s: int = 0, r1: int = 3, s1: int | None = 3, s2: int | None = 3,
                     x_kind: str = "subspace", include_x_zero: bool = True) -> Build:
    """Hermitian code of weight s intersected with X^i g1(X)^j Y^k g2(Y)^l.

    g2 = Y^q + Y, constant on cosets of F_q inside F_{q^2}.  The x partition
    is additive cosets of size r1+1 by default; x_kind="power" uses cosets of
    the order-(r1+1) subgroup of F*.
    """
    F = gf(q * q)
    P = hermitian_points(q, include_x_zero)
    gx = tb_partition(F, x_kind, r1)
    gy = _fq_coset_partition(F, q)
    fx = tb_functions(gx, r1, q * q - 1, s1, var="x", max_degree=q * q - 2)
    fy = tb_functions(gy, q - 1, q, s2, var="y", max_degree=q - 1)
    lrc_fs = product_functions(fx, fy)
    herm = evaluate_code(P, hermitian_M(q, s))
    code = code_intersection(herm, evaluate_code(P, lrc_fs))
    code.provenance.update(points=P, functions=lrc_fs, weight_cap=s)
    axes = [AxisSpec("x", ("y",), bare_exponents(lrc_fs, "x"), gx),
            AxisSpec("y", ("x",), bare_exponents(lrc_fs, "y"), gy)]
    st = build_recovery_structure(code, P, axes)
    return Build("hermitian_avail2", code, st,
                 {"q": q, "s": s, "r1": r1, "s1": s1, "s2": s2, "x_kind": x_kind}, P, lrc_fs,
                 max(len(P) - s, 1))


def _fq_coset_partition(F: FieldCtx, q: int):
    """Additive cosets of F_q inside F_{q^2}; the good polynomial is Y^q + Y."""
    sub = [int(e) for e in F.elements() if e and F.pow(int(e), q) == e]
    d = 0
    while F.p**d < q:
        d += 1
    for combo in itertools.combinations(sorted(sub), d):
        try:
            return tb_partition(F, "subspace", q - 1, basis=list(combo))
        except BadPartition:
            continue
    raise ConstructionError("could not build the F_q coset partition")


# -- Ree -----------------------------------------------------------------------

def _ree_grid(q: int):
    P = ree_points(q)
    if len(P) != q**3:
        raise BadCurveParams("expected every point of F_q^3 on the affine Ree curve")
    return P


def ree_affine(q: int = 27, s: int = 0) -> Build:
    """Plain Ree code C(sG, D).  On the full grid the reduced monomials are
    independent, so k is the monomial count."""
    P = _ree_grid(q)
    fs = ree_affine_L(q, s)
    code = _grid_code(P, fs)
    return Build("ree_affine", code, None, {"q": q, "s": s}, P, fs, _grid_bound(q, fs, len(P)), len(fs))


def leading_exponents(fs: FunctionSet, degrees) -> list:
    """Top-degree monomial of every term, good factors expanded by degree."""
    out = []
    for t in fs.terms:
        e = dict(t.exps)
        for v, k, j in t.good:
            e[v] = e.get(v, 0) + degrees[k] * j
        out.append(tuple(sorted(e.items())))
    return out


def _grid_code(P: CurvePointSet, fs: FunctionSet) -> LinearCode:
    """Evaluation code on all of F_q^d.

    Reduced polynomials (every exponent < q) evaluate injectively on the full
    grid, so terms with distinct leading monomials below q are independent
    and k is the term count; otherwise fall back to a rank.
    """
    q = P.field.order
    lead = leading_exponents(fs, [gp.degree for gp in fs.good_polys])
    independent = len(set(lead)) == len(lead) and all(e < q for m in lead for _, e in m)
    return LinearCode(P.field, len(P), spanning=fs.evaluate(P), k=len(fs) if independent else None,
                      provenance={"points": P, "functions": fs})


def ree_trace_partition(q: int = 27):
    return tb_partition(gf(q), "trace", 8)


def ree_affine_lrc(q: int = 27, s: int = 0, s_excluded: int | None = 8) -> Build:
    """Ree code of weight s restricted to L(X)^a X^b L(Y)^c Y^d L(Z)^e Z^f."""
    P = _ree_grid(q)
    gp = ree_trace_partition(q)
    cons = {v: VarConstraint(gp, 8, s_excluded) for v in ("x", "y", "z")}
    fs = lrc_filter(ree_affine_L(q, s), cons)
    code = _grid_code(P, fs)
    axes = [AxisSpec(v, tuple(w for w in ("x", "y", "z") if w != v), bare_exponents(fs, v), gp)
            for v in ("x", "y", "z")]
    st = build_recovery_structure(code, P, axes)
    return Build("ree_affine_lrc", code, st, {"q": q, "s": s, "s_excluded": s_excluded}, P, fs,
                 _grid_bound(q, fs, len(P)), len(fs))


def _grid_bound(q: int, fs: FunctionSet, n: int) -> int:
    """Footprint bound on the full grid, from each term's degree in x, y, z.

    n - s does not hold here: x has weight q but q^2 zeros on F_q^3.
    """
    from .analysis import designed_bound

    degs = []
    for t in fs.terms:
        d = {v: t.exponent(v) for v in ("x", "y", "z")}
        for v, k, e in t.good:
            d[v] += fs.good_polys[k].degree * e
        degs.append(tuple(d.values()))
    return designed_bound("footprint", q=q, degrees=degs, n=n)


def ree_parity_functions(q: int = 27) -> FunctionSet:
    from .funcspace import FunctionTerm

    gp = ree_trace_partition(q)
    terms = [FunctionTerm.mono(good=(("x", 0, i), ("y", 0, j), ("z", 0, k)))
             for i in range(3) for j in range(3) for k in range(3)]
    return FunctionSet(terms, {"construction": "ree_parity"}, (gp,), q, None, "-")


def ree_dual_sum_rank(q: int = 27, s: int = 0) -> int:
    """dim(span L(s) + span{L(X)^i L(Y)^j L(Z)^k}) on F_q^3.

    Both sets are expanded into the reduced monomial basis (exponents < q),
    where evaluation on the whole grid is injective, so the rank is taken on
    coefficient vectors instead of 19683-long evaluation rows.
    """
    F = gf(q)
    gp = ree_trace_partition(q)
    # coefficients of L(T)^i, reduced mod T^q - T
    polys = [[1]]
    for _ in range(2):
        polys.append(_poly_mul_reduce(F, polys[-1], gp.coeffs, q))
    exps = ree_affine_L(q, s)
    monos = set()
    for t in exps.terms:
        e = dict(t.exps)
        monos.add((e.get("x", 0), e.get("y", 0), e.get("z", 0)))
    rows = []
    for i in range(3):
        for j in range(3):
            for k in range(3):
                row = {}
                for a, ca in enumerate(polys[i]):
                    if not ca:
                        continue
                    for b, cb in enumerate(polys[j]):
                        if not cb:
                            continue
                        cab = F.mul(ca, cb)
                        for c, cc in enumerate(polys[k]):
                            if cc:
                                row[(a, b, c)] = F.add(row.get((a, b, c), 0), F.mul(cab, cc))
                rows.append(row)
    # monomial rows are unit vectors: reduce the parity rows modulo them
    idx = {}
    for row in rows:
        for key in row:
            if key not in monos:
                idx.setdefault(key, len(idx))
    M = np.zeros((len(rows), max(len(idx), 1)), dtype=np.int64)
    for r, row in enumerate(rows):
        for key, c in row.items():
            if key in idx:
                M[r, idx[key]] = c
    return len(monos) + linalg.rank(F, M)


def _poly_mul_reduce(F, a, b, q):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if x and y:
                out[i + j] = F.add(out[i + j], F.mul(int(x), int(y)))
    # T^q = T on F_q
    while len(out) > q:
        c = out.pop()
        e = len(out)
        out[e - (q - 1)] = F.add(out[e - (q - 1)], c)
    return out


def ree_dual_lrc_params(q: int = 27, s: int = 0) -> dict:
    n = q**3
    rank_sum = ree_dual_sum_rank(q, s)
    return {"n": n, "k": n - rank_sum, "rank_sum": rank_sum, "s": s}


def ree_dual_lrc(q: int = 27, s: int = 0, max_k: int = 0) -> Build:
    """Dual of the evaluation of L(s) + {L(X)^i L(Y)^j L(Z)^k}.

    k comes from the coefficient-domain rank.  The dual itself is only
    materialised when k <= max_k; a 15000 x 19683 generator is out of reach
    here.  The emitted recovery sets are the trace lines with all-ones
    parities, which certification accepts only if those line indicators lie
    in the evaluated span.
    """
    from .codes import from_generator

    P = _ree_grid(q)
    info = ree_dual_lrc_params(q, s)
    k = info["k"]
    if k > max_k:
        raise ConstructionError(f"dual has dimension {k}; raise max_k to materialise it "
                                "or use the params command")
    F = P.field
    if k == 0:
        code = LinearCode(F, len(P), gen=np.zeros((0, len(P)), dtype=np.int64), pivots=[])
    else:
        fs = ree_affine_L(q, s)
        M = np.vstack([fs.evaluate(P), ree_parity_functions(q).evaluate(P)])
        code = from_generator(F, linalg.kernel(F, M))
    st = _line_sum_structure(P, ree_trace_partition(q))
    return Build("ree_dual_lrc", code, st, {"q": q, "s": s}, P, None, None, k,
                 [f"rank of the sum {info['rank_sum']}"])


def _line_sum_structure(P: CurvePointSet, gp) -> RecoveryStructure:
    """Sets from the parity L(.)^0: the sum over each trace line is zero."""
    from .locality import RecoverySet

    F = P.field
    n = len(P)
    sets = [[] for _ in range(n)]
    for v in ("x", "y", "z"):
        fixed = [P.index_of(w) for w in ("x", "y", "z") if w != v]
        part = gp.part_of(P.coord(v))
        keys = np.column_stack([P.coords[:, fixed], part])
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        order = np.argsort(inv, kind="stable")
        groups = np.split(order, np.flatnonzero(np.diff(inv[order])) + 1)
        minus_one = F.neg(1)
        for g in groups:
            for i, j in enumerate(g):
                A = np.delete(g, i)
                sets[j].append(RecoverySet(int(j), A, np.full(len(A), minus_one, dtype=np.int64)))
    return RecoveryStructure(n, sets)


# -- dispatch --------------------------------------------------------------------

def build(spec: dict) -> Build:
    """Build from a flat parameter mapping with a `construction` key."""
    spec = dict(spec)
    name = spec.pop("construction", None)
    if name not in CONSTRUCTIONS:
        raise ConstructionError(f"unknown construction {name!r}")
    spec.pop("seed", None)
    if name == "product":
        factors = spec.pop("factors", None)
        if not factors:
            raise ConstructionError("product needs [factors]")
        return product([build(f) for f in factors])
    if name == "params_only":
        raise ConstructionError("params_only has no code to build; use the params command")
    fn = {"suzuki_tilde": suzuki_tilde, "suzuki_cm": suzuki_cm, "suzuki_fiber": suzuki_fiber, "tb": tb,
          "hermitian_avail2": hermitian_avail2, "suzuki_affine_lrc": suzuki_affine_lrc,
          "ree_affine": ree_affine, "ree_affine_lrc": ree_affine_lrc, "ree_dual_lrc": ree_dual_lrc}[name]
    try:
        return fn(**spec)
    except TypeError as exc:
        raise ConstructionError(f"{name}: {exc}") from exc
