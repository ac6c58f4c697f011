"""Ordered sets of evaluable functions for every construction, and the good
polynomials (with their partitions) that drive the Tamo-Barg subcodes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curves import CurvePointSet, ree_q0, suzuki_q0
from .gf import FieldCtx


class DegreeTooLarge(ValueError):
    pass


class BadPartition(ValueError):
    pass


class PoleAtPoint(ValueError):
    pass


@dataclass(frozen=True)
class FunctionTerm:
    """prod var^e * prod g_k(var)^e / (x^q + x)^denom_exp.

    `exps` holds (var, e) pairs with e > 0; `good` holds (var, gp_index, e)
    pairs indexing FunctionSet.good_polys.  u and v (Suzuki) are expanded from
    x, y at evaluation time.
    """

    exps: tuple = ()
    denom_exp: int = 0
    good: tuple = ()

    @staticmethod
    def mono(denom_exp: int = 0, good: tuple = (), **exps) -> "FunctionTerm":
        return FunctionTerm(tuple(sorted((v, e) for v, e in exps.items() if e)), denom_exp,
                            tuple(g for g in good if g[2]))

    def exponent(self, var: str) -> int:
        return dict(self.exps).get(var, 0)

    def __str__(self):
        parts = [v if e == 1 else f"{v}^{e}" for v, e in self.exps]
        parts += [f"g{k}({v})" + ("" if e == 1 else f"^{e}") for v, k, e in self.good]
        s = "*".join(parts) or "1"
        if self.denom_exp:
            s += f"/(x^q+x)^{self.denom_exp}"
        return s


@dataclass
class GoodPolynomial:
    """Polynomial constant on every part of a partition of field elements."""

    field: FieldCtx
    kind: str
    r: int
    coeffs: tuple
    parts: list

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, vals):
        F = self.field
        vals = np.asarray(vals, dtype=np.int64)
        acc = np.zeros_like(vals)
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, vals), c)
        return acc

    def support(self) -> np.ndarray:
        return np.sort(np.concatenate(self.parts))

    def part_of(self, vals) -> np.ndarray:
        lookup = np.full(self.field.order, -1, dtype=np.int64)
        for i, part in enumerate(self.parts):
            lookup[part] = i
        return lookup[np.asarray(vals, dtype=np.int64)]

    def is_constant_on_parts(self) -> bool:
        return all(len(np.unique(self(part))) == 1 for part in self.parts)


@dataclass
class FunctionSet:
    terms: list
    provenance: dict = field(default_factory=dict)
    good_polys: tuple = ()
    q: int | None = None
    q0: int | None = None
    char_sign: str = "+"

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def degree_in(self, var: str) -> int:
        return max((t.exponent(var) for t in self.terms), default=0)

    def evaluate(self, points: CurvePointSet) -> np.ndarray:
        """Evaluation matrix, one row per term, one column per point."""
        return evaluate_terms(self, points)


def _poly_mul(F: FieldCtx, a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(int(x), int(y)))
    return out


def evaluate_terms(fs: FunctionSet, points: CurvePointSet) -> np.ndarray:
    F = points.field
    n = len(points)
    vals: dict[str, np.ndarray] = {name: points.coord(name) for name in points.names}
    needed = {v for t in fs.terms for v, _ in t.exps} | {v for t in fs.terms for v, _, _ in t.good}
    if needed & {"u", "v"}:
        q0 = fs.q0
        x, y = vals["x"], vals["y"]
        u = F.sub(F.pow(x, 2 * q0 + 1), F.pow(y, 2 * q0))
        vals["u"] = u
        vals["v"] = F.sub(F.mul(x, F.pow(y, 2 * q0)), F.pow(u, 2 * q0))
    missing = needed - set(vals)
    if missing:
        raise ValueError(f"points have no coordinates {sorted(missing)}")
    cache: dict = {}

    def power(key, base, e):
        if (key, e) not in cache:
            top = max(e, 1)
            tab = F.power_table(base, top)
            for k in range(top + 1):
                cache[(key, k)] = tab[k]
        return cache[(key, e)]

    max_e: dict = {}
    for t in fs.terms:
        for v, e in t.exps:
            max_e[("v", v)] = max(max_e.get(("v", v), 0), e)
        for v, k, e in t.good:
            max_e[("g", v, k)] = max(max_e.get(("g", v, k), 0), e)
        if t.denom_exp:
            max_e[("d",)] = max(max_e.get(("d",), 0), t.denom_exp)
    for key, e in max_e.items():
        if key[0] == "v":
            base = vals[key[1]]
        elif key[0] == "g":
            base = fs.good_polys[key[2]](vals[key[1]])
        else:
            x = vals["x"]
            xq = F.pow(x, fs.q)
            den = F.add(xq, x) if fs.char_sign == "+" else F.sub(xq, x)
            if np.any(den == 0):
                bad = int(np.flatnonzero(den == 0)[0])
                raise PoleAtPoint(f"x^q{fs.char_sign}x vanishes at point {points.point(bad)}")
            base = F.inv(den)
        power(key, base, e)

    out = np.empty((len(fs.terms), n), dtype=np.int64)
    for row, t in enumerate(fs.terms):
        acc = np.ones(n, dtype=np.int64)
        for v, e in t.exps:
            acc = F.mul(acc, cache[(("v", v), e)])
        for v, k, e in t.good:
            acc = F.mul(acc, cache[(("g", v, k), e)])
        if t.denom_exp:
            acc = F.mul(acc, cache[(("d",), t.denom_exp)])
        out[row] = acc
    return out


# -- Suzuki cyclic extension ------------------------------------------------

def eid_basis(q: int, alpha: int) -> FunctionSet:
    """Basis x^a y^b u^c v^d / (x^q+x)^e of L(alpha (P_inf + sum P_ab))."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    q0 = suzuki_q0(q)
    terms = []
    for e in range(alpha + 1):
        for a, b, c, d in itertools.product(range(q), range(2), range(q0), range(q0)):
            w = a * q + b * (q + q0) + c * (q + 2 * q0) + d * (q + 2 * q0 + 1)
            if w <= alpha + e * q * q:
                terms.append(FunctionTerm.mono(denom_exp=e, x=a, y=b, u=c, v=d))
    return FunctionSet(terms, {"construction": "eid_basis", "q": q, "alpha": alpha}, q=q, q0=q0)


def eid_basis_size(q: int, alpha: int) -> int:
    return alpha * (q * q + 1) - suzuki_q0(q) * (q - 1) + 1


def suzuki_tilde_degree(q: int, alpha: int) -> int:
    """deg G' for the cyclic-extension code."""
    q0 = suzuki_q0(q)
    m = q - 2 * q0 + 1
    return m * alpha + (m - 2) * q * q + m * alpha * q * q


def suzuki_tilde_V(q: int, alpha: int) -> FunctionSet:
    q0 = suzuki_q0(q)
    m = q - 2 * q0 + 1
    S_size = q**4 + 2 * q0 * q * q * (q - 1) - q * q
    deg = suzuki_tilde_degree(q, alpha)
    if deg >= S_size:
        raise DegreeTooLarge(f"deg G' = {deg} >= |S| = {S_size}")
    B = eid_basis(q, alpha)
    terms = [FunctionTerm(tuple(sorted(f.exps + ((("t", i),) if i else ()))), f.denom_exp)
             for f in B.terms for i in range(m - 1)]
    prov = {"construction": "suzuki_tilde_V", "q": q, "alpha": alpha, "m": m, "deg_G_prime": deg}
    return FunctionSet(terms, prov, q=q, q0=q0)


def cm_projection_V(q: int, alpha: int) -> FunctionSet:
    """Functions for the code over the projection to t^m = x^q + x."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    q0 = suzuki_q0(q)
    m = q - 2 * q0 + 1
    base = [(i, j) for i in range(alpha // q + 1) for j in range(q) if q * i + m * j <= alpha]
    terms = [FunctionTerm.mono(t=i, x=j, y=k) for i, j in base for k in range(q - 1)]
    prov = {"construction": "cm_projection_V", "q": q, "alpha": alpha, "B_prime": len(base)}
    return FunctionSet(terms, prov, q=q, q0=q0)


def fiber_product_V(q: int, alpha: int) -> FunctionSet:
    """x^a y^i t^j, a <= alpha, i <= q-2, j <= m-2."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    q0 = suzuki_q0(q)
    m = q - 2 * q0 + 1
    terms = [FunctionTerm.mono(x=a, y=i, t=j)
             for a in range(alpha + 1) for i in range(q - 1) for j in range(m - 1)]
    return FunctionSet(terms, {"construction": "fiber_product_V", "q": q, "alpha": alpha}, q=q, q0=q0)


# -- affine monomial sets ---------------------------------------------------

def hermitian_M(q: int, s: int) -> FunctionSet:
    terms = [FunctionTerm.mono(x=i, y=j)
             for i in range(q * q - 1) for j in range(q) if i * q + j * (q + 1) <= s]
    prov = {"construction": "hermitian_M", "q": q, "s": s, "weights": {"x": q, "y": q + 1}}
    return FunctionSet(terms, prov, q=q)


def suzuki_affine_L(q: int, s: int) -> FunctionSet:
    q0 = suzuki_q0(q)
    w = {"x": q, "y": q + q0, "u": q + 2 * q0, "v": q + 2 * q0 + 1}
    terms = [FunctionTerm.mono(x=a, y=b, u=c, v=d)
             for a, b, c, d in itertools.product(range(q), range(q), range(q0), range(q0))
             if a * w["x"] + b * w["y"] + c * w["u"] + d * w["v"] <= s]
    return FunctionSet(terms, {"construction": "suzuki_affine_L", "q": q, "s": s, "weights": w}, q=q, q0=q0)


def ree_weights(q: int) -> dict:
    q0 = ree_q0(q)
    return {"x": q, "y": q + q0, "z": q + 2 * q0}


def ree_affine_L(q: int, s: int) -> FunctionSet:
    q0 = ree_q0(q)
    w = ree_weights(q)
    exps = ree_affine_exponents(q, s)
    terms = [FunctionTerm.mono(x=int(a), y=int(b), z=int(c)) for a, b, c in exps]
    return FunctionSet(terms, {"construction": "ree_affine_L", "q": q, "s": s, "weights": w},
                       q=q, q0=q0, char_sign="-")


def ree_affine_exponents(q: int, s: int) -> np.ndarray:
    w = ree_weights(q)
    g = np.stack(np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij"), -1).reshape(-1, 3)
    wt = g @ np.array([w["x"], w["y"], w["z"]])
    return g[wt <= s]


def ree_affine_dim(q: int, s: int) -> int:
    """|L(s)|: the monomials are independent on F_q^3, so this is the rank."""
    return len(ree_affine_exponents(q, s))


# -- Tamo-Barg --------------------------------------------------------------

def _subspace_poly(F: FieldCtx, H) -> tuple:
    poly = [1]
    for h in H:
        poly = _poly_mul(F, poly, [F.neg(int(h)), 1])
    return tuple(int(c) for c in poly)


def _span(F: FieldCtx, basis) -> np.ndarray:
    pts = {0}
    for b in basis:
        new = set()
        for x in pts:
            for c in range(F.p):
                new.add(F.add(x, F.mul(c, int(b))))
        pts = new
    return np.array(sorted(pts), dtype=np.int64)


def tb_partition(ctx: FieldCtx, kind: str, r: int, basis=None, n_parts: int | None = None) -> GoodPolynomial:
    """Good polynomial of the requested kind with its partition.

    power: cosets of the order-(r+1) subgroup of F*, g = X^(r+1)
    subspace: additive cosets of an F_p-subspace H of size r+1, g = prod (X - h);
      H defaults to the span of 1, t, ..., t^(d-1)
    trace: GF(27) only, g = T + T^3 + T^9, parts = trace fibers
    n_parts keeps only the first n_parts parts (shorter codes).
    """
    F = ctx
    q = F.order
    if kind == "power":
        if (q - 1) % (r + 1):
            raise BadPartition(f"r+1={r + 1} does not divide |F*|={q - 1}")
        step = (q - 1) // (r + 1)
        H = F._exp[np.arange(r + 1) * step]
        cosets = []
        seen = np.zeros(q, dtype=bool)
        seen[0] = True
        for a in range(1, q):
            if not seen[a]:
                c = np.sort(F.mul(a, H))
                seen[c] = True
                cosets.append(c)
        coeffs = tuple([0] * (r + 1) + [1])
    elif kind == "subspace":
        d = 0
        size = 1
        while size < r + 1:
            size *= F.p
            d += 1
        if size != r + 1:
            raise BadPartition(f"r+1={r + 1} is not a power of {F.p}")
        if d > F.m:
            raise BadPartition("subspace larger than the field")
        if basis is None:
            basis = [F.from_coeffs([0] * i + [1]) for i in range(d)]
        H = _span(F, basis)
        if len(H) != r + 1:
            raise BadPartition("basis is not independent over the prime field")
        cosets = []
        seen = np.zeros(q, dtype=bool)
        for a in range(q):
            if not seen[a]:
                c = np.sort(F.add(a, H))
                seen[c] = True
                cosets.append(c)
        coeffs = _subspace_poly(F, H)
    elif kind == "trace":
        if (F.p, F.m) != (3, 3):
            raise BadPartition("trace partition is defined for GF(27)")
        if r != 8:
            raise BadPartition("trace partition has parts of size 9 (r = 8)")
        coeffs = tuple(1 if i in (1, 3, 9) else 0 for i in range(10))
        e = F.elements()
        gp = GoodPolynomial(F, kind, r, coeffs, [])
        vals = gp(e)
        cosets = [np.sort(e[vals == c]) for c in (0, 1, 2)]
    else:
        raise BadPartition(f"unknown partition kind {kind!r}")
    if n_parts is not None:
        cosets = cosets[:n_parts]
    gp = GoodPolynomial(F, kind, r, coeffs, cosets)
    if not gp.is_constant_on_parts():
        raise BadPartition("good polynomial is not constant on its parts")
    return gp


def tb_functions(gp: GoodPolynomial, r: int, k_prime: int, s_excluded: int | None = None,
                 var: str = "x", max_degree: int | None = None) -> FunctionSet:
    """X^i g(X)^j with 0 <= i <= r, i != s_excluded, i + (r+1) j <= k' - 1.

    max_degree caps the total degree i + deg(g) j (defaults to |support| - 1,
    beyond which evaluations would repeat).
    """
    if s_excluded is not None and not 0 <= s_excluded <= r:
        raise ValueError("s_excluded must lie in [0, r]")
    if max_degree is None:
        max_degree = len(gp.support()) - 1
    terms = []
    for j in range(k_prime):
        for i in range(r + 1):
            if i == s_excluded or i + (r + 1) * j > k_prime - 1:
                continue
            if i + gp.degree * j > max_degree:
                continue
            terms.append(FunctionTerm.mono(good=((var, 0, j),), **{var: i}))
    prov = {"construction": "tb", "kind": gp.kind, "r": r, "k_prime": k_prime, "s_excluded": s_excluded}
    return FunctionSet(terms, prov, good_polys=(gp,))


@dataclass
class VarConstraint:
    gp: GoodPolynomial
    r: int
    s_excluded: int | None = None


def lrc_filter(fs: FunctionSet, constraints: dict) -> FunctionSet:
    """Rewrite monomials var^e as var^i g(var)^j with e = i + deg(g) j and keep
    those with i != s_excluded for every constrained variable.

    The leading monomial of the rewritten term is the original one, so the
    weight cap of `fs` carries over unchanged.
    """
    gps = []
    gp_index = {}
    for var, c in constraints.items():
        if id(c.gp) not in gp_index:
            gp_index[id(c.gp)] = len(gps)
            gps.append(c.gp)
    terms = []
    for t in fs.terms:
        if t.good or t.denom_exp:
            raise ValueError("lrc_filter expects plain monomials")
        exps = dict(t.exps)
        missing = set(exps) - set(constraints)
        if missing:
            raise ValueError(f"no constraint for variables {sorted(missing)}")
        new_exps, good, keep = {}, [], True
        for var, c in constraints.items():
            e = exps.get(var, 0)
            i, j = e % c.gp.degree, e // c.gp.degree
            if i > c.r or i == c.s_excluded:
                keep = False
                break
            new_exps[var] = i
            good.append((var, gp_index[id(c.gp)], j))
        if keep:
            terms.append(FunctionTerm.mono(good=tuple(good), **new_exps))
    prov = dict(fs.provenance)
    prov["lrc_filter"] = {v: (c.gp.kind, c.r, c.s_excluded) for v, c in constraints.items()}
    return FunctionSet(terms, prov, tuple(gps), fs.q, fs.q0, fs.char_sign)


def product_functions(f1: FunctionSet, f2: FunctionSet, rename2: dict | None = None) -> FunctionSet:
    """{f * g} for f in f1, g in f2 (variables of f2 optionally renamed)."""
    rename2 = rename2 or {}
    off = len(f1.good_polys)
    terms = []
    for a in f1.terms:
        for b in f2.terms:
            exps = dict(a.exps)
            for v, e in b.exps:
                v = rename2.get(v, v)
                exps[v] = exps.get(v, 0) + e
            good = a.good + tuple((rename2.get(v, v), k + off, e) for v, k, e in b.good)
            terms.append(FunctionTerm(tuple(sorted(exps.items())), a.denom_exp + b.denom_exp, good))
    return FunctionSet(terms, {"construction": "product", "factors": (f1.provenance, f2.provenance)},
                       f1.good_polys + f2.good_polys, f1.q or f2.q, f1.q0 or f2.q0, f1.char_sign)
