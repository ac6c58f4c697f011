"""Affine rational points of Hermitian, Suzuki, Ree and Kummer curves, the
cyclic extensions of Suzuki curves, and projection fibers over them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import FieldCtx, gf


class BadCurveParams(ValueError):
    pass


FAMILIES = ("hermitian", "suzuki", "ree", "kummer", "suzuki_tilde", "ree_tilde")


@dataclass(frozen=True)
class CurveParams:
    family: str
    q: int
    q0: int | None = None
    m: int | None = None
    eval_field_degree: int | None = None
    point_count: int | None = None


def _log(base: int, n: int) -> int | None:
    k = 0
    while n > 1 and n % base == 0:
        n //= base
        k += 1
    return k if n == 1 else None


def suzuki_q0(q: int) -> int:
    """q0 with q = 2 q0^2 and q0 = 2^s, s >= 1."""
    for s in range(1, 16):
        q0 = 2**s
        if 2 * q0 * q0 == q:
            return q0
        if 2 * q0 * q0 > q:
            break
    raise BadCurveParams(f"q={q} is not 2*q0^2 with q0=2^s, s>=1")


def ree_q0(q: int) -> int:
    """q0 with q = 3 q0^2 and q0 = 3^s, s >= 1."""
    for s in range(1, 12):
        q0 = 3**s
        if 3 * q0 * q0 == q:
            return q0
        if 3 * q0 * q0 > q:
            break
    raise BadCurveParams(f"q={q} is not 3*q0^2 with q0=3^s, s>=1")


def curve_params(family: str, q: int) -> CurveParams:
    if family not in FAMILIES:
        raise BadCurveParams(f"unknown family {family!r}")
    if family in ("suzuki", "suzuki_tilde"):
        q0 = suzuki_q0(q)
        d = _log(2, q)
        if family == "suzuki":
            return CurveParams(family, q, q0, None, d)
        return CurveParams(family, q, q0, q - 2 * q0 + 1, 4 * d)
    if family in ("ree", "ree_tilde"):
        return ree_tilde_params(q) if family == "ree_tilde" else CurveParams(family, q, ree_q0(q), None, _log(3, q))
    p = next(d for d in range(2, q + 1) if q % d == 0)
    if family == "hermitian":
        return CurveParams(family, q, None, None, 2 * _log(p, q))
    return CurveParams(family, q)


def ree_tilde_params(q: int) -> CurveParams:
    """Kummer exponent and the number of points over F_{q^6} that are not
    F_q-rational.  No enumeration."""
    q0 = ree_q0(q)
    count = q**7 - q**6 + q**4 - q**3
    return CurveParams("ree_tilde", q, q0, q - 3 * q0 + 1, 6 * _log(3, q), count)


@dataclass
class CurvePointSet:
    """Ordered affine points; coords[i] is the coordinate tuple of point i."""

    field: FieldCtx
    coords: np.ndarray
    names: tuple
    family: str
    q: int
    tag: str = "all_affine"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.coords)

    def coord(self, name: str) -> np.ndarray:
        return self.coords[:, self.names.index(name)]

    def point(self, i: int) -> tuple:
        return tuple(int(v) for v in self.coords[i])

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def _sorted_points(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size == 0:
        return coords
    order = np.lexsort(coords.T[::-1])
    return coords[order]


def _solve_table(values: np.ndarray, targets: np.ndarray):
    """For every target, the elements e with values[e] == target.

    Returns (owner, solution) arrays: solution[k] solves target[owner[k]].
    """
    order = np.argsort(values, kind="stable")
    sv = values[order]
    lo = np.searchsorted(sv, targets, side="left")
    hi = np.searchsorted(sv, targets, side="right")
    counts = hi - lo
    owner = np.repeat(np.arange(len(targets)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    sol = order[np.repeat(lo, counts) + offs]
    return owner, sol


def _check_ext(ext: FieldCtx, q: int):
    d = _log(ext.p, q)
    if d is None or ext.m % d:
        raise BadCurveParams(f"GF({ext.order}) does not contain GF({q})")
    return d


def suzuki_points(q: int, ext: FieldCtx | None = None) -> CurvePointSet:
    """Affine points of y^q + y = x^q0 (x^q + x) over `ext` (default F_q)."""
    q0 = suzuki_q0(q)
    F = ext or gf(q)
    _check_ext(F, q)
    if F.p != 2:
        raise BadCurveParams("Suzuki curves live in characteristic 2")
    e = F.elements()
    as_b = F.add(F.pow(e, q), e)
    rhs = F.mul(F.pow(e, q0), F.add(F.pow(e, q), e))
    owner, b = _solve_table(as_b, rhs)
    pts = _sorted_points(np.column_stack([e[owner], b]))
    return CurvePointSet(F, pts, ("x", "y"), "suzuki", q)


def suzuki_S(q: int, ext: FieldCtx | None = None) -> CurvePointSet:
    """Points over F_{q^4} that are not F_q-rational."""
    q0 = suzuki_q0(q)
    if ext is None:
        d = _log(2, q)
        ext = gf(2 ** (4 * d))
    allp = suzuki_points(q, ext)
    d = _check_ext(ext, q)
    rational = ext.subfield_contains(allp.coords[:, 0], d) & ext.subfield_contains(allp.coords[:, 1], d)
    pts = allp.coords[~rational]
    out = CurvePointSet(ext, pts, ("x", "y"), "suzuki", q, tag="S")
    out.meta["expected_size"] = q**4 + 2 * q0 * q * q * (q - 1) - q * q
    return out


def kummer_fiber(ctx: FieldCtx, a: int, m: int, sign: str = "+", q: int | None = None) -> list:
    """All t in ctx with t^m = a^q + a (sign '+') or a^q - a (sign '-')."""
    if q is None:
        raise BadCurveParams("kummer_fiber needs the base field size q")
    aq = ctx.pow(int(a), q)
    rhs = ctx.add(aq, int(a)) if sign == "+" else ctx.sub(aq, int(a))
    e = ctx.elements()
    return [int(t) for t in np.flatnonzero(ctx.pow(e, m) == rhs)]


def suzuki_tilde_D(q: int, ext: FieldCtx | None = None) -> CurvePointSet:
    """Points P_abc of the cyclic extension lying over S (c != 0)."""
    q0 = suzuki_q0(q)
    m = q - 2 * q0 + 1
    S = suzuki_S(q, ext)
    F = S.field
    a = S.coords[:, 0]
    rhs = F.add(F.pow(a, q), a)
    e = F.elements()
    owner, c = _solve_table(F.pow(e, m), rhs)
    pts = _sorted_points(np.column_stack([S.coords[owner], c]))
    out = CurvePointSet(F, pts, ("x", "y", "t"), "suzuki_tilde", q, tag="D")
    out.meta.update(m=m, q0=q0, S_size=len(S))
    return out


def kummer_points(q: int, m: int, ext: FieldCtx, sign: str = "+") -> CurvePointSet:
    """Affine points of t^m = x^q +- x over ext."""
    e = ext.elements()
    aq = ext.pow(e, q)
    rhs = ext.add(aq, e) if sign == "+" else ext.sub(aq, e)
    owner, t = _solve_table(ext.pow(e, m), rhs)
    pts = _sorted_points(np.column_stack([e[owner], t]))
    return CurvePointSet(ext, pts, ("x", "t"), "kummer", q)


def ree_points(q: int, ext: FieldCtx | None = None) -> CurvePointSet:
    """Affine points of the Ree curve; b and c are solved independently."""
    q0 = ree_q0(q)
    F = ext or gf(q)
    _check_ext(F, q)
    e = F.elements()
    base = F.sub(F.pow(e, q), e)
    as_tab = F.sub(F.pow(e, q), e)
    owner_b, b = _solve_table(as_tab, F.mul(F.pow(e, q0), base))
    owner_c, c = _solve_table(as_tab, F.mul(F.pow(e, 2 * q0), base))
    rows = []
    for a in e:
        bs = b[owner_b == a]
        cs = c[owner_c == a]
        if len(bs) and len(cs):
            bb, cc = np.meshgrid(bs, cs, indexing="ij")
            rows.append(np.column_stack([np.full(bb.size, a), bb.ravel(), cc.ravel()]))
    pts = _sorted_points(np.concatenate(rows)) if rows else np.zeros((0, 3), dtype=np.int64)
    return CurvePointSet(F, pts, ("x", "y", "z"), "ree", q)


def hermitian_points(q: int, include_x_zero: bool = True) -> CurvePointSet:
    """Affine points of x^(q+1) = y^q + y over F_{q^2}."""
    F = gf(q * q)
    e = F.elements()
    owner, y = _solve_table(F.add(F.pow(e, q), e), F.pow(e, q + 1))
    pts = np.column_stack([e[owner], y])
    if not include_x_zero:
        pts = pts[pts[:, 0] != 0]
    return CurvePointSet(F, _sorted_points(pts), ("x", "y"), "hermitian", q)


def grid_points(F: FieldCtx, axes, names=None) -> CurvePointSet:
    """Cartesian product of element lists, in row-major order."""
    axes = [np.asarray(a, dtype=np.int64) for a in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.ravel() for g in mesh])
    names = tuple(names or ("x", "y", "z", "w")[: len(axes)])
    return CurvePointSet(F, pts, names, "affine", F.order)


def check_points(points: CurvePointSet) -> bool:
    """Recheck every defining equation on every point."""
    F, q = points.field, points.q
    fam = points.family
    if fam == "affine":
        return True
    x = points.coord("x")
    if fam == "hermitian":
        y = points.coord("y")
        return bool(np.all(F.pow(x, q + 1) == F.add(F.pow(y, q), y)))
    if fam in ("suzuki", "suzuki_tilde"):
        q0 = suzuki_q0(q)
        y = points.coord("y")
        ok = F.add(F.pow(y, q), y) == F.mul(F.pow(x, q0), F.add(F.pow(x, q), x))
        if fam == "suzuki_tilde":
            t = points.coord("t")
            ok &= F.pow(t, q - 2 * q0 + 1) == F.add(F.pow(x, q), x)
        return bool(np.all(ok))
    if fam == "ree":
        q0 = ree_q0(q)
        y, z = points.coord("y"), points.coord("z")
        base = F.sub(F.pow(x, q), x)
        ok = F.sub(F.pow(y, q), y) == F.mul(F.pow(x, q0), base)
        ok &= F.sub(F.pow(z, q), z) == F.mul(F.pow(x, 2 * q0), base)
        return bool(np.all(ok))
    raise BadCurveParams(f"no equations for family {fam!r}")


@dataclass
class Fibers:
    """Partition of positions by their values on a set of fixed coordinates."""

    group_of: np.ndarray
    groups: list
    fixed: tuple
    varying: int | None

    def __len__(self):
        return len(self.groups)

    def sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups])


def projection_fibers(points: CurvePointSet, fixed_coords) -> Fibers:
    """Group positions whose points agree on every coordinate in fixed_coords.

    fixed_coords holds coordinate names or indices.  When exactly one
    coordinate is left free, its values serve as interpolation abscissae.
    """
    idx = tuple(points.index_of(c) if isinstance(c, str) else int(c) for c in fixed_coords)
    if not idx:
        raise ValueError("fixed_coords must be nonempty")
    keys = points.coords[:, list(idx)]
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.flatnonzero(np.diff(inverse[order])) + 1
    groups = np.split(order, bounds)
    free = [i for i in range(points.coords.shape[1]) if i not in idx]
    return Fibers(inverse, groups, idx, free[0] if len(free) == 1 else None)
