"""Recovery sets: construction from curve fibers, certification through the
dual code, availability counts and erasure repair by interpolation."""
from __future__ import annotations

import itertools
import struct
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .codes import FormatError, LinearCode, element_dtype
from .curves import CurvePointSet
from .funcspace import GoodPolynomial
from .gf import FieldCtx


class AllRecoverySetsErased(RuntimeError):
    pass


@dataclass
class RecoverySet:
    """Positions that determine position `target_pos`.

    When `var` is set, the set comes from interpolation along that
    coordinate: the restriction of every codeword to the fiber lies in
    span{var^e : e in exponents}.  `coeffs` are the resulting repair weights,
    c[target_pos] = sum coeffs[i] * c[positions[i]].
    """

    target_pos: int
    positions: np.ndarray
    coeffs: np.ndarray
    var: str | None = None
    abscissae: np.ndarray | None = None
    target: int | None = None
    exponents: tuple = ()

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def degree(self) -> int:
        return max(self.exponents) if self.exponents else 0


@dataclass
class AxisSpec:
    """One family of recovery sets.

    Points are grouped by their values on `fixed`; when `partition` is given,
    also by the part containing the `var` coordinate.  `exponents` span the
    restriction of the function space to a group.
    """

    var: str
    fixed: tuple
    exponents: tuple
    partition: GoodPolynomial | None = None


@dataclass
class FiberTooSmall:
    position: int
    var: str
    size: int
    needed: int


@dataclass
class RecoveryStructure:
    n: int
    sets: list
    dropped: list = field(default_factory=list)

    def sizes(self) -> set:
        return {s.size for per in self.sets for s in per}

    def all_sets(self):
        for per in self.sets:
            yield from per


def _group_positions(points: CurvePointSet, axis: AxisSpec):
    cols = [points.index_of(c) for c in axis.fixed]
    keys = points.coords[:, cols] if cols else np.zeros((len(points), 0), dtype=np.int64)
    vidx = points.index_of(axis.var)
    if axis.partition is not None:
        part = axis.partition.part_of(points.coords[:, vidx])
        keys = np.column_stack([keys, part])
    else:
        part = np.zeros(len(points), dtype=np.int64)
    if keys.shape[1] == 0:
        keys = np.zeros((len(points), 1), dtype=np.int64)
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    order = np.argsort(inv, kind="stable")
    bounds = np.flatnonzero(np.diff(inv[order])) + 1
    groups = [g for g in np.split(order, bounds)]
    return [g for g in groups if part[g[0]] >= 0], [g for g in groups if part[g[0]] < 0]


def interpolation_weights(F: FieldCtx, abscissae, targets, exponents):
    """Batched repair weights.

    abscissae (B, r), targets (B,).  Solves sum_i w_i x_i^e = x_target^e for
    e in exponents.  Returns (ok, weights).
    """
    X = np.asarray(abscissae, dtype=np.int64)
    t = np.asarray(targets, dtype=np.int64)
    exps = list(exponents)
    A = np.stack([F.pow(X, e) for e in exps], axis=1)  # (B, |E|, r)
    b = np.stack([F.pow(t, e) for e in exps], axis=1)  # (B, |E|)
    return linalg.batched_solve(F, A, b)


def build_recovery_structure(code: LinearCode, points: CurvePointSet, axes) -> RecoveryStructure:
    """One recovery set per axis per position: its group minus itself."""
    F = code.field
    n = len(points)
    sets = [[] for _ in range(n)]
    dropped = []
    for axis in axes:
        vidx = points.index_of(axis.var)
        groups, outside = _group_positions(points, axis)
        for g in outside:
            for p in g:
                dropped.append(FiberTooSmall(int(p), axis.var, 0, len(axis.exponents)))
        by_size = defaultdict(list)
        for g in groups:
            by_size[len(g)].append(g)
        for size, gs in by_size.items():
            G = np.array(gs)  # (groups, size)
            if size - 1 < len(axis.exponents):
                for p in G.ravel():
                    dropped.append(FiberTooSmall(int(p), axis.var, size - 1, len(axis.exponents)))
                continue
            # every member of every group in turn
            tgt = G.reshape(-1)
            mask = ~np.eye(size, dtype=bool)
            others = np.stack([g[mask[i]] for g in G for i in range(size)])
            xs = points.coords[others, vidx]
            xt = points.coords[tgt, vidx]
            ok, w = interpolation_weights(F, xs, xt, axis.exponents)
            for j, A, a_x, t_x, good, wt in zip(tgt, others, xs, xt, ok, w):
                if not good:
                    dropped.append(FiberTooSmall(int(j), axis.var, size - 1, len(axis.exponents)))
                    continue
                sets[j].append(RecoverySet(int(j), A, wt, axis.var, a_x, int(t_x), tuple(axis.exponents)))
    return RecoveryStructure(n, sets, dropped)


def linear_recovery_structure(code: LinearCode, groups) -> RecoveryStructure:
    """Recovery sets inside the given position groups, with weights solved
    from the code itself (no interpolation data)."""
    F = code.field
    S = code.spanning
    sets = [[] for _ in range(code.n)]
    dropped = []
    for g in groups:
        g = np.asarray(g)
        for i, j in enumerate(g):
            A = np.delete(g, i)
            ok, w = linalg.batched_solve(F, S[:, A][None], S[:, j][None])
            if ok[0]:
                sets[j].append(RecoverySet(int(j), A, w[0]))
            else:
                dropped.append(FiberTooSmall(int(j), "linear", len(A), -1))
    return RecoveryStructure(code.n, sets, dropped)


def repetition_structure(code: LinearCode) -> RecoveryStructure:
    """Locality-1 sets {j+1} for a one-dimensional code of full support."""
    F = code.field
    g = code.gen[0]
    n = code.n
    sets = []
    for j in range(n):
        i = (j + 1) % n
        sets.append([RecoverySet(j, np.array([i]), np.array([F.div(int(g[j]), int(g[i]))]))])
    return RecoveryStructure(n, sets)


def product_recovery_structure(S1: RecoveryStructure, S2: RecoveryStructure) -> RecoveryStructure:
    """Row sets I x {j} and column sets {i} x J, position (i, j) -> i*n2 + j."""
    n1, n2 = S1.n, S2.n
    sets = [[] for _ in range(n1 * n2)]
    for i in range(n1):
        for j in range(n2):
            pos = i * n2 + j
            for s in S1.sets[i]:
                sets[pos].append(RecoverySet(pos, s.positions * n2 + j, s.coeffs, _tag(s.var, 1),
                                             s.abscissae, s.target, s.exponents))
            for s in S2.sets[j]:
                sets[pos].append(RecoverySet(pos, i * n2 + s.positions, s.coeffs, _tag(s.var, 2),
                                             s.abscissae, s.target, s.exponents))
    return RecoveryStructure(n1 * n2, sets)


def _tag(var, k):
    return None if var is None else f"{var}{k}"


def certify_recovery_set(code: LinearCode, j: int, A) -> bool:
    """True iff some dual codeword is supported in A + {j} and nonzero at j,
    i.e. column j of the generator lies in the span of columns A."""
    A = np.asarray(list(A), dtype=np.int64)
    if j in set(A.tolist()):
        return False
    if A.size == 0:
        return not np.any(code.spanning[:, j])
    return bool(linalg.columns_in_span(code.field, code.spanning, [j], A[None, :])[0])


def _closures(structure: RecoveryStructure):
    """Group sets by the sorted position tuple A + {target}."""
    groups = defaultdict(list)
    for per in structure.sets:
        for idx, s in enumerate(per):
            cl = tuple(sorted(set(int(p) for p in s.positions) | {s.target_pos}))
            groups[cl].append((s.target_pos, idx, s))
    return groups


def certify_structure(code: LinearCode, structure: RecoveryStructure) -> dict:
    """Certification result for every emitted set, keyed by (position, index).

    A set A certifies j exactly when column j depends on the other columns
    of A + {j}; sets sharing that closure share one kernel computation.
    """
    by_size = defaultdict(list)
    for cl, members in _closures(structure).items():
        by_size[len(cl)].append((cl, members))
    out = {}
    for size, groups in by_size.items():
        cls = np.array([cl for cl, _ in groups], dtype=np.int64)
        dep = linalg.columns_dependent(code.field, code.spanning, cls)
        for (cl, members), row in zip(groups, dep):
            where = {p: i for i, p in enumerate(cl)}
            for t, idx, s in members:
                out[(t, idx)] = bool(row[where[t]]) and len(s.positions) == len(cl) - 1
    return out


def check_repair_weights(code: LinearCode, structure: RecoveryStructure, rows=None) -> dict:
    """Apply every set's repair weights to every row of the spanning matrix
    (hence to every codeword).  Returns {(position, index): exact?}.

    Each set gives a vector v on its closure with v[target] = -1; sets whose
    vectors are proportional are checked once.
    """
    F = code.field
    S = code.spanning if rows is None else rows
    vec_groups = defaultdict(list)
    for cl, members in _closures(structure).items():
        where = {p: i for i, p in enumerate(cl)}
        for t, idx, s in members:
            v = np.zeros(len(cl), dtype=np.int64)
            v[[where[int(p)] for p in s.positions]] = s.coeffs
            v[where[t]] = F.sub(v[where[t]], 1)
            nz = np.flatnonzero(v)
            if nz.size:
                v = F.mul(v, F.inv(v[nz[0]]))
            vec_groups[(cl, tuple(int(x) for x in v))].append((t, idx))
    by_size = defaultdict(list)
    for (cl, v), members in vec_groups.items():
        by_size[len(cl)].append((cl, v, members))
    out = {}
    for size, items in by_size.items():
        step = max(1, 2_000_000 // max(1, S.shape[0] * size))
        for c in range(0, len(items), step):
            chunk = items[c : c + step]
            A = np.array([cl for cl, _, _ in chunk], dtype=np.int64)
            W = np.array([v for _, v, _ in chunk], dtype=np.int64)
            ok = np.all(F.sum(F.mul(S[:, A], W[None, :, :]), axis=2) == 0, axis=0)
            for (_, _, members), good in zip(chunk, ok):
                for key in members:
                    out[key] = bool(good)
    return out


def repair(code: LinearCode, structure: RecoveryStructure, word, erased, j: int) -> int:
    """Restore symbol j from the smallest recovery set free of erasures."""
    word = np.asarray(word, dtype=np.int64)
    erased = np.asarray(erased, dtype=bool)
    candidates = [s for s in structure.sets[j] if not erased[s.positions].any()]
    if not candidates:
        raise AllRecoverySetsErased(f"every recovery set of position {j} contains an erasure")
    s = min(candidates, key=lambda s: s.size)
    return apply_set(code.field, s, word)


def apply_set(F: FieldCtx, s: RecoverySet, word) -> int:
    return int(F.sum(F.mul(s.coeffs, np.asarray(word)[s.positions])))


def lagrange_repair(F: FieldCtx, s: RecoverySet, word) -> int:
    """Independent route: fit the restricted polynomial through the set and
    evaluate it at the target abscissa."""
    xs = np.asarray(s.abscissae, dtype=np.int64)
    ys = np.asarray(word, dtype=np.int64)[s.positions]
    V = np.stack([F.pow(xs, e) for e in s.exponents], axis=1)  # (r, |E|)
    ok, coef = linalg.batched_solve(F, V[None], ys[None])
    if not ok[0]:
        raise ValueError("values do not fit the restricted function space")
    tpow = np.array([F.pow(int(s.target), e) for e in s.exponents])
    return int(F.sum(F.mul(coef[0], tpow)))


def _max_disjoint(sets) -> int:
    best = 0
    idx = list(range(len(sets)))
    for size in range(len(sets), 0, -1):
        for combo in itertools.combinations(idx, size):
            seen: set = set()
            ok = True
            for c in combo:
                p = set(sets[c].positions.tolist())
                if seen & p:
                    ok = False
                    break
                seen |= p
            if ok:
                return size
        if best:
            break
    return best


def availability(structure: RecoveryStructure, certified: dict | None = None):
    """Per-position count of pairwise-disjoint (certified) sets, and the
    code-level minimum."""
    per = np.zeros(structure.n, dtype=np.int64)
    for j, sets in enumerate(structure.sets):
        if certified is not None:
            sets = [s for i, s in enumerate(sets) if certified.get((j, i), False)]
        per[j] = _max_disjoint(sets)
    return per, int(per.min()) if structure.n else 0


def disjointness_violations(structure: RecoveryStructure) -> list:
    bad = []
    for j, sets in enumerate(structure.sets):
        for a, b in itertools.combinations(range(len(sets)), 2):
            if set(sets[a].positions.tolist()) & set(sets[b].positions.tolist()):
                bad.append((j, a, b))
    return bad


def localities(structure: RecoveryStructure) -> set:
    return structure.sizes()


# -- sidecar file -------------------------------------------------------------

SIDECAR_MAGIC = b"LRCR"
SIDECAR_VERSION = 1


def dumps_structure(structure: RecoveryStructure, F: FieldCtx) -> bytes:
    """Per position: set count (u8); per set: length (u32), positions
    (u32 each), abscissae (element each), target element, degree (u16),
    exponent count (u16), exponents (u16 each), repair weights (element
    each), variable name (u8 length + ascii).  Elements use the LRCC width."""
    dt = np.dtype(element_dtype(F)).newbyteorder("<")
    out = [SIDECAR_MAGIC, bytes([SIDECAR_VERSION]), struct.pack("<I", structure.n)]
    for per in structure.sets:
        out.append(bytes([len(per)]))
        for s in per:
            L = s.size
            out.append(struct.pack("<I", L))
            out.append(np.asarray(s.positions, dtype="<u4").tobytes())
            absc = s.abscissae if s.abscissae is not None else np.zeros(L, dtype=np.int64)
            out.append(np.asarray(absc).astype(dt).tobytes())
            out.append(np.array([s.target or 0]).astype(dt).tobytes())
            out.append(struct.pack("<HH", s.degree, len(s.exponents)))
            out.append(np.asarray(s.exponents, dtype="<u2").tobytes())
            out.append(np.asarray(s.coeffs).astype(dt).tobytes())
            name = (s.var or "").encode()
            out.append(bytes([len(name)]) + name)
    return b"".join(out)


def loads_structure(data: bytes, F: FieldCtx) -> RecoveryStructure:
    dt = np.dtype(element_dtype(F)).newbyteorder("<")
    w = dt.itemsize
    if len(data) < 9 or data[:4] != SIDECAR_MAGIC:
        raise FormatError("not a recovery sidecar")
    if data[4] != SIDECAR_VERSION:
        raise FormatError(f"unsupported sidecar version {data[4]}")
    try:
        (n,) = struct.unpack_from("<I", data, 5)
        off = 9
        sets = []
        for j in range(n):
            cnt = data[off]
            off += 1
            per = []
            for _ in range(cnt):
                (L,) = struct.unpack_from("<I", data, off)
                off += 4
                pos = np.frombuffer(data, "<u4", L, off).astype(np.int64)
                off += 4 * L
                absc = np.frombuffer(data, dt, L, off).astype(np.int64)
                off += w * L
                target = int(np.frombuffer(data, dt, 1, off)[0])
                off += w
                _deg, ne = struct.unpack_from("<HH", data, off)
                off += 4
                exps = tuple(int(e) for e in np.frombuffer(data, "<u2", ne, off))
                off += 2 * ne
                coeffs = np.frombuffer(data, dt, L, off).astype(np.int64)
                off += w * L
                nl = data[off]
                name = data[off + 1 : off + 1 + nl].decode() or None
                off += 1 + nl
                per.append(RecoverySet(j, pos, coeffs, name, absc if name else None,
                                       target if name else None, exps))
            sets.append(per)
    except (struct.error, IndexError, ValueError) as exc:
        raise FormatError(f"corrupt sidecar: {exc}") from exc
    if off != len(data):
        raise FormatError("trailing bytes in sidecar")
    return RecoveryStructure(n, sets)
