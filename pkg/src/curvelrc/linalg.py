"""Dense linear algebra over a FieldCtx.

Matrices are numpy integer arrays of packed field elements.  Products go
through BLAS: an element of GF(p^m) acts on the GF(p)-digit vector of another
element as an m x m matrix, so a field matmul is an integer matmul of the
digit-expanded operands followed by reduction mod p.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .gf import FieldCtx


@lru_cache(maxsize=None)
def _mult_matrices(F: FieldCtx) -> np.ndarray:
    # out[c, v, u] = digit v of c * t^u
    basis = np.array([F.from_coeffs([0] * u + [1]) for u in range(F.m)])
    prods = F.mul(np.arange(F.order)[:, None], basis[None, :])  # (order, m) indexed [c, u]
    digits = F._digits[prods]  # (order, m_u, m_v)
    return np.ascontiguousarray(digits.transpose(0, 2, 1)).astype(np.float32)


def _blas_dtype(F: FieldCtx, inner: int):
    # float32 is exact while every partial sum stays below 2**24
    bound = inner * F.m * (F.p - 1) ** 2
    return np.float32 if bound < 1 << 24 else np.float64


def matmul(F: FieldCtx, A, B, chunk: int = 4096) -> np.ndarray:
    """Field product A @ B."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.ndim == 1:
        return matmul(F, A[None, :], B, chunk)[0]
    ka, kb = A.shape
    kb2, n = B.shape
    if kb != kb2:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    m = F.m
    if F.m == 1:
        dt = _blas_dtype(F, kb)
        prod = A.astype(dt) @ B.astype(dt)
        return np.mod(prod, F.p).astype(np.int64)
    dt = _blas_dtype(F, kb)
    mm = _mult_matrices(F).astype(dt, copy=False)
    # Ahat[i, v, l, u] = digit v of A[i,l] * t^u
    Ahat = mm[A].transpose(0, 2, 1, 3).reshape(ka * m, kb * m)
    out = np.empty((ka, n), dtype=np.int64)
    weights = (F.p ** np.arange(m)).astype(np.int64)
    for s in range(0, n, chunk):
        blk = B[:, s : s + chunk]
        w = blk.shape[1]
        Bhat = F._digits[blk].transpose(0, 2, 1).reshape(kb * m, w).astype(dt)
        prod = (Ahat @ Bhat).reshape(ka, m, w)
        digits = np.mod(prod, F.p).astype(np.int64)
        out[:, s : s + w] = np.einsum("ivw,v->iw", digits, weights)
    return out


def vecmat(F: FieldCtx, v, M) -> np.ndarray:
    return matmul(F, np.asarray(v)[None, :], M)[0]


def _row_update(F: FieldCtx, M, rows, factors, pivot_row):
    """M[rows] -= factors[:, None] * pivot_row  (in place)."""
    if len(rows) == 0:
        return
    prod = F.mul(factors[:, None], pivot_row[None, :])
    M[rows] = F.sub(M[rows], prod)


def _rref_direct(F: FieldCtx, M: np.ndarray, stop_at=None):
    M = np.array(M, dtype=np.int64, copy=True)
    k, n = M.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == k:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        pr = r + nz[0]
        if pr != r:
            M[[r, pr]] = M[[pr, r]]
        M[r] = F.mul(M[r], F.inv(int(M[r, c])))
        others = np.flatnonzero(M[:, c])
        others = others[others != r]
        _row_update(F, M, others, M[others, c].copy(), M[r])
        pivots.append(c)
        r += 1
        if stop_at is not None and r >= stop_at:
            break
    return M[:r], pivots


def _rref_blocked(F: FieldCtx, M: np.ndarray, want_rows: bool = True, block: int | None = None):
    """Gauss-Jordan with deferred updates.

    Tracks the transform T (rows = T @ M) and only materialises one column
    block of T @ M at a time.  The full product is formed once at the end.
    """
    k, n = M.shape
    T = np.zeros((k, k), dtype=np.int64)
    T[np.arange(k), np.arange(k)] = 1
    pivots: list[int] = []
    r = 0
    w = block or max(64, min(2 * k, 2048))
    for start in range(0, n, w):
        if r == k:
            break
        B = matmul(F, T, M[:, start : start + w])
        for c in range(B.shape[1]):
            if r == k:
                break
            nz = np.flatnonzero(B[r:, c])
            if nz.size == 0:
                continue
            pr = r + nz[0]
            if pr != r:
                B[[r, pr]] = B[[pr, r]]
                T[[r, pr]] = T[[pr, r]]
            inv = F.inv(int(B[r, c]))
            B[r] = F.mul(B[r], inv)
            T[r] = F.mul(T[r], inv)
            others = np.flatnonzero(B[:, c])
            others = others[others != r]
            f = B[others, c].copy()
            _row_update(F, B, others, f, B[r])
            _row_update(F, T, others, f, T[r])
            pivots.append(start + c)
            r += 1
    if not want_rows:
        return None, pivots, T[:r]
    return matmul(F, T[:r], M), pivots, T[:r]


def rref(F: FieldCtx, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns.

    Pivoting is deterministic: leftmost nonzero column, first eligible row.
    """
    M = np.asarray(M, dtype=np.int64)
    k, n = M.shape
    if k == 0:
        return M.reshape(0, n), []
    if k <= 48 or n <= 2 * k:
        return _rref_direct(F, M)
    R, piv, _ = _rref_blocked(F, M)
    return R, piv


def rank(F: FieldCtx, M, seed: int = 0) -> int:
    M = np.asarray(M, dtype=np.int64)
    k, n = M.shape
    if k == 0 or n == 0:
        return 0
    if n > 3 * k + 64:
        # a random column sample of full row rank certifies full rank
        rng = np.random.default_rng(seed)
        cols = np.sort(rng.choice(n, size=2 * k + 32, replace=False))
        _, piv = _rref_direct(F, M[:, cols]) if k <= 48 else _rref_blocked(F, M[:, cols], want_rows=False)[:2]
        if len(piv) == k:
            return k
    if k <= 48 or n <= 2 * k:
        return len(_rref_direct(F, M)[1])
    return len(_rref_blocked(F, M, want_rows=False)[1])


def pivot_transform(F: FieldCtx, M, cols) -> tuple[list[int], np.ndarray]:
    """Pivot columns (positions into `cols`) and the transform T with
    T @ M[:, cols] in reduced echelon form."""
    sub = np.asarray(M, dtype=np.int64)[:, cols]
    _, piv, T = _rref_blocked(F, sub, want_rows=False, block=max(64, sub.shape[1]))
    return piv, T


def kernel(F: FieldCtx, M) -> np.ndarray:
    """Basis (as rows) of the right nullspace {x : M x = 0}."""
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    R, piv = rref(F, M)
    free = [c for c in range(n) if c not in set(piv)]
    N = np.zeros((len(free), n), dtype=np.int64)
    N[np.arange(len(free)), free] = 1
    if piv:
        N[:, piv] = F.neg(R[:, free].T)
    return N


def in_row_space(F: FieldCtx, R, pivots, w) -> bool:
    """Membership of w in the row space of an RREF matrix R."""
    w = np.asarray(w, dtype=np.int64)
    if len(pivots) == 0:
        return not np.any(w)
    coeffs = w[list(pivots)]
    return bool(np.array_equal(vecmat(F, coeffs, R), w))


def batched_solve(F: FieldCtx, A, b):
    """Solve A[i] x = b[i] for a batch of small systems.

    A has shape (B, R, C) and b shape (B, R).  Returns (ok, x) where ok[i]
    says whether system i is consistent and x[i] is one solution (free
    variables set to zero).
    """
    A = np.array(A, dtype=np.int64, copy=True)
    b = np.array(b, dtype=np.int64, copy=True)
    nb, R, C = A.shape
    used = np.zeros((nb, R), dtype=bool)
    piv_row = np.full((nb, C), -1, dtype=np.int64)
    for c in range(C):
        cand = (A[:, :, c] != 0) & ~used
        has = cand.any(axis=1)
        idx = np.flatnonzero(has)
        if idx.size == 0:
            continue
        pr = cand[idx].argmax(axis=1)
        inv = F.inv(A[idx, pr, c])
        prow = F.mul(A[idx, pr, :], inv[:, None])
        pb = F.mul(b[idx, pr], inv)
        fac = A[idx, :, c].copy()
        fac[np.arange(idx.size), pr] = 0
        A[idx] = F.sub(A[idx], F.mul(fac[:, :, None], prow[:, None, :]))
        b[idx] = F.sub(b[idx], F.mul(fac, pb[:, None]))
        A[idx, pr, :] = prow
        b[idx, pr] = pb
        used[idx, pr] = True
        piv_row[idx, c] = pr
    ok = ~np.any((b != 0) & ~used, axis=1)
    x = np.zeros((nb, C), dtype=np.int64)
    has_piv = piv_row >= 0
    rows = np.where(has_piv, piv_row, 0)
    vals = np.take_along_axis(b, rows, axis=1)
    x[has_piv] = vals[has_piv]
    return ok, x


def batched_rref(F: FieldCtx, A):
    """Reduced row echelon form of a batch of small matrices (B, R, C).

    Returns (R, piv_row) with piv_row[b, c] the pivot row of column c or -1.
    """
    A = np.array(A, dtype=np.int64, copy=True)
    nb, R, C = A.shape
    used = np.zeros((nb, R), dtype=bool)
    piv_row = np.full((nb, C), -1, dtype=np.int64)
    for c in range(C):
        cand = (A[:, :, c] != 0) & ~used
        idx = np.flatnonzero(cand.any(axis=1))
        if idx.size == 0:
            continue
        pr = cand[idx].argmax(axis=1)
        prow = F.mul(A[idx, pr, :], F.inv(A[idx, pr, c])[:, None])
        fac = A[idx, :, c].copy()
        fac[np.arange(idx.size), pr] = 0
        A[idx] = F.sub(A[idx], F.mul(fac[:, :, None], prow[:, None, :]))
        A[idx, pr, :] = prow
        used[idx, pr] = True
        piv_row[idx, c] = pr
    return A, piv_row


def _kernel_support(F: FieldCtx, M):
    """For a batch (B, R, C): kernel basis vectors (as (batch, vector) pairs)
    and, per column, whether some kernel vector is nonzero there."""
    Rm, piv = batched_rref(F, M)
    nb, _, C = Rm.shape
    free = piv < 0
    rows = np.where(free, 0, piv)
    # coefficient of free column f in the row of pivot column c
    coef = np.take_along_axis(Rm, rows[:, :, None].repeat(C, axis=2), axis=1)  # (B, C, C)
    coef = np.where(free[:, None, :] & ~free[:, :, None], coef, 0)
    dep = free | np.any(coef != 0, axis=2)
    bi, fi = np.nonzero(free)
    vecs = F.neg(coef[bi, :, fi])
    vecs[np.arange(len(bi)), fi] = 1
    return dep, bi, vecs


def columns_dependent(F: FieldCtx, G, closures, seed: int = 0, chunk: int = 0) -> np.ndarray:
    """closures is (B, c) of column indices.  Entry [b, i] says whether
    column closures[b, i] of G lies in the span of the other columns of the
    same closure.  Tall G is compressed by a random projection; every kernel
    vector found there is checked against G itself, with a full-size
    fallback, so the answer is exact."""
    G = np.asarray(G, dtype=np.int64)
    closures = np.asarray(closures, dtype=np.int64)
    nb, c = closures.shape
    k = G.shape[0]
    out = np.zeros((nb, c), dtype=bool)
    if nb == 0:
        return out
    proj = c + 16
    tall = k > proj + 16
    H = matmul(F, np.random.default_rng(seed).integers(0, F.order, size=(proj, k)), G) if tall else G
    GT, HT = np.ascontiguousarray(G.T), np.ascontiguousarray(H.T)
    step = chunk or max(64, 4_000_000 // max(1, k * c))
    for s in range(0, nb, step):
        cl = closures[s : s + step]
        dep, bi, vecs = _kernel_support(F, HT[cl].transpose(0, 2, 1))
        if tall and len(bi):
            cols = GT[cl[bi]]  # (V, c, k)
            res = F.sum(F.mul(cols, vecs[:, :, None]), axis=1)
            bad = np.unique(bi[np.any(res != 0, axis=1)])
            if bad.size:
                dep[bad] = _kernel_support(F, GT[cl[bad]].transpose(0, 2, 1))[0]
        out[s : s + step] = dep
    return out


def columns_in_span(F: FieldCtx, G, targets, sets, chunk: int = 0, seed: int = 0):
    """For each (j, A): is column j of G in the span of columns A of G?

    All sets must have the same size.  Returns a boolean array.  Tall
    matrices are first compressed by a random projection; an inconsistent
    projected system proves non-membership, and every projected solution is
    checked against the full columns, so the answer stays exact.
    """
    return columns_in_span_weights(F, G, targets, sets, chunk, seed)[0]


def columns_in_span_weights(F: FieldCtx, G, targets, sets, chunk: int = 0, seed: int = 0):
    """Like columns_in_span, also returning one solution per set (zeros
    where the answer is no)."""
    G = np.asarray(G, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    sets = np.asarray(sets, dtype=np.int64)
    k = G.shape[0]
    if len(targets) == 0:
        return np.zeros(0, dtype=bool), np.zeros((0, sets.shape[1] if sets.ndim == 2 else 0), dtype=np.int64)
    r = sets.shape[1]
    proj = r + 16
    if k > proj + 16:
        R = np.random.default_rng(seed).integers(0, F.order, size=(proj, k))
        H = matmul(F, R, G)
        ok, x = _span_solve(F, H, targets, sets, chunk)
        good = np.flatnonzero(ok)
        verified = _verify(F, G, targets[good], sets[good], x[good])
        ok[good[~verified]] = False
        redo = good[~verified]
        if redo.size:
            ok2, x2 = _span_solve(F, G, targets[redo], sets[redo], chunk)
            ok[redo], x[redo] = ok2, x2
        x[~ok] = 0
        return ok, x
    return _span_solve(F, G, targets, sets, chunk)


def _verify(F: FieldCtx, G, targets, sets, x, step: int = 0) -> np.ndarray:
    out = np.empty(len(targets), dtype=bool)
    k, r = G.shape[0], sets.shape[1] if len(sets) else 0
    step = step or max(1, 4_000_000 // max(1, k * max(r, 1)))
    for s in range(0, len(targets), step):
        A = G[:, sets[s : s + step]]  # (k, B, r)
        lhs = F.sum(F.mul(A, x[None, s : s + step, :]), axis=2)
        out[s : s + step] = np.all(lhs == G[:, targets[s : s + step]], axis=0)
    return out


def _span_solve(F: FieldCtx, G, targets, sets, chunk: int = 0):
    k = G.shape[0]
    r = sets.shape[1]
    GT = np.ascontiguousarray(G.T)
    if not chunk:
        chunk = max(64, int(4_000_000 // max(1, k * (r + 1))))
    out = np.empty(len(targets), dtype=bool)
    xs = np.zeros((len(targets), r), dtype=np.int64)
    for s in range(0, len(targets), chunk):
        S = GT[sets[s : s + chunk]].transpose(0, 2, 1)  # (B, k, r)
        t = GT[targets[s : s + chunk]]  # (B, k)
        ok, x = batched_solve(F, S, t)
        out[s : s + chunk] = ok
        xs[s : s + chunk] = x
    return out, xs
