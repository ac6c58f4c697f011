"""Linear codes over a FieldCtx: evaluation codes, products, sums,
intersections, duals, and the LRCC binary format."""
from __future__ import annotations

import struct
import warnings
from functools import cached_property

import numpy as np

from . import linalg
from .curves import CurvePointSet
from .funcspace import FunctionSet
from .gf import FieldCtx, FieldMismatch


class LengthMismatch(ValueError):
    pass


class FormatError(ValueError):
    pass


class DimensionMismatch(UserWarning):
    pass


MAGIC = b"LRCC"
VERSION = 1


def element_dtype(F: FieldCtx):
    return np.uint8 if F.order <= 256 else np.uint16


class LinearCode:
    """A linear [n, k] code.

    The generator is kept in reduced row echelon form.  Evaluation codes also
    keep the raw evaluation matrix (`spanning`), which has the same row space
    and lets large codes skip the full reduction until someone asks for it.
    """

    def __init__(self, field: FieldCtx, n: int, gen=None, spanning=None, k: int | None = None,
                 provenance: dict | None = None, pivots=None):
        self.field = field
        self.n = n
        self.provenance = provenance or {}
        if gen is not None:
            gen = np.asarray(gen, dtype=np.int64).reshape(-1, n)
            self.__dict__["gen"] = gen
            self.__dict__["pivots"] = list(pivots) if pivots is not None else _pivots_of(gen)
            k = gen.shape[0]
        self._spanning = spanning
        if k is None:
            k = linalg.rank(field, spanning)
        self.k = k

    @cached_property
    def _reduced(self):
        R, piv = linalg.rref(self.field, self._spanning)
        return R, piv

    @cached_property
    def gen(self) -> np.ndarray:
        R, _ = self._reduced
        if R.shape[0] != self.k:
            raise RuntimeError("rank changed during reduction")
        return R

    @cached_property
    def pivots(self) -> list:
        return list(self._reduced[1])

    @property
    def spanning(self) -> np.ndarray:
        """Any matrix whose row space is the code."""
        if self._spanning is not None:
            return self._spanning
        return self.gen

    def __repr__(self):
        return f"LinearCode([{self.n}, {self.k}] over GF({self.field.order}))"

    def __eq__(self, other):
        return (isinstance(other, LinearCode) and self.field == other.field and self.n == other.n
                and self.k == other.k and np.array_equal(self.gen, other.gen))

    __hash__ = None

    def encode(self, message) -> np.ndarray:
        return encode(self, message)

    def contains(self, word) -> bool:
        return is_codeword(self, word)


def _pivots_of(R: np.ndarray) -> list:
    return [int(np.flatnonzero(row)[0]) for row in R]


def evaluate_code(points: CurvePointSet, functions: FunctionSet, expected_k: int | None = None) -> LinearCode:
    """ev(f) = (f(P_1), ..., f(P_n)) over the span of `functions`."""
    M = functions.evaluate(points)
    code = LinearCode(points.field, len(points), spanning=M,
                      provenance={"points": points, "functions": functions})
    if expected_k is not None and code.k != expected_k:
        warnings.warn(f"rank {code.k} differs from the closed form {expected_k}", DimensionMismatch)
        code.provenance["dimension_mismatch"] = (code.k, expected_k)
    return code


def from_generator(F: FieldCtx, G, provenance: dict | None = None) -> LinearCode:
    G = np.asarray(G, dtype=np.int64)
    R, piv = linalg.rref(F, G)
    return LinearCode(F, G.shape[1], gen=R, pivots=piv, provenance=provenance)


def _same_space(A: LinearCode, B: LinearCode):
    if A.field != B.field:
        raise FieldMismatch("codes over different fields")
    if A.n != B.n:
        raise LengthMismatch(f"lengths {A.n} and {B.n}")


def product_code(C1: LinearCode, C2: LinearCode) -> LinearCode:
    """Tensor product; position (i, j) maps to i * n2 + j.

    The Kronecker product of two reduced echelon matrices is again reduced
    echelon, so no elimination is needed.
    """
    if C1.field != C2.field:
        raise FieldMismatch("codes over different fields")
    F = C1.field
    G1, G2 = C1.gen, C2.gen
    G = F.mul(G1[:, None, :, None], G2[None, :, None, :]).reshape(C1.k * C2.k, C1.n * C2.n)
    piv = [p1 * C2.n + p2 for p1 in C1.pivots for p2 in C2.pivots]
    return LinearCode(F, C1.n * C2.n, gen=G, pivots=piv,
                      provenance={"product": (C1.provenance, C2.provenance), "factors": (C1, C2)})


def code_sum(A: LinearCode, B: LinearCode) -> LinearCode:
    _same_space(A, B)
    return from_generator(A.field, np.vstack([A.gen, B.gen]), {"sum": True})


def left_kernel(F: FieldCtx, S) -> np.ndarray:
    S = np.asarray(S, dtype=np.int64)
    rows, n = S.shape
    aug = np.hstack([S, np.eye(rows, dtype=np.int64)])
    R, piv = linalg._rref_direct(F, aug)
    r_s = sum(1 for p in piv if p < n)
    return R[r_s:, n:]


def code_intersection(A: LinearCode, B: LinearCode) -> LinearCode:
    _same_space(A, B)
    F = A.field
    K = left_kernel(F, np.vstack([A.gen, B.gen]))
    if K.shape[0] == 0:
        return LinearCode(F, A.n, gen=np.zeros((0, A.n), dtype=np.int64), pivots=[], provenance={"intersect": True})
    W = linalg.matmul(F, K[:, : A.k], A.gen)
    return from_generator(F, W, {"intersect": True})


def dual_code(C: LinearCode) -> LinearCode:
    N = linalg.kernel(C.field, C.gen)
    return from_generator(C.field, N, {"dual_of": C.provenance})


def space_ops(op: str, A: LinearCode, B: LinearCode | None = None) -> LinearCode:
    if op == "sum":
        return code_sum(A, B)
    if op == "intersect":
        return code_intersection(A, B)
    if op == "dual":
        return dual_code(A)
    raise ValueError(f"unknown operation {op!r}")


def encode(C: LinearCode, message) -> np.ndarray:
    message = np.asarray(message, dtype=np.int64)
    if message.shape[-1] != C.k:
        raise LengthMismatch(f"message length {message.shape[-1]} != k = {C.k}")
    if message.ndim == 1:
        return linalg.vecmat(C.field, message, C.gen)
    return linalg.matmul(C.field, message, C.gen)


def is_codeword(C: LinearCode, word) -> bool:
    word = np.asarray(word, dtype=np.int64)
    if word.shape != (C.n,):
        raise LengthMismatch(f"word length {word.shape} != n = {C.n}")
    return linalg.in_row_space(C.field, C.gen, C.pivots, word)


def random_codewords(C: LinearCode, count: int, rng) -> np.ndarray:
    """Uniform random codewords, drawn through the spanning matrix."""
    S = C.spanning
    msgs = rng.integers(0, C.field.order, size=(count, S.shape[0]))
    return linalg.matmul(C.field, msgs, S)


# -- LRCC binary format -----------------------------------------------------

def dumps(C: LinearCode) -> bytes:
    """magic, version, p, m, modulus digits, n (u32 le), k (u32 le), elements."""
    F = C.field
    head = MAGIC + bytes([VERSION, F.p, F.m]) + bytes(F.modulus) + struct.pack("<II", C.n, C.k)
    dt = np.dtype(element_dtype(F)).newbyteorder("<")
    return head + np.ascontiguousarray(C.gen, dtype=dt).tobytes()


def loads(data: bytes) -> LinearCode:
    from .gf import FieldCtx

    if len(data) < 7 or data[:4] != MAGIC:
        raise FormatError("not an LRCC file")
    version, p, m = data[4], data[5], data[6]
    if version != VERSION:
        raise FormatError(f"unsupported LRCC version {version}")
    off = 7 + m + 1
    if len(data) < off + 8:
        raise FormatError("truncated header")
    modulus = tuple(data[7:off])
    n, k = struct.unpack("<II", data[off : off + 8])
    try:
        F = FieldCtx(p, m, modulus)
    except Exception as exc:
        raise FormatError(f"bad field header: {exc}") from exc
    dt = np.dtype(element_dtype(F)).newbyteorder("<")
    body = data[off + 8 :]
    if len(body) != k * n * dt.itemsize:
        raise FormatError(f"expected {k * n} elements, found {len(body) // dt.itemsize}")
    G = np.frombuffer(body, dtype=dt).astype(np.int64).reshape(k, n)
    if G.size and G.max() >= F.order:
        raise FormatError("element out of range")
    return LinearCode(F, n, gen=G, provenance={"loaded": True})


def save(C: LinearCode, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(C))


def load(path) -> LinearCode:
    with open(path, "rb") as fh:
        return loads(fh.read())
