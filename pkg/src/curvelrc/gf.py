"""Small finite fields GF(p^m) backed by log/antilog tables.

Elements are stored as packed integers: the coefficient tuple
``(c0, c1, ..., c_{m-1})`` of ``c0 + c1 t + ... `` maps to ``sum(c_i p^i)``.
Every public operation accepts either Python ints or numpy integer arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class FieldError(Exception):
    pass


class NotPrime(FieldError):
    pass


class ModulusNotIrreducible(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


class FieldMismatch(FieldError):
    pass


class NotASubfield(FieldError):
    pass


# constant term first
DEFAULT_MODULI = {
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 12): (1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1),
    (3, 3): (1, 2, 0, 1),
}

_MAX_TABLE_ORDER = 1 << 16
_MUL_TABLE_ORDER = 1 << 12


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


# -- dense polynomials over GF(p), lists with constant term first ------------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = list(a)
    inv_lead = pow(b[-1], p - 2, p)
    while len(_ptrim(a)) >= len(b):
        shift = len(a) - len(b)
        f = a[-1] * inv_lead % p
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - f * c) % p
    return a


def _pmulmod(a, b, mod, p):
    out = [0] * (len(a) + len(b))
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, mod, p)


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _ppow_x(e, mod, p):
    """x^e mod `mod`, by square and multiply."""
    result, base = [1], _pmod([0, 1], mod, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, mod, p)
        base = _pmulmod(base, base, mod, p)
        e >>= 1
    return result


def is_irreducible(modulus, p: int) -> bool:
    """True if `modulus` (constant term first) is irreducible over GF(p).

    A degree-m polynomial is irreducible iff it shares no factor with
    x^(p^i) - x for 1 <= i <= m // 2.
    """
    f = _ptrim([c % p for c in modulus])
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if f[0] == 0:
        return False
    for i in range(1, m // 2 + 1):
        h = _ppow_x(p**i, f, p)
        h = h + [0] * max(0, 2 - len(h))
        h[1] = (h[1] - 1) % p
        g = _pgcd(f, _ptrim(h), p)
        if len(g) > 1:
            return False
    return True


class FieldCtx:
    """GF(p^m) with a fixed monic irreducible modulus.

    Immutable after construction; all operations are pure.
    """

    def __init__(self, p: int, m: int, modulus=None):
        if not _is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if m < 1:
            raise FieldError("extension degree must be positive")
        if modulus is None:
            if m == 1:
                modulus = (0, 1)
            elif (p, m) in DEFAULT_MODULI:
                modulus = DEFAULT_MODULI[(p, m)]
            else:
                modulus = _search_modulus(p, m)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {m}")
        if not is_irreducible(modulus, p):
            raise ModulusNotIrreducible(f"{_poly_str(modulus)} is reducible over GF({p})")
        self.p = p
        self.m = m
        self.modulus = modulus
        self.order = p**m
        if self.order > _MAX_TABLE_ORDER:
            raise FieldError(f"GF({p}^{m}) is too large for table arithmetic")
        self._build_tables()

    # -- construction -------------------------------------------------------

    def _times_t(self, a: int) -> int:
        p, m = self.p, self.m
        if p == 2:
            a <<= 1
            if a >> m:
                a ^= _pack(self.modulus, 2)
            return a
        digits = _unpack(a, p, m)
        top = digits[-1]
        shifted = [0] + digits[:-1]
        return _pack([(shifted[i] - top * self.modulus[i]) % p for i in range(m)], p)

    def _build_tables(self):
        q = self.order
        # multiplication by the generator found below is x -> x*t*... ; we
        # first find a primitive element by trial using naive multiplication.
        mult_t = [self._times_t(a) for a in range(q)]
        self._digits = np.array([_unpack(a, self.p, self.m) for a in range(q)], dtype=np.int64)
        gen = None
        for cand in range(2 if q > 2 else 1, q) if q > 2 else [1]:
            order = self._naive_order(cand, mult_t)
            if order == q - 1:
                gen = cand
                break
        self.generator = gen
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self._naive_mul(x, gen, mult_t)
        exp[q - 1:] = exp[: q - 1]
        self._exp = exp
        self._log = log
        # padded exp table for branch-free products: log(0) maps into zeros
        self._log0 = 2 * (q - 1)
        logz = log.copy()
        logz[0] = self._log0
        self._logz = logz
        expz = np.zeros(4 * (q - 1) + 1, dtype=np.int64)
        expz[: 2 * (q - 1)] = exp
        self._expz = expz
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()
        if self.p == 2:
            self._neg = np.arange(q, dtype=np.int64)
        else:
            self._neg = self._pack_digits((-self._digits) % self.p)
        if self.p != 2 and q <= 2187:
            a = np.arange(q)
            self._add_table = self._pack_digits(
                (self._digits[a][:, None, :] + self._digits[a][None, :, :]) % self.p
            )
        else:
            self._add_table = None

    def _naive_mul(self, a: int, b: int, mult_t) -> int:
        # schoolbook: a * b = sum_i b_i * (a t^i)
        out = 0
        digits = _unpack(b, self.p, self.m)
        cur = a
        for d in digits:
            for _ in range(d):
                out = self._add_int(out, cur)
            cur = mult_t[cur]
        return out

    def _naive_order(self, a, mult_t):
        x, k = a, 1
        while x != 1:
            x = self._naive_mul(x, a, mult_t)
            k += 1
            if k > self.order:
                return 0
        return k

    def _add_int(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        da, db = _unpack(a, self.p, self.m), _unpack(b, self.p, self.m)
        return _pack([(x + y) % self.p for x, y in zip(da, db)], self.p)

    def _pack_digits(self, digits):
        w = self.p ** np.arange(self.m, dtype=np.int64)
        return (np.asarray(digits) * w).sum(axis=-1)

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full order x order product table (only for order <= 4096)."""
        q = self.order
        if q > _MUL_TABLE_ORDER:
            raise FieldError("multiplication table too large")
        lz = self._logz.astype(np.int32)
        dt = np.uint16 if q <= 1 << 16 else np.int32
        return self._expz.astype(dt)[lz[:, None] + lz[None, :]]

    # -- element arithmetic -------------------------------------------------

    def elements(self) -> np.ndarray:
        """All elements in enumeration order (packed-integer order)."""
        return np.arange(self.order, dtype=np.int64)

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
            if self._add_table is not None:
                return int(self._add_table[a, b])
            return self._add_int(int(a), int(b))
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._add_table is not None:
            return self._add_table[a, b]
        return self._pack_digits((self._digits[a] + self._digits[b]) % self.p)

    def neg(self, a):
        if self.p == 2:
            return a
        if isinstance(a, (int, np.integer)):
            return int(self._neg[a])
        return self._neg[np.asarray(a, dtype=np.int64)]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
            if a == 0 or b == 0:
                return 0
            return self._exp_list[self._log_list[a] + self._log_list[b]]
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self._expz[self._logz[a] + self._logz[b]]

    def inv(self, a):
        if isinstance(a, (int, np.integer)):
            if a == 0:
                raise DivisionByZero("inverse of zero")
            return self._exp_list[(self.order - 1 - self._log_list[a]) % (self.order - 1)]
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("inverse of zero")
        return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        """a**e for an integer exponent e >= 0 (0**0 == 1)."""
        if e < 0:
            return self.pow(self.inv(a), -e)
        q1 = self.order - 1
        if isinstance(a, (int, np.integer)):
            if a == 0:
                return 1 if e == 0 else 0
            return self._exp_list[(self._log_list[a] * e) % q1]
        a = np.asarray(a, dtype=np.int64)
        out = self._exp[(self._log[a] * (e % q1)) % q1]
        if e == 0:
            return np.ones_like(a)
        return np.where(a == 0, 0, out)

    def power_table(self, a, max_exp: int) -> np.ndarray:
        """Stack of a**0 .. a**max_exp along a new leading axis."""
        a = np.asarray(a, dtype=np.int64)
        out = np.empty((max_exp + 1,) + a.shape, dtype=np.int64)
        out[0] = 1
        for e in range(1, max_exp + 1):
            out[e] = self.mul(out[e - 1], a)
        return out

    def sum(self, arr, axis=0):
        """Field sum along an axis."""
        arr = np.asarray(arr, dtype=np.int64)
        if self.p == 2:
            return np.bitwise_xor.reduce(arr, axis=axis)
        digits = self._digits[arr].sum(axis=axis) % self.p
        return self._pack_digits(digits)

    def frobenius(self, a, d: int = 1):
        """a -> a^(p^d)."""
        return self.pow(a, self.p**d)

    def trace(self, a, d: int = 1):
        """Relative trace down to GF(p^d): sum of a^(p^(d i))."""
        if self.m % d:
            raise NotASubfield(f"{d} does not divide {self.m}")
        acc = a
        cur = a
        for _ in range(self.m // d - 1):
            cur = self.frobenius(cur, d)
            acc = self.add(acc, cur)
        return acc

    def subfield_contains(self, e, d: int):
        if d < 1 or self.m % d:
            raise NotASubfield(f"GF({self.p}^{d}) is not a subfield of GF({self.p}^{self.m})")
        fe = self.frobenius(e, d)
        if isinstance(fe, np.ndarray):
            return fe == np.asarray(e)
        return fe == e

    def coeffs(self, a: int) -> tuple:
        return tuple(_unpack(int(a), self.p, self.m))

    def from_coeffs(self, coeffs) -> int:
        c = list(coeffs) + [0] * (self.m - len(coeffs))
        return _pack([x % self.p for x in c], self.p)

    def element(self, value) -> FieldElement:
        if isinstance(value, (tuple, list)):
            value = self.from_coeffs(value)
        value = int(value)
        if not 0 <= value < self.order:
            raise FieldError(f"{value} is not an element of GF({self.order})")
        return FieldElement(self, value)

    def key(self) -> tuple:
        return (self.p, self.m, self.modulus)

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"FieldCtx(GF({self.p}^{self.m}), modulus={_poly_str(self.modulus)})"


@dataclass(frozen=True)
class FieldElement:
    """A field element tagged with its field; equality is representational."""

    field: FieldCtx
    value: int

    def _check(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other.value
        return self.field.element(other).value

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.value, self._check(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.value, self._check(other)))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.value, self._check(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.value, self._check(other)))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.value, e))

    def inv(self):
        return FieldElement(self.field, self.field.inv(self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF({self.field.order})<{_poly_str(self.field.coeffs(self.value), var='t', monic_zero='0')}>"


def field_new(p: int, m: int, modulus=None) -> FieldCtx:
    return FieldCtx(p, m, modulus)


def arith(ctx: FieldCtx, op: str, *operands):
    """Apply one of add, sub, mul, inv, pow to FieldElements of `ctx`."""
    vals = []
    for x in operands:
        if isinstance(x, FieldElement):
            if x.field != ctx:
                raise FieldMismatch(f"operand from {x.field!r}, expected {ctx!r}")
            vals.append(x.value)
        else:
            vals.append(x)
    if op == "add":
        return FieldElement(ctx, ctx.add(vals[0], vals[1]))
    if op == "sub":
        return FieldElement(ctx, ctx.sub(vals[0], vals[1]))
    if op == "mul":
        return FieldElement(ctx, ctx.mul(vals[0], vals[1]))
    if op == "inv":
        return FieldElement(ctx, ctx.inv(vals[0]))
    if op == "pow":
        return FieldElement(ctx, ctx.pow(vals[0], int(vals[1])))
    raise ValueError(f"unknown operation {op!r}")


def subfield_contains(ctx: FieldCtx, e, d: int):
    if isinstance(e, FieldElement):
        if e.field != ctx:
            raise FieldMismatch("element from a different field")
        e = e.value
    return ctx.subfield_contains(e, d)


_FIELDS: dict = {}


def gf(order: int) -> FieldCtx:
    """Shared context for GF(order) with the default modulus."""
    if order not in _FIELDS:
        p = next(d for d in range(2, order + 1) if order % d == 0)
        m, rest = 0, order
        while rest % p == 0:
            rest //= p
            m += 1
        if rest != 1:
            raise FieldError(f"{order} is not a prime power")
        _FIELDS[order] = FieldCtx(p, m)
    return _FIELDS[order]


def _search_modulus(p, m):
    for tail in range(p**m):
        coeffs = _unpack(tail, p, m) + [1]
        if coeffs[0] and is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise FieldError("no irreducible polynomial found")


def _unpack(a: int, p: int, m: int) -> list:
    out = []
    for _ in range(m):
        out.append(a % p)
        a //= p
    return out


def _pack(digits, p: int) -> int:
    v = 0
    for d in reversed(list(digits)):
        v = v * p + int(d)
    return v


def _poly_str(coeffs, var="t", monic_zero="0"):
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        mon = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if i == 0:
            terms.append(str(c))
        else:
            terms.append(mon if c == 1 else f"{c}{mon}")
    return "+".join(terms) if terms else monic_zero
