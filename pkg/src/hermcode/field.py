"""Arithmetic in GF(p^h).

Elements are plain Python integers.  The integer ``x`` encodes the
polynomial ``sum(c[i] * t**i)`` where ``c`` are the base-p digits of ``x``
(least significant digit first), reduced modulo the field's modulus.
The modulus is the first primitive monic polynomial of degree ``h`` in the
ordering used for Conway polynomials: write
``f(t) = t^h - a[h-1] t^(h-1) + a[h-2] t^(h-2) - ... + (-1)^h a[0]`` and
compare ``(a[h-1], ..., a[0])`` lexicographically.  For ``h = 1`` this is
``t - g`` with ``g`` the smallest primitive root mod p.
"""

from __future__ import annotations

import itertools
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from sympy import factorint, isprime

from .errors import InvalidParameterError

MAX_ORDER = 2**20
MAX_DEGREE = 8
LOG_TABLE_LIMIT = 2**16
DENSE_TABLE_LIMIT = 2**12

Poly = list[int]


# -- polynomials over F_p, coefficient lists lowest degree first ------------

def _trim(a: Poly) -> Poly:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> Poly:
    """Remainder of ``a`` modulo ``m`` over F_p."""
    a = _trim([c % p for c in a])
    m = _trim([c % p for c in m])
    if not m:
        raise ZeroDivisionError("polynomial modulus is zero")
    inv_lead = pow(m[-1], -1, p)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        coef = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return a


def poly_mulmod(a: Sequence[int], b: Sequence[int], m: Sequence[int], p: int) -> Poly:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    return poly_mod(prod, m, p)


def poly_powmod(a: Sequence[int], e: int, m: Sequence[int], p: int) -> Poly:
    result: Poly = [1]
    base = poly_mod(a, m, p)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, m, p)
        base = poly_mulmod(base, base, m, p)
        e >>= 1
    return poly_mod(result, m, p)


def poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> Poly:
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _sub_t(a: Poly, p: int) -> Poly:
    a = list(a) + [0] * max(0, 2 - len(a))
    a[1] = (a[1] - 1) % p
    return _trim(a)


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's test for a polynomial over F_p (lowest degree first)."""
    f = _trim([c % p for c in f])
    h = len(f) - 1
    if h < 1:
        return False
    if h == 1:
        return True
    t = [0, 1]
    if _sub_t(poly_powmod(t, p**h, f, p), p) != []:
        return False
    for ell in factorint(h):
        g = poly_gcd(f, _sub_t(poly_powmod(t, p ** (h // ell), f, p), p), p)
        if len(g) > 1:
            return False
    return True


def is_primitive(f: Sequence[int], p: int) -> bool:
    """True iff ``t`` generates the multiplicative group of F_p[t]/(f)."""
    f = _trim([c % p for c in f])
    h = len(f) - 1
    if h < 1 or f[0] == 0:
        return False
    n1 = p**h - 1
    t = [0, 1]
    if poly_powmod(t, n1, f, p) != [1]:
        return False
    return all(poly_powmod(t, n1 // ell, f, p) != [1] for ell in factorint(n1))


def smallest_primitive_modulus(p: int, h: int) -> tuple[int, ...]:
    """Coefficients ``(c0, ..., c_{h-1}, 1)`` of the chosen modulus."""
    for a in itertools.product(range(p), repeat=h):
        # a = (a[h-1], ..., a[0]); coefficient of t^i is (-1)^(h-i) a[i]
        coeffs = [0] * (h + 1)
        coeffs[h] = 1
        for k, ai in enumerate(a):
            i = h - 1 - k
            coeffs[i] = ai % p if (h - i) % 2 == 0 else (-ai) % p
        if is_primitive(coeffs, p):
            return tuple(coeffs)
    raise AssertionError(f"no primitive polynomial of degree {h} over F_{p}")


# -- the field ---------------------------------------------------------------

class Field:
    """The finite field GF(p^h) in the power basis of its modulus."""

    def __init__(self, p: int, h: int = 1):
        if not isinstance(p, (int, np.integer)) or not isprime(int(p)):
            raise InvalidParameterError(f"characteristic {p} is not prime")
        if not 1 <= h <= MAX_DEGREE:
            raise InvalidParameterError(f"degree {h} outside [1, {MAX_DEGREE}]")
        if p**h > MAX_ORDER:
            raise InvalidParameterError(f"field order {p}^{h} exceeds 2^20")
        self.p = int(p)
        self.h = int(h)
        self.order = self.p**self.h
        self.modulus = smallest_primitive_modulus(self.p, self.h)
        self._pw = [self.p**i for i in range(self.h)]
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if self.order <= LOG_TABLE_LIMIT:
            self._build_log_tables()

    def __repr__(self) -> str:
        return f"Field(p={self.p}, h={self.h})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and (self.p, self.h) == (other.p, other.h)

    def __hash__(self) -> int:
        return hash((Field, self.p, self.h))

    def __reduce__(self):
        return (field_build, (self.p, self.h))

    # encoding

    def coeffs(self, x: int) -> list[int]:
        out = []
        for _ in range(self.h):
            x, d = divmod(x, self.p)
            out.append(d)
        return out

    def encode(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.h:
            raise InvalidParameterError(f"expected {self.h} coefficients, got {len(coeffs)}")
        return sum((int(c) % self.p) * w for c, w in zip(coeffs, self._pw))

    def elements(self) -> range:
        return range(self.order)

    def _build_log_tables(self) -> None:
        n1 = self.order - 1
        exp = [0] * (2 * n1 + 1)
        log = [-1] * self.order
        low = [(-c) % self.p for c in self.modulus[:-1]]  # t^h = sum low[i] t^i
        cur = [1] + [0] * (self.h - 1)
        for k in range(n1):
            x = self.encode(cur)
            exp[k] = x
            log[x] = k
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [(c + top * l) % self.p for c, l in zip(cur, low)]
        for k in range(n1, 2 * n1 + 1):
            exp[k] = exp[k - n1]
        self._exp, self._log = exp, log

    # scalar arithmetic

    def add(self, a: int, b: int) -> int:
        if self.h == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        out = 0
        for w in self._pw:
            a, da = divmod(a, self.p)
            b, db = divmod(b, self.p)
            out += ((da + db) % self.p) * w
        return out

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.h == 1:
            return (-a) % self.p
        return self.encode([-c for c in self.coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def smul(self, k: int, a: int) -> int:
        """Multiply ``a`` by the prime-field scalar ``k``."""
        k %= self.p
        if self.h == 1:
            return k * a % self.p
        return self.encode([k * c for c in self.coeffs(a)])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        if self.h == 1:
            return a * b % self.p
        prod = poly_mulmod(self.coeffs(a), self.coeffs(b), self.modulus, self.p)
        return self.encode(prod + [0] * (self.h - len(prod)))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        if self._log is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero has no inverse")
            return 1 if e == 0 else 0
        if self._log is not None:
            return self._exp[(self._log[a] * e) % (self.order - 1)]
        e %= self.order - 1
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def log(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("log of zero")
        if self._log is None:
            raise InvalidParameterError("discrete log tables not built for this order")
        return self._log[a]

    def exp(self, k: int) -> int:
        """The k-th power of the generator ``t``."""
        return self.pow(self.generator, k)

    @property
    def generator(self) -> int:
        # residue class of t; for h == 1 that is the primitive root g = -c0
        return (-self.modulus[0]) % self.p if self.h == 1 else self.p

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    # conjugation over a subfield of index 2

    def subfield_order(self, q: int | None = None) -> int:
        if self.h % 2:
            raise InvalidParameterError(f"GF({self.p}^{self.h}) is not a quadratic extension")
        sq = self.p ** (self.h // 2)
        if q is not None and q != sq:
            raise InvalidParameterError(f"field order {self.order} is not {q}^2")
        return sq

    def conjugate(self, x: int, q: int | None = None) -> int:
        """``x**q`` computed as h/2 applications of the Frobenius map."""
        self.subfield_order(q)
        for _ in range(self.h // 2):
            x = self.frobenius(x)
        return x

    def norm(self, x: int, q: int | None = None) -> int:
        return self.mul(x, self.conjugate(x, q))

    def trace(self, x: int, q: int | None = None) -> int:
        return self.add(x, self.conjugate(x, q))

    def subfield_elements(self, q: int | None = None) -> list[int]:
        self.subfield_order(q)
        return [x for x in self.elements() if self.conjugate(x) == x]

    # numpy tables for vectorised geometry code

    @cached_property
    def digits(self) -> np.ndarray:
        x = np.arange(self.order, dtype=np.int64)
        return (x[:, None] // np.array(self._pw, dtype=np.int64)[None, :]) % self.p

    def _require_dense(self) -> None:
        if self.order > DENSE_TABLE_LIMIT:
            raise InvalidParameterError(f"dense tables limited to order <= {DENSE_TABLE_LIMIT}")

    @cached_property
    def add_table(self) -> np.ndarray:
        self._require_dense()
        d = self.digits
        s = (d[:, None, :] + d[None, :, :]) % self.p
        return (s @ np.array(self._pw, dtype=np.int64)).astype(np.int32)

    @cached_property
    def mul_table(self) -> np.ndarray:
        self._require_dense()
        n = self.order
        t = np.zeros((n, n), dtype=np.int32)
        if self._log is not None:
            exp = np.array(self._exp, dtype=np.int64)
            lg = np.array(self._log, dtype=np.int64)
            t[1:, 1:] = exp[lg[1:, None] + lg[None, 1:]]
        else:  # pragma: no cover - dense limit is below the log-table limit
            for a in range(1, n):
                for b in range(1, n):
                    t[a, b] = self.mul(a, b)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self.neg(a) for a in self.elements()], dtype=np.int32)

    @cached_property
    def inv_table(self) -> np.ndarray:
        return np.array([0] + [self.inv(a) for a in range(1, self.order)], dtype=np.int32)

    @cached_property
    def conj_table(self) -> np.ndarray:
        return np.array([self.conjugate(a) for a in self.elements()], dtype=np.int32)


@lru_cache(maxsize=None)
def field_build(p: int, h: int = 1) -> Field:
    """Build (and memoise) GF(p^h)."""
    return Field(p, h)


def prime_power(q: int) -> tuple[int, int]:
    """Split a prime power ``q`` into ``(p, h)``."""
    f = factorint(q) if q > 1 else {}
    if len(f) != 1:
        raise InvalidParameterError(f"{q} is not a prime power")
    (p, h), = f.items()
    return int(p), int(h)


def is_prime_power(q: int) -> bool:
    return q > 1 and len(factorint(q)) == 1


# -- small dense linear algebra over a Field ---------------------------------

def rref(field: Field, rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = field.inv(m[r][c])
        m[r] = [field.mul(inv, x) for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(field: Field, rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of ``{x : rows @ x = 0}``."""
    red, piv = rref(field, rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for row, pc in zip(red, piv):
            x[pc] = field.neg(row[f])
        basis.append(x)
    return basis


def matrix_rank(field: Field, rows: Sequence[Sequence[int]]) -> int:
    return len(rref(field, rows)[1])
