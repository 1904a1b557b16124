"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's linear algebra or field code: field
arithmetic goes through sympy's dense GF(p) polynomial routines, and rank
is plain row reduction on Python lists.
"""

from __future__ import annotations

import itertools

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_rem


def naive_rank(rows, p):
    """Rank over F_p by textbook elimination on lists of ints."""
    m = [[int(x) % p for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for c in range(ncols):
        piv = None
        for i in range(rank, len(m)):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], p - 2, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def naive_solvable(rows, rhs, p):
    """True iff ``x @ rows = rhs`` has a solution (rhs in the row space)."""
    return naive_rank(rows, p) == naive_rank(list(rows) + [rhs], p)


# -- GF(p^h) via sympy polynomials -------------------------------------------

def _to_poly(x, p, h):
    """Integer encoding -> sympy dense poly, highest degree first."""
    c = []
    for _ in range(h):
        x, d = divmod(x, p)
        c.append(d)
    c = c[::-1]
    while c and c[0] == 0:
        c.pop(0)
    return [ZZ(v) for v in c]


def _from_poly(f, p, h):
    c = [int(v) % p for v in f][::-1] + [0] * h
    return sum(v * p**i for i, v in enumerate(c[:h]))


class SlowField:
    def __init__(self, p, h, modulus_low_first):
        self.p, self.h = p, h
        self.order = p**h
        self.mod = [ZZ(v) for v in modulus_low_first[::-1]]

    def add(self, a, b):
        out = 0
        for i in range(self.h):
            out += ((a // self.p**i + b // self.p**i) % self.p) * self.p**i
        return out

    def mul(self, a, b):
        f = gf_mul(_to_poly(a, self.p, self.h), _to_poly(b, self.p, self.h), self.p, ZZ)
        return _from_poly(gf_rem(f, self.mod, self.p, ZZ), self.p, self.h)

    def pow(self, a, e):
        r = 1
        for _ in range(e):
            r = self.mul(r, a)
        return r


def all_monic(p, h):
    """Monic degree-h polynomials over F_p, lowest degree first."""
    for low in itertools.product(range(p), repeat=h):
        yield list(low) + [1]


def brute_irreducible(f, p):
    """No monic factor of degree 1..deg/2, by trial division."""
    h = len(f) - 1
    target = [ZZ(c) for c in f[::-1]]
    for d in range(1, h // 2 + 1):
        for g in all_monic(p, d):
            if not gf_rem(target, [ZZ(c) for c in g[::-1]], p, ZZ):
                return False
    return True


def brute_primitive(f, p):
    """t has multiplicative order p^h - 1 modulo f, by repeated multiplication."""
    h = len(f) - 1
    if not brute_irreducible(f, p):
        return False
    F = SlowField(p, h, f)
    t = p if h > 1 else (-f[0]) % p
    x, k = t, 1
    while x != 1:
        x = F.mul(x, t)
        k += 1
    return k == p**h - 1


def sympy_irreducible(f, p):
    return gf_irreducible_p([ZZ(c) for c in f[::-1]], p, ZZ)


def conway_key(f, p):
    """(a_{h-1}, ..., a_0) with f = t^h - a_{h-1} t^{h-1} + ... + (-1)^h a_0."""
    h = len(f) - 1
    return tuple(((-1) ** (h - i) * f[i]) % p for i in range(h - 1, -1, -1))


# -- geometry ------------------------------------------------------------------

def naive_points(F, r):
    """Canonical vectors of PG(r, s) sorted by their base-s encoding."""
    s = F.order
    pts = []
    for v in itertools.product(range(s), repeat=r + 1):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            pts.append(v)
    return sorted(pts, key=lambda v: sum(x * s ** (r - i) for i, x in enumerate(v)))


def naive_dot(F, a, b):
    acc = 0
    for x, y in zip(a, b):
        acc = F.add(acc, F.mul(x, y))
    return acc


def naive_incidence(F, r):
    """rows = points, cols = hyperplanes (covector = point coordinates)."""
    pts = naive_points(F, r)
    return [[1 if naive_dot(F, h, x) == 0 else 0 for h in pts] for x in pts]
