"""Exact re-checks of the counting identities, sign claims, integrality and
divisibility claims behind the classification arguments.

Every audit is a pure function of its parameters and returns an
``AuditFinding``.  Arithmetic is done with Python integers and
``fractions.Fraction`` so nothing is rounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from sympy import isprime

from .errors import InvalidParameterError
from .field import is_prime_power
from .hermitian import hermitian_size, singular_size

HOLDS = "holds"
FAILS = "fails"
NOT_APPLICABLE = "not-applicable"


def _jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v if abs(v) < 2**53 else str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else v
        return [_jsonable(x) for x in items]
    return str(v)


@dataclass
class SubClaim:
    name: str
    holds: bool
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "holds": self.holds, "witness": _jsonable(self.witness)}


@dataclass
class AuditFinding:
    claim_id: str
    parameters: dict
    verdict: str
    witness: dict = field(default_factory=dict)
    subclaims: list[SubClaim] = field(default_factory=list)
    note: str = ""

    def subclaim(self, name: str) -> SubClaim:
        for s in self.subclaims:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_json(self) -> dict:
        out = {
            "claim_id": self.claim_id,
            "parameters": _jsonable(self.parameters),
            "verdict": self.verdict,
            "witness": _jsonable(self.witness),
            "subclaims": [s.to_json() for s in self.subclaims],
        }
        if self.note:
            out["note"] = self.note
        return out


def _finish(claim_id: str, params: dict, subs: list[SubClaim], witness=None, note="") -> AuditFinding:
    verdict = HOLDS if all(s.holds for s in subs) else FAILS
    return AuditFinding(claim_id, params, verdict, witness or {}, subs, note)


def _not_applicable(claim_id: str, params: dict, why: str) -> AuditFinding:
    return AuditFinding(claim_id, params, NOT_APPLICABLE, {}, [], why)


def _require_prime(p: int) -> None:
    if not isprime(p):
        raise InvalidParameterError(f"{p} is not prime")


def _require_prime_power(q: int) -> None:
    if not is_prime_power(q):
        raise InvalidParameterError(f"{q} is not a prime power")


def p_valuation(n: int, p: int) -> int | None:
    """Exponent of ``p`` in ``n``; ``None`` for n = 0."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def geometric_sum(base: int, terms: int) -> int:
    """``1 + base + ... + base^(terms-1)``."""
    return sum(base**k for k in range(terms))


def moment_reduction(a: int, b: int, s: int, x: int) -> int:
    """``sum (-i^2 + a i - b) t_i`` rewritten through the three line moments
    of an x-set in PG(2, s)."""
    lines = s * s + s + 1
    incid = x * (s + 1)
    pairs = x * (x - 1)
    return -(pairs + incid) + a * incid - b * lines


# -- sign analysis for plane sections of size about q^3 ----------------------

def f_unital(q: int, x: Fraction | int) -> Fraction:
    return -x * x + x * ((q * q + 1) * (q + 2) + 1) - 2 * (q + 1) * (q**4 + q * q + 1)


def audit_f_unital(q: int) -> AuditFinding:
    """Signs of the quadratic that forces a tangent line in an x-set with
    q^3+1 <= x <= q^3+2q^2."""
    _require_prime_power(q)
    params = {"q": q}
    if q < 5:
        return _not_applicable("f_unital", params, "requires q >= 5")
    B = (q * q + 1) * (q + 2) + 1
    C = (q + 1) * (q**4 + q * q + 1)
    y = q**3
    four_f_half = -y * y + 2 * y * B - 8 * C  # 4 f(q^3/2), an integer
    lo, hi = q**3 + 1, q**3 + 2 * q * q
    f_lo, f_hi = f_unital(q, lo), f_unital(q, hi)
    # f is concave, so negativity at both ends covers the whole interval
    worst = max(f_unital(q, x) for x in range(lo, hi + 1))
    # (i-2)(q+1-i) = -i^2 + (q+3) i - 2(q+1)
    red_ok = all(
        moment_reduction(q + 3, 2 * (q + 1), q * q, x) == f_unital(q, x) for x in (lo, hi, y)
    )
    subs = [
        SubClaim("f(q^3/2)>0", four_f_half > 0, {"4f(q^3/2)": four_f_half}),
        SubClaim("f(q^3+1)<0", f_lo < 0, {"f(q^3+1)": int(f_lo)}),
        SubClaim("f(q^3+2q^2)<0", f_hi < 0, {"f(q^3+2q^2)": int(f_hi)}),
        SubClaim("f<0 on [q^3+1,q^3+2q^2]", worst < 0, {"max": int(worst)}),
        SubClaim("polynomial matches moment reduction", red_ok, {}),
    ]
    return _finish("f_unital", params, subs, {"B": B, "C": C})


def f_p4(p: int, x: int) -> int:
    p2, p4, p8 = p * p, p**4, p**8
    return -x * x + ((p4 + 1) * (p4 + p2 - p + 1) + 1) * x - (p8 + p4 + 1) * (p2 + 1) * (p4 - p + 1)


def audit_f_p4(p: int) -> AuditFinding:
    """The two positive values of the plane-size quadratic over PG(r, p^4)."""
    _require_prime(p)
    params = {"p": p}
    if p <= 3:
        return _not_applicable("f_p4", params, "requires p > 3")
    x1 = p**6 + 2 * p**4 - p * p + 1
    x2 = p**8 - p**5 + p**4 - p
    v1, v2 = f_p4(p, x1), f_p4(p, x2)
    # (p^2+1-i)(i-(p^4-p+1)) = -i^2 + (p^4+p^2-p+2) i - (p^2+1)(p^4-p+1)
    a = p**4 + p * p - p + 2
    b = (p * p + 1) * (p**4 - p + 1)
    red_ok = all(moment_reduction(a, b, p**4, x) == f_p4(p, x) for x in (x1, x2))
    subs = [
        SubClaim("f(p^6+2p^4-p^2+1)>0", v1 > 0, {"x": x1, "f": v1}),
        SubClaim("f(p^8-p^5+p^4-p)>0", v2 > 0, {"x": x2, "f": v2}),
        SubClaim("polynomial matches moment reduction", red_ok, {}),
    ]
    return _finish("f_p4", params, subs)


# -- integrality of the tangent count t_i --------------------------------------

def _solve3(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Exact Gauss-Jordan for a 3x3 system."""
    m = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(rows, rhs)]
    n = len(m)
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [m[i][n] for i in range(n)]


def ti_from_moments(p: int, i: int) -> Fraction:
    """t_i from the moment system for an (i, p^4-p+1, p^4+1)-set of size
    p^8-p^5+p^4+i in PG(2, p^4)."""
    s = p**4
    sizes = [i, s - p + 1, s + 1]
    X = p**8 - p**5 + p**4 + i
    rows = [[1, 1, 1], sizes, [k * (k - 1) for k in sizes]]
    rhs = [s * s + s + 1, (s + 1) * X, X * (X - 1)]
    return _solve3(rows, rhs)[0]


def audit_ti_integrality(p: int) -> AuditFinding:
    _require_prime(p)
    params = {"p": p}
    if p <= 3:
        return _not_applicable("ti_integrality", params, "requires p > 3")
    integral = []
    mismatch = []
    for i in range(1, p * p + 2):
        closed = Fraction(p**5 - i + 1, p**4 - i + 1)
        if ti_from_moments(p, i) != closed:
            mismatch.append(i)
        if closed.denominator == 1:
            integral.append(i)
    subs = [
        SubClaim("integral only at i=1", integral == [1], {"integral_i": integral}),
        SubClaim("closed form matches moment solve", not mismatch, {"mismatch_i": mismatch}),
    ]
    return _finish("ti_integrality", params, subs, {"integral_i": integral, "t_1": p})


# -- divisibility for a pencil of i concurrent lines ----------------------------

def _sigma_epsilon_size(p: int, r: int) -> int:
    sigma, eps = divmod(r, 2)
    low = sum(p ** (4 * k) for k in range(0, r - sigma))
    high = sum(p ** (4 * k) for k in range(r - sigma - eps, r))
    return low + high * p * p


def audit_cone_divisibility(p: int, r: int) -> AuditFinding:
    """|V| = m(i p^4 + 1 - i) + i has no solution i in [2, p^2-p]."""
    _require_prime(p)
    params = {"p": p, "r": r}
    if r < 4:
        return _not_applicable("cone_divisibility", params, "requires r >= 4")
    if p <= 3:
        return _not_applicable("cone_divisibility", params, "requires p > 3")
    size = hermitian_size(r, p * p)
    m = geometric_sum(p**4, r - 1)
    lhs = size - m
    val = p_valuation(lhs, p)
    bound = 4 * (r - 1)
    solutions = [i for i in range(2, p * p - p + 1) if m * (i * p**4 + 1 - i) + i == size]
    alt = _sigma_epsilon_size(p, r)
    subs = [
        SubClaim("rewritten size matches", alt == size, {"size": size, "rewritten": alt}),
        SubClaim("pencil identity", m * (p**4 - 1) + 1 == p ** (4 * (r - 1)), {"m": m}),
        SubClaim(
            "p^(4(r-1)) does not divide |V|-m",
            val is not None and val < bound,
            {"lhs": lhs, "valuation": val, "bound": bound},
        ),
        SubClaim("no admissible i", not solutions, {"solutions": solutions}),
    ]
    return _finish("cone_divisibility", params, subs, {"size": size, "m": m})


# -- the two-plane-size system through a (p^2-p+1)-secant ------------------------

def audit_2c_system(p: int, r: int) -> AuditFinding:
    _require_prime(p)
    params = {"p": p, "r": r}
    if r < 4:
        return _not_applicable("2c_system", params, "requires r >= 4")
    if p <= 3:
        return _not_applicable("2c_system", params, "requires p > 3")
    size = hermitian_size(r, p * p)
    m = geometric_sum(p**4, r - 1)
    c = p * p - p + 1
    x = c * p**4 + 1
    y = p * p * (p**4 - p) + p**4 + 1
    # t_x + t_y = m ; t_x (x - c) + t_y (y - c) + c = |V|
    t_y = Fraction(size - c - m * (x - c), (y - c) - (x - c))
    t_x = m - t_y
    numer = size - m * (p**6 - p**5 + p**4 - p * p + p) - p * p + p - 1
    denom = p**3 * (p * p - 1)
    subs = [
        SubClaim("t_y not an integer", t_y.denominator != 1, {"t_y": t_y, "denominator": t_y.denominator}),
        SubClaim("numerator not divisible by p+1", numer % (p + 1) != 0, {"numerator": numer, "mod": numer % (p + 1)}),
        SubClaim("closed form matches solve", Fraction(numer, denom) == t_y, {"numerator": numer, "denominator": denom}),
        SubClaim("t_x + t_y = m", t_x + t_y == m, {"t_x": t_x}),
        SubClaim(
            "size equation",
            t_x * (x - c) + t_y * (y - c) + c == size,
            {"x": x, "y": y},
        ),
    ]
    return _finish("2c_system", params, subs, {"size": size, "m": m})


# -- plane through a line with few points -----------------------------------------

def audit_plane_section_bound(q: int, r: int, d: int | None = None) -> AuditFinding:
    """No x in [0, q^2+1] satisfies |V| > m(q^3+q^2+q+1-x) + x.

    With ``d`` the size is that of the cone with a d-dimensional vertex and
    the inequality is non-strict.
    """
    _require_prime_power(q)
    if r < 3:
        raise InvalidParameterError("requires r >= 3")
    params = {"q": q, "r": r} if d is None else {"q": q, "r": r, "d": d}
    size = hermitian_size(r, q) if d is None else singular_size(r, q, d)
    m = geometric_sum(q * q, r - 1)
    Q = q**3 + q * q + q + 1

    def violates(x: int) -> bool:
        rhs = m * (Q - x) + x
        return size > rhs if d is None else size >= rhs

    bad = [x for x in range(0, q * q + 2) if violates(x)]
    subs = [SubClaim("inequality forces x > q^2+1", not bad, {"x_satisfying": bad})]
    # smallest x that would satisfy the inequality, as a witness of the margin
    x_min = next(x for x in range(0, Q + 2) if violates(x) or x == Q + 1)
    return _finish("plane_section_bound", params, subs, {"size": size, "m": m, "smallest_x": x_min})


# -- singular surface, line meeting in s points -----------------------------------

def audit_singular_lemma_r3(q: int) -> AuditFinding:
    """Solve (q^3+q^2+1-s)(q^2+1) + s = q^5+q^2+1 for s."""
    _require_prime_power(q)
    params = {"q": q}
    target = q**5 + q * q + 1
    # linear in s: (q^3+q^2+1)(q^2+1) - q^2 s = target
    s = Fraction((q**3 + q * q + 1) * (q * q + 1) - target, q * q)
    size_ok = target == singular_size(3, q, 0)
    admissible = {1, q + 1, q * q + 1}
    in_gap = q + 1 < s < q * q - q + 1
    exceeds = s > q * q + 1
    if exceeds:
        exclusion = "exceeds line size"
    elif in_gap:
        exclusion = "line-size gap"
    elif s not in admissible:
        exclusion = "not an admissible line size"
    else:
        exclusion = "none"
    subs = [
        SubClaim("s = q^2+q+1", s == q * q + q + 1, {"s": s}),
        SubClaim("right side is the cone size", size_ok, {"size": target}),
        SubClaim("s is impossible", exclusion != "none", {"exclusion": exclusion}),
    ]
    witness = {
        "s": s,
        "in_gap": in_gap,
        "in_admissible_set": s in admissible,
        "exceeds_line_size": exceeds,
        "exclusion": exclusion,
    }
    return _finish("singular_lemma_r3", params, subs, witness)


AUDITS: dict[str, tuple[Callable[..., AuditFinding], tuple[str, ...]]] = {
    "f_unital": (audit_f_unital, ("q",)),
    "f_p4": (audit_f_p4, ("p",)),
    "ti_integrality": (audit_ti_integrality, ("p",)),
    "cone_divisibility": (audit_cone_divisibility, ("p", "r")),
    "2c_system": (audit_2c_system, ("p", "r")),
    "plane_section_bound": (audit_plane_section_bound, ("q", "r")),
    "singular_lemma_r3": (audit_singular_lemma_r3, ("q",)),
}
