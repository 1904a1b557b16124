"""Hermitian varieties H(r, q^2), their cones, and closed-form counts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .field import Field, field_build, is_prime_power, matrix_rank, rref
from .geometry import Geometry, PointSet, Subspace


# -- closed forms -----------------------------------------------------------

def _check_rq(r: int, q: int, rmin: int = 1) -> None:
    if r < rmin:
        raise InvalidParameterError(f"dimension {r} < {rmin}")
    if not is_prime_power(q):
        raise InvalidParameterError(f"{q} is not a prime power")


def _exact(num: int, den: int) -> int:
    qt, rem = divmod(num, den)
    if rem:
        raise ArithmeticError(f"{num}/{den} is not an integer")
    return qt


def hermitian_size(r: int, q: int) -> int:
    """|H(r, q^2)| = (q^(r+1) + (-1)^r)(q^r - (-1)^r)/(q^2 - 1)."""
    _check_rq(r, q, 0)
    sg = (-1) ** r
    return _exact((q ** (r + 1) + sg) * (q**r - sg), q * q - 1)


def hermitian_hyperplane_numbers(r: int, q: int) -> tuple[int, int]:
    """Sizes of non-tangent and tangent hyperplane sections of H(r, q^2)."""
    _check_rq(r, q, 2)
    s1 = (-1) ** (r - 1)
    non_tangent = _exact((q**r + s1) * (q ** (r - 1) - s1), q * q - 1)
    s2 = (-1) ** r
    tangent = 1 + q * q * _exact((q ** (r - 1) + s2) * (q ** (r - 2) - s2), q * q - 1)
    return non_tangent, tangent


def _check_d(r: int, q: int, d: int) -> None:
    _check_rq(r, q, 2)
    if not 0 <= d <= r - 3:
        raise InvalidParameterError(f"vertex dimension {d} outside [0, {r - 3}]")


def _pg_size(d: int, q: int) -> int:
    """Number of points of PG(d, q^2); 0 for d = -1."""
    return (q ** (2 * (d + 1)) - 1) // (q * q - 1)


def singular_size(r: int, q: int, d: int) -> int:
    """Size of the cone with vertex PG(d, q^2) over H(r-d-1, q^2)."""
    _check_d(r, q, d)
    n = r - d - 1
    sg = (-1) ** (r - d - 1)
    base = _exact((q ** (r - d) + sg) * (q ** (r - d - 1) - sg), q * q - 1)
    assert base == hermitian_size(n, q)
    return q ** (2 * (d + 1)) * base + _pg_size(d, q)


def singular_hyperplane_numbers(r: int, q: int, d: int) -> tuple[int, ...]:
    """Hyperplane intersection sizes of the cone over H(r-d-1, q^2).

    A hyperplane through the vertex is a cone over a hyperplane section of
    the base; any other hyperplane meets the vertex in a (d-1)-space and
    the section is a cone with that vertex over the whole base.
    """
    _check_d(r, q, d)
    n = r - d - 1
    lift = q ** (2 * (d + 1))
    through = {lift * h + _pg_size(d, q) for h in hermitian_hyperplane_numbers(n, q)}
    other = q ** (2 * d) * hermitian_size(n, q) + _pg_size(d - 1, q)
    return tuple(sorted(through | {other}))


# -- forms ------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianForm:
    field: Field
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        q = self.field.subfield_order()
        m = self.matrix
        n = len(m)
        if any(len(row) != n for row in m):
            raise InvalidParameterError("form matrix must be square")
        for i in range(n):
            for j in range(n):
                if m[i][j] != self.field.conjugate(m[j][i], q):
                    raise InvalidParameterError(f"entry ({i},{j}) breaks conjugate symmetry")

    @classmethod
    def identity(cls, field: Field, r: int) -> "HermitianForm":
        return cls.diagonal(field, [1] * (r + 1))

    @classmethod
    def diagonal(cls, field: Field, diag: Sequence[int]) -> "HermitianForm":
        n = len(diag)
        return cls(field, tuple(
            tuple(int(diag[i]) if i == j else 0 for j in range(n)) for i in range(n)
        ))

    @property
    def size(self) -> int:
        return len(self.matrix)

    @property
    def is_nonsingular(self) -> bool:
        return matrix_rank(self.field, self.matrix) == self.size

    def polar_covectors(self, coords: np.ndarray) -> np.ndarray:
        """Rows ``conj(x) M`` for each point ``x``; zero rows for radical points."""
        f = self.field
        add, mul, conj = f.add_table, f.mul_table, f.conj_table
        M = np.asarray(self.matrix, dtype=np.int64)
        cx = conj[np.asarray(coords, dtype=np.int64)]
        out = np.zeros((len(cx), self.size), dtype=np.int64)
        for j in range(self.size):
            acc = np.zeros(len(cx), dtype=np.int64)
            for i in range(self.size):
                if M[i, j]:
                    acc = add[acc, mul[cx[:, i], M[i, j]]]
            out[:, j] = acc
        return out

    def values(self, coords: np.ndarray) -> np.ndarray:
        """``conj(x)^T M x`` for each row ``x``."""
        f = self.field
        y = self.polar_covectors(coords)
        x = np.asarray(coords, dtype=np.int64)
        acc = np.zeros(len(x), dtype=np.int64)
        for j in range(self.size):
            acc = f.add_table[acc, f.mul_table[y[:, j], x[:, j]]]
        return acc


def _form_for(g: Geometry, form: HermitianForm | None) -> HermitianForm:
    if form is None:
        return HermitianForm.identity(g.field, g.r)
    if form.field != g.field or form.size != g.r + 1:
        raise InvalidParameterError("form does not match the geometry")
    return form


def build_hermitian(g: Geometry, form: HermitianForm | None = None) -> PointSet:
    """Absolute points of ``form`` (identity by default) in ``g``."""
    form = _form_for(g, form)
    vals = form.values(g.coords)
    return PointSet(g, np.flatnonzero(vals == 0))


def polar_hyperplane(g: Geometry, P: int, form: HermitianForm | None = None) -> int:
    """Hyperplane id of the polar of point ``P``."""
    form = _form_for(g, form)
    cov = form.polar_covectors(g.coords[[P]])[0]
    if not cov.any():
        raise InvalidParameterError(f"point {P} lies in the radical of the form")
    return g.hyperplane_id(cov)


def polar_map(g: Geometry, form: HermitianForm | None = None) -> np.ndarray:
    """Polar hyperplane id of every point (non-singular forms only)."""
    form = _form_for(g, form)
    cov = form.polar_covectors(g.coords)
    if not cov.any(axis=1).all():
        raise InvalidParameterError("form is singular")
    return g.point_ids(cov)


def pole(g: Geometry, j: int, form: HermitianForm | None = None) -> int:
    """The point whose polar is hyperplane ``j``."""
    form = _form_for(g, form)
    f = g.field
    n = form.size
    a = g.coords[j]
    # conj(x)^T M = a  <=>  M^T z = a with z = conj(x)
    aug = [[form.matrix[i][k] for i in range(n)] + [int(a[k])] for k in range(n)]
    red, piv = rref(f, aug)
    if n in piv or len(piv) < n:
        raise InvalidParameterError("form is singular")
    z = [0] * n
    for row, c in zip(red, piv):
        z[c] = row[n]
    return g.point_id([f.conjugate(v) for v in z])


def tangent_hyperplanes(g: Geometry, H: PointSet, form: HermitianForm | None = None) -> np.ndarray:
    """Polars of the points of ``H``: the tangent hyperplanes."""
    return np.sort(polar_map(g, form)[H.members])


# -- cones --------------------------------------------------------------------

def build_cone(g: Geometry, vertex: Subspace, base: PointSet) -> PointSet:
    """Union of the joins of ``vertex`` with every base point, plus the vertex."""
    vpts = g.subspace_points(vertex)
    if np.intersect1d(vpts, base.members).size:
        raise InvalidParameterError("base meets the vertex")
    if len(base):
        bspan = g.span(base.members)
        joint = g.subspace(list(vertex.rows) + list(bspan.rows))
        if joint.dim != vertex.dim + bspan.dim + 1:
            raise InvalidParameterError("base does not lie in a subspace skew to the vertex")
    pts = [vpts]
    for b in base.members:
        pts.append(g.subspace_points(g.subspace(list(vertex.rows) + [g.coords[b].tolist()])))
    return PointSet(g, np.unique(np.concatenate(pts)))


def standard_cone(g: Geometry, d: int) -> tuple[PointSet, Subspace, PointSet]:
    """Cone with vertex spanned by the last d+1 unit vectors over the
    Hermitian variety ``x0^(q+1) + ... + x_n^(q+1) = 0`` in ``x_{n+1} = ... = 0``."""
    r = g.r
    n = r - d - 1
    if n < 1 or d < 0:
        raise InvalidParameterError(f"vertex dimension {d} invalid for r={r}")
    eye = np.eye(r + 1, dtype=int)
    vertex = g.subspace(eye[n + 1:].tolist())
    form = HermitianForm.diagonal(g.field, [1] * (n + 1) + [0] * (d + 1))
    in_base_space = ~g.coords[:, n + 1:].any(axis=1)
    base = PointSet(g, np.flatnonzero(in_base_space & (form.values(g.coords) == 0)))
    return build_cone(g, vertex, base), vertex, base


# -- form fitting --------------------------------------------------------------

def _hermitian_basis(field: Field, n: int) -> list[np.ndarray]:
    """An F_p-basis of the n x n Hermitian matrices over GF(q^2)."""
    q = field.subfield_order()
    sub = field.subfield_elements(q)
    sub_basis: list[int] = []
    for x in sub:
        trial = sub_basis + [x]
        if len(rref(field_build(field.p, 1), [field.coeffs(y) for y in trial])[1]) == len(trial):
            sub_basis.append(x)
    full_basis = [field.p**k for k in range(field.h)]
    out = []
    for i in range(n):
        for x in sub_basis:
            m = np.zeros((n, n), dtype=np.int64)
            m[i, i] = x
            out.append(m)
    for i, j in itertools.combinations(range(n), 2):
        for x in full_basis:
            m = np.zeros((n, n), dtype=np.int64)
            m[i, j] = x
            m[j, i] = field.conjugate(x, q)
            out.append(m)
    return out


def fit_hermitian_form(S: PointSet, max_candidates: int = 1 << 14) -> HermitianForm | None:
    """Find a non-singular Hermitian form whose absolute points are exactly S.

    Vanishing of ``conj(x) M x`` at a point is F_p-linear in the entries of
    M, so the candidate forms are the F_p-kernel of one linear system.
    Returns ``None`` when no such form exists.
    """
    from .code import fp_nullspace

    g = S.geometry
    f = g.field
    n = g.r + 1
    basis = _hermitian_basis(f, n)
    pts = g.coords[S.members]
    cols = []
    for B in basis:
        form = HermitianForm(f, tuple(map(tuple, B.tolist())))
        cols.append(f.digits[form.values(pts)].reshape(-1))
    A = np.stack(cols, axis=1) if len(pts) else np.zeros((0, len(basis)), dtype=np.int64)
    kernel = fp_nullspace(A, f.p) if len(pts) else np.eye(len(basis), dtype=np.int64)
    k = len(kernel)
    if f.p**k > max_candidates:
        raise InvalidParameterError(f"{f.p}^{k} candidate forms exceed the search cap")
    for combo in itertools.product(range(f.p), repeat=k):
        if not any(combo):
            continue
        c = (np.asarray(combo, dtype=np.int64) @ kernel) % f.p
        M = np.zeros((n, n), dtype=np.int64)
        for ck, B in zip(c, basis):
            if ck:
                scaled = f.digits[B] * ck % f.p @ (f.p ** np.arange(f.h))
                M = f.add_table[M, scaled]
        form = HermitianForm(f, tuple(map(tuple, M.tolist())))
        if form.is_nonsingular and np.array_equal(build_hermitian(g, form).members, S.members):
            return form
    return None
