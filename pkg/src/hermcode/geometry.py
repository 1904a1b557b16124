"""Enumerated projective spaces PG(r, s) over a finite field.

Points are canonical coordinate vectors (leftmost nonzero coordinate 1)
numbered by the integer ``sum(x[i] * s**(r-i))``.  Canonical encodings
with leading position ``r-j`` fill the interval ``[s^j, 2 s^j)``, so the id
of an encoding is ``(s^j - 1)/(s - 1) + enc - s^j`` and no lookup table
is needed.  Hyperplane ``j`` is the hyperplane whose canonical covector is
the coordinate vector of point ``j``.

Incidence is stored as packed bitsets, one row per hyperplane.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .field import Field, field_build, nullspace, rref

MAX_POINTS = 2**21
MAX_INCIDENCE_POINTS = 2**14
MAX_MATERIALIZED_ENTRIES = 2**24
CHUNK = 2**15


def gaussian_binomial(n: int, k: int, s: int) -> int:
    """Number of k-dimensional vector subspaces of F_s^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= s ** (n - i) - 1
        den *= s ** (i + 1) - 1
    return num // den


def _popcount_rows(bits: np.ndarray) -> np.ndarray:
    return np.bitwise_count(bits).sum(axis=-1, dtype=np.int64)


@dataclass(frozen=True)
class Subspace:
    """A projective subspace given by a reduced echelon basis."""

    rows: tuple[tuple[int, ...], ...]
    ambient_dim: int

    @property
    def dim(self) -> int:
        return len(self.rows) - 1

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    @property
    def kind(self) -> str:
        if self.dim == 1:
            return "line"
        if self.dim == 2:
            return "plane"
        if self.codim == 1:
            return "hyperplane"
        return "general"


@dataclass
class PointSet:
    """A set of point ids of a geometry."""

    geometry: "Geometry"
    members: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        m = np.unique(np.asarray(self.members, dtype=np.int64))
        if m.size and (m[0] < 0 or m[-1] >= self.geometry.n_points):
            raise InvalidParameterError("point id outside the geometry")
        self.members = m

    def __len__(self) -> int:
        return int(self.members.size)

    def __contains__(self, pid: int) -> bool:
        return bool(self.mask[pid])

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.geometry.n_points, dtype=bool)
        m[self.members] = True
        return m

    @cached_property
    def bits(self) -> np.ndarray:
        return np.packbits(self.mask)

    def char_vector(self, p: int | None = None):
        from .code import CharVector

        p = self.geometry.field.p if p is None else p
        return CharVector(self.geometry, p, self.mask.astype(np.uint8))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PointSet)
            and other.geometry is self.geometry
            and np.array_equal(other.members, self.members)
        )

    def __hash__(self):
        return hash((id(self.geometry), self.members.tobytes()))


class Geometry:
    """PG(r, s) with canonically numbered points, lines and hyperplanes."""

    def __init__(self, field: Field, r: int, _coords: np.ndarray | None = None):
        if r < 1:
            raise InvalidParameterError("dimension must be at least 1")
        self.field = field
        self.r = int(r)
        self.s = field.order
        s = self.s
        self.n_points = (s ** (r + 1) - 1) // (s - 1)
        if self.n_points > MAX_POINTS:
            raise ResourceLimitError(f"PG({r},{s}) has {self.n_points} points, cap is 2^21")
        self.n_hyperplanes = self.n_points
        self._block_offsets = [(s**j - 1) // (s - 1) for j in range(r + 2)]
        if _coords is None:
            enc = np.concatenate(
                [np.arange(s**j, 2 * s**j, dtype=np.int64) for j in range(r + 1)]
            )
            _coords = self._decode(enc)
        self.coords = _coords
        self.coords.setflags(write=False)
        self._cache: dict = {}

    def __repr__(self) -> str:
        return f"Geometry(PG({self.r},{self.s}))"

    # coordinates and ids

    def _decode(self, enc: np.ndarray) -> np.ndarray:
        powers = self.s ** np.arange(self.r, -1, -1, dtype=np.int64)
        return ((enc[:, None] // powers[None, :]) % self.s).astype(np.int32)

    @cached_property
    def encodings(self) -> np.ndarray:
        powers = self.s ** np.arange(self.r, -1, -1, dtype=np.int64)
        return self.coords.astype(np.int64) @ powers

    def normalize(self, vecs: np.ndarray) -> np.ndarray:
        """Scale nonzero vectors (rows) so their leftmost nonzero entry is 1."""
        vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64))
        nz = vecs != 0
        if not nz.any(axis=1).all():
            raise InvalidParameterError("zero vector is not a projective point")
        lead = nz.argmax(axis=1)
        lv = vecs[np.arange(len(vecs)), lead]
        inv = self.field.inv_table[lv]
        return self.field.mul_table[inv[:, None], vecs].astype(np.int64)

    def ids_of_canonical(self, vecs: np.ndarray) -> np.ndarray:
        """Point ids of vectors that are already canonical."""
        vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64))
        powers = self.s ** np.arange(self.r, -1, -1, dtype=np.int64)
        enc = vecs @ powers
        lead = (vecs != 0).argmax(axis=1)
        j = self.r - lead
        base = np.array([self.s**k for k in range(self.r + 1)], dtype=np.int64)[j]
        offs = np.array(self._block_offsets, dtype=np.int64)[j]
        return offs + enc - base

    def point_id(self, vec: Sequence[int]) -> int:
        return int(self.ids_of_canonical(self.normalize(np.asarray([vec])))[0])

    def point_ids(self, vecs: np.ndarray) -> np.ndarray:
        return self.ids_of_canonical(self.normalize(vecs))

    def hyperplane_covector(self, j: int) -> np.ndarray:
        return self.coords[j]

    # vectorised field helpers

    def _lincomb(self, coef: np.ndarray, basis: np.ndarray) -> np.ndarray:
        """``coef[..., k] * basis[..., k, :]`` summed over k, over the field."""
        add, mul = self.field.add_table, self.field.mul_table
        acc = None
        for k in range(coef.shape[-1]):
            term = mul[coef[..., k, None], basis[..., k, :]]
            acc = term if acc is None else add[acc, term]
        return acc

    def pairing(self, covectors: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Matrix of dual pairings ``a . x`` over the field."""
        add, mul = self.field.add_table, self.field.mul_table
        acc = None
        for i in range(self.r + 1):
            term = mul[covectors[:, i, None], points[None, :, i]]
            acc = term if acc is None else add[acc, term]
        return acc

    # incidence

    @property
    def hyperplane_bits(self) -> np.ndarray:
        """Packed incidence, shape (hyperplanes, ceil(points/8))."""
        if "hbits" not in self._cache:
            if self.n_points > MAX_INCIDENCE_POINTS:
                raise ResourceLimitError(
                    f"dense incidence limited to {MAX_INCIDENCE_POINTS} points"
                )
            rows = []
            step = max(1, 2**22 // self.n_points)
            for a in range(0, self.n_hyperplanes, step):
                block = self.pairing(self.coords[a:a + step], self.coords) == 0
                rows.append(np.packbits(block, axis=1))
            self._cache["hbits"] = np.vstack(rows)
        return self._cache["hbits"]

    def incidence_matrix(self) -> np.ndarray:
        """Boolean matrix with rows = points, columns = hyperplanes."""
        bits = np.unpackbits(self.hyperplane_bits, axis=1, count=self.n_points)
        return bits.T.astype(bool)

    def hyperplane_points(self, j: int) -> np.ndarray:
        row = np.unpackbits(self.hyperplane_bits[j], count=self.n_points)
        return np.flatnonzero(row)

    def hyperplanes_containing(self, pid: int) -> np.ndarray:
        byte, bit = divmod(int(pid), 8)
        col = (self.hyperplane_bits[:, byte] >> (7 - bit)) & 1
        return np.flatnonzero(col)

    def hyperplane_counts(self, pts: PointSet) -> np.ndarray:
        """``|H_j ∩ S|`` for every hyperplane."""
        return _popcount_rows(self.hyperplane_bits & pts.bits[None, :])

    @property
    def n_points_per_hyperplane(self) -> int:
        return (self.s**self.r - 1) // (self.s - 1)

    # subspaces

    def subspace(self, vectors: Iterable[Sequence[int]]) -> Subspace:
        red, _ = rref(self.field, [list(v) for v in vectors])
        if not red:
            raise InvalidParameterError("empty span")
        return Subspace(tuple(tuple(row) for row in red), self.r)

    def span(self, point_ids: Iterable[int]) -> Subspace:
        return self.subspace(self.coords[list(point_ids)].tolist())

    def hyperplane(self, j: int) -> Subspace:
        eqs = [self.coords[j].tolist()]
        return self.subspace(nullspace(self.field, eqs, self.r + 1))

    def dual_coordinates(self, sub: Subspace) -> list[list[int]]:
        """Basis of the covectors vanishing on ``sub``."""
        return nullspace(self.field, [list(r) for r in sub.rows], self.r + 1)

    def basis_ids(self, sub: Subspace) -> list[int]:
        return [self.point_id(row) for row in sub.rows]

    def subspace_points(self, sub: Subspace) -> np.ndarray:
        basis = np.asarray(sub.rows, dtype=np.int64)
        coefs = _projective_coefficients(self.field, len(sub.rows))
        vecs = self._lincomb(coefs, np.broadcast_to(basis, (len(coefs),) + basis.shape))
        return np.sort(self.ids_of_canonical(vecs))

    def subspace_of_hyperplanes(self, hyperplanes: Sequence[int]) -> Subspace:
        """Intersection of the given hyperplanes."""
        eqs = self.coords[list(hyperplanes)].tolist()
        return self.subspace(nullspace(self.field, eqs, self.r + 1))

    def hyperplanes_through(self, sub: Subspace) -> np.ndarray:
        """Ids of all hyperplanes containing a codimension-2 subspace."""
        if sub.codim != 2:
            raise InvalidParameterError(f"expected codimension 2, got {sub.codim}")
        dual = self.subspace(self.dual_coordinates(sub))
        return self.subspace_points(dual)

    def hyperplane_id(self, covector: Sequence[int]) -> int:
        return self.point_id(covector)

    def covector_of(self, sub: Subspace) -> np.ndarray:
        if sub.codim != 1:
            raise InvalidParameterError("only hyperplanes have a covector")
        (cov,) = self.dual_coordinates(sub)
        return self.normalize(np.asarray([cov]))[0]

    # enumeration of k-dimensional vector subspaces (projective dim k-1)

    def n_subspaces(self, k: int) -> int:
        return gaussian_binomial(self.r + 1, k, self.s)

    def iter_subspaces(self, k: int, chunk: int = CHUNK) -> Iterator[np.ndarray]:
        """Yield arrays of point ids (rows = subspaces) in a fixed order.

        Subspaces are generated pattern by pattern from their reduced
        echelon bases: pivot columns ascending, then free entries by
        integer encoding.  Points inside a row are sorted.
        """
        n = self.r + 1
        s = self.s
        coefs = _projective_coefficients(self.field, k)
        chunk = max(1, min(chunk, 2**20 // len(coefs)))
        for piv in itertools.combinations(range(n), k):
            free = [
                (row, c)
                for row, pc in enumerate(piv)
                for c in range(pc + 1, n)
                if c not in piv
            ]
            total = s ** len(free)
            for start in range(0, total, chunk):
                idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
                basis = np.zeros((len(idx), k, n), dtype=np.int64)
                for row, pc in enumerate(piv):
                    basis[:, row, pc] = 1
                rem = idx
                for row, c in reversed(free):
                    rem, d = np.divmod(rem, s)
                    basis[:, row, c] = d
                vecs = self._lincomb(
                    np.broadcast_to(coefs, (len(idx),) + coefs.shape),
                    np.broadcast_to(basis[:, None], (len(idx), len(coefs), k, n)),
                )
                ids = self.ids_of_canonical(vecs.reshape(-1, n)).reshape(len(idx), -1)
                yield np.sort(ids, axis=1)

    def iter_lines(self, chunk: int = CHUNK) -> Iterator[np.ndarray]:
        if self.r == 2:
            yield self.lines
            return
        yield from self.iter_subspaces(2, chunk)

    @property
    def n_lines(self) -> int:
        return self.n_subspaces(2)

    @property
    def lines(self) -> np.ndarray:
        """All lines as a (n_lines, s+1) array of point ids.

        In a plane the lines are the hyperplanes and share their ids.
        """
        if "lines" not in self._cache:
            if self.n_lines * (self.s + 1) > MAX_MATERIALIZED_ENTRIES:
                raise ResourceLimitError(
                    f"{self.n_lines} lines are too many to materialise; use iter_lines()"
                )
            if self.r == 2:
                arr = np.stack([self.hyperplane_points(j) for j in range(self.n_hyperplanes)])
            else:
                arr = np.vstack(list(self.iter_subspaces(2)))
            self._cache["lines"] = arr
        return self._cache["lines"]

    @property
    def point_lines(self) -> np.ndarray:
        """(n_points, lines per point) array of line ids through each point."""
        if "plines" not in self._cache:
            lines = self.lines
            order = np.argsort(lines.ravel(), kind="stable")
            per = (self.s**self.r - 1) // (self.s - 1)
            self._cache["plines"] = (order // lines.shape[1]).reshape(self.n_points, per)
        return self._cache["plines"]

    def line(self, i: int) -> Subspace:
        return self.span(self.lines[i][:2])

    def line_through(self, a: int, b: int) -> Subspace:
        if a == b:
            raise InvalidParameterError("two distinct points are needed")
        return self.span([a, b])

    def planes_through_line_count(self, line: Subspace) -> int:
        """Number of planes through a line: (s^(r-1) - 1)/(s - 1)."""
        if self.r < 3:
            raise InvalidParameterError("planes through a line need r >= 3")
        if line.dim != 1:
            raise InvalidParameterError("expected a line")
        return (self.s ** (self.r - 1) - 1) // (self.s - 1)

    def planes_through_line(self, line: Subspace) -> Iterator[tuple[Subspace, np.ndarray]]:
        """Yield ``(plane, point ids)`` for each plane through ``line``."""
        self.planes_through_line_count(line)
        on = np.zeros(self.n_points, dtype=bool)
        on[self.subspace_points(line)] = True
        seen = on.copy()
        while not seen.all():
            pid = int(np.argmin(seen))
            plane = self.subspace(list(line.rows) + [self.coords[pid].tolist()])
            pts = self.subspace_points(plane)
            seen[pts] = True
            yield plane, pts

    # sub-geometries

    def hyperplane_embedding(self, j: int) -> tuple["Geometry", np.ndarray, np.ndarray]:
        """Identify hyperplane ``j`` with PG(r-1, s).

        Returns ``(sub, basis, embed)`` where ``basis`` is the r x (r+1)
        reduced echelon basis of the hyperplane and ``embed[i]`` is the
        ambient id of point ``i`` of ``sub``.
        """
        key = ("hemb", j)
        if key not in self._cache:
            sub = geometry_build(self.field, self.r - 1)
            basis = np.asarray(self.hyperplane(j).rows, dtype=np.int64)
            coef = sub.coords.astype(np.int64)
            vecs = self._lincomb(coef, np.broadcast_to(basis, (len(coef),) + basis.shape))
            embed = self.ids_of_canonical(vecs)
            self._cache[key] = (sub, basis, embed)
        return self._cache[key]

    def restrict_pointset(self, pts: PointSet, j: int) -> tuple["Geometry", PointSet, np.ndarray]:
        """The section ``pts ∩ H_j`` as a point set of PG(r-1, s)."""
        sub, _, embed = self.hyperplane_embedding(j)
        return sub, PointSet(sub, np.flatnonzero(pts.mask[embed])), embed

    def dual_plane(self) -> "Geometry":
        """The dual of a plane: point i of the result is line i of ``self``.

        With lines indexed by canonical covectors, the dual incidence
        (line i contains point j) is the same relation as (point j lies on
        line i), so the dual is again PG(2, s) with the same numbering.
        """
        if self.r != 2:
            raise InvalidParameterError("dual_plane needs r = 2")
        dual = Geometry(self.field, 2, _coords=self.coords)
        dual._cache["dual_of"] = self
        return dual


def _projective_coefficients(field: Field, k: int) -> np.ndarray:
    """Canonical coordinate vectors of PG(k-1, s) in id order."""
    s = field.order
    enc = np.concatenate([np.arange(s**j, 2 * s**j, dtype=np.int64) for j in range(k)])
    powers = s ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return (enc[:, None] // powers[None, :]) % s


_GEOMETRIES: dict[tuple[int, int, int], Geometry] = {}


def geometry_build(field: Field, r: int) -> Geometry:
    """Build PG(r, |field|); results are memoised per (p, h, r)."""
    key = (field.p, field.h, r)
    if key not in _GEOMETRIES:
        n = (field.order ** (r + 1) - 1) // (field.order - 1)
        if n > MAX_POINTS:
            raise ResourceLimitError(f"PG({r},{field.order}) has {n} points, cap is 2^21")
        _GEOMETRIES[key] = Geometry(field, r)
    return _GEOMETRIES[key]


def pg(q_or_p: int, h: int, r: int) -> Geometry:
    """Shorthand: PG(r, p^h)."""
    return geometry_build(field_build(q_or_p, h), r)
