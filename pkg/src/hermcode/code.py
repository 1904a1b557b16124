"""The F_p code spanned by the hyperplanes of PG(r, s).

Gaussian elimination is deterministic: columns are processed in
ascending order and the pivot is the first row (at or below the current
rank) with a nonzero entry.  For p = 2 rows are packed bitsets and row
operations are XORs; otherwise rows hold one residue per byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import IntegrityError, InvalidParameterError, ResourceLimitError
from .geometry import Geometry

MAX_CODE_POINTS = 4096


# -- elimination over F_p ----------------------------------------------------

def _pivot_loop(nrows: int, ncols: int, column, swap, normalize, eliminate) -> list[int]:
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        col = column(c)
        nz = np.flatnonzero(col[r:])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            swap(r, i)
            col = column(c)
        normalize(r, c)
        eliminate(r, c, column(c))
        pivots.append(c)
        r += 1
    return pivots


def _eliminate_dense(M: np.ndarray, p: int, ncols: int, full: bool) -> list[int]:
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.uint16)

    def column(c):
        return M[:, c]

    def swap(a, b):
        M[[a, b]] = M[[b, a]]

    def normalize(r, c):
        lead = M[r, c]
        if lead != 1:
            M[r, c:] = (M[r, c:].astype(np.uint16) * inv[lead]) % p

    def eliminate(r, c, col):
        targets = np.flatnonzero(col)
        if not full:
            targets = targets[targets > r]
        else:
            targets = targets[targets != r]
        if targets.size:
            f = (p - col[targets]).astype(np.uint16)
            rows = M[targets, c:].astype(np.uint16) + f[:, None] * M[r, c:].astype(np.uint16)
            M[targets, c:] = rows % p

    return _pivot_loop(M.shape[0], ncols, column, swap, normalize, eliminate)


def _eliminate_gf2(B: np.ndarray, ncols: int, full: bool) -> list[int]:
    """Elimination on packed rows (np.packbits layout, big-endian bits)."""

    def column(c):
        return (B[:, c >> 3] >> (7 - (c & 7))) & 1

    def swap(a, b):
        B[[a, b]] = B[[b, a]]

    def normalize(r, c):
        pass

    def eliminate(r, c, col):
        targets = np.flatnonzero(col)
        targets = targets[targets > r] if not full else targets[targets != r]
        if targets.size:
            lo = c >> 3
            B[targets, lo:] ^= B[r, lo:]

    return _pivot_loop(B.shape[0], ncols, column, swap, normalize, eliminate)


def fp_rref(
    A: np.ndarray, p: int, full: bool = True, ncols: int | None = None
) -> tuple[np.ndarray, list[int]]:
    """Row echelon form of ``A`` over F_p; returns (form, pivot columns).

    Only the first ``ncols`` columns are used as pivot columns; the rest
    are carried along (augmented system).
    """
    A = np.asarray(A) % p
    ncols = A.shape[1] if ncols is None else ncols
    if p == 2:
        B = np.packbits(A.astype(np.uint8), axis=1)
        piv = _eliminate_gf2(B, ncols, full)
        return np.unpackbits(B, axis=1, count=A.shape[1]), piv
    M = A.astype(np.uint8)
    piv = _eliminate_dense(M, p, ncols, full)
    return M, piv


def fp_rank(A: np.ndarray, p: int) -> int:
    return len(fp_rref(A, p, full=False)[1])


def fp_nullspace(A: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of the right kernel of ``A`` over F_p."""
    A = np.asarray(A)
    n = A.shape[1]
    R, piv = fp_rref(A, p)
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(piv):
            basis[k, pc] = (-int(R[i, f])) % p
    return basis


def fp_transform_echelon(A: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Reduced echelon form ``R`` of ``A`` together with ``E`` with ``E A = R``."""
    n, m = A.shape
    aug = np.concatenate([np.asarray(A, dtype=np.int64) % p, np.eye(n, dtype=np.int64)], axis=1)
    M, piv = fp_rref(aug, p, full=True, ncols=m)
    return M[:, :m], M[:, m:], piv


# -- vectors over points ------------------------------------------------------

@dataclass
class CharVector:
    """A residue vector over F_p indexed by the points of a geometry."""

    geometry: Geometry
    p: int
    entries: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64) % self.p
        if e.shape != (self.geometry.n_points,):
            raise InvalidParameterError("vector length does not match the geometry")
        self.entries = e.astype(np.uint8)

    @classmethod
    def of_points(cls, geometry: Geometry, ids, p: int | None = None) -> "CharVector":
        e = np.zeros(geometry.n_points, dtype=np.uint8)
        e[np.asarray(list(ids), dtype=np.int64)] = 1
        return cls(geometry, geometry.field.p if p is None else p, e)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.entries))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.entries)

    def is_characteristic(self) -> bool:
        return bool(np.all(self.entries <= 1))

    def _check(self, other: "CharVector") -> None:
        if other.geometry is not self.geometry or other.p != self.p:
            raise InvalidParameterError("vectors live over different geometries or primes")

    def __add__(self, other: "CharVector") -> "CharVector":
        self._check(other)
        return CharVector(self.geometry, self.p, self.entries.astype(np.int64) + other.entries)

    def __sub__(self, other: "CharVector") -> "CharVector":
        self._check(other)
        return CharVector(self.geometry, self.p, self.entries.astype(np.int64) - other.entries)

    def __rmul__(self, k: int) -> "CharVector":
        return CharVector(self.geometry, self.p, self.entries.astype(np.int64) * k)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CharVector)
            and other.geometry is self.geometry
            and other.p == self.p
            and np.array_equal(other.entries, self.entries)
        )


def dot(u: CharVector, v: CharVector) -> int:
    u._check(v)
    return int(np.dot(u.entries.astype(np.int64), v.entries.astype(np.int64)) % u.p)


def hyperplane_vector(g: Geometry, j: int, p: int | None = None) -> CharVector:
    return CharVector.of_points(g, g.hyperplane_points(j), p)


# -- certificates -------------------------------------------------------------

@dataclass
class CodeCertificate:
    """Coefficients ``lambda_j`` with ``sum_j lambda_j v^{H_j}`` equal to a target."""

    geometry: Geometry
    p: int
    coefficients: dict[int, int]
    member: bool = dc_field(default=True, init=False)

    def __post_init__(self):
        coeffs = {}
        for j, lam in self.coefficients.items():
            j, lam = int(j), int(lam) % self.p
            if not 0 <= j < self.geometry.n_hyperplanes:
                raise IntegrityError(f"hyperplane id {j} out of range")
            if lam:
                coeffs[j] = lam
        self.coefficients = dict(sorted(coeffs.items()))

    @property
    def coefficient_sum(self) -> int:
        return sum(self.coefficients.values()) % self.p

    def coefficient_vector(self) -> np.ndarray:
        lam = np.zeros(self.geometry.n_hyperplanes, dtype=np.int64)
        for j, c in self.coefficients.items():
            lam[j] = c
        return lam

    def combination(self) -> CharVector:
        A = self.geometry.incidence_matrix().astype(np.int64)
        return CharVector(self.geometry, self.p, A @ self.coefficient_vector())

    def verify(self, target: CharVector) -> bool:
        return self.combination() == target

    def check(self, target: CharVector) -> None:
        got = self.combination()
        if got != target:
            bad = np.flatnonzero(got.entries != target.entries)
            raise IntegrityError(f"certificate mismatch at {bad.size} positions, first {bad[0]}")


@dataclass
class NonMemberWitness:
    """A vector ``y`` with ``y . v^H = 0`` for all hyperplanes but ``y . v != 0``."""

    geometry: Geometry
    p: int
    kernel: np.ndarray = dc_field(repr=False)
    member: bool = dc_field(default=False, init=False)

    def verify(self, target: CharVector) -> bool:
        A = self.geometry.incidence_matrix().astype(np.int64)
        y = self.kernel.astype(np.int64)
        orth = not np.any((y @ A) % self.p)
        return orth and int(y @ target.entries.astype(np.int64)) % self.p != 0


class HyperplaneCode:
    """Cached elimination of the point-hyperplane incidence matrix over F_p."""

    def __init__(self, geometry: Geometry, p: int | None = None):
        if geometry.n_points > MAX_CODE_POINTS:
            raise ResourceLimitError(f"code engine limited to {MAX_CODE_POINTS} points")
        self.geometry = geometry
        self.p = geometry.field.p if p is None else int(p)
        self._rank: int | None = None
        self._E: np.ndarray | None = None
        self._pivots: list[int] | None = None

    @property
    def rank(self) -> int:
        if self._rank is None:
            if self._pivots is not None:
                self._rank = len(self._pivots)
            else:
                A = self.geometry.incidence_matrix().astype(np.uint8)
                self._rank = fp_rank(A, self.p)
        return self._rank

    def _echelon(self) -> tuple[np.ndarray, list[int]]:
        if self._E is None:
            A = self.geometry.incidence_matrix().astype(np.uint8)
            _, E, piv = fp_transform_echelon(A, self.p)
            self._E = E.astype(np.int64)
            self._pivots = piv
            self._rank = len(piv)
        return self._E, self._pivots

    def _as_hyperplane(self, v: CharVector) -> int | None:
        """Id of the hyperplane whose characteristic vector is ``v``, if any."""
        g = self.geometry
        if not v.is_characteristic() or v.weight != g.n_points_per_hyperplane:
            return None
        sub = g.span(v.support)
        if sub.dim != g.r - 1:
            return None
        return g.hyperplane_id(g.covector_of(sub))

    def member(self, v: CharVector) -> CodeCertificate | NonMemberWitness:
        if v.geometry is not self.geometry or v.p != self.p:
            raise InvalidParameterError("vector does not belong to this code")
        j = self._as_hyperplane(v)
        if j is not None:
            return CodeCertificate(self.geometry, self.p, {j: 1})
        E, piv = self._echelon()
        w = (E @ v.entries.astype(np.int64)) % self.p
        bad = np.flatnonzero(w[len(piv):])
        if bad.size:
            y = E[len(piv) + int(bad[0])]
            return NonMemberWitness(self.geometry, self.p, y.astype(np.uint8))
        return CodeCertificate(self.geometry, self.p, {c: int(w[i]) for i, c in enumerate(piv)})


def code_for(g: Geometry, p: int | None = None) -> HyperplaneCode:
    p = g.field.p if p is None else p
    key = ("code", p)
    if key not in g._cache:
        g._cache[key] = HyperplaneCode(g, p)
    return g._cache[key]


def rank_fp(g: Geometry, p: int | None = None) -> int:
    """Rank of the point-hyperplane incidence matrix over F_p."""
    return code_for(g, p).rank


def code_member(v: CharVector) -> CodeCertificate | NonMemberWitness:
    return code_for(v.geometry, v.p).member(v)


# -- restriction to a hyperplane ---------------------------------------------

@dataclass
class HyperplaneRestriction:
    hyperplane: int
    geometry: Geometry
    embed: np.ndarray = dc_field(repr=False)
    certificate: CodeCertificate = dc_field(repr=False)

    def pull_back(self, v: CharVector) -> CharVector:
        return CharVector(self.geometry, v.p, v.entries[self.embed])

    def verify(self, target: CharVector) -> bool:
        return self.certificate.verify(self.pull_back(target))


def restrict_certificate(cert: CodeCertificate, j: int) -> HyperplaneRestriction:
    """Turn a certificate on PG(r, s) into one for its section by hyperplane j.

    Each hyperplane pi of H_j gets the sum of the coefficients of all
    hyperplanes of the ambient space through pi (H_j included).
    """
    g = cert.geometry
    if g.r < 2:
        raise InvalidParameterError("restriction needs r >= 2")
    if not 0 <= j < g.n_hyperplanes:
        raise IntegrityError(f"hyperplane id {j} out of range")
    for k, lam in cert.coefficients.items():
        if not (0 <= k < g.n_hyperplanes and 0 < lam < cert.p):
            raise IntegrityError("certificate has invalid entries")
    sub, basis, embed = g.hyperplane_embedding(j)
    p = cert.p
    lam_h = cert.coefficients.get(j, 0)
    lam = np.full(sub.n_hyperplanes, lam_h, dtype=np.int64)
    others = np.array([k for k in cert.coefficients if k != j], dtype=np.int64)
    if others.size:
        covs = g.coords[others].astype(np.int64)
        sub_cov = g.pairing(covs, basis)  # (len(others), r): a_K restricted to H
        ids = sub.point_ids(sub_cov)
        np.add.at(lam, ids, [cert.coefficients[int(k)] for k in others])
    lam %= p
    coeffs = {int(i): int(c) for i, c in enumerate(lam) if c}
    return HyperplaneRestriction(j, sub, embed, CodeCertificate(sub, p, coeffs))


# -- dual multisets -----------------------------------------------------------

@dataclass
class DualMultiset:
    """Lines of a plane, with multiplicities, viewed as points of the dual plane."""

    plane: Geometry
    p: int
    multiplicities: dict[int, int]

    def vector(self) -> np.ndarray:
        m = np.zeros(self.plane.n_points, dtype=np.int64)
        for i, c in self.multiplicities.items():
            m[i] = c
        return m

    def line_residues(self) -> np.ndarray:
        """Residue of |M ∩ l| for each dual line l (= point of the original plane)."""
        A = self.plane.incidence_matrix().astype(np.int64)
        return (A @ self.vector()) % self.p


def to_dual_multiset(plane_cert: CodeCertificate) -> DualMultiset:
    g = plane_cert.geometry
    if g.r != 2:
        raise InvalidParameterError("dual multisets need a certificate on a plane")
    return DualMultiset(g.dual_plane(), plane_cert.p, dict(plane_cert.coefficients))


def non_residue_secant_stats(M: DualMultiset, k: int) -> tuple[int, dict[int, int]]:
    """``delta`` = number of dual lines meeting M in a count not = k (mod p),
    and for every dual point the number of such lines through it."""
    bad = (M.line_residues() - k) % M.p != 0
    A = M.plane.incidence_matrix().astype(np.int64)
    # dual point e lies on dual line P iff original point P lies on line e
    per = A.T @ bad.astype(np.int64)
    return int(bad.sum()), {i: int(c) for i, c in enumerate(per)}
