"""Intersection spectra and the classification predicates built on them."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field
from math import isqrt
from typing import Iterator, NamedTuple

import numpy as np

from .errors import CounterexampleError, InvalidParameterError
from .geometry import Geometry, PointSet, Subspace, geometry_build
from .hermitian import (
    hermitian_hyperplane_numbers,
    hermitian_size,
    singular_hyperplane_numbers,
    singular_size,
)

FAMILIES = ("lines", "planes", "hyperplanes")


class CheckResult(NamedTuple):
    ok: bool
    witness: int | None = None
    reason: str = ""


@dataclass
class SpectrumReport:
    family: str
    histogram: dict[int, int]
    set_size: int

    @property
    def total(self) -> int:
        return sum(self.histogram.values())

    @property
    def values(self) -> set[int]:
        return set(self.histogram)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "set_size": self.set_size,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def subfield_order(g: Geometry) -> int:
    q = isqrt(g.s)
    if q * q != g.s:
        raise InvalidParameterError(f"order {g.s} of PG({g.r},{g.s}) is not a square")
    return q


# -- family scans --------------------------------------------------------------

def iter_family(g: Geometry, family: str) -> Iterator[np.ndarray]:
    """Chunks of point-id rows, one row per member of the family."""
    if family == "lines":
        yield from g.iter_lines()
    elif family == "hyperplanes":
        yield np.stack([g.hyperplane_points(j) for j in range(g.n_hyperplanes)])
    elif family == "planes":
        if g.r < 2:
            raise InvalidParameterError("no planes in a line")
        if g.r == 2:
            yield np.arange(g.n_points)[None, :]
        elif g.r == 3:
            yield from iter_family(g, "hyperplanes")
        else:
            yield from g.iter_subspaces(3)
    else:
        raise InvalidParameterError(f"unknown family {family!r}")


def family_counts(S: PointSet, family: str) -> np.ndarray:
    """``|X ∩ S|`` for every member X of the family, in family order."""
    g = S.geometry
    if family == "hyperplanes":
        return g.hyperplane_counts(S)
    if family == "lines" and g.r <= 3:
        return S.mask[g.lines].sum(axis=1)
    return np.concatenate([S.mask[rows].sum(axis=1) for rows in iter_family(g, family)])


def spectrum(S: PointSet, family: str = "lines") -> SpectrumReport:
    counts = family_counts(S, family)
    vals, num = np.unique(counts, return_counts=True)
    return SpectrumReport(family, {int(v): int(c) for v, c in zip(vals, num)}, len(S))


def line_moments(report: SpectrumReport, s: int) -> dict[str, tuple[int, int]]:
    """The three standard double counts for a point set of size x in PG(2, s).

    Returns ``name -> (computed, expected)``.
    """
    if report.family != "lines":
        raise InvalidParameterError("moments are defined for line spectra")
    x = report.set_size
    t = report.histogram
    return {
        "lines": (sum(t.values()), s * s + s + 1),
        "incidences": (sum(i * c for i, c in t.items()), x * (s + 1)),
        "pairs": (sum(i * (i - 1) * c for i, c in t.items()), x * (x - 1)),
    }


def unital_polynomial_sum(report: SpectrumReport, q: int) -> int:
    """``sum (i-2)(q+1-i) t_i`` over a plane line spectrum."""
    return sum((i - 2) * (q + 1 - i) * c for i, c in report.histogram.items())


# -- predicates ------------------------------------------------------------------

def check_line_residue(S: PointSet, residue: int = 1, p: int | None = None) -> CheckResult:
    """Every line meets S in ``residue`` (mod p) points; else the first bad line."""
    g = S.geometry
    p = g.field.p if p is None else p
    offset = 0
    for rows in iter_family(g, "lines"):
        bad = np.flatnonzero((S.mask[rows].sum(axis=1) - residue) % p)
        if bad.size:
            return CheckResult(False, offset + int(bad[0]), f"line meets S in != {residue} mod {p}")
        offset += len(rows)
    return CheckResult(True)


def singular_points(S: PointSet) -> np.ndarray:
    """Points of S all of whose lines meet S in 1 or s+1 points."""
    g = S.geometry
    regular = np.zeros(g.n_points, dtype=bool)
    for rows in iter_family(g, "lines"):
        cnt = S.mask[rows].sum(axis=1)
        bad = rows[(cnt != 1) & (cnt != g.s + 1)]
        regular[bad.ravel()] = True
    return np.flatnonzero(S.mask & ~regular)


@dataclass
class ClassificationReport:
    """Outcome of testing the k_{n,r,s} and regularity conditions."""

    size: int
    line_spectrum: dict[int, int]
    is_knrq: bool
    n: int | None
    singular_points: list[int]
    is_regular: bool
    violated_clause: str | None = None
    witness_line: int | None = None
    clause_c: dict[str, bool] = dc_field(default_factory=dict)

    @property
    def is_singular(self) -> bool:
        return bool(self.singular_points)

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "line_spectrum": {str(k): v for k, v in sorted(self.line_spectrum.items())},
            "is_knrq": self.is_knrq,
            "n": self.n,
            "singular_points": self.singular_points,
            "is_regular": self.is_regular,
            "violated_clause": self.violated_clause,
            "witness_line": self.witness_line,
            "clause_c": self.clause_c,
        }


def _first_line_with(S: PointSet, sizes) -> int | None:
    offset = 0
    for rows in iter_family(S.geometry, "lines"):
        hit = np.flatnonzero(np.isin(S.mask[rows].sum(axis=1), list(sizes)))
        if hit.size:
            return offset + int(hit[0])
        offset += len(rows)
    return None


def _complement_type_planes(S: PointSet, n: int, skip_singular: np.ndarray | None) -> bool:
    """True iff some plane section is the complement of a set of type (0, s+1-n),
    i.e. every line of that plane meets S in n or s+1 points."""
    g = S.geometry
    for rows in iter_family(g, "planes"):
        for plane in rows:
            if skip_singular is not None and skip_singular[plane].all():
                continue
            if _plane_lines_only(S, plane, {n, g.s + 1}):
                return True
    return False


def _plane_lines_only(S: PointSet, plane_pts: np.ndarray, allowed: set[int]) -> bool:
    g = S.geometry
    if g.r == 2:
        cnt = S.mask[g.lines].sum(axis=1)
        return bool(np.isin(cnt, list(allowed)).all())
    sub = g.span(plane_pts)
    plane_g = geometry_build(g.field, 2)
    basis = np.asarray(sub.rows, dtype=np.int64)
    coef = plane_g.coords.astype(np.int64)
    vecs = g._lincomb(coef, np.broadcast_to(basis, (len(coef),) + basis.shape))
    embed = g.ids_of_canonical(vecs)
    cnt = S.mask[embed][plane_g.lines].sum(axis=1)
    return bool(np.isin(cnt, list(allowed)).all())


def classify_knrq(S: PointSet, k: int | None = None) -> ClassificationReport:
    """Test the k_{n,r,s} conditions and regularity.

    Tags in ``violated_clause``: (i) size differs from ``k``; (ii) some line
    meets S in a size outside {1, n, s+1}; (iii) no line meets S in n
    points; (b) n outside [3, s-1]; (c) some plane section is the
    complement of a set of type (0, s+1-n).
    """
    g = S.geometry
    if g.r < 2:
        raise InvalidParameterError("classification needs r >= 2")
    full = g.s + 1
    hist = spectrum(S, "lines").histogram
    sing = singular_points(S)
    other = sorted(v for v in hist if v not in (1, full))
    rep = ClassificationReport(len(S), hist, False, None, [int(x) for x in sing], False)
    if k is not None and len(S) != k:
        rep.violated_clause = "(i)"
        return rep
    if 0 in hist or len(other) > 1:
        rep.violated_clause = "(ii)"
        bad = {0} | set(other[1:]) if 0 in hist else set(other[1:])
        rep.witness_line = _first_line_with(S, bad)
        return rep
    if other:
        n = other[0]
    elif 1 in hist:
        n = 1
    else:
        rep.violated_clause = "(iii)"
        return rep
    rep.is_knrq, rep.n = True, n
    rep.witness_line = _first_line_with(S, {n})
    if not 3 <= n <= g.s - 1:
        rep.violated_clause = "(b)"
        return rep
    all_planes = _complement_type_planes(S, n, None)
    sing_mask = np.zeros(g.n_points, dtype=bool)
    sing_mask[sing] = True
    outside_singular = _complement_type_planes(S, n, sing_mask) if sing.size else all_planes
    # both readings of "planar section" are recorded
    rep.clause_c = {"all_planes": not all_planes, "planes_not_in_singular_locus": not outside_singular}
    if all_planes:
        rep.violated_clause = "(c)"
        return rep
    rep.is_regular = True
    return rep


def unital_check(S: PointSet) -> bool:
    g = S.geometry
    if g.r != 2:
        raise InvalidParameterError("unitals live in planes")
    q = subfield_order(g)
    if len(S) != q**3 + 1:
        return False
    return spectrum(S, "lines").values <= {1, q + 1}


def quasi_hermitian_check(S: PointSet) -> CheckResult:
    """Same size and hyperplane intersection numbers as H(r, q^2)."""
    g = S.geometry
    q = subfield_order(g)
    if len(S) != hermitian_size(g.r, q):
        return CheckResult(False, None, f"size {len(S)} != {hermitian_size(g.r, q)}")
    allowed = list(hermitian_hyperplane_numbers(g.r, q))
    bad = np.flatnonzero(~np.isin(g.hyperplane_counts(S), allowed))
    if bad.size:
        return CheckResult(False, int(bad[0]), "hyperplane section size not allowed")
    return CheckResult(True)


def singular_quasi_hermitian_check(S: PointSet, d: int) -> CheckResult:
    """Same size as, and hyperplane sizes among those of, a cone with a
    d-dimensional vertex over a non-singular Hermitian variety."""
    g = S.geometry
    q = subfield_order(g)
    size = singular_size(g.r, q, d)
    if len(S) != size:
        return CheckResult(False, None, f"size {len(S)} != {size}")
    allowed = list(singular_hyperplane_numbers(g.r, q, d))
    bad = np.flatnonzero(~np.isin(g.hyperplane_counts(S), allowed))
    if bad.size:
        return CheckResult(False, int(bad[0]), "hyperplane section size not allowed")
    return CheckResult(True)


def plane_section_bound_check(S: PointSet, line: Subspace) -> tuple[Subspace, int]:
    """A plane through ``line`` meeting S in at most q^3+q^2+q+1 points."""
    g = S.geometry
    q = subfield_order(g)
    bound = q**3 + q**2 + q + 1
    best = None
    for plane, pts in g.planes_through_line(line):
        size = int(S.mask[pts].sum())
        if size <= bound:
            return plane, size
        best = size if best is None else min(best, size)
    raise CounterexampleError(
        f"every plane through the line meets S in more than {bound} points (min {best})"
    )


def line_spectrum_gap(S: PointSet) -> dict[int, int]:
    """Lines meeting S in a size strictly between q+1 and q^2-q+1."""
    q = subfield_order(S.geometry)
    hist = spectrum(S, "lines").histogram
    return {i: c for i, c in hist.items() if q + 1 < i < q * q - q + 1}


def section_spectra(S: PointSet) -> Counter:
    """Histogram of line spectra of all hyperplane sections (r = 3: planes)."""
    g = S.geometry
    out: Counter = Counter()
    for j in range(g.n_hyperplanes):
        _, sec, _ = g.restrict_pointset(S, j)
        key = tuple(sorted(spectrum(sec, "lines").histogram.items()))
        out[key] += 1
    return out
