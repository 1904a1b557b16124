"""Exhaustive search for unitals in PG(2, 4)."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .code import CharVector, code_member
from .errors import ResourceLimitError
from .field import field_build
from .geometry import Geometry, PointSet, geometry_build
from .hermitian import fit_hermitian_form


@dataclass
class HuntResult:
    q: int
    candidates: int
    unitals: int
    codeword_unitals: int
    hermitian_unitals: int
    hermitian_not_codeword: list[int] = field(default_factory=list)
    codeword_not_hermitian: list[int] = field(default_factory=list)
    through_fixed_point: int | None = None
    fixed_point: int | None = None
    unital_masks: np.ndarray = field(default=None, repr=False)

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.unitals, self.codeword_unitals, self.hermitian_unitals

    @property
    def hermitian_are_codewords(self) -> bool:
        return not self.hermitian_not_codeword

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "candidates": self.candidates,
            "unitals": self.unitals,
            "codeword_unitals": self.codeword_unitals,
            "hermitian_unitals": self.hermitian_unitals,
            "hermitian_not_codeword": self.hermitian_not_codeword,
            "codeword_not_hermitian": self.codeword_not_hermitian,
            "fixed_point": self.fixed_point,
            "through_fixed_point": self.through_fixed_point,
        }


def subsets_by_popcount(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as bitmasks, ascending."""
    if n > 24:
        raise ResourceLimitError("bitmask enumeration limited to 24 points")
    x = np.arange(1 << n, dtype=np.uint32)
    return x[np.bitwise_count(x) == k]


def line_masks(g: Geometry) -> np.ndarray:
    return (np.uint32(1) << g.lines.astype(np.uint32)).sum(axis=1, dtype=np.uint32)


def unital_masks(g: Geometry, q: int) -> tuple[np.ndarray, int]:
    """Bitmasks of all (q^3+1)-sets meeting every line in 1 or q+1 points,
    together with the number of candidate sets examined."""
    cand = subsets_by_popcount(g.n_points, q**3 + 1)
    lm = line_masks(g)
    keep = np.ones(len(cand), dtype=bool)
    for m in lm:
        c = np.bitwise_count(cand & m)
        keep &= (c == 1) | (c == q + 1)
    return cand[keep], len(cand)


def hunt_unitals(q: int = 2, fixed_point: int | None = 0) -> HuntResult:
    """Enumerate every unital of PG(2, q^2) and test code membership and
    Hermitian-form realisability of each."""
    if q != 2:
        raise ResourceLimitError("the exhaustive hunt is only feasible for q = 2")
    g = geometry_build(field_build(2, 2), 2)
    masks, ncand = unital_masks(g, q)
    expected = comb(g.n_points, q**3 + 1)
    if ncand != expected:  # pragma: no cover - enumeration bug guard
        raise AssertionError(f"enumerated {ncand} candidates, expected {expected}")
    bits = np.arange(g.n_points, dtype=np.uint32)
    n_code = n_herm = 0
    herm_not_code, code_not_herm = [], []
    for idx, m in enumerate(masks):
        ids = np.flatnonzero((m >> bits) & 1)
        S = PointSet(g, ids)
        is_code = code_member(CharVector.of_points(g, ids)).member
        is_herm = fit_hermitian_form(S) is not None
        n_code += is_code
        n_herm += is_herm
        if is_herm and not is_code:
            herm_not_code.append(int(m))
        if is_code and not is_herm:
            code_not_herm.append(int(m))
    through = None
    if fixed_point is not None:
        through = int(np.count_nonzero((masks >> np.uint32(fixed_point)) & 1))
    return HuntResult(
        q, ncand, len(masks), n_code, n_herm, herm_not_code, code_not_herm,
        through, fixed_point, masks,
    )
