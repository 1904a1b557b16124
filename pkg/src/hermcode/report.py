"""JSON report documents and the point-set exchange format."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .field import field_build
from .geometry import Geometry, PointSet, geometry_build

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def exact(v):
    """JSON-safe copy: integers beyond 2^53 become strings, numpy scalars
    become Python scalars, dict keys become strings."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        v = int(v)
        return v if abs(v) < 2**53 else str(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): exact(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [exact(x) for x in v]
    return v


@dataclass
class ReportDocument:
    command: list[str]
    parameters: dict = field(default_factory=dict)
    results: list[dict] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)
    ok: bool = True

    def add(self, kind: str, ok: bool | None = None, **data) -> dict:
        entry = {"kind": kind, **data}
        if ok is not None:
            entry["ok"] = bool(ok)
            self.ok = self.ok and bool(ok)
        self.results.append(entry)
        return entry

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timing[name] = round((time.perf_counter() - t0) * 1000, 3)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "command": list(self.command),
            "parameters": exact(self.parameters),
            "ok": self.ok,
            "results": exact(self.results),
            "timing": self.timing,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


# -- point sets ------------------------------------------------------------------

def pointset_to_json(S: PointSet) -> dict:
    g = S.geometry
    enc = g.encodings[S.members]
    return {"p": g.field.p, "h": g.field.h, "r": g.r, "points": exact(enc.tolist())}


def pointset_from_json(doc: dict, geometry: Geometry | None = None) -> PointSet:
    try:
        p, h, r = int(doc["p"]), int(doc["h"]), int(doc["r"])
        raw = [int(x) for x in doc["points"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"malformed point-set document: {exc}") from exc
    g = geometry if geometry is not None else geometry_build(field_build(p, h), r)
    if (g.field.p, g.field.h, g.r) != (p, h, r):
        raise InvalidParameterError("point set belongs to a different geometry")
    enc = np.asarray(raw, dtype=np.int64)
    ids = np.searchsorted(g.encodings, enc)
    ok = (ids < g.n_points) & (g.encodings[np.minimum(ids, g.n_points - 1)] == enc)
    if not ok.all():
        bad = raw[int(np.flatnonzero(~ok)[0])]
        raise InvalidParameterError(f"{bad} is not a canonical point encoding of PG({r},{g.s})")
    return PointSet(g, ids)


def write_pointset(S: PointSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(pointset_to_json(S)) + "\n")


def read_pointset(path: str | Path, geometry: Geometry | None = None) -> PointSet:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{path}: {exc}") from exc
    return pointset_from_json(doc, geometry)
