"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
parameter or resource errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from .cache import cache_path, cached_geometry
from .code import (
    CharVector,
    code_member,
    rank_fp,
    restrict_certificate,
    to_dual_multiset,
    non_residue_secant_stats,
)
from .errors import (
    CounterexampleError,
    IntegrityError,
    InvalidParameterError,
    ResourceLimitError,
)
from .field import is_prime_power, prime_power
from .geometry import Geometry, PointSet
from .hermitian import (
    build_hermitian,
    hermitian_hyperplane_numbers,
    hermitian_size,
    polar_map,
    singular_hyperplane_numbers,
    singular_size,
    standard_cone,
)
from .hunt import hunt_unitals
from .report import ReportDocument, read_pointset
from .spectra import (
    check_line_residue,
    classify_knrq,
    line_moments,
    quasi_hermitian_check,
    singular_points,
    singular_quasi_hermitian_check,
    spectrum,
    unital_check,
)

log = logging.getLogger("hermcode")

DEFAULT_SEED = 12345
VERIFY_CHECKS = ("size", "spectrum", "residue", "membership", "restriction", "singular", "classify")


# -- point-set sources --------------------------------------------------------

def _add_source_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("source", choices=("hermitian", "cone", "random", "file"))
    sp.add_argument("--r", type=int, default=2, help="projective dimension")
    sp.add_argument("--q", type=int, default=2, help="subfield order; the space is PG(r, q^2)")
    sp.add_argument("--d", type=int, default=0, help="vertex dimension for cones")
    sp.add_argument("--size", type=int, help="size of a random set (default: Hermitian size)")
    sp.add_argument("--file", type=Path, help="point-set JSON for source=file")


def _geometry_for_q(args, r: int, q: int) -> Geometry:
    if not is_prime_power(q):
        raise InvalidParameterError(f"{q} is not a prime power")
    p, h = prime_power(q)
    g, _ = cached_geometry(args.cache_dir, p, 2 * h, r)
    return g


def _load_source(args) -> tuple[PointSet, dict]:
    """The point set named on the command line and a description of it."""
    if args.source == "file":
        if args.file is None:
            raise InvalidParameterError("source=file needs --file")
        doc = json.loads(Path(args.file).read_text())
        g, _ = cached_geometry(args.cache_dir, int(doc["p"]), int(doc["h"]), int(doc["r"]))
        S = read_pointset(args.file, g)
        return S, {"source": "file", "file": str(args.file), "p": g.field.p, "h": g.field.h, "r": g.r}
    g = _geometry_for_q(args, args.r, args.q)
    desc = {"source": args.source, "r": args.r, "q": args.q}
    if args.source == "hermitian":
        return build_hermitian(g), desc
    if args.source == "cone":
        desc["d"] = args.d
        cone, _, _ = standard_cone(g, args.d)
        return cone, desc
    size = args.size if args.size is not None else hermitian_size(args.r, args.q)
    if not 0 <= size <= g.n_points:
        raise InvalidParameterError(f"size {size} outside [0, {g.n_points}]")
    rng = np.random.default_rng(args.seed)
    desc.update(size=size, seed=args.seed)
    return PointSet(g, rng.choice(g.n_points, size=size, replace=False)), desc


# -- commands ------------------------------------------------------------------

def cmd_geometry(args, doc: ReportDocument) -> None:
    with doc.phase("build"):
        g, loaded = cached_geometry(args.cache_dir, args.p, args.h, args.r)
    doc.parameters.update(p=args.p, h=args.h, r=args.r)
    entry = {
        "order": g.s,
        "points": g.n_points,
        "hyperplanes": g.n_hyperplanes,
        "lines": g.n_lines,
        "modulus": list(g.field.modulus),
        "loaded_from_cache": loaded,
    }
    if args.cache_dir is not None:
        entry["cache_file"] = str(cache_path(args.cache_dir, args.p, args.h, args.r))
    doc.add("geometry", ok=True, **entry)


def _summarise_certificate(cert) -> dict:
    if cert.member:
        return {
            "member": True,
            "support": len(cert.coefficients),
            "coefficient_sum": cert.coefficient_sum,
        }
    return {"member": False, "witness_support": int(np.count_nonzero(cert.kernel))}


def cmd_verify(args, doc: ReportDocument) -> None:
    with doc.phase("build"):
        S, desc = _load_source(args)
    g = S.geometry
    doc.parameters.update(desc)
    checks = args.checks or list(VERIFY_CHECKS)
    doc.parameters["checks"] = checks
    q = int(round(g.s ** 0.5))
    square = q * q == g.s
    singular = args.source == "cone"
    doc.add("set", size=len(S), geometry=f"PG({g.r},{g.s})")

    if "size" in checks and square and g.r >= 2:
        with doc.phase("size"):
            if singular:
                res = singular_quasi_hermitian_check(S, args.d)
                profile = singular_hyperplane_numbers(g.r, q, args.d)
                doc.add("singular_quasi_hermitian", ok=res.ok, d=args.d,
                        expected_size=singular_size(g.r, q, args.d),
                        hyperplane_numbers=list(profile), failing_hyperplane=res.witness, reason=res.reason)
            else:
                res = quasi_hermitian_check(S)
                doc.add("quasi_hermitian", ok=res.ok, expected_size=hermitian_size(g.r, q),
                        hyperplane_numbers=list(hermitian_hyperplane_numbers(g.r, q)),
                        failing_hyperplane=res.witness, reason=res.reason)
    if "spectrum" in checks:
        with doc.phase("spectrum"):
            hyp = spectrum(S, "hyperplanes")
            lines = spectrum(S, "lines")
            doc.add("spectrum", **hyp.to_json())
            doc.add("spectrum", **lines.to_json())
            if g.r == 2:
                mom = line_moments(lines, g.s)
                doc.add("line_moments", ok=all(a == b for a, b in mom.values()),
                        moments={k: list(v) for k, v in mom.items()})
                if square and not singular and args.source != "random":
                    doc.add("unital", ok=unital_check(S))
            if args.source == "hermitian":
                tangent = np.sort(polar_map(g)[S.members])
                _, tangent_size = hermitian_hyperplane_numbers(g.r, q)
                counts = g.hyperplane_counts(S)
                doc.add("tangent_hyperplanes", ok=np.array_equal(tangent, np.flatnonzero(counts == tangent_size)),
                        count=int(tangent.size))
    if "residue" in checks:
        with doc.phase("residue"):
            res = check_line_residue(S)
            doc.add("line_residue", ok=res.ok, p=g.field.p, first_violation=res.witness)
    cert = None
    if "membership" in checks:
        with doc.phase("membership"):
            v = CharVector.of_points(g, S.members)
            cert = code_member(v)
            ok = cert.verify(v)
            summary = _summarise_certificate(cert)
            if cert.member:
                ok = ok and cert.coefficient_sum == len(S) % g.field.p
            doc.add("membership", ok=ok and (cert.member or args.source in ("random", "file")),
                    rank=rank_fp(g), **summary)
    if "restriction" in checks and cert is not None and cert.member and g.r >= 3:
        with doc.phase("restriction"):
            bad = []
            for j in range(g.n_hyperplanes):
                rc = restrict_certificate(cert, j)
                if not rc.verify(CharVector.of_points(g, S.members)):
                    bad.append(j)
            doc.add("restriction", ok=not bad, hyperplanes=g.n_hyperplanes, failures=bad[:10])
    if "restriction" in checks and cert is not None and cert.member and g.r == 2:
        with doc.phase("dual"):
            delta, per = non_residue_secant_stats(to_dual_multiset(cert), 0)
            doc.add("dual_multiset", ok=delta == len(S), delta=delta,
                    per_point_total=sum(per.values()))
    if "singular" in checks and g.r >= 2:
        with doc.phase("singular"):
            sing = singular_points(S).tolist()
            entry = {"points": sing}
            if singular:
                _, vertex, _ = standard_cone(g, args.d)
                expected = g.subspace_points(vertex).tolist()
                doc.add("singular_points", ok=sing == expected, expected=expected, **entry)
            elif args.source == "hermitian":
                doc.add("singular_points", ok=not sing, **entry)
            else:
                doc.add("singular_points", **entry)
    if "classify" in checks and g.r >= 3 and args.source != "random":
        with doc.phase("classify"):
            rep = classify_knrq(S)
            doc.add("classification", ok=rep.is_knrq, **rep.to_json())


def cmd_spectrum(args, doc: ReportDocument) -> None:
    with doc.phase("build"):
        S, desc = _load_source(args)
    doc.parameters.update(desc, family=args.family)
    with doc.phase("spectrum"):
        doc.add("spectrum", **spectrum(S, args.family).to_json())


def cmd_member(args, doc: ReportDocument) -> None:
    with doc.phase("build"):
        S, desc = _load_source(args)
    doc.parameters.update(desc)
    g = S.geometry
    with doc.phase("membership"):
        v = CharVector.of_points(g, S.members)
        cert = code_member(v)
        entry = _summarise_certificate(cert)
        if cert.member:
            entry["coefficients"] = {str(k): c for k, c in cert.coefficients.items()}
        doc.add("membership", ok=cert.member and cert.verify(v), verified=cert.verify(v), **entry)


def cmd_rank(args, doc: ReportDocument) -> None:
    with doc.phase("build"):
        g, _ = cached_geometry(args.cache_dir, args.p, args.h, args.r)
    prime = args.prime or args.p
    doc.parameters.update(p=args.p, h=args.h, r=args.r, prime=prime)
    with doc.phase("rank"):
        rk = rank_fp(g, prime)
    doc.add("rank", ok=True, rank=rk, points=g.n_points)


def cmd_hunt(args, doc: ReportDocument) -> None:
    doc.parameters.update(q=args.q, fixed_point=args.fixed_point)
    with doc.phase("hunt"):
        res = hunt_unitals(args.q, args.fixed_point)
    doc.add("hunt", ok=res.hermitian_are_codewords, **res.to_json())


# -- audit ranges ------------------------------------------------------------------

def parse_range(text: str) -> list[int]:
    """``5..64``, ``5,7,11`` or a mix such as ``2,5..9``; empty means none."""
    out: list[int] = []
    for part in filter(None, (t.strip() for t in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def iter_audit(claims: list[str], ranges: dict[str, list[int]]):
    import itertools

    for claim in claims:
        fn, names = audit_mod.AUDITS[claim]
        grids = []
        for name in names:
            if name in ranges:
                grids.append(ranges[name])
            elif name == "r":
                grids.append([4] if claim in ("cone_divisibility", "2c_system") else [3])
            else:
                raise InvalidParameterError(f"audit {claim} needs a range for {name}")
        for values in itertools.product(*grids):
            kw = dict(zip(names, values))
            if "p" in kw and not audit_mod.isprime(kw["p"]):
                continue
            if "q" in kw and not is_prime_power(kw["q"]):
                continue
            yield fn(**kw)


def cmd_audit(args, out) -> int:
    claims: list[str] = []
    ranges: dict[str, list[int]] = {}
    for tok in args.items:
        if "=" in tok:
            key, val = tok.split("=", 1)
            ranges[key.strip()] = parse_range(val)
        elif tok == "all":
            claims.extend(audit_mod.AUDITS)
        elif tok in audit_mod.AUDITS:
            claims.append(tok)
        else:
            raise InvalidParameterError(
                f"unknown claim id {tok!r}; known: {', '.join(audit_mod.AUDITS)}"
            )
    if not claims:
        raise InvalidParameterError("no claim id given")
    status = 0
    for finding in iter_audit(claims, ranges):
        out.write(json.dumps(finding.to_json()) + "\n")
        if finding.verdict == audit_mod.FAILS:
            status = 1
    return status


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", type=Path, default=None, help="geometry cache directory")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random sets")
    common.add_argument("--threads", type=int, default=1, help="worker threads (computation is single-threaded)")
    common.add_argument("--json-out", type=Path, default=None, help="also write the report here")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="hermcode", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("geometry", parents=[common], help="build PG(r, p^h) and cache it")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--h", type=int, default=1)
    sp.add_argument("--r", type=int, required=True)
    sp.set_defaults(func=cmd_geometry)

    sp = sub.add_parser("verify", parents=[common], help="run the check pipeline on a point set")
    _add_source_args(sp)
    sp.add_argument("--checks", nargs="*", choices=VERIFY_CHECKS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("spectrum", parents=[common], help="intersection spectrum of a point set")
    _add_source_args(sp)
    sp.add_argument("--family", choices=("lines", "planes", "hyperplanes"), default="lines")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("member", parents=[common], help="code membership with certificate")
    _add_source_args(sp)
    sp.set_defaults(func=cmd_member)

    sp = sub.add_parser("rank", parents=[common], help="F_p rank of the point-hyperplane incidence")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--h", type=int, default=1)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--prime", type=int, default=None, help="prime of the code (default: characteristic)")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("hunt-unitals", parents=[common], help="exhaustive unital search in PG(2, 4)")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--fixed-point", type=int, default=0)
    sp.set_defaults(func=cmd_hunt)

    sp = sub.add_parser("audit", parents=[common], help="exact audits, streamed as JSON lines")
    sp.add_argument("items", nargs="+", help="claim ids and ranges such as q=5..64 or p=5,7")
    sp.set_defaults(func=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "audit":
            if args.json_out is not None:
                with open(args.json_out, "w") as fh:
                    return cmd_audit(args, _Tee(sys.stdout, fh))
            return cmd_audit(args, sys.stdout)
        doc = ReportDocument(command=["hermcode", *argv])
        args.func(args, doc)
    except (InvalidParameterError, ResourceLimitError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CounterexampleError, IntegrityError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    text = doc.dumps()
    print(text)
    if args.json_out is not None:
        Path(args.json_out).write_text(text + "\n")
    return 0 if doc.ok else 1


class _Tee:
    def __init__(self, *streams):
        self.streams = streams

    def write(self, s: str) -> None:
        for st in self.streams:
            st.write(s)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
