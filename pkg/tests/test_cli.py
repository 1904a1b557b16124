import json

import numpy as np
import pytest

from hermcode.cache import (
    cache_path,
    cached_geometry,
    decode_geometry,
    encode_geometry,
    load_geometry,
    save_geometry,
)
from hermcode.cli import main, parse_range
from hermcode.errors import IntegrityError, InvalidParameterError
from hermcode.field import field_build
from hermcode.geometry import Geometry, pg
from hermcode.hermitian import build_hermitian
from hermcode.report import (
    ReportDocument,
    exact,
    pointset_from_json,
    pointset_to_json,
    read_pointset,
    write_pointset,
)


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


# -- cache ------------------------------------------------------------------------

def test_cache_round_trip_is_byte_identical(tmp_path):
    g = pg(2, 2, 3)
    path = save_geometry(g, cache_path(tmp_path, 2, 2, 3))
    data = path.read_bytes()
    assert data[:4] == b"PGEO"
    h = load_geometry(path)
    assert np.array_equal(h.coords, g.coords)
    assert np.array_equal(h.hyperplane_bits, g.hyperplane_bits)
    assert encode_geometry(h) == data


def test_cache_rebuild_matches_fresh_build(tmp_path):
    F = field_build(3, 2)
    fresh = Geometry(F, 2)
    g, loaded = cached_geometry(tmp_path, 3, 2, 2)
    assert encode_geometry(g) == encode_geometry(fresh)
    g2, loaded2 = cached_geometry(tmp_path, 3, 2, 2)
    assert loaded2 and g2 is g


@pytest.mark.parametrize("mutate", ["magic", "version", "truncate", "order", "modulus"])
def test_cache_decode_errors(mutate):
    data = bytearray(encode_geometry(pg(2, 2, 2)))
    if mutate == "magic":
        data[0:4] = b"XXXX"
    elif mutate == "version":
        data[4] = 9
    elif mutate == "truncate":
        data = data[:-3]
    elif mutate == "order":
        off = 4 + 16 + 12 + 8
        data[off:off + 16] = data[off + 8:off + 16] + data[off:off + 8]
    elif mutate == "modulus":
        data[20] = 0
    with pytest.raises(IntegrityError):
        decode_geometry(bytes(data))


def test_cached_geometry_detects_tampered_file(tmp_path):
    g, _ = cached_geometry(tmp_path, 2, 2, 2)
    path = cache_path(tmp_path, 2, 2, 2)
    data = bytearray(path.read_bytes())
    data[-1] ^= 1
    path.write_bytes(bytes(data))
    with pytest.raises(IntegrityError):
        cached_geometry(tmp_path, 2, 2, 2)


# -- reports and point sets ---------------------------------------------------------

def test_report_schema():
    doc = ReportDocument(["hermcode", "x"], {"p": 2})
    with doc.phase("work"):
        doc.add("thing", ok=True, value=np.int64(3), big=2**60)
    doc.add("other", ok=False)
    out = json.loads(doc.dumps())
    assert out["schema_version"] == 1
    assert set(out) == {"schema_version", "tool_version", "command", "parameters", "ok", "results", "timing"}
    assert out["ok"] is False
    assert out["results"][0]["value"] == 3
    assert out["results"][0]["big"] == str(2**60)
    assert "work" in out["timing"]


def test_exact_conversion():
    assert exact({1: [np.int32(2), 2**53]}) == {"1": [2, str(2**53)]}


def test_pointset_round_trip(tmp_path):
    g = pg(2, 2, 2)
    H = build_hermitian(g)
    doc = pointset_to_json(H)
    assert doc["p"] == 2 and doc["h"] == 2 and doc["r"] == 2
    assert pointset_from_json(doc) == H
    path = tmp_path / "h.json"
    write_pointset(H, path)
    assert read_pointset(path, g) == H


def test_pointset_rejects_non_canonical():
    # in PG(2,4) encodings run 1, 4..7, 16..31; 2 would be (0,0,2)
    with pytest.raises(InvalidParameterError):
        pointset_from_json({"p": 2, "h": 2, "r": 2, "points": [1, 2]})
    with pytest.raises(InvalidParameterError):
        pointset_from_json({"p": 2, "h": 2})
    with pytest.raises(InvalidParameterError):
        pointset_from_json({"p": 2, "h": 2, "r": 2, "points": [1]}, pg(3, 2, 2))


# -- command line ------------------------------------------------------------------

def test_parse_range():
    assert parse_range("5..8") == [5, 6, 7, 8]
    assert parse_range("2,5..6") == [2, 5, 6]
    assert parse_range("") == []


def test_geometry_command_uses_cache(tmp_path, capsys):
    rc, out, _ = run(capsys, "geometry", "--p", "2", "--h", "2", "--r", "2", "--cache-dir", str(tmp_path))
    assert rc == 0
    doc = json.loads(out)
    assert doc["results"][0]["points"] == 21
    assert cache_path(tmp_path, 2, 2, 2).exists()
    rc, out, _ = run(capsys, "geometry", "--p", "2", "--h", "2", "--r", "2", "--cache-dir", str(tmp_path))
    assert json.loads(out)["results"][0]["loaded_from_cache"] is True


def test_verify_hermitian_surface(capsys):
    rc, out, _ = run(capsys, "verify", "hermitian", "--r", "3", "--q", "2")
    doc = json.loads(out)
    assert rc == 0 and doc["ok"]
    kinds = {e["kind"]: e for e in doc["results"]}
    assert kinds["membership"]["member"] and kinds["membership"]["coefficient_sum"] == 1
    assert kinds["membership"]["rank"] == 17
    assert kinds["restriction"]["hyperplanes"] == 85 and not kinds["restriction"]["failures"]


def test_verify_cone(capsys):
    rc, out, _ = run(capsys, "verify", "cone", "--r", "3", "--q", "2", "--d", "0")
    doc = json.loads(out)
    assert rc == 0
    kinds = {e["kind"]: e for e in doc["results"]}
    assert kinds["singular_points"]["points"] == [0]
    assert kinds["singular_quasi_hermitian"]["expected_size"] == 37


def test_verify_random_set_fails(capsys):
    rc, out, _ = run(capsys, "verify", "random", "--r", "3", "--q", "2", "--seed", "7")
    assert rc == 1
    assert json.loads(out)["parameters"]["seed"] == 7


def test_verify_file_source(tmp_path, capsys):
    path = tmp_path / "u.json"
    write_pointset(build_hermitian(pg(2, 2, 2)), path)
    rc, out, _ = run(capsys, "verify", "file", "--file", str(path))
    assert rc == 0
    kinds = {e["kind"]: e for e in json.loads(out)["results"]}
    assert kinds["unital"]["ok"] and kinds["dual_multiset"]["delta"] == 9


def test_verify_file_missing_argument(capsys):
    rc, _, err = run(capsys, "verify", "file")
    assert rc == 2 and "--file" in err


def test_spectrum_and_member_commands(capsys):
    rc, out, _ = run(capsys, "spectrum", "hermitian", "--r", "2", "--q", "3")
    assert rc == 0
    assert json.loads(out)["results"][0]["histogram"] == {"1": 28, "4": 63}
    rc, out, _ = run(capsys, "member", "hermitian", "--r", "2", "--q", "2")
    entry = json.loads(out)["results"][0]
    assert rc == 0 and entry["member"] and entry["verified"]


def test_rank_command(capsys):
    rc, out, _ = run(capsys, "rank", "--p", "3", "--h", "2", "--r", "2")
    assert rc == 0 and json.loads(out)["results"][0]["rank"] == 37


def test_json_out(tmp_path, capsys):
    target = tmp_path / "r.json"
    rc, out, _ = run(capsys, "rank", "--p", "2", "--h", "2", "--r", "2", "--json-out", str(target))
    assert rc == 0
    assert json.loads(target.read_text()) == json.loads(out)


def test_audit_stream_and_exit_codes(tmp_path, capsys):
    rc, out, _ = run(capsys, "audit", "f_unital", "q=7..9")
    lines = [json.loads(x) for x in out.splitlines()]
    assert rc == 0
    assert [d["parameters"]["q"] for d in lines] == [7, 8, 9]
    rc, out, _ = run(capsys, "audit", "f_unital", "q=5")
    assert rc == 1 and json.loads(out)["verdict"] == "fails"
    target = tmp_path / "a.jsonl"
    rc, out, _ = run(capsys, "audit", "cone_divisibility", "p=5,6,7", "r=4..5", "--json-out", str(target))
    assert rc == 0 and len(out.splitlines()) == 4
    assert target.read_text() == out


def test_audit_errors(capsys):
    assert run(capsys, "audit", "nonsense")[0] == 2
    assert run(capsys, "audit", "f_unital")[0] == 2
    rc, out, _ = run(capsys, "audit", "f_unital", "q=")
    assert rc == 0 and out == ""


def test_usage_and_parameter_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "hermitian", "--q", "6")[0] == 2
    assert run(capsys, "hunt-unitals", "--q", "3")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_hunt_via_cli(capsys):
    rc, out, _ = run(capsys, "hunt-unitals")
    assert rc == 0
    entry = json.loads(out)["results"][0]
    assert entry["candidates"] == 293930
    assert entry["unitals"] == entry["codeword_unitals"] == entry["hermitian_unitals"] == 280
    assert entry["through_fixed_point"] == 120
