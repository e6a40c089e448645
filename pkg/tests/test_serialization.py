"""Mesh JSON, profile CSV, and table CSV round trips.

Floats are written with repr, so every round trip is bit-exact; format
violations surface as MeshFormatError / ProfileFormatError rather than
raw KeyError/ValueError noise.
"""

import json
import math

import numpy as np
import pytest

from slipform import (
    ConvergenceTable,
    GapRow,
    GapResult,
    LimitProfile,
    MeshFormatError,
    ProfileFormatError,
    ShearState,
    SlipSystem,
    SweepRow,
    kink_axis,
    load_mesh,
    load_mesh_document,
    load_profile,
    mesh_from_dict,
    mesh_to_dict,
    save_mesh,
    save_profile,
    transition,
    write_gap_csv,
    write_sweep_csv,
)
from slipform.serialization import GAP_HEADER, MESH_SCHEMA, SWEEP_HEADER

E2 = SlipSystem([0.0, 1.0])


def _sample_mesh():
    m, _ = transition(E2, ShearState(0.1, 0.4), ShearState(-0.7, 1.2), 0.5)
    return m


def _maps_equal(a, b):
    if len(a.cells) != len(b.cells):
        return False
    for ca, cb in zip(a.cells, b.cells):
        if not (
            np.array_equal(ca.vertices, cb.vertices)
            and np.array_equal(ca.gradient, cb.gradient)
            and np.array_equal(ca.offset, cb.offset)
        ):
            return False
    return (
        np.array_equal(a.slip.s, b.slip.s)
        and a.window == b.window
        and a.core == b.core
        and a.left_state == b.left_state
        and a.right_state == b.right_state
    )


def test_mesh_round_trip_is_bit_exact(tmp_path):
    m = _sample_mesh()
    p = tmp_path / "mesh.json"
    save_mesh(m, p, provenance={"builder": "transition", "parameters": {"B": 0.5}})
    again = load_mesh(p)
    assert _maps_equal(m, again)
    # a second save of the loaded mesh produces the identical file
    p2 = tmp_path / "mesh2.json"
    doc = load_mesh_document(p)
    save_mesh(doc.map, p2, provenance=doc.provenance, meta=doc.meta)
    assert p.read_bytes() == p2.read_bytes()


def test_mesh_document_keeps_provenance(tmp_path):
    p = tmp_path / "mesh.json"
    save_mesh(_sample_mesh(), p, meta={"note": 7})
    doc = load_mesh_document(p)
    assert doc.provenance["builder"] == "unspecified"
    assert doc.provenance["parameters"] == {}
    assert doc.meta == {"note": 7}


def test_mesh_error_paths(tmp_path):
    m = _sample_mesh()
    good = mesh_to_dict(m)

    bad = dict(good, schema="slipform-mesh/999")
    with pytest.raises(MeshFormatError, match="schema"):
        mesh_from_dict(bad)

    bad = dict(good, cells=[])
    with pytest.raises(MeshFormatError, match="no cells"):
        mesh_from_dict(bad)

    bad = json.loads(json.dumps(good))
    bad["cells"][0]["vertices"] = [[0.0, 0.0], [1.0, 0.0]]
    with pytest.raises(MeshFormatError, match="vertices"):
        mesh_from_dict(bad)

    bad = json.loads(json.dumps(good))
    bad["cells"][0]["gradient"] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    with pytest.raises(MeshFormatError, match="gradient"):
        mesh_from_dict(bad)

    bad = dict(good)
    del bad["window"]
    with pytest.raises(MeshFormatError, match="malformed"):
        mesh_from_dict(bad)

    missing = tmp_path / "nope.json"
    with pytest.raises(MeshFormatError, match="cannot parse"):
        load_mesh(missing)

    trunc = tmp_path / "trunc.json"
    trunc.write_text(json.dumps(good)[: len(json.dumps(good)) // 2])
    with pytest.raises(MeshFormatError):
        load_mesh(trunc)

    scalar = tmp_path / "scalar.json"
    scalar.write_text("42")
    with pytest.raises(MeshFormatError, match="JSON object"):
        load_mesh(scalar)

    badprov = tmp_path / "badprov.json"
    badprov.write_text(json.dumps(dict(good, provenance=[1, 2])))
    with pytest.raises(MeshFormatError, match="provenance"):
        load_mesh_document(badprov)


def test_schema_constant_is_stable():
    assert MESH_SCHEMA == "slipform-mesh/1"
    assert mesh_to_dict(_sample_mesh())["schema"] == MESH_SCHEMA


def test_profile_round_trip(tmp_path):
    prof = LimitProfile([0.0, 3.0, 9.0], [[1.2, 0.3], [0.2, 1.3]])
    p = tmp_path / "prof.csv"
    save_profile(prof, p)
    again = load_profile(p)
    assert np.array_equal(prof.breaks, again.breaks)
    assert np.array_equal(prof.xis, again.xis)


def test_profile_error_paths(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("wrong,header,here\n1.0,1.0,0.0\n")
    with pytest.raises(ProfileFormatError, match="start with"):
        load_profile(p)
    p.write_text("t_end,xi1,xi2\n1.0,2.0\n")
    with pytest.raises(ProfileFormatError, match="expected 3 fields"):
        load_profile(p)
    p.write_text("t_end,xi1,xi2\n1.0,fish,0.0\n")
    with pytest.raises(ProfileFormatError, match="line 2"):
        load_profile(p)
    p.write_text("t_end,xi1,xi2\n2.0,1.0,0.0\n1.0,0.0,1.0\n")
    with pytest.raises(ProfileFormatError, match="increasing"):
        load_profile(p)
    with pytest.raises(ProfileFormatError, match="cannot read"):
        load_profile(tmp_path / "absent.csv")


def test_sweep_csv_bytes(tmp_path):
    rows = [
        SweepRow(0.1, math.nan, 2.5, 2.0, 0.5),
        SweepRow(0.05, math.nan, 2.25, 2.0, 0.25),
        SweepRow(0.025, math.nan, 2.125, 2.0, 0.125),
    ]
    p = tmp_path / "sweep.csv"
    write_sweep_csv(ConvergenceTable(rows), p)
    text = p.read_text().splitlines()
    assert text[0] == ",".join(SWEEP_HEADER)
    assert text[1].split(",")[0] == "0.1"
    assert text[1].split(",")[1] == "nan"
    # rate column is nan until three rows exist, then the fitted slope
    assert text[1].split(",")[5] == "nan"
    assert text[2].split(",")[5] == "nan"
    assert float(text[3].split(",")[5]) == pytest.approx(1.0, abs=1e-12)
    # byte identity across rewrites
    q = tmp_path / "sweep2.csv"
    write_sweep_csv(ConvergenceTable(rows), q)
    assert p.read_bytes() == q.read_bytes()


def test_gap_csv_bytes(tmp_path):
    rows = [GapRow(0.05, 0.7, 57.0, 0.7 / 57.0, 0.5, 0.50001)]
    res = GapResult(delta=0.5, length=24.6, rows=rows)
    p = tmp_path / "gap.csv"
    write_gap_csv(res, p)
    text = p.read_text().splitlines()
    assert text[0] == ",".join(GAP_HEADER)
    assert text[1].split(",")[0] == "0.05"
    vals = [float(v) for v in text[1].split(",")]
    assert vals[3] == pytest.approx(0.7 / 57.0, rel=1e-15)
