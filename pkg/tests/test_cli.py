"""End-to-end checks of the command line front end.

Everything runs in-process through main(argv) so exit codes and
stdout/stderr can be asserted without spawning interpreters.
"""

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from slipform import LimitProfile, save_profile
from slipform.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def write_profile(tmp_path: Path, name: str, breaks, xis) -> str:
    path = tmp_path / name
    save_profile(LimitProfile(breaks, xis), path)
    return str(path)


# ---------------------------------------------------------------- density


def test_density_reachable_segment(capsys):
    rc, out, _ = run(capsys, "density", "--slip", "0,1", "--xi", "2,0")
    assert rc == 0
    seg, rel = out.strip().splitlines()
    assert seg.startswith("segment xi=(2.0,0.0) value=")
    assert abs(float(seg.rsplit("=", 1)[1]) - 3.0) < 1e-12
    assert rel == "relaxed xi=(2.0,0.0) value=3.0"


def test_density_axis_slip_stretches(capsys):
    rc, out, _ = run(capsys, "density", "--slip", "1,0",
                     "--xi", "2,0", "--xi", "0.5,0")
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "segment xi=(2.0,0.0) value=+inf"
    assert lines[1] == "relaxed xi=(2.0,0.0) value=+inf"
    assert lines[2] == "segment xi=(0.5,0.0) value=+inf"
    # compressions along the slip axis relax to zero energy
    assert lines[3] == "relaxed xi=(0.5,0.0) value=0.0"


def test_density_matrix_queries(capsys):
    rc, out, _ = run(capsys, "density", "--slip", "0,1",
                     "--mat", "1,0,0,1", "--eps", "0.1")
    assert rc == 0
    assert "hard mat=(1.0,0.0,0.0,1.0) value=0.0" in out
    assert "soft mat=(1.0,0.0,0.0,1.0) eps=0.1 value=0.0" in out


def test_density_without_queries_is_usage_error(capsys):
    rc, _, err = run(capsys, "density", "--slip", "0,1")
    assert rc == 2
    assert "nothing to evaluate" in err


def test_zero_slip_vector_is_usage_error(capsys):
    rc, _, err = run(capsys, "density", "--slip", "0,0", "--xi", "1,0")
    assert rc == 2
    assert "--slip" in err


def test_argparse_failures_exit_two(capsys):
    assert run(capsys, "density", "--slip", "0,1", "--frobnicate")[0] == 2
    assert run(capsys, "density", "--slip", "0,1,2", "--xi", "1,0")[0] == 2
    assert run(capsys, "sweep", "--grid", "0.1:0.05:3", "--out", "x.csv")[0] == 2


# ------------------------------------------------------------------ build


def test_build_straight_profile(tmp_path, capsys):
    prof = write_profile(tmp_path, "straight.csv", [0.0, 5.0], [[1.0, 0.0]])
    mesh = tmp_path / "straight.json"
    rc, out, _ = run(capsys, "build", "--slip", "0,1", "--profile", prof,
                     "--h", "0.1", "--out", str(mesh))
    assert rc == 0
    assert "cells=1 mode=hard" in out
    assert "gap=0.0" in out

    doc = json.loads(mesh.read_text())
    assert doc["provenance"]["builder"] == "build_recovery"
    assert doc["meta"]["half_height"] == 0.1
    assert "h_max" in doc["meta"]

    rc, out, _ = run(capsys, "verify", "--mesh", str(mesh))
    payload = json.loads(out)
    assert rc == 0
    assert payload["pass"] is True
    assert payload["exceeded"] == []


def test_build_kink_svg_and_verify(tmp_path, capsys):
    prof = write_profile(tmp_path, "kink.csv", [0.0, 3.0, 6.0],
                         [[1.0, 0.0], [0.0, 1.0]])
    mesh = tmp_path / "kink.json"
    svg = tmp_path / "kink.svg"
    rc, out, _ = run(capsys, "build", "--slip", "0,1", "--profile", prof,
                     "--h", "0.05", "--out", str(mesh), "--svg", str(svg))
    assert rc == 0

    n_cells = len(json.loads(mesh.read_text())["cells"])
    root = ET.parse(svg).getroot()  # XML well-formedness
    polygons = [el for el in root.iter() if el.tag.endswith("polygon")]
    assert len(polygons) == n_cells

    assert run(capsys, "verify", "--mesh", str(mesh))[0] == 0


def test_build_soft_mode(tmp_path, capsys):
    prof = write_profile(tmp_path, "kink.csv", [0.0, 3.0, 6.0],
                         [[1.0, 0.0], [0.0, 1.0]])
    mesh = tmp_path / "kink.json"
    rc, _, err = run(capsys, "build", "--slip", "0,1", "--profile", prof,
                     "--h", "0.05", "--mode", "soft", "--out", str(mesh))
    assert rc == 2
    assert "--eps" in err

    rc, out, _ = run(capsys, "build", "--slip", "0,1", "--profile", prof,
                     "--h", "0.05", "--mode", "soft", "--eps", "0.05",
                     "--out", str(mesh))
    assert rc == 0
    assert "mode=soft" in out


def test_build_height_too_large(tmp_path, capsys):
    prof = write_profile(tmp_path, "kink.csv", [0.0, 3.0, 6.0],
                         [[1.0, 0.0], [0.0, 1.0]])
    rc, _, err = run(capsys, "build", "--slip", "0,1", "--profile", prof,
                     "--h", "10", "--out", str(tmp_path / "m.json"))
    assert rc == 3
    assert "largest admissible" in err


def test_build_zigzag_rescues_short_segment(tmp_path, capsys):
    prof = write_profile(tmp_path, "sub.csv", [0.0, 3.0], [[0.5, 0.0]])
    mesh = tmp_path / "sub.json"
    rc, _, err = run(capsys, "build", "--slip", "1,0", "--profile", prof,
                     "--h", "0.008", "--out", str(mesh))
    assert rc == 3
    assert "segment 0" in err

    rc, out, _ = run(capsys, "build", "--slip", "1,0", "--profile", prof,
                     "--h", "0.008", "--zigzag", "2", "--out", str(mesh))
    assert rc == 0
    assert run(capsys, "verify", "--mesh", str(mesh))[0] == 0


# ----------------------------------------------------------------- verify


def test_verify_flags_perturbed_gradient(tmp_path, capsys):
    prof = write_profile(tmp_path, "straight.csv", [0.0, 5.0], [[1.0, 0.0]])
    mesh = tmp_path / "straight.json"
    run(capsys, "build", "--slip", "0,1", "--profile", prof,
        "--h", "0.1", "--out", str(mesh))

    doc = json.loads(mesh.read_text())
    doc["cells"][0]["gradient"][0][0] += 1e-3
    mesh.write_text(json.dumps(doc))

    rc, out, _ = run(capsys, "verify", "--mesh", str(mesh))
    payload = json.loads(out)
    assert rc == 1
    assert payload["pass"] is False
    assert "admissibility" in payload["exceeded"]
    assert 5e-4 < payload["residuals"]["admissibility"] < 2e-3


def test_verify_unreadable_meshes(tmp_path, capsys):
    prof = write_profile(tmp_path, "straight.csv", [0.0, 5.0], [[1.0, 0.0]])
    mesh = tmp_path / "straight.json"
    run(capsys, "build", "--slip", "0,1", "--profile", prof,
        "--h", "0.1", "--out", str(mesh))

    text = mesh.read_text()
    mesh.write_text(text[: len(text) // 2])
    rc, _, err = run(capsys, "verify", "--mesh", str(mesh))
    assert rc == 2
    assert "error:" in err

    assert run(capsys, "verify", "--mesh", str(tmp_path / "nope.json"))[0] == 2


# ------------------------------------------------------------------ sweep


def test_sweep_recovery_outputs(tmp_path, capsys):
    prof = write_profile(tmp_path, "bends.csv", [0.0, 3.0, 6.0, 9.0],
                         [[1.2, 0.3], [0.2, 1.3], [1.0, 0.5]])
    out_csv = tmp_path / "rates.csv"
    rc, out, _ = run(capsys, "sweep", "--experiment", "recovery",
                     "--slip", "0,1", "--profile", prof,
                     "--grid", "0.025:0.1:3", "--out", str(out_csv))
    assert rc == 0
    assert "rate=" in out
    assert out_csv.exists()
    assert (tmp_path / "rates.svg").exists()  # default figure path

    rate = float(out.split("rate=")[1].split()[0])
    assert abs(rate - 1.0) < 0.1

    first = out_csv.read_bytes()
    run(capsys, "sweep", "--experiment", "recovery", "--slip", "0,1",
        "--profile", prof, "--grid", "0.025:0.1:3", "--out", str(out_csv))
    assert out_csv.read_bytes() == first


def test_sweep_soft_outputs(tmp_path, capsys):
    prof = write_profile(tmp_path, "kink.csv", [0.0, 2.0, 4.0],
                         [[1.0, 0.0], [0.0, 1.0]])
    out_csv = tmp_path / "soft.csv"
    fig = tmp_path / "fig.svg"
    rc, out, _ = run(capsys, "sweep", "--experiment", "soft",
                     "--slip", "0,1", "--profile", prof, "--eps", "sqrt",
                     "--grid", "0.02:0.04:2", "--out", str(out_csv),
                     "--svg", str(fig))
    assert rc == 0
    assert "rate=nan" in out  # two rows cannot fit a tail slope
    header = out_csv.read_text().splitlines()[0]
    assert header == "h,eps,rescaled,limit,gap,rate"
    assert fig.exists()


def test_sweep_lavrentiev_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("sweep", "--experiment", "lavrentiev", "--grid", "0.05:0.1:2",
            "--restarts", "2", "--seed", "3")
    rc, out, _ = run(capsys, *args, "--out", str(a))
    assert rc == 0
    assert "floor=" in out and "infeasible_squeeze=False" in out

    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()

    rows = a.read_text().splitlines()
    assert rows[0] == "h,kinked,smooth,ratio,kinked_delta,smooth_delta"
    h_col = [float(r.split(",")[0]) for r in rows[1:]]
    assert h_col == sorted(h_col)
