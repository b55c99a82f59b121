import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mixedphase.cli import main
from mixedphase.linalg import SIGMA_X, SIGMA_Y
from mixedphase.perm import full_cycle


def run(capsys, argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    return code, capsys.readouterr().out


def gamma_json(capsys, monkeypatch, doc, *flags):
    code, out = run(capsys, ["gamma", *flags], json.dumps(doc), monkeypatch)
    return code, json.loads(out)


def enc(m):
    return [[[z.real, z.imag] for z in row] for row in np.asarray(m, dtype=complex)]


def precession(delta, seq, spectrum=(0.75, 0.25)):
    return {"dim": 2, "spectrum": list(spectrum), "sequence": list(seq),
            "unitary": {"kind": "precession", "delta": delta}}


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    trailers = [ln for ln in text.splitlines() if ln.startswith("#")]
    return list(csv.reader(lines)), trailers


# --- gamma -----------------------------------------------------------------

def test_gamma_precession_pi_over_2(capsys, monkeypatch):
    code, rep = gamma_json(capsys, monkeypatch, precession(math.pi / 2, [1, 2]))
    assert code == 0
    assert rep["defined"]
    assert abs(rep["trace"][0] + 1) < 1e-12 and abs(rep["trace"][1]) < 1e-12
    assert abs(rep["factor"][0] + 1) < 1e-12
    assert abs(rep["argument"] - math.pi) < 1e-12
    assert rep["transport_verified"]


def test_gamma_undefined_is_exit_zero(capsys, monkeypatch):
    code, rep = gamma_json(capsys, monkeypatch, precession(math.pi / 2, [1]))
    assert code == 0
    assert rep["defined"] is False and "factor" not in rep and "argument" not in rep


def test_gamma_full_cycle(capsys, monkeypatch):
    doc = {"dim": 3, "spectrum": [0.5, 0.3, 0.2], "sequence": [1, 2, 3],
           "unitary": {"kind": "matrix", "matrix": enc(full_cycle(3))}}
    code, rep = gamma_json(capsys, monkeypatch, doc)
    assert code == 0
    assert abs(rep["factor"][0] - 1) < 1e-12 and abs(rep["factor"][1]) < 1e-12
    assert rep["method"] == "perm-engine"


def test_gamma_dense_and_perm_agree(capsys, monkeypatch, rng):
    from mixedphase.randomized import random_block_unitary, random_spectrum, random_unitary
    for n in (3, 5):
        b = random_unitary(n, rng)
        u = b @ random_block_unitary(n, n, rng) @ b.conj().T
        doc = {"dim": n, "spectrum": list(random_spectrum(n, rng)), "basis": enc(b),
               "sequence": list(range(1, n + 1)), "unitary": {"kind": "matrix", "matrix": enc(u)}}
        _, dense = gamma_json(capsys, monkeypatch, doc, "--method", "dense")
        _, fast = gamma_json(capsys, monkeypatch, doc, "--method", "perm")
        assert dense["method"] == "dense" and fast["method"] == "perm-engine"
        assert np.hypot(*np.subtract(dense["trace"], fast["trace"])) < 1e-10


def test_gamma_from_file(tmp_path, capsys):
    p = tmp_path / "in.json"
    p.write_text(json.dumps(precession(math.pi / 2, [1, 2])))
    out = tmp_path / "out.json"
    assert main(["gamma", "--input", str(p), "--output", str(out)]) == 0
    assert json.loads(out.read_text())["defined"]


def test_gamma_polarization_kind(capsys, monkeypatch):
    doc = {"dim": 2, "spectrum": [0.8, 0.2], "sequence": [1],
           "unitary": {"kind": "polarization", "beta": 1.0, "theta": 0.4}}
    _, rep = gamma_json(capsys, monkeypatch, doc)
    assert abs(rep["trace"][0] - math.cos(0.5)) < 1e-12 and rep["transport_verified"]


def test_gamma_path_kind(capsys, monkeypatch):
    samples = [enc(a * SIGMA_X + b * SIGMA_Y) for a, b in [(0.2, 0.0), (0.5, 0.3), (0.1, 0.6)]]
    doc = {"dim": 2, "spectrum": [0.7, 0.3], "sequence": [1, 2],
           "unitary": {"kind": "path", "samples": samples, "steps": 512}}
    code, rep = gamma_json(capsys, monkeypatch, doc)
    assert code == 0 and rep["transport_verified"]


@pytest.mark.parametrize("doc", [
    precession(1.0, [1, 2], spectrum=(0.5, 0.5)),
    precession(1.0, [1, 1]),
    precession(1.0, [1, 2], spectrum=(0.6, 0.6)),
    {"dim": 2, "spectrum": [0.6, 0.4], "sequence": [1]},
    {"dim": 2, "spectrum": [0.6, 0.4], "sequence": [1], "unitary": {"kind": "matrix",
                                                                     "matrix": enc(2 * np.eye(2))}},
    {"dim": 2, "spectrum": [0.6, 0.4], "sequence": [1], "unitary": {"kind": "warp"}},
])
def test_gamma_validation_exit_2(capsys, monkeypatch, doc):
    code, rep = gamma_json(capsys, monkeypatch, doc)
    assert code == 2
    assert set(rep["error"]) == {"type", "message"}


def test_gamma_degenerate_error_type(capsys, monkeypatch):
    _, rep = gamma_json(capsys, monkeypatch, precession(1.0, [1, 2], spectrum=(0.5, 0.5)))
    assert rep["error"]["type"] == "DegenerateSpectrum"


def test_gamma_bad_json(capsys, monkeypatch):
    code, out = run(capsys, ["gamma"], "{not json", monkeypatch)
    assert code == 2 and "error" in json.loads(out)


# --- sweeps ----------------------------------------------------------------

def test_nodal_csv(capsys):
    code, out = run(capsys, ["nodal", "--fidelity-grid", "0", "1", "5",
                             "--omega-grid", "0", str(math.pi), "3"])
    assert code == 0
    rows, _ = parse_csv(out)
    assert rows[0] == ["F_B", "Omega", "eta_node"]
    assert len(rows) == 16
    # fidelity-major ordering: rows 1..3 are F_B = 0
    assert [r[2] for r in rows[1:4]] == ["1", "1", "1"]
    cells = {(r[0], r[1]): r[2] for r in rows[1:]}
    assert cells[("0.75", "0")] == "0.732050807569"
    assert cells[("0.5", "3.14159265359")] == ""


def test_nodal_byte_stable(capsys):
    argv = ["nodal", "--fidelity-grid", "0", "1", "7", "--omega-grid", "0", "6", "7"]
    assert run(capsys, argv) == run(capsys, argv)


def test_nodal_from_input_grids(tmp_path, capsys):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"fidelity_grid": [0.75], "omega_grid": [0.0]}))
    _, out = run(capsys, ["nodal", "--input", str(p)])
    assert out.splitlines()[1] == "0.75,0,0.732050807569"


def test_nodal_missing_grid(capsys):
    code, out = run(capsys, ["nodal", "--fidelity-grid", "0", "1", "3"])
    assert code == 2 and "error" in json.loads(out)


def loci(trailers, name):
    (line,) = [t for t in trailers if t.startswith(f"# {name}:")]
    body = line.split(":", 1)[1].strip()
    return [float(x) for x in body.split(",")] if body else []


def test_franson_order1(capsys):
    _, out = run(capsys, ["franson", "--r", "0.3", "--theta", "0.5", "--order", "1",
                          "--beta-grid", "0", "12", "25"])
    rows, trailers = parse_csv(out)
    assert rows[0] == ["beta", "visibility", "phase", "trace_re", "trace_im"]
    assert len(rows) == 26
    got = loci(trailers, "sign_changes")
    assert len(got) == 2
    assert abs(got[0] - math.pi) < 1e-6 and abs(got[1] - 3 * math.pi) < 1e-6


def test_franson_order2(capsys):
    _, out = run(capsys, ["franson", "--r", "0.6", "--theta", "0", "--order", "2",
                          "--beta-grid", "0", "3", "16"])
    got = loci(parse_csv(out)[1], "sign_changes")
    assert abs(got[0] - 2 * math.atan(0.64 ** 0.25)) < 1e-6


def test_franson_r1_no_sign_change(capsys):
    _, out = run(capsys, ["franson", "--r", "1", "--theta", "0", "--order", "2",
                          "--beta-grid", "0.1", "6", "12"])
    rows, trailers = parse_csv(out)
    assert loci(trailers, "sign_changes") == []
    for beta, vis, phase, *_ in rows[1:]:
        if phase:
            assert abs(abs(float(phase)) - math.pi) < 1e-9


def test_franson_jobs_do_not_change_output(capsys):
    argv = ["franson", "--r", "0.6", "--theta", "0.2", "--order", "2",
            "--beta-grid", "0", "6", "9"]
    _, serial = run(capsys, argv)
    _, parallel = run(capsys, argv + ["--jobs", "2"])
    assert serial == parallel


def test_projection_jumps(capsys):
    _, out = run(capsys, ["projection", "--lambda1", "0.87", "--theta", str(math.pi / 2),
                          "--delta-grid", "0", str(2 * math.pi), "64"])
    rows, trailers = parse_csv(out)
    assert rows[0] == ["delta", "arg_mod_2pi"]
    got = loci(trailers, "jumps")
    x = 2 * math.acos(math.sqrt(0.87))
    assert len(got) == 2
    assert abs(got[0] - x) < 1e-6 and abs(got[1] - (2 * math.pi - x)) < 1e-6


def test_projection_pure_and_smooth(capsys):
    _, out = run(capsys, ["projection", "--lambda1", "1", "--theta", str(math.pi / 2),
                          "--delta-grid", "0.1", "6.1", "31"])
    rows, trailers = parse_csv(out)
    assert all(abs(float(a) - math.pi) < 1e-9 for _, a in rows[1:])
    _, out = run(capsys, ["projection", "--lambda1", "0.87", "--theta", str(math.pi / 6),
                          "--delta-grid", "0.01", "6.27", "50"])
    assert loci(parse_csv(out)[1], "jumps") == []


def test_projection_lambda_range(capsys):
    code, out = run(capsys, ["projection", "--lambda1", "0.4", "--theta", "1",
                             "--delta-grid", "0", "1", "3"])
    assert code == 2


def test_csv_twelve_significant_digits(capsys):
    _, out = run(capsys, ["projection", "--lambda1", "0.87", "--theta", "1.0",
                          "--delta-grid", "0.1", "3", "7"])
    for _, a in parse_csv(out)[0][1:]:
        mantissa = a.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
        assert len(mantissa) <= 12


# --- selftest ---------------------------------------------------------------

def test_selftest_small_run(capsys):
    code, out = run(capsys, ["selftest", "--max-dim", "4", "--trials", "3", "--seed", "5"])
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["suites"]["transport"]["negative_control"] == "caught"
    assert max(s["max_deviation"] for s in rep["suites"].values()) < 1e-10
    assert run(capsys, ["selftest", "--max-dim", "4", "--trials", "3", "--seed", "5"])[1] == out


def test_selftest_degenerate_input(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"spectra": [[0.5, 0.5]]}))
    code, out = run(capsys, ["selftest", "--input", str(p)])
    assert code == 2
    assert json.loads(out)["error"]["type"] == "DegenerateSpectrum"


def test_tolerance_file(tmp_path, capsys, monkeypatch):
    p = tmp_path / "tol.json"
    p.write_text(json.dumps({"bogus": 1}))
    code, _ = run(capsys, ["gamma", "--tolerance-file", str(p)],
                  json.dumps(precession(1.0, [1, 2])), monkeypatch)
    assert code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mixedphase", "nodal", "--fidelity-grid", "0.75",
                          "0.75", "1", "--omega-grid", "0", "0", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert out == "F_B,Omega,eta_node\n0.75,0,0.732050807569\n"
