import json
import subprocess
import sys

import pytest

from bordiq.barcx import FiniteGroup
from bordiq.cli import cocycle_doc, complex_doc, main, read_cocycle, read_complex, refined
from bordiq.kernel import verify_closed_manifold
from bordiq.maps import Cocycle, from_cocycle, validate
from instances import hexagon, torus_first_factor


@pytest.fixture
def hexagon_files(tmp_path):
    H = hexagon()
    c = Cocycle(FiniteGroup.cyclic(2), {e: 1 for e in H.simplices(1)})
    (tmp_path / "M.json").write_text(json.dumps(complex_doc(H)))
    (tmp_path / "c.json").write_text(json.dumps(cocycle_doc(c)))
    return tmp_path / "M.json", tmp_path / "c.json"


def test_rho_lens_output(capsys):
    assert main(["rho", "lens", "3", "1"]) == 0
    assert capsys.readouterr().out.strip() == "0.2222222222"


def test_rho_cl_output(capsys):
    assert main(["rho", "cl", "7"]) == 0
    assert capsys.readouterr().out.strip() == "4 2"


def test_rho_bad_arity(capsys):
    assert main(["rho", "lens", "3"]) == 2


def test_rho_domain_error():
    assert main(["rho", "lens", "1", "1"]) == 2


def test_round_trip(hexagon_files):
    M, c = hexagon_files
    X = read_complex(M)
    assert X == hexagon()
    assert read_cocycle(c).labels == {e: 1 for e in X.simplices(1)}


def test_parse_error_has_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "bordiq/1",\n  "dim": 1,\n  oops}')
    assert main(["audit", str(bad)]) == 2
    assert f"{bad}:3:3" in capsys.readouterr().err


def test_wrong_format_tag(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"format": "other", "maximal_simplices": [[0, 1]]}))
    assert main(["audit", str(p)]) == 2


def test_audit_failure_exit_code(tmp_path):
    p = tmp_path / "path.json"
    p.write_text(json.dumps({"format": "bordiq/1", "dim": 1, "maximal_simplices": [[0, 1], [1, 2]]}))
    assert main(["audit", str(p)]) == 1


def test_transversal(hexagon_files, capsys):
    M, c = hexagon_files
    assert main(["transversal", str(M), str(c), "--json"]) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["fibers"] == 6 and row["ok"]


def test_bordify_archive_deterministic(hexagon_files, tmp_path, capsys):
    M, c = hexagon_files
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bordify", str(M), str(c), "--oriented", "-o", str(a)]) == 0
    assert main(["bordify", str(M), str(c), "--oriented", "-o", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["M_prime.json", "N.json", "W.json", "audit.json", "carriers.json", "homotopy.json",
                     "manifest.json"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    summary = json.loads((a / "manifest.json").read_text())["summary"]
    assert summary["W"] == 582 and summary["orientable"] is True
    capsys.readouterr()
    assert main(["report", str(a)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_tampered_archive(hexagon_files, tmp_path, capsys):
    M, c = hexagon_files
    a = tmp_path / "a"
    main(["bordify", str(M), str(c), "-o", str(a)])
    doc = json.loads((a / "N.json").read_text())
    doc["maximal_simplices"].pop()
    (a / "N.json").write_text(json.dumps(doc))
    assert main(["report", str(a)]) == 2
    assert "checksum" in capsys.readouterr().err


def test_descend(hexagon_files, capsys):
    M, c = hexagon_files
    assert main(["descend", str(M), str(c), "--json"]) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["boundary_exact"] and row["N_constant"] and row["N_certified"]


def test_refine_sweep(hexagon_files, tmp_path, capsys):
    M, c = hexagon_files
    out = tmp_path / "sweep.json"
    assert main(["transversal", str(M), str(c), "--refine", "2", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["source"] for r in doc["rows"]] == [12, 24, 48]
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "max" in text and "trend" in text


def test_refined_cocycle_is_valid():
    M, c = torus_first_factor(3)
    M2, c2 = refined(M, c, 1)
    assert not c2.violations(M2)
    assert verify_closed_manifold(M2, 2).certified
    assert len(M2.top()) == 6 * len(M.top())
    assert validate(from_cocycle(M2, c2)[0]).ok


def test_bad_thread_env(hexagon_files, monkeypatch):
    monkeypatch.setenv("BORDIQ_THREADS", "0")
    assert main(["audit", str(hexagon_files[0])]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bordiq", "rho", "lens", "4", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.5000000000"
