import json
import subprocess
import sys

import numpy as np
import pytest

from lorentz import io as lio
from lorentz.cli import main


def _gen(path, *extra):
    return main(["gen", "--kind", "minkowski_diamond", "--n", "120", "--seed", "7", "-o", str(path), *extra])


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert _gen(a) == 0 and _gen(b) == 0
    assert a.read_bytes() == b.read_bytes()
    side = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert "wall_time" in side and side["seeds"] == {"seed": 7}


def test_manifest_hash_embedded(tmp_path):
    out = tmp_path / "s.json"
    _gen(out)
    doc = lio.read_json(out)
    assert doc["manifest_hash"] == lio.digest(doc["manifest"])
    assert doc["manifest"]["command"] == "gen"


def test_validate_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    _gen(good)
    assert main(["validate", str(good)]) == 0
    # 0 < 1 < 2 with tau(0, 2) too short
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "leq": [[0, 1], [1, 2], [0, 2]],
                               "tau": [[0, 1, 1], [0, 0, 1], [0, 0, 0]]}))
    out = tmp_path / "rep.json"
    assert main(["validate", str(bad), "-o", str(out)]) == 1
    rep = lio.read_json(out)
    assert not rep["passed"] and rep["counts"]["reverse_triangle"] == 1
    assert rep["violations"][0][1] == [0, 1, 2]
    assert "reverse_triangle" in capsys.readouterr().err


def test_report_of_shells(tmp_path):
    sp = tmp_path / "g.json"
    main(["gen", "--kind", "minkowski_diamond", "--n", "100", "--sampling", "grid", "-o", str(sp)])
    space = lio.load_space(sp)
    p = int(np.argmin(space.coords[:, 0]))
    q = int(np.argmax(space.coords[:, 0]))
    shells = tmp_path / "shells.json"
    assert main(["exhaust", str(sp), "--p", str(p), "--q", str(q), "--nmax", "3", "-o", str(shells)]) == 0
    csv = tmp_path / "shells.csv"
    assert main(["report", str(shells), "-o", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("# manifest_hash=")
    assert lines[1] == "file,n,size"
    sizes = [int(line.split(",")[2]) for line in lines[2:]]
    assert len(sizes) == 4 and sizes == sorted(sizes)


def test_report_rejects_tampered_manifest(tmp_path):
    out = tmp_path / "s.json"
    _gen(out)
    doc = lio.read_json(out)
    doc["manifest"]["config"]["n"] = 5
    out.write_text(json.dumps(doc))
    assert main(["report", str(out)]) == 2


def test_usage_and_input_errors(tmp_path, capsys):
    assert main(["gen", "--kind", "minkowski_diamond", "--bogus"]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    assert main(["gen", "--kind", "minkowski_diamond", "--param", "novalue"]) == 2
    assert main(["tau", str(tmp_path / "missing.json")]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_tau_and_metric_csv(tmp_path):
    sp = tmp_path / "g.json"
    _gen(sp)
    t = tmp_path / "tau.csv"
    assert main(["tau", str(sp), "-o", str(t)]) == 0
    M, _, _, h = lio.read_csv(t)
    np.testing.assert_array_equal(M, lio.load_space(sp).tau)
    assert h


def test_glue_roundtrip(tmp_path):
    def slab(path, t0, t1):
        main(["gen", "--kind", "minkowski_slab", "--sampling", "grid", "--tau-mode", "chain",
              "--param", f"t0={t0}", "--param", f"t1={t1}", "--param", "x_extent=0.5",
              "--param", "h=0.25", "--param", "edges=\"links\"", "-o", str(path)])
        return lio.load_space(path)

    lo, hi = slab(tmp_path / "L.json", 0, 1), slab(tmp_path / "R.json", 1, 2)
    am = np.flatnonzero(lo.coords[:, 0] == 1)
    ap = np.flatnonzero(hi.coords[:, 0] == 1)
    am, ap = am[np.argsort(lo.coords[am, 1])], ap[np.argsort(hi.coords[ap, 1])]
    (tmp_path / "seam.json").write_text(json.dumps({"pairs": np.stack([am, ap], 1).tolist()}))
    out = tmp_path / "G.json"
    code = main(["glue", str(tmp_path / "L.json"), str(tmp_path / "R.json"), "--map",
                 str(tmp_path / "seam.json"), "-o", str(out)])
    assert code == 0
    g = lio.load_space(out)
    assert g.n == lo.n + hi.n - len(am)


def test_console_script_module_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "lorentz.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()


@pytest.mark.parametrize("threads", ["1", "0"])
def test_threads_flag(tmp_path, threads):
    code = main(["--threads", threads, "gen", "--kind", "minkowski_diamond", "--n", "50", "--seed", "1",
                 "-o", str(tmp_path / "s.json")])
    assert code == (0 if threads == "1" else 2)


def test_properize_merges_repeated_shells(tmp_path):
    sp = tmp_path / "s.json"
    main(["gen", "--kind", "minkowski_slab", "--sampling", "grid", "--tau-mode", "chain",
          "--param", "t0=0", "--param", "t1=2", "--param", "x_extent=1", "--param", "h=0.125",
          "-o", str(sp)])
    c = lio.load_space(sp).coords
    box = lambda r: np.flatnonzero((np.abs(c[:, 0] - 1) <= r + 1e-9) & (np.abs(c[:, 1]) <= r + 1e-9)).tolist()
    shells = tmp_path / "shells.json"
    shells.write_text(json.dumps({"n": len(c), "shells": [box(0.25), box(0.25), box(0.5), box(0.75), box(1.0)]}))
    out = tmp_path / "proper.csv"
    assert main(["properize", str(sp), "--shells", str(shells), "--k", "4", "-o", str(out)]) == 0
    D, _, _, _ = lio.read_csv(out)
    assert D.shape == (len(c), len(c)) and np.allclose(D, D.T)
    # two distinct shells are too few to rescale
    shells.write_text(json.dumps({"n": len(c), "shells": [box(0.25), box(1.0), box(1.0)]}))
    assert main(["properize", str(sp), "--shells", str(shells), "--k", "4", "-o", str(out)]) == 2
