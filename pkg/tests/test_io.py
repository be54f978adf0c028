import json

import numpy as np
import pytest

from lorentz import io as lio
from lorentz.core import FiniteLorentzianSpace, SpaceInputError
from lorentz.generators import GeneratorSpec, generate

from conftest import chain_space


def _same(a, b):
    np.testing.assert_array_equal(a.leq, b.leq)
    np.testing.assert_array_equal(a.tau, b.tau)


def test_chain_space_round_trip(tmp_path, diamond4):
    sp = FiniteLorentzianSpace(leq=diamond4.leq, tau=diamond4.tau, coords=diamond4.coords,
                               links=diamond4.links, meta={"tau_mode": "chain"})
    d = lio.space_to_dict(sp)
    assert d["tau"] == "chain"
    path = tmp_path / "s.json"
    lio.write_json(path, {"space": d})
    back = lio.load_space(path)
    _same(sp, back)
    np.testing.assert_array_equal(back.coords, sp.coords)


def test_oracle_space_round_trip(tmp_path):
    sp, _ = generate(GeneratorSpec("minkowski_diamond", n=80, seed=2, tau_mode="oracle"))
    d = lio.space_to_dict(sp)
    assert isinstance(d["tau"], list)
    path = tmp_path / "s.json"
    lio.write_json(path, {"space": d})
    back = lio.load_space(path)
    _same(sp, back)
    assert back.meta == json.loads(json.dumps(lio._jsonable(sp.meta)))


def test_base_dist_and_marks_survive(tmp_path):
    sp = chain_space(3, [(0, 1, 1.0), (1, 2, 1.0)])
    sp = FiniteLorentzianSpace(leq=sp.leq, tau=sp.tau, base_dist=np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0.0]]),
                               marks=["interior", "interior", "future-ideal"])
    back = lio.space_from_dict(json.loads(lio.canonical(lio.space_to_dict(sp))))
    np.testing.assert_array_equal(back.base_dist, sp.base_dist)
    assert list(back.marks) == list(sp.marks)


def test_digest_is_order_independent():
    assert lio.digest({"a": 1, "b": [1, 2]}) == lio.digest({"b": [1, 2], "a": 1})
    assert lio.digest({"a": 1}) != lio.digest({"a": 2})
    assert lio.digest({"x": np.float64(0.5)}) == lio.digest({"x": 0.5})


def test_manifest_hash_embedded(tmp_path):
    man = {"command": "gen", "config": {"n": 3}}
    h = lio.write_json(tmp_path / "o.json", {"x": 1}, man)
    doc = lio.read_json(tmp_path / "o.json")
    assert doc["manifest_hash"] == h == lio.digest(doc["manifest"])


def test_csv_round_trip(tmp_path):
    M = np.array([[0.0, 0.25], [1.5, 0.0]])
    lio.write_csv(tmp_path / "m.csv", M, manifest_hash="abc")
    text = (tmp_path / "m.csv").read_text().splitlines()
    assert text[0] == "# manifest_hash=abc" and text[1] == "id,0,1"
    back, rows, cols, h = lio.read_csv(tmp_path / "m.csv")
    np.testing.assert_array_equal(back, M)
    assert h == "abc"


def test_malformed_documents(tmp_path):
    with pytest.raises(SpaceInputError):
        lio.space_from_dict({"links": []})
    with pytest.raises(SpaceInputError):
        lio.space_from_dict({"n": 2, "links": [[0, 5, 1.0]]})
    with pytest.raises(SpaceInputError):
        lio.space_from_dict({"n": 2, "tau": [[0.0]], "leq": []})
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(SpaceInputError):
        lio.load_space(tmp_path / "bad.json")
    with pytest.raises(SpaceInputError):
        lio.load_space(tmp_path / "missing.json")
