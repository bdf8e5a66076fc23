import json
import random
from pathlib import Path

import pytest

from f2hom import io, spaces
from f2hom.ainfty import AInfAlgebra, massey_example, truncated_polynomial
from f2hom.cli import main, run_suite
from f2hom.covers import AbelianGroup, FinPropMatrix
from f2hom.hochschild import diagonal_bimodule
from f2hom.morse import greedy_matching
from f2hom.random_instances import coconnective_algebras, random_local_system, random_matrix, random_twisted_complex
from f2hom.simplicial import LocalSystem, twisted_cochain_complex
from f2hom.chain import cohomology_dims

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_cohomology_circle_text(capsys):
    code, out, _ = run(capsys, "cohomology", "--input", DATA / "circle.json")
    assert code == 0
    assert out.splitlines()[0] == "H^0: 1, H^1: 1"


def test_cohomology_rp2_json(capsys):
    code, out, _ = run(capsys, "cohomology", "--input", DATA / "rp2.json", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["dims"] == {"0": 1, "1": 1, "2": 1}
    assert len(doc["representatives"]["1"]) == 1


def test_cohomology_with_system(capsys):
    code, out, _ = run(capsys, "cohomology", "--input", DATA / "rp2.json", "--system", DATA / "rp2_group_ring.json")
    assert code == 0 and out.startswith("H^0: 1, H^1: 0, H^2: 1")
    code, out, _ = run(capsys, "cohomology", "--input", DATA / "circle.json", "--system", DATA / "circle_unipotent.json")
    assert code == 0 and out.startswith("H^0: 1, H^1: 1")


def test_malformed_json_reports_position(tmp_path, capsys):
    p = write(tmp_path, "bad.json", '{"v": 1,\n "vertices": 3,\n "simplices": [[0, 1]')
    code, out, err = run(capsys, "cohomology", "--input", p)
    assert code == 2 and out == ""
    assert "line 3" in err and "column" in err


def test_missing_version_and_file(tmp_path, capsys):
    p = write(tmp_path, "nov.json", {"vertices": 2, "simplices": [[0, 1]]})
    code, _, err = run(capsys, "cohomology", "--input", p)
    assert code == 2 and '"v": 1' in err
    code, _, err = run(capsys, "cohomology", "--input", tmp_path / "missing.json")
    assert code == 2


def test_invalid_system_is_input_error(tmp_path, capsys):
    k = write(tmp_path, "tri.json", {"v": 1, "vertices": 3, "simplices": [[0, 1, 2]]})
    s = write(tmp_path, "sys.json", {"v": 1, "fibre_dims": {"0": 2},
                                     "edges": [{"from": 0, "to": 1, "matrix": [[0, 1], [1, 0]]}]})
    code, _, err = run(capsys, "cohomology", "--input", k, "--system", s)
    assert code == 2 and "flat" in err


def test_unknown_suite_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["lemma-suite", "nope"])
    assert exc.value.code == 2


def test_minimal_model_interval_is_ground_field(capsys, tmp_path):
    out_file = tmp_path / "model.json"
    code, out, _ = run(capsys, "minimal-model", "--input", DATA / "interval_dga.json", "--json", "--out", out_file)
    assert code == 0
    doc = json.loads(out)
    alg = io.algebra_from_json(doc["algebra"])
    assert alg.dim == 1 and alg.degrees == (0,) and alg.max_arity() == 2
    assert doc["relations"]["ok"] and doc["quasi_isomorphism"]
    assert json.loads(out_file.read_text()) == doc["algebra"]


def test_minimal_model_zero_differential_echoes_product(tmp_path, capsys):
    a = truncated_polynomial(3, -1)
    p = write(tmp_path, "poly.json", io.algebra_to_json(a))
    code, out, _ = run(capsys, "minimal-model", "--input", p, "--json")
    assert code == 0
    m = io.algebra_from_json(json.loads(out)["algebra"])
    rename = {f"[{l}]": l for l in a.labels}
    assert m.max_arity() == 2
    got = {tuple(rename[x] for x in i): sorted(rename[o] for o in outs) for _, i, outs in m.entries()}
    want = {tuple(i): sorted(o) for _, i, o in a.entries()}
    assert got == want


def test_minimal_model_massey_has_triple_product(capsys):
    code, out, _ = run(capsys, "minimal-model", "--input", DATA / "massey_dga.json", "--json")
    assert code == 0
    doc = json.loads(out)
    arity3 = [b for b in doc["algebra"]["ops"] if b["arity"] == 3]
    assert arity3 and arity3[0]["entries"]
    assert doc["higher_arities"] == [3]


@pytest.mark.parametrize("bad,needle", [
    ({"ops": [{"arity": 1, "entries": [{"in": ["x"], "out": "y"}]},
              {"arity": 2, "entries": [{"in": ["x", "x"], "out": "x"}]}],
      "degrees": {"x": 0, "y": 1}}, "Leibniz"),
    ({"ops": [{"arity": 2, "entries": [{"in": ["x", "x"], "out": "y"}, {"in": ["y", "x"], "out": "z"}]}],
      "degrees": {"x": 0, "y": 0, "z": 0}}, "associativity"),
    ({"ops": [{"arity": 3, "entries": []}], "degrees": {"x": 0}}, "arity 1 and 2"),
])
def test_minimal_model_rejects_invalid_dga(tmp_path, capsys, bad, needle):
    p = write(tmp_path, "bad.json", {"v": 1, **bad})
    code, _, err = run(capsys, "minimal-model", "--input", p)
    assert code == 2 and needle in err


def test_lemma_suite_text_and_seed(capsys):
    code, out, _ = run(capsys, "lemma-suite", "finprop", "--seed", 11, "--count", 3)
    assert code == 0
    assert "seed 11" in out and "Mersenne Twister" in out
    assert out.count("[pass]") == 3


@pytest.mark.parametrize("suite,seed,count", [("filtration", 1, 100), ("adjunction", 7, 10), ("coconnective", 3, 20)])
def test_documented_suite_runs(suite, seed, count):
    r = run_suite(suite, seed, count)
    assert r["ok"] and r["passed"] == count


def test_coconnective_suite_produces_negative_witnesses():
    r = run_suite("coconnective", 3, 20)
    for x in r["instances"]:
        assert x["detail"]["witness_degree"] == -x["detail"]["length"] < 0


@pytest.mark.parametrize("suite", ["morse", "hochschild-stab", "finprop"])
def test_other_suites_pass(suite):
    assert run_suite(suite, 2, 10)["ok"]


def test_failed_instance_exits_1(monkeypatch, capsys):
    from f2hom import cli

    monkeypatch.setitem(cli.SUITE_FUNCS, "finprop", lambda rng, cap: (False, {}))
    code, out, _ = run(capsys, "lemma-suite", "finprop", "--count", 2)
    assert code == 1 and "[FAIL]" in out


def test_suite_instance_replay():
    r = run_suite("adjunction", 5, 4)
    from f2hom.cli import SUITE_FUNCS

    x = r["instances"][2]
    ok, detail = SUITE_FUNCS["adjunction"](random.Random(x["seed"]), 5)
    assert ok == x["ok"] and detail == x["detail"]


# ---------------------------------------------------------------------------
# JSON round trips


def test_complex_and_system_round_trip():
    rng = random.Random(3)
    for name in ("circle", "rp2", "torus"):
        k = spaces.standard_spaces()[name]
        k2 = io.complex_from_json(io.complex_to_json(k))
        assert k2 == k
        e = random_local_system(rng, k, 2, gauge=False)
        e2 = io.system_from_json(io.system_to_json(e), k2)
        assert cohomology_dims(twisted_cochain_complex(k2, e2)) == cohomology_dims(twisted_cochain_complex(k, e))


def test_system_edge_reversed_is_inverted():
    k = spaces.circle()
    m = [[1, 1], [0, 1]]
    fwd = io.system_from_json({"v": 1, "fibre_dims": {"0": 2}, "edges": [{"from": 1, "to": 2, "matrix": m}]}, k)
    rev = io.system_from_json({"v": 1, "fibre_dims": {"0": 2}, "edges": [{"from": 2, "to": 1, "matrix": m}]}, k)
    assert fwd.transport(1, 2).f(0) == rev.transport(2, 1).f(0)


def test_algebra_round_trip_sums_repeated_entries():
    a = AInfAlgebra.from_labels({"1": 0, "x": 0, "y": 0}, {2: {("1", "1"): "1", ("x", "x"): ["x", "y"]}})
    doc = io.algebra_to_json(a)
    assert sum(len(b["entries"]) for b in doc["ops"]) == 3
    assert io.algebra_from_json(doc).same_structure(a)
    # two entries with the same input cancel over F2
    doc["ops"][0]["entries"].append({"in": ["x", "x"], "out": "y"})
    assert io.algebra_from_json(doc).op(2, (1, 1)) == 0b010


def test_dga_round_trip():
    a = massey_example()
    b = io.dga_from_json(io.dga_to_json(a))
    assert b.labels == a.labels and b.d == a.d and b.product == a.product and b.unit == a.unit


def test_bimodule_round_trip():
    b = diagonal_bimodule(truncated_polynomial(2, -1))
    b2 = io.bimodule_from_json(io.bimodule_to_json(b))
    assert b2.labels == b.labels and b2.ops == b.ops


def test_twisted_round_trip():
    s = coconnective_algebras()["u3"]
    t = random_twisted_complex(random.Random(4), s, 2)
    t2 = io.twisted_from_json(io.twisted_to_json(t))
    assert t2.dims == t.dims and t2.deltas == t.deltas


def test_twisted_rejects_bad_shift():
    doc = io.twisted_to_json(random_twisted_complex(random.Random(4), coconnective_algebras()["u2"], 1))
    doc["summands"][1]["shift"] = 5
    with pytest.raises(io.SchemaError):
        io.twisted_from_json(doc)


def test_matching_ids_and_vertex_lists():
    k = spaces.rp2()
    m = greedy_matching(k, random.Random(1))
    doc = io.matching_to_json(m)
    assert set(io.matching_from_json(doc, k).pairs) == set(m.pairs)
    as_lists = {"v": 1, "pairs": [[list(c), list(f)] for c, f in m.pairs]}
    assert set(io.matching_from_json(as_lists, k).pairs) == set(m.pairs)
    with pytest.raises(io.SchemaError):
        io.matching_from_json({"v": 1, "pairs": [[[0, 1, 3], [0, 1]]]}, k)


def test_finprop_round_trip():
    g = AbelianGroup(1, (2,))
    rng = random.Random(2)
    a = FinPropMatrix(g, 2, 3, {(1, 0): random_matrix(rng, 2, 3), (-2, 1): random_matrix(rng, 2, 3)})
    assert io.finprop_from_json(io.finprop_to_json(a)) == a


def test_cover_from_json():
    k = spaces.circle()
    c = io.cover_from_json({"v": 1, "rep": {"e1_2": [1, 0]}}, k)
    assert c.degree == 2 and c.total.n == 6


def test_trivial_system_matches_default():
    k = spaces.torus()
    e = io.system_from_json(io.trivial_system_json(), k)
    assert cohomology_dims(twisted_cochain_complex(k, e)) == cohomology_dims(
        twisted_cochain_complex(k, LocalSystem.trivial(k)))
