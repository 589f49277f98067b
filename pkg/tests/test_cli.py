import json

import numpy as np
import pytest

from hyperchain import dumps_text, example_five, load, nonpermanence_rates, new_hyperchain, with_rates
from hyperchain.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    paths = {}
    for name, argv in [
        ("c6", ["gen", "--type", "cycle", "--n", "6"]),
        ("c3", ["gen", "--type", "cycle", "--n", "3"]),
        ("six", ["gen", "--type", "example-six"]),
        ("five", ["gen", "--type", "example-five", "--k3", "0.5", "--k5", "2"]),
    ]:
        p = tmp_path / f"{name}.hyperchain"
        assert main(argv + ["--out", str(p)]) == 0
        paths[name] = p
    paths["chain"] = tmp_path / "chain.hyperchain"
    paths["chain"].write_text("n 3\n1 2 1\n2 3 1\n")
    paths["loop"] = tmp_path / "loop.hyperchain"
    paths["loop"].write_text("n 1\n1 1 1\n")
    paths["split"] = tmp_path / "split.hyperchain"
    paths["split"].write_text("n 4\n1 2 1\n2 1 1\n3 4 1\n4 3 1\n2 3 1\n")
    h = new_hyperchain(3, [(1, 2), (2, 3), (3, 1), (1, 3)])
    paths["nonperm"] = tmp_path / "nonperm.hyperchain"
    paths["nonperm"].write_text(dumps_text(with_rates(h, nonpermanence_rates(h).rates)))
    capsys.readouterr()
    return paths


def test_analyze_six_cycle(capsys, files):
    code, out, _ = run(capsys, "analyze", files["c6"])
    assert code == 0
    doc = json.loads(out)
    assert doc["graph_profile"]["is_cycle_graph"] is True
    assert doc["equilibrium_set"]["classification"] == "Unique"
    np.testing.assert_allclose(doc["equilibrium_set"]["point"], np.full(6, 1 / 6))
    assert doc["stability_reports"][0]["classification"] == "Unstable"
    prov = doc["provenance"]
    assert len(prov["input_sha256"]) == 64 and prov["tool_version"] and "thresholds" in prov


def test_analyze_five_species(capsys, files):
    doc = json.loads(run(capsys, "analyze", files["five"])[1])
    np.testing.assert_allclose(doc["equilibrium_set"]["point"], [1 / 4, 1 / 4, 1 / 6, 1 / 4, 1 / 12], atol=1e-12)


def test_analyze_rooted_chain(capsys, files):
    code, out, _ = run(capsys, "analyze", files["chain"], "--permanence")
    doc = json.loads(out)
    assert code == 0
    assert doc["equilibrium_set"]["classification"] == "Empty"
    assert "rooted" in doc["warnings"]
    assert doc["permanence_verdict"]["outcome"] == "NotPermanent"


def test_analyze_text_format(capsys, files):
    code, out, _ = run(capsys, "analyze", files["c3"], "--format", "text")
    assert code == 0 and "Unique" in out


def test_simulate_blow_up(capsys, files, tmp_path):
    csv = tmp_path / "loop.csv"
    code, out, _ = run(capsys, "simulate", files["loop"], "--mode", "abs", "--x0", "1", "--out", csv)
    assert code == 0
    side = json.loads(out)
    assert side["termination"] == "BlowUp"
    assert abs(side["time_estimate"] - 1) < 0.05
    assert json.loads(csv.with_suffix(".json").read_text()) == side
    assert csv.read_text().startswith("t,x1\n")


def test_simulate_converges(capsys, files):
    code, out, _ = run(capsys, "simulate", files["c3"], "--x0", "0.6,0.3,0.1", "--t-end", "200")
    assert json.loads(out)["termination"] == "Converged"
    code, out, _ = run(capsys, "simulate", files["c3"], "--x0", "6 3 1", "--normalize", "--t-end", "200")
    assert json.loads(out)["termination"] == "Converged"


@pytest.mark.parametrize("x0", ["1,2", "0.5,0.5,0.5", "a,b,c"])
def test_simulate_bad_x0(capsys, files, x0):
    code, _, err = run(capsys, "simulate", files["c3"], "--x0", x0)
    assert code == 2
    assert err.startswith("error: usage:") and err.count("\n") == 1


def test_permanence_command(capsys, files):
    code, out, _ = run(capsys, "permanence", files["six"])
    doc = json.loads(out)
    assert code == 0 and doc["outcome"] == "LikelyPermanent"
    assert doc["parameters"]["delta"] == 1e-4
    doc = json.loads(run(capsys, "permanence", files["nonperm"])[1])
    assert doc["outcome"] == "NotPermanent"
    doc = json.loads(run(capsys, "permanence", files["split"])[1])
    assert doc["outcome"] == "NotPermanent" and doc["witness"]["kind"] == "not strongly connected"


def test_gen_outputs(capsys, files, tmp_path):
    assert load(files["c6"]).graph.edges == tuple((i, i % 6 + 1) for i in range(1, 7))
    six = load(files["six"])
    assert len(six.rated_edges()) == 10
    labels = {(t, h): r for t, h, r in six.rated_edges()}
    assert labels == {(1, 2): 1, (2, 1): 2, (2, 3): 3, (3, 4): 1, (4, 3): 1,
                      (4, 5): 3, (5, 6): 2, (6, 5): 1, (6, 2): 3, (5, 1): 1}
    a, b = tmp_path / "a", tmp_path / "b"
    for p in (a, b):
        assert main(["gen", "--type", "random", "--n", "5", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "gen", "--type", "hamiltonian-plus-chords", "--n", "4", "--format", "json")
    assert json.loads(out)["n"] == 4
    assert run(capsys, "gen", "--type", "cycle")[0] == 2


def test_error_paths(capsys, files, tmp_path):
    bad = tmp_path / "bad.hyperchain"
    bad.write_text("n 2\n1 2 1\n2 1 -3\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2 and err.startswith("error: parse: line 3:")
    code, _, err = run(capsys, "analyze", tmp_path / "missing")
    assert code != 0 and err.startswith("error:")
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and err.startswith("error: usage:")


def test_json_is_byte_identical(capsys, files):
    first = run(capsys, "analyze", files["five"], "--permanence", "--seed", "3")[1]
    second = run(capsys, "analyze", files["five"], "--permanence", "--seed", "3")[1]
    assert first == second
    keys = list(json.loads(first))
    assert keys == sorted(keys)


def test_audit_single_sample(capsys):
    code, out, _ = run(capsys, "audit", "--samples", "1", "--seed", "4", "--no-example-six")
    doc = json.loads(out)
    assert code == 0
    assert doc["evaluated"] == 1 and doc["violations"] == []
    assert set(doc["checks"]) == set("abcdefghi")


def test_audit_injected_violation_dumps(capsys, tmp_path):
    out = tmp_path / "audit.json"
    code, _, _ = run(capsys, "audit", "--samples", "2", "--n-max", "3", "--inject-violation", "d",
                     "--no-example-six", "--out", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["violations"]) == 1
    dump_dir = tmp_path / "audit-dumps"
    assert doc["dump_dir"] == str(dump_dir)
    manifest = json.loads((dump_dir / "manifest.json").read_text())
    (entry,) = manifest["violations"]
    assert entry["check"] == "d"
    assert load(dump_dir / entry["file"]).n == entry["n"]
