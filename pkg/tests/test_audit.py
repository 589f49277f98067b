import json

import numpy as np
import pytest

from hyperchain import example_six, implication_audit, load, new_hyperchain, random_rates, unit_rates, with_rates
from hyperchain.audit import CHECKS, FAIL, PASS, VACUOUS, audit_system, draw_sample, report_json, summary_lines


@pytest.fixture(scope="module")
def injected(tmp_path_factory):
    report = implication_audit((2, 4), 6, seed=11, inject="e")
    d = tmp_path_factory.mktemp("dumps")
    report.write_dumps(str(d))
    return report, d


def test_small_audit_counts(injected):
    report, _ = injected
    assert len(report.results) == 7  # six samples plus Example six
    for k in CHECKS:
        assert sum(report.counts(k).values()) == 7
    assert [(r.index, k) for r, k in report.violations] == [(0, "e")]
    doc = json.loads(report_json(report))
    assert doc["violations"][0]["check"] == "e"
    assert summary_lines(report)[-1] == "violations: 1"


def test_example_six_sample(injected):
    report, _ = injected
    six = report.results[-1]
    assert six.label == "example-six"
    assert six.checks["c"].status == PASS
    assert six.checks["b"].status == VACUOUS and six.checks["h"].status == VACUOUS
    assert all(c.status != FAIL for c in six.checks.values())


def test_dump_reruns(injected):
    report, d = injected
    manifest = json.loads((d / "manifest.json").read_text())
    (entry,) = manifest["violations"]
    sys_ = load(d / entry["file"])
    label, again = draw_sample(tuple(manifest["n_range"]), entry["sample_seed"])
    assert label == entry["label"]
    np.testing.assert_array_equal(again.K, sys_.K)
    clean = audit_system(sys_, entry["sample_seed"], inject=None)
    assert clean["e"].status == PASS
    dirty = audit_system(sys_, entry["sample_seed"], inject="e")
    assert dirty["e"].status == FAIL


def test_rooted_graph_exercises_empty_branch():
    h = new_hyperchain(3, [(1, 2), (2, 3), (3, 2)])
    res = audit_system(with_rates(h, random_rates(h, 0)), seed=0)
    assert res["d"].status == PASS
    assert res["c"].status == VACUOUS
    assert all(r.status != FAIL for r in res.values())


def test_cycle_sample_exercises_a():
    from hyperchain import cycle_system

    res = audit_system(cycle_system(4, [1, 3, 0.2, 5]), seed=1)
    assert res["a"].status == PASS and res["b"].status == PASS and res["h"].status == PASS


def test_audit_is_deterministic():
    a = report_json(implication_audit((2, 3), 3, seed=5, include_example_six=False))
    b = report_json(implication_audit((2, 3), 3, seed=5, include_example_six=False))
    assert a == b


def test_bad_arguments():
    with pytest.raises(ValueError):
        implication_audit((3, 2), 1)
    with pytest.raises(ValueError):
        implication_audit((2, 3), 0)
    with pytest.raises(ValueError):
        implication_audit((2, 3), 1, inject="z")
