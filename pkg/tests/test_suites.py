import json

import pytest

from jumpinterp.report import jsonable
from jumpinterp.suites import SUITES, SuiteConfig, UsageError, replay, run_suite

FAST = {"jump-transfer": dict(trials=4, climb_steps=1), "interp-equivalence": dict(climb=3),
        "lepingle": dict(trials=6, refinements=2, climb=1)}


@pytest.mark.parametrize("name", sorted(SUITES))
def test_every_suite_runs_small(name):
    params = dict(FAST.get(name, {}))
    trials = params.pop("trials", 6)
    r = run_suite(SuiteConfig(name, params=params, trials=trials, seed=1))
    assert r.records and r.passed, r.failures


def test_workers_do_not_change_results():
    a = run_suite(SuiteConfig("interp-equivalence", params={"climb": 3}, trials=6, seed=3))
    b = run_suite(SuiteConfig("interp-equivalence", params={"climb": 3}, trials=6, seed=3, workers=2))
    assert json.dumps(jsonable(a.records)) == json.dumps(jsonable(b.records))


def test_instances_are_independent_of_ensemble_size():
    a = run_suite(SuiteConfig("markov", trials=3, seed=5))
    b = run_suite(SuiteConfig("markov", trials=9, seed=5))
    assert a.records == b.records[: len(a.records)]


def test_replay_reproduces_records():
    r = run_suite(SuiteConfig("variation-oracle", trials=12, tol=1e-30))
    assert r.failures
    fail = r.failures[0]
    payload = {"suite": r.suite, "params": r.params, "seed": r.seed, "index": fail["index"],
               "instance": fail["instance"]}
    payload = json.loads(json.dumps(payload))
    recs = replay(payload)
    orig = [x for x in r.records if x["instance"] == fail["index"]]
    assert [x["lhs"] for x in recs] == [x["lhs"] for x in orig]


def test_bad_parameters():
    with pytest.raises(UsageError):
        run_suite(SuiteConfig("nope"))
    with pytest.raises(UsageError):
        run_suite(SuiteConfig("markov", params={"zzz": 1}))
    with pytest.raises(UsageError):
        run_suite(SuiteConfig("markov", trials=0))
