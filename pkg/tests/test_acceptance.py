"""Acceptance gate: one test per criterion, one PASS/FAIL line per criterion.

Every individual assertion is printed with measured and expected values; the
per-criterion verdict lines are repeated in the pytest terminal summary.
"""

import pytest

from fittsim import checks
from fittsim.runner import run_scenario
from fittsim.scenario import BUILTINS, load_scenario

SEED = 1
VERDICTS = {}
_RUNS = {}


def run(name, **kw):
    key = (name, tuple(sorted(kw.items())))
    if key not in _RUNS:
        _RUNS[key] = run_scenario(load_scenario(name, seed=SEED, **kw))
    return _RUNS[key]


def verdict(number, title, results):
    ok = bool(results) and all(r.passed for r in results)
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
    VERDICTS[number] = (line, [r.line() for r in results])
    print(line)
    for r in results:
        print("    " + r.line())
    failed = [r.line() for r in results if not r.passed]
    assert ok, "\n".join(failed) or "no assertions ran"


def test_criterion_1_fake_attack_suppression():
    r = run("fake_attack")
    verdict(1, "fake-attack suppression", [checks.check_wall_time(r)] + checks.check_fake_attack(r))


def test_criterion_2_valid_attack_reinforcement():
    r = run("valid_attack")
    verdict(2, "valid-attack reinforcement",
            [checks.check_wall_time(r)] + checks.check_valid_attack(r))


def test_criterion_3_mixed_attack():
    r = run("mixed_attack")
    verdict(3, "mixed attack", [checks.check_wall_time(r)] + checks.check_mixed_attack(r))


def test_criterion_4_i1_resilience():
    runs = {(cache, u): run("i1_resilience_cache" if cache else "i1_resilience_nocache",
                            universe=u)
            for cache in (False, True) for u in (500, 1000)}
    verdict(4, "I-1 resilience ordinal checks",
            checks.check_i1_resilience(runs) + [checks.check_wall_time(r) for r in runs.values()])


def test_criterion_5_multi_prefix_independence():
    both = run("two_prefix")
    p_only = run("two_prefix", attack_p2=False)
    p2_only = run("two_prefix", attack_p=False)
    verdict(5, "multi-prefix independence",
            [checks.check_wall_time(both)] + checks.check_two_prefix(both, p_only, p2_only))


def test_criterion_6_throttling_granularity():
    r = run("granularity")
    base = run("granularity", attack=False)
    verdict(6, "throttling granularity",
            [checks.check_wall_time(r)] + checks.check_granularity(r, base))


def test_criterion_7_property_suites():
    verdict(7, "scenario-free property suites", checks.property_checks())


def test_criterion_8_determinism():
    results = []
    for name in BUILTINS:
        first = run(name)
        results += checks.check_determinism(first.config, first)
    verdict(8, "determinism", results)
