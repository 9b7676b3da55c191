"""Acceptance criteria, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL ...`` line that the pytest
terminal summary prints, and the module can also be run directly with
``python tests/test_acceptance.py``. Every criterion is checked at its
stated tolerance; a failing criterion fails its test.
"""
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings

sys.path.insert(0, str(Path(__file__).parent))

import conftest
from oracles import brute_force_score, scoring_window
from test_detectors import (check_hysteresis, check_safe_gate, check_second_disjunct,
                            run_trace_pair, stream_cases)

from fuhst.aggregation import AlertRecord
from fuhst.detectors import HSTEnsemble, hst_score
from fuhst.harness import ScenarioConfig, preset, run_scenario
from fuhst.harness.config import split_nodes
from fuhst.metrics import ConfusionCounts, f1
from fuhst.sdn import DomainApp, assembled_vectors, exchange_relays, ingest_alerts
from fuhst.topology import generate_sbm, neighbors

SEEDS = range(10)
ATTACKS = ("noise", "sign_flip", "ipm")


def record(n, passed, detail):
    line = f"CRITERION {n}: {'PASS' if passed else 'FAIL'} {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def detection_totals(cfgs):
    """Pooled confusion and the mean of per-run per-round FBR."""
    total, fbrs = ConfusionCounts(), []
    for cfg in cfgs:
        det = run_scenario(cfg).detection
        total = total + ConfusionCounts(**det["confusion"])
        fbrs.append(det["fbr"])
    return total, float(np.mean(fbrs))


# ------------------------------------------------------------ exact oracles

def test_criterion_1_trace_equivalence():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(1000):
        try:
            run_trace_pair(seed)
        except AssertionError:
            mismatches += 1
    dt = time.perf_counter() - t0
    ok = record(1, mismatches == 0 and dt < 5.0,
                f"trace equivalence: {mismatches} mismatching fixtures of 1000 in {dt:.2f}s (limit 5s)")
    assert ok


def test_criterion_2_hst_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    wrong = 0
    for case in range(100):
        h = 1 + case % 2
        e = HSTEnsemble(3, n_trees=1, depth=h, window=4, seed=case)
        pts = [rng.random(3) for _ in range(rng.integers(0, 12))]
        for p in pts:
            e.train(p)
        x = rng.random(3)
        wrong += hst_score(e, x) != brute_force_score(e, scoring_window(pts, 4), x)
    dt = time.perf_counter() - t0
    ok = record(2, wrong == 0 and dt < 1.0,
                f"HST brute-force oracle: {wrong} mismatches of 100 in {dt:.2f}s (limit 1s)")
    assert ok


def test_criterion_3_hysteresis_invariants():
    cases = 10_000
    failures = {}
    t0 = time.perf_counter()
    for name, check in (("reset below low threshold", check_hysteresis),
                        ("second-disjunct guard", check_second_disjunct),
                        ("safe-update gate at p_u=0", check_safe_gate)):
        prop = settings(max_examples=cases, database=None)(given(stream_cases)(check))
        try:
            prop()
        except AssertionError as exc:
            failures[name] = str(exc).splitlines()[0] if str(exc) else "violation"
    dt = time.perf_counter() - t0
    ok = record(3, not failures,
                f"hysteresis properties over {cases} cases each: "
                f"{'violations in ' + ', '.join(failures) if failures else 'zero violations'} ({dt:.1f}s)")
    assert ok


def test_criterion_4_relay_completeness():
    violations = 0
    for seed in range(100):
        r = random.Random(seed)
        sizes = [r.randint(3, 12) for _ in range(3)]
        g = generate_sbm(sizes, r.uniform(0.2, 0.8), r.uniform(0.02, 0.3), seed=seed)
        alerts = [(i, j) for i in range(g.n_nodes) for j in sorted(neighbors(g, i))]
        # a unique weight per alert lets every message be traced to one vector
        weight = {a: (k + 1) / (len(alerts) + 1) for k, a in enumerate(alerts)}
        apps = [DomainApp(d, g) for d in range(g.n_domains)]
        for app in apps:
            ingest_alerts(app, [AlertRecord(i, j, 1, weight[(i, j)]) for (i, j) in alerts
                                if g.domain_of[i] == app.domain])
        stats = exchange_relays(apps, 1)
        cross = [a for a in alerts if g.domain_of[a[0]] != g.domain_of[a[1]]]
        violations += not (stats["sent"] == stats["received"] == len(cross))
        placed = {}
        for app in apps:
            for j, ws in assembled_vectors(app, 1).items():
                for w in ws:
                    placed.setdefault(w, []).append(j)
        for (i, j) in cross:
            violations += placed.get(weight[(i, j)]) != [j]
    ok = record(4, violations == 0, f"relay completeness on 100 3-domain SBMs: {violations} violations")
    assert ok


# ------------------------------------------------------- directional trends

def _detection_cfg(n, attack, seed, detector):
    return ScenarioConfig(nodes_per_domain=[n], malicious=3, attack=attack, placement="random",
                          detector=detector, mitigation="mit", seed=seed)


@pytest.mark.slow
def test_criterion_5_detection_trend():
    t0 = time.perf_counter()
    res = {}
    for det in ("fuhst", "hst"):
        c, fbr = detection_totals(_detection_cfg(20, a, s, det) for a in ATTACKS for s in SEEDS)
        res[det] = (f1(c), fbr)
    dt = time.perf_counter() - t0
    (fu_f1, fu_fbr), (h_f1, h_fbr) = res["fuhst"], res["hst"]
    ok = record(5, fu_f1 >= h_f1 and fu_fbr <= 0.15 and dt < 120,
                f"N=20 detection: F1 FU-HST {fu_f1:.3f} vs HST {h_f1:.3f}; "
                f"FBR FU-HST {fu_fbr:.3f} (limit 0.15), HST {h_fbr:.3f}; {dt:.0f}s (limit 120s)")
    assert ok


@pytest.mark.slow
def test_criterion_6_scalability_trend():
    t0 = time.perf_counter()
    scores = {}
    for det in ("fuhst", "hst"):
        for n in (20, 60, 100):
            c, _ = detection_totals(_detection_cfg(n, a, s, det) for a in ATTACKS for s in range(3))
            scores[det, n] = f1(c)
    dt = time.perf_counter() - t0
    drop = {d: scores[d, 20] - scores[d, 100] for d in ("fuhst", "hst")}
    table = ", ".join(f"{d}@{n}={scores[d, n]:.3f}" for d in ("fuhst", "hst") for n in (20, 60, 100))
    ok = record(6, drop["fuhst"] <= drop["hst"] and dt < 300,
                f"F1 drop N=20 to N=100: FU-HST {drop['fuhst']:.3f} vs HST {drop['hst']:.3f} "
                f"({table}); {dt:.0f}s (limit 300s)")
    assert ok


@pytest.mark.slow
def test_criterion_7_s5_recovery():
    t0 = time.perf_counter()
    acc = {m: [] for m in ("na", "mit", "ora")}
    for seed in SEEDS:
        for m in acc:
            acc[m].append(run_scenario(preset("s5", mitigation=m, seed=seed)).final_accuracy)
    dt = time.perf_counter() - t0
    na, mit, ora = (float(np.mean(acc[m])) for m in ("na", "mit", "ora"))
    ok = record(7, mit - na >= 0.20 and abs(ora - mit) <= 0.10 and dt < 300,
                f"S5 final accuracy NA {na:.3f}, MIT {mit:.3f}, ORA {ora:.3f}; "
                f"MIT-NA {mit - na:+.3f} (needs >= 0.20), |ORA-MIT| {abs(ora - mit):.3f} "
                f"(limit 0.10); {dt:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_8_non_disruption():
    diffs = []
    for seed in SEEDS:
        mit = run_scenario(preset("s1", mitigation="mit", seed=seed)).snapshots["R20"]["mean"]
        na = run_scenario(preset("s1", mitigation="na", seed=seed)).snapshots["R20"]["mean"]
        diffs.append(abs(mit - na))
    worst = max(diffs)
    ok = record(8, worst <= 0.05, f"noise M=3 |acc(MIT)-acc(NA)| at R20: max {worst:.4f} "
                                  f"over 10 seeds (limit 0.05)")
    assert ok


def _overhead(n):
    cfg = ScenarioConfig(nodes_per_domain=split_nodes(n, 3), p2=0.15, attack="sign_flip",
                         malicious=n // 10, placement="random", learner={"pad_to": 10_000},
                         rounds=5, seed=0)
    return run_scenario(cfg).overhead


@pytest.mark.slow
def test_criterion_9_overhead():
    t0 = time.perf_counter()
    o60 = _overhead(60)
    o120 = _overhead(120)
    dt = time.perf_counter() - t0
    ratio = o60["bytes_ratio"]
    per_dom = o60["detect_time_per_domain_s"]
    scale = o120["detect_time_per_domain_s"] / per_dom
    ok = record(9, ratio <= 1e-3 and per_dom <= 0.010 and scale <= 2.5 and dt < 300,
                f"N=60 D=3: detection/model bytes {ratio:.5f} (limit 0.001), per-domain detect "
                f"{per_dom * 1e3:.2f} ms (limit 10 ms), doubling N scales time x{scale:.2f} "
                f"(limit 2.5); {dt:.0f}s")
    assert ok


def test_criterion_10_determinism(tmp_path):
    a = run_scenario(preset("s7", seed=3)).to_dict(timings=False)
    b = run_scenario(preset("s7", seed=3)).to_dict(timings=False)
    ok = record(10, a == b, f"preset s7 run.json without timings identical across two runs: {a == b}")
    assert ok


if __name__ == "__main__":
    import tempfile
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(Path(tempfile.mkdtemp())) if "tmp_path" in fn.__code__.co_varnames else fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
