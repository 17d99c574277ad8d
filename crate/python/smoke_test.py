#!/usr/bin/env python3
"""Smoke test of the critwalk_py extension module.

Builds the cdylib with cargo, loads it under its Python module name and
exercises the main types and operations end to end. Run from anywhere:

    python3 python/smoke_test.py [--release]
"""
import argparse
import math
import os
import shutil
import subprocess
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "critwalk-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=REPO, check=True)
    built = os.path.join(REPO, "target", profile, "libcritwalk_py.so")
    stage = tempfile.mkdtemp(prefix="critwalk-py-")
    shutil.copy(built, os.path.join(stage, "critwalk_py.so"))
    sys.path.insert(0, stage)
    import critwalk_py

    return critwalk_py


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--release", action="store_true")
    cw = build_and_import(parser.parse_args().release)

    # deterministic streams and checkpointing
    s1, s2 = cw.RngStream(7, 0), cw.RngStream(7, 0)
    assert [s1.uniform() for _ in range(100)] == [s2.uniform() for _ in range(100)]
    token = s1.state_token()
    assert len(token) == 64
    s3 = cw.RngStream.from_state_token(token)
    assert [s1.uniform() for _ in range(10)] == [s3.uniform() for _ in range(10)]

    # samplers
    s = cw.RngStream(1, 0)
    assert s.binomial(0, 0.5) == 0
    assert s.binomial(7, 1.0) == 7
    draws = [s.cut_gamma(2.0) for _ in range(20000)]
    assert all(0.0 <= x <= 2.0 for x in draws)
    approx(sum(draws) / len(draws), 2.0 - 4.0 * math.exp(-2.0), 0.03)
    pts = s.poisson_process(1.0, 5.0)
    assert pts == sorted(pts) and all(0.0 <= p < 5.0 for p in pts)

    # model formulas
    approx(cw.er_edge_prob(10**6), 1e-6, 1e-18)
    approx(cw.regular_percolation_prob(1000, 3), 0.5, 1e-15)

    # explorations conserve their unit counts
    s = cw.RngStream(2, 0)
    p = cw.er_explore(200, s)
    assert sum(p.sizes) == 200 and p.steps == 200
    assert p.n_components() == len(p.excursion_bounds) - 1
    p = cw.regular_explore(100, 3, s)
    assert sum(p.sizes) == 100 and p.steps == 150
    p, discovered = cw.intersection_explore(100, 1.0, 1.0, s)
    assert sum(p.sizes) == 100 and discovered <= 100
    p = cw.quantum_reduced_explore(100, 2.0, 1.86, s)
    assert sum(p.sizes) == 100

    # critical curve
    point = cw.solve_critical_lambda(2.0)
    assert len(point["lambdas"]) == 1
    lam = point["lambdas"][0]
    approx(cw.critical_residual(2.0, lam), 0.0, 1e-12)
    assert cw.solve_critical_lambda(0.5)["lambdas"] == []

    # walk estimators and the Chernoff bound
    approx(cw.chernoff_bound(100, 0.5, 0.0), 1.0, 0.0)
    approx(cw.chernoff_bound(100, 0.5, 15.0), math.exp(-225.0 / 110.0), 1e-12)
    s = cw.RngStream(3, 0)
    est = cw.stay_positive_estimate("rademacher", 1, 50000, s)
    assert est["ci_lo"] < 0.5 < est["ci_hi"]
    est = cw.ballot_estimate("rademacher", 2, 1, 100, s)
    assert est["unreachable"] and est["phat"] == 0.0

    # exhaustive oracle: the pinned 1/64 case
    law = cw.enumerate_er_cmax(4, 0.5)
    approx(law[0], 1.0 / 64.0, 1e-15)
    approx(sum(law), 1.0, 1e-12)

    # simplicity frequency vs exp(-2)
    hits, trials = cw.simple_frequency(200, 3, 20000, 5)
    approx(hits / trials, math.exp(-2.0), 0.02)

    # tail experiment round trip with a fit on a 5-point grid
    out = cw.run_tail(
        "er", 1000, 2000, [1.0, 1.25, 1.5, 1.75, 2.0], master_seed=9, workers=2
    )
    assert len(out["cmax"]) == 2000
    assert len(out["rows"]) == 5
    phats = [r["phat"] for r in out["rows"]]
    assert phats == sorted(phats, reverse=True), "lower tail must shrink in A"
    assert out["fits"][0]["direction"] == "lower"

    # determinism across worker counts
    again = cw.run_tail(
        "er", 1000, 2000, [1.0, 1.25, 1.5, 1.75, 2.0], master_seed=9, workers=1
    )
    assert out["cmax"] == again["cmax"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
