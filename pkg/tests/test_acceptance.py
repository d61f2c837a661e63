"""Acceptance criteria, one PASS/FAIL line each.

Run directly with ``python3 tests/test_acceptance.py`` or as part of pytest.
"""
import csv
import itertools
import warnings

import numpy as np

from powerbroker import (
    GridSpec,
    ModelError,
    Params,
    SimConfig,
    UnsupportedRegime,
    b_bar0,
    b_hat,
    build_commitment,
    build_nocommitment,
    dec_check,
    deviation_probe,
    grid_search,
    polarization,
    principal_ex_ante,
    simulate,
    solve_values,
    stage_nash,
    thresholds,
)
from powerbroker.cli import run
from powerbroker.commitment import dec_intercept, y_R_binding
from powerbroker.engine import FEAS_TOL
from powerbroker.nocommitment import b_check, unraveling_endorsement
from powerbroker.oracle import DEFAULT_PROBE

EXACT = 1e-12
GAIN_TOL = 1e-9
ENDPOINT_TOL = 1e-6


def draw_grim_valid(rng, n):
    out = []
    while len(out) < n:
        par = Params(rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.49), rng.uniform(0.01, 5.0),
                     rng.uniform(0.0, 0.4999))
        if par.grim_valid:
            out.append(par)
    return out


def test_1_embracing_exactness(verdict):
    par = Params(0.5, 0.25, 1, 0)
    auto = build_commitment(par)
    y_R = auto.states["PostR"].y_R
    w = solve_values(auto).w["P"]["PostR"]
    per_period = (1 - par.beta) * w
    ok = (abs(y_R - 3 / 7) <= EXACT and abs(w + 9 / 14) <= EXACT
          and abs(per_period + 9 / 28) <= EXACT)
    verdict(1, ok, f"y_R={y_R:.15f} (3/7), value per period={per_period:.15f} (-9/28), "
                   f"discounted={w:.15f} (-9/14)")


def test_2_bang_bang(verdict):
    par = Params(0.5, 0.25, 1, 0)
    cut = b_bar0(par)
    hi = build_nocommitment(par.replace(b=0.49)).regime
    lo = build_nocommitment(par.replace(b=0.48)).regime
    low = par.replace(b=0.48)
    res = grid_search(low, GridSpec(0.01, 0.01, "nocommitment"))
    sn = principal_ex_ante(stage_nash(low))
    ok = (abs(cut - 16 / 33) <= EXACT and hi == "nocommitment/CommitmentReplica"
          and lo == "nocommitment/StageNash" and res.value <= sn + FEAS_TOL)
    verdict(2, ok, f"b_bar0={cut:.15f}, b=0.49 -> {hi}, b=0.48 -> {lo}, "
                   f"oracle best {res.value:.12f} vs stage Nash {sn:.12f} "
                   f"({res.n_feasible} feasible)")


def test_3_identities(verdict):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for par in draw_grim_valid(rng, 1000):
        th = thresholds(par)
        worst = max(worst, abs(th.theta_bar - (dec_intercept(par) - th.psi * par.m)),
                    abs(y_R_binding(par, par.m, th) - (1 - th.theta_bar)))
    verdict(3, worst <= EXACT, f"max residual {worst:.3e} over 1000 draws")


LATTICE = list(itertools.product((0.2, 0.35, 0.5, 0.6, 0.7), (0.0, 0.1, 0.2, 0.3, 0.45),
                                 (0.1, 0.2, 0.3), (0.3, 1.0, 2.5)))


def test_4_certification(verdict):
    built = skipped = 0
    worst_gain = -np.inf
    failures = []
    for beta, theta, m, b in LATTICE:
        par = Params(beta, m, b, theta)
        for mode, build in (("commitment", build_commitment), ("nocommitment", build_nocommitment)):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    auto = build(par)
            except UnsupportedRegime:
                skipped += 1
                continue
            built += 1
            rep = dec_check(auto, mode=mode)
            probe = deviation_probe(auto, horizon=6, probe_grid=DEFAULT_PROBE)
            worst_gain = max(worst_gain, probe.max_gain)
            if not rep.certified or probe.max_gain > GAIN_TOL:
                failures.append((mode, par))
    verdict(4, not failures and built > 0,
            f"{built} automata certified, {skipped} outside characterised regions, "
            f"max probe gain {worst_gain:.3e}, failures {failures[:3]}")


def test_5_oracle_equivalence(verdict):
    rng = np.random.default_rng(5)
    grid = GridSpec(0.02, 0.005)
    bad = []
    worst = 0.0
    for par in draw_grim_valid(rng, 20):
        cf = principal_ex_ante(build_commitment(par))
        res = grid_search(par, grid)
        gap = cf - res.value
        worst = max(worst, gap * (1 - par.beta))
        if gap > (0.005 + 0.04) / (1 - par.beta) or gap < -FEAS_TOL:
            bad.append((par, gap))
    verdict(5, not bad, f"20 points, max per-period gap {worst:.4f} (bound 0.045), "
                        f"violations {len(bad)}")


def _argmax_near(par, target, step=0.005):
    grid = np.arange(0.0, 0.5, step)
    vals = np.array([principal_ex_ante(build_commitment(par.replace(theta=t))) for t in grid])
    top = grid[vals >= vals.max() - EXACT]
    return bool(np.any(np.abs(top - target) <= step + EXACT)), top


def test_6_polarization_and_welfare(verdict):
    step = 0.005
    par = Params(0.6, 0.2, 0.5, 0)
    tb = thresholds(par).theta_bar
    grid = np.arange(0.0, 0.5, step)
    pol = np.array([polarization(build_commitment(par.replace(theta=t))) for t in grid[grid <= tb]])
    monotone = bool(np.all(np.diff(pol) <= EXACT))
    near_a, top_a = _argmax_near(par, min(tb, 0.5), step)
    par_b = par.replace(b=0.3)
    tb_b = thresholds(par_b).theta_bar
    near_b, top_b = _argmax_near(par_b, tb_b, step)
    verdict(6, monotone and near_a and near_b,
            f"polarization non-increasing={monotone}; b=0.5 argmax {top_a.max():.3f} vs "
            f"{min(tb, 0.5):.4f}; b=0.3 argmax {top_b.max():.3f} vs {tb_b:.4f}")


ORDER = {"FullEmbrace": 0, "PartialEmbrace": 1, "Opportunistic": 2, "FirstBest": 2}


def test_7_region_map(verdict, tmp_path):
    out = tmp_path / "regions.csv"
    steps = 100
    code = run(["regions", "--m", "0.2", "--b", "2.5", "--beta-min", "0.05", "--beta-max", "0.7",
                "--theta-steps", str(steps), "--beta-steps", "14", "--out", str(out),
                "--no-timestamp"])
    rows = list(csv.DictReader(out.open()))
    step = 0.5 / steps
    problems, full_rows = [], 0
    for beta, grp in itertools.groupby(rows, key=lambda r: r["beta"]):
        grp = list(grp)
        labels = [r["regime"] for r in grp]
        ranks = [ORDER[x] for x in labels]
        if ranks != sorted(ranks):
            problems.append(f"beta={beta} out of order")
        seq = [k for k, _ in itertools.groupby(labels)]
        if seq != ["FullEmbrace", "PartialEmbrace", "Opportunistic"]:
            continue
        full_rows += 1
        th = thresholds(Params(float(beta), 0.2, 2.5, 0))
        first_partial = next(float(r["theta"]) for r in grp if r["regime"] == "PartialEmbrace")
        first_opp = next(float(r["theta"]) for r in grp if r["regime"] == "Opportunistic")
        if abs(first_partial - th.theta_underline) > step + EXACT:
            problems.append(f"beta={beta} lower boundary {first_partial} vs {th.theta_underline}")
        if abs(first_opp - th.theta_bar) > step + EXACT:
            problems.append(f"beta={beta} upper boundary {first_opp} vs {th.theta_bar}")
    verdict(7, code == 0 and full_rows > 0 and not problems,
            f"{len(rows)} cells, {full_rows} rows with all three regimes, problems {problems}")


def _pick_interior():
    """First (beta, m, theta) with theta_bar < theta and both rent cutoffs defined."""
    candidates = [(0.6, 0.2)] + [(be, m) for be in (0.2, 0.3, 0.4) for m in (0.2, 0.1, 0.3)]
    for beta, m in candidates:
        for theta in np.arange(0.05, 0.5, 0.05):
            try:
                bh = b_hat(beta, m, float(theta))
                bc = b_check(beta, m, float(theta), bh)
            except ModelError:
                continue
            if bc < bh:
                return beta, m, float(round(theta, 10)), bh, bc
    return None


def test_8_unraveling_continuity(verdict):
    picked = _pick_interior()
    if picked is None:
        verdict(8, False, "no parameters with a non-empty interior region found")
    beta, m, theta, bh, bc = picked
    s_hi = unraveling_endorsement(Params(beta, m, bh, theta))
    s_lo = unraveling_endorsement(Params(beta, m, bc, theta))
    bs = np.linspace(bc, bh, 22)[1:-1]
    autos = [build_nocommitment(Params(beta, m, float(b), theta)) for b in bs]
    s_R = np.array([a.states["PostR"].s for a in autos])
    vals = np.array([principal_ex_ante(a) for a in autos])
    ok = (abs(s_hi - m) <= ENDPOINT_TOL and abs(s_lo + m) <= ENDPOINT_TOL
          and bool(np.all(np.diff(s_R) > 0)) and bool(np.all(np.diff(vals) >= -EXACT)))
    verdict(8, ok, f"(beta={beta}, m={m}, theta={theta}) b_check={bc:.7f} b_hat={bh:.7f}; "
                   f"s_R*(b_hat)={s_hi:.9f} s_R*(b_check)={s_lo:.9f}; "
                   f"value {vals[0]:.4f} -> {vals[-1]:.4f} on 20 points")


def test_9_simulation(verdict):
    par = Params(0.5, 0.25, 1, 0)
    auto = build_commitment(par)
    tr = simulate(auto, config=SimConfig(200, 10_000, 42))
    issues = []
    for lab, stats in tr.leader_frequencies().items():
        p = 0.5 + auto.states[lab].s
        n = stats["visits"]
        if abs(stats["r_share"] - p) > 3 * np.sqrt(p * (1 - p) / n):
            issues.append(f"{lab} share")
    w = solve_values(auto).w
    for i in ("L", "R", "P"):
        vals = tr.discounted(i)
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        if abs(vals.mean() - w[i][auto.initial]) > 3 * se + EXACT:
            issues.append(f"value {i}")
    first = tr.first_r_lead()
    q = 0.5 - par.m
    for k in range(8):
        pk = (1 - q) ** k * q
        emp = np.mean(first == k)
        if abs(emp - pk) > 3 * np.sqrt(pk * (1 - pk) / len(first)):
            issues.append(f"first lead at {k}")
    verdict(9, not issues and tr.constant_sum_error() <= EXACT,
            f"10000 paths x 200 periods, seed 42; mean first R lead {first.mean():.3f} "
            f"(geometric mean {(1 - q) / q:.3f}); issues {issues}")


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q", "-s"]))
