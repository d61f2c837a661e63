import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerbroker import (
    ContractAutomaton,
    InvalidParameter,
    Params,
    StatePolicy,
    build_commitment,
    dec_check,
    selection_prob,
    solve_values,
    stage_nash,
    stage_utility,
    validate_params,
)
from powerbroker.commitment import alpha_grim

BASE = Params(0.5, 0.25, 1.0, 0.0)


def test_validate_params_examples():
    assert validate_params(0.5, 0.25, 1, 0).grim_valid
    assert not validate_params(0.9, 0.4, 1, 0.3).grim_valid
    with pytest.raises(InvalidParameter, match=r"m out of \(0,1/2\)"):
        validate_params(0.5, 0.6, 1, 0)


@pytest.mark.parametrize("raw", [(1.0, 0.2, 1, 0), (0.5, 0.0, 1, 0), (0.5, 0.2, 0, 0),
                                 (0.5, 0.2, 1, 0.5), (0.5, 0.2, 1, -0.1), (float("nan"), 0.2, 1, 0)])
def test_validate_params_rejects(raw):
    with pytest.raises(InvalidParameter):
        validate_params(*raw)


def test_grim_flag_follows_replace():
    par = Params(0.5, 0.25, 1, 0)
    assert par.grim_valid
    assert not par.replace(beta=0.9).grim_valid


def test_selection_prob():
    assert selection_prob(0.0) == 0.5
    assert selection_prob(0.25, 0.25) == 0.75
    assert selection_prob(-0.2, 0.2) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(InvalidParameter):
        selection_prob(0.3, 0.2)


def test_stage_utility_examples():
    par = Params(0.5, 0.25, 1.0, 0.3)
    assert stage_utility("P", 0.3, "L", par) == 0.0
    assert stage_utility("R", 1.0, "R", par) == 1.0
    assert stage_utility("L", 0.3, "R", par) == pytest.approx(-0.3)
    with pytest.raises(InvalidParameter):
        stage_utility("L", 1.2, "L", par)


def test_stage_nash_value():
    v = solve_values(stage_nash(BASE))
    assert v.w["P"]["StageNash"] == pytest.approx(-0.5, abs=1e-12)


def test_base_embracing_value():
    v = solve_values(build_commitment(BASE))
    # raw discounted sum; the per-period equivalent is -9/28
    assert v.w["P"]["PostR"] == pytest.approx(-9 / 14, abs=1e-12)
    assert (1 - BASE.beta) * v.w["P"]["PostR"] == pytest.approx(-9 / 28, abs=1e-12)


def test_base_dec_report():
    auto = build_commitment(BASE)
    rep = dec_check(auto)
    assert rep.certified
    assert rep.get("PostR", "R").binds
    v = solve_values(auto)
    slack = BASE.beta * (v.w["L"]["PostL"] - alpha_grim(BASE))
    assert rep.get("PostL", "L").value == pytest.approx(slack, abs=1e-12)
    assert slack > 0


def test_dec_check_nocommitment_override():
    rep = dec_check(build_commitment(BASE), mode="nocommitment", punishment_values={"P": -1.25})
    assert rep.get("PostR", "P").satisfied
    assert rep.get("PostR", "P").value == pytest.approx(-9 / 14 + 1.25, abs=1e-12)


def test_dec_check_commitment_skips_principal():
    rep = dec_check(build_commitment(BASE))
    assert all(r.player != "P" for r in rep.records)


def test_dec_check_stage_nash():
    rep = dec_check(stage_nash(BASE), mode="nocommitment")
    assert rep.certified and len(rep.records) == 3


def test_dec_check_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        dec_check(stage_nash(BASE), punishment_values={"Q": 0.0})
    with pytest.raises(InvalidParameter):
        dec_check(stage_nash(BASE), mode="sometimes")


def test_dec_check_tolerance_monotone():
    auto = build_commitment(BASE)
    st_ = dict(auto.states)
    st_["PostR"] = dataclasses.replace(st_["PostR"], y_R=st_["PostR"].y_R - 1e-6)
    bent = dataclasses.replace(auto, states=st_)
    assert not dec_check(bent, feas_tol=1e-9).certified
    assert dec_check(bent, feas_tol=1e-5).certified
    assert dec_check(bent, feas_tol=1e-3).certified


def test_json_roundtrip():
    auto = build_commitment(Params(0.6, 0.2, 0.5, 0.42))
    doc = json.loads(auto.to_json())
    assert set(doc) == {"params", "regime", "initial", "states", "leader_transitions",
                        "deviation_transitions"}
    assert set(doc["states"]["PostL"]) == {"s", "y_L", "y_R"}
    back = ContractAutomaton.from_json(auto.to_json())
    assert back.to_dict() == auto.to_dict()


def test_validate_catches_unreachable_and_incomplete():
    par = BASE
    states = {"A": StatePolicy(0.0, 0.0, 1.0), "B": StatePolicy(0.0, 0.0, 1.0)}
    lt = {"A": {"L": "A", "R": "A"}, "B": {"L": "B", "R": "B"}}
    dt = {"A": {"L": "A", "R": "A", "P": "A"}, "B": {"L": "B", "R": "B", "P": "B"}}
    with pytest.raises(InvalidParameter, match="unreachable"):
        ContractAutomaton(par, "commitment/x", "A", states, lt, dt).validate()
    dt["A"].pop("P")
    with pytest.raises(InvalidParameter, match="incomplete"):
        ContractAutomaton(par, "commitment/x", "A", states, lt, dt).validate()


def test_state_policy_ordering():
    with pytest.raises(InvalidParameter):
        StatePolicy(0.0, 0.6, 0.4).check(0.2)
    with pytest.raises(InvalidParameter):
        StatePolicy(0.3, 0.1, 0.4).check(0.2)


@st.composite
def random_automaton(draw):
    beta = draw(st.floats(0.05, 0.95))
    m = draw(st.floats(0.01, 0.49))
    b = draw(st.floats(0.01, 5.0))
    theta = draw(st.floats(0.0, 0.49))
    par = Params(beta, m, b, theta)
    n = draw(st.integers(1, 5))
    labels = [f"S{i}" for i in range(n)]
    states = {}
    for lab in labels:
        s = draw(st.floats(-m, m))
        y1, y2 = sorted((draw(st.floats(0, 1)), draw(st.floats(0, 1))))
        states[lab] = StatePolicy(s, y1, y2)
    pick = st.sampled_from(labels)
    lt = {lab: {"L": draw(pick), "R": draw(pick)} for lab in labels}
    # chain deviations through every state so all are reachable
    dt = {lab: {"L": labels[(i + 1) % n], "R": draw(pick), "P": draw(pick)}
          for i, lab in enumerate(labels)}
    return ContractAutomaton(par, "nocommitment/random", labels[0], states, lt, dt)


@settings(max_examples=150, deadline=None)
@given(random_automaton())
def test_bellman_residual_and_constant_sum(auto):
    par = auto.params
    v = solve_values(auto)
    assert v.residual(auto) <= 1e-10 * max(1.0, 1.0 / (1 - par.beta))
    target = (par.b - 1) / (1 - par.beta)
    for lab in auto.states:
        assert abs(v.w["L"][lab] + v.w["R"][lab] - target) <= 1e-9 * max(1.0, abs(target))
        for k in "LR":
            total = v.v["L"][(lab, k)] + v.v["R"][(lab, k)]
            assert abs(total - target) <= 1e-9 * max(1.0, abs(target))


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.49, 0.49))
def test_selection_prob_affine(s):
    assert selection_prob(s) - 0.5 == pytest.approx(s, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(random_automaton(), st.floats(1e-12, 1e-6), st.floats(1.0, 100.0))
def test_certification_monotone_in_tolerance(auto, tol, scale):
    if dec_check(auto, feas_tol=tol).certified:
        assert dec_check(auto, feas_tol=tol * scale).certified


def test_values_match_geometric_series():
    par = Params(0.7, 0.1, 2.0, 0.2)
    auto = stage_nash(par)
    v = solve_values(auto)
    q = 0.5 - par.m
    expected = {
        "L": ((1 - q) * par.b - q) / (1 - par.beta),
        "R": (q * par.b - (1 - q)) / (1 - par.beta),
        "P": -((1 - q) * par.theta + q * (1 - par.theta)) / (1 - par.beta),
    }
    for i, val in expected.items():
        assert v.w[i]["StageNash"] == pytest.approx(val, abs=1e-12)
    assert np.isclose(v.w["R"]["StageNash"], alpha_grim(par))
