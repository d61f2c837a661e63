"""Primitive types, stage-game arithmetic, Bellman values and enforcement checks.

All continuation values are raw discounted sums, sum_t beta**t * u_t, never
normalised by (1 - beta).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PLAYERS = ("L", "R", "P")
AGENTS = ("L", "R")
BLISS = {"L": 0.0, "R": 1.0}

FEAS_TOL = 1e-9
BIND_TOL = 1e-9


class ModelError(ValueError):
    """Base class for invalid inputs to the delegation model."""


class InvalidParameter(ModelError):
    pass


class UnsupportedRegime(ModelError):
    """The requested construction is not characterised for these parameters."""

    label = "Unsupported"


@dataclass(frozen=True)
class Params:
    beta: float
    m: float
    b: float
    theta: float

    def __post_init__(self):
        for name in ("beta", "m", "b", "theta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating)) or not math.isfinite(v):
                raise InvalidParameter(f"{name} must be a finite number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not 0.0 < self.beta < 1.0:
            raise InvalidParameter(f"beta out of (0,1): {self.beta}")
        if not 0.0 < self.m < 0.5:
            raise InvalidParameter(f"m out of (0,1/2): {self.m}")
        if not self.b > 0.0:
            raise InvalidParameter(f"b out of (0,inf): {self.b}")
        if not 0.0 <= self.theta < 0.5:
            raise InvalidParameter(f"theta out of [0,1/2): {self.theta}")

    @property
    def grim_valid(self) -> bool:
        # grim trigger is the agents' worst punishment iff 1 - beta >= 2 m beta
        return 1.0 - self.beta >= 2.0 * self.m * self.beta

    def bliss(self, player: str) -> float:
        return self.theta if player == "P" else BLISS[player]

    def replace(self, **kw) -> "Params":
        d = self.to_dict()
        d.update(kw)
        return Params(**d)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "m": self.m, "b": self.b, "theta": self.theta}


def validate_params(beta, m, b, theta) -> Params:
    return Params(beta, m, b, theta)


def selection_prob(s: float, m: float | None = None) -> float:
    """Probability that R leads under endorsement ``s``."""
    if m is not None and not -m - 1e-15 <= s <= m + 1e-15:
        raise InvalidParameter(f"endorsement {s} outside [-{m}, {m}]")
    if not -0.5 < s < 0.5:
        raise InvalidParameter(f"endorsement {s} gives a degenerate coin")
    return 0.5 + s


def stage_utility(player: str, y: float, leader: str, params: Params) -> float:
    if not 0.0 <= y <= 1.0:
        raise InvalidParameter(f"policy {y} outside [0,1]")
    u = -abs(y - params.bliss(player))
    if player == leader:
        u += params.b
    return u


@dataclass(frozen=True)
class StatePolicy:
    s: float
    y_L: float
    y_R: float

    def y(self, leader: str) -> float:
        return self.y_L if leader == "L" else self.y_R

    def check(self, m: float, tol: float = 1e-12) -> None:
        if not -m - tol <= self.s <= m + tol:
            raise InvalidParameter(f"endorsement {self.s} outside [-m, m]")
        if not (-tol <= self.y_L <= self.y_R + tol and self.y_R <= 1 + tol):
            raise InvalidParameter(
                f"policies must satisfy 0 <= y_L <= y_R <= 1, got {self.y_L}, {self.y_R}")


@dataclass
class ContractAutomaton:
    """Finite-state contract.

    ``leader_transitions[state][k]`` is the next state after agent ``k`` leads
    and complies. ``deviation_transitions[state][i]`` is the state entered
    after player ``i`` deviates. An agent whose deviation goes unpunished
    maps to his on-path successor; in commitment mode the principal maps to
    the state itself.
    """

    params: Params
    regime: str
    initial: str
    states: dict[str, StatePolicy]
    leader_transitions: dict[str, dict[str, str]]
    deviation_transitions: dict[str, dict[str, str]]
    notes: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return self.regime.split("/", 1)[0]

    @property
    def labels(self) -> list[str]:
        return list(self.states)

    def validate(self) -> None:
        labels = set(self.states)
        if self.initial not in labels:
            raise InvalidParameter(f"initial state {self.initial!r} unknown")
        for lab, pol in self.states.items():
            pol.check(self.params.m)
            lt = self.leader_transitions.get(lab, {})
            dt = self.deviation_transitions.get(lab, {})
            if set(lt) != set(AGENTS) or not set(lt.values()) <= labels:
                raise InvalidParameter(f"leader transitions at {lab!r} incomplete")
            if set(dt) != set(PLAYERS) or not set(dt.values()) <= labels:
                raise InvalidParameter(f"deviation transitions at {lab!r} incomplete")
        seen, todo = {self.initial}, [self.initial]
        while todo:
            lab = todo.pop()
            for nxt in (*self.leader_transitions[lab].values(),
                        *self.deviation_transitions[lab].values()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        if seen != labels:
            raise InvalidParameter(f"unreachable states: {sorted(labels - seen)}")

    def unpunished(self, state: str, agent: str) -> bool:
        return self.deviation_transitions[state][agent] == self.leader_transitions[state][agent]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "regime": self.regime,
            "initial": self.initial,
            "states": {k: {"s": v.s, "y_L": v.y_L, "y_R": v.y_R} for k, v in self.states.items()},
            "leader_transitions": {k: dict(v) for k, v in self.leader_transitions.items()},
            "deviation_transitions": {k: dict(v) for k, v in self.deviation_transitions.items()},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ContractAutomaton":
        auto = cls(
            params=Params(**d["params"]),
            regime=d["regime"],
            initial=d["initial"],
            states={k: StatePolicy(float(v["s"]), float(v["y_L"]), float(v["y_R"]))
                    for k, v in d["states"].items()},
            leader_transitions={k: dict(v) for k, v in d["leader_transitions"].items()},
            deviation_transitions={k: dict(v) for k, v in d["deviation_transitions"].items()},
        )
        auto.validate()
        return auto

    @classmethod
    def from_json(cls, text: str) -> "ContractAutomaton":
        return cls.from_dict(json.loads(text))


def stage_nash(params: Params, regime: str = "commitment/StageNash") -> ContractAutomaton:
    """Repeated stage Nash: friend fully endorsed, both agents at their bliss points."""
    lab = "StageNash"
    return ContractAutomaton(
        params=params,
        regime=regime,
        initial=lab,
        states={lab: StatePolicy(-params.m, 0.0, 1.0)},
        leader_transitions={lab: {"L": lab, "R": lab}},
        deviation_transitions={lab: {"L": lab, "R": lab, "P": lab}},
    )


@dataclass
class ValueProfile:
    """Beginning-of-period values ``w[i][state]`` and interim values ``v[i][(state, k)]``."""

    labels: list[str]
    w: dict[str, dict[str, float]]
    v: dict[str, dict[tuple[str, str], float]]

    def residual(self, automaton: ContractAutomaton) -> float:
        """Largest violation of the Bellman equations by these values."""
        par = automaton.params
        worst = 0.0
        for i in PLAYERS:
            for lab, pol in automaton.states.items():
                p = selection_prob(pol.s)
                rhs = 0.0
                for k, pk in (("L", 1 - p), ("R", p)):
                    nxt = automaton.leader_transitions[lab][k]
                    rhs += pk * (stage_utility(i, pol.y(k), k, par) + par.beta * self.w[i][nxt])
                worst = max(worst, abs(rhs - self.w[i][lab]))
        return worst


def solve_values(automaton: ContractAutomaton, params: Params | None = None) -> ValueProfile:
    """Exact on-path values: solve (I - beta T) w = r for every player."""
    par = params or automaton.params
    labels = automaton.labels
    idx = {lab: n for n, lab in enumerate(labels)}
    n = len(labels)
    T = np.zeros((n, n))
    r = np.zeros((3, n))
    for lab, pol in automaton.states.items():
        a = idx[lab]
        p = selection_prob(pol.s)
        for k, pk in (("L", 1 - p), ("R", p)):
            T[a, idx[automaton.leader_transitions[lab][k]]] += pk
            for j, i in enumerate(PLAYERS):
                r[j, a] += pk * stage_utility(i, pol.y(k), k, par)
    A = np.eye(n) - par.beta * T
    # spectral radius of beta*T is beta < 1, so A is never singular
    W = np.linalg.solve(A, r.T).T
    w = {i: {lab: float(W[j, idx[lab]]) for lab in labels} for j, i in enumerate(PLAYERS)}
    v = {i: {} for i in PLAYERS}
    for lab, pol in automaton.states.items():
        for k in AGENTS:
            nxt = automaton.leader_transitions[lab][k]
            for i in PLAYERS:
                v[i][(lab, k)] = stage_utility(i, pol.y(k), k, par) + par.beta * w[i][nxt]
    return ValueProfile(labels, w, v)


@dataclass(frozen=True)
class DecRecord:
    state: str
    player: str
    value: float
    binds: bool
    satisfied: bool


@dataclass
class DecReport:
    records: list[DecRecord]

    @property
    def certified(self) -> bool:
        return all(r.satisfied for r in self.records)

    @property
    def violations(self) -> list[DecRecord]:
        return [r for r in self.records if not r.satisfied]

    @property
    def min_slack(self) -> float:
        return min(r.value for r in self.records)

    def get(self, state: str, player: str) -> DecRecord:
        for r in self.records:
            if r.state == state and r.player == player:
                return r
        raise KeyError((state, player))

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "min_slack": self.min_slack,
            "records": [r.__dict__ for r in self.records],
        }


def dec_check(
    automaton: ContractAutomaton,
    params: Params | None = None,
    punishment_values: Mapping[str, float] | None = None,
    *,
    mode: str | None = None,
    values: ValueProfile | None = None,
    bind_tol: float = BIND_TOL,
    feas_tol: float = FEAS_TOL,
) -> DecReport:
    """Evaluate every agent DEC and, without commitment, the principal's DEC'.

    The punishment value of player ``i`` at a state is the value of its
    deviation target, unless overridden through ``punishment_values``. An
    override only applies where the deviation is actually punished.
    """
    par = params or automaton.params
    mode = mode or automaton.mode
    if mode not in ("commitment", "nocommitment"):
        raise InvalidParameter(f"unknown mode {mode!r}")
    overrides = dict(punishment_values or {})
    bad = set(overrides) - set(PLAYERS)
    if bad:
        raise InvalidParameter(f"unknown players in punishment_values: {sorted(bad)}")
    vals = values or solve_values(automaton, par)
    w = vals.w
    records = []

    def record(state, player, value):
        records.append(DecRecord(state, player, float(value),
                                 abs(value) <= bind_tol, value >= -feas_tol))

    for lab, pol in automaton.states.items():
        for k in AGENTS:
            nxt = automaton.leader_transitions[lab][k]
            target = automaton.deviation_transitions[lab][k]
            if k in overrides and target != nxt:
                alpha = overrides[k]
            else:
                alpha = w[k][target]
            lhs = -abs(pol.y(k) - BLISS[k]) + par.beta * w[k][nxt]
            record(lab, k, lhs - par.beta * alpha)
        if mode == "nocommitment":
            target = automaton.deviation_transitions[lab]["P"]
            alpha_p = overrides.get("P", w["P"][target])
            record(lab, "P", w["P"][lab] - alpha_p)
    return DecReport(records)


def principal_ex_ante(automaton: ContractAutomaton, params: Params | None = None) -> float:
    """Principal's value at the initial state, before the first coin toss."""
    return solve_values(automaton, params).w["P"][automaton.initial]
