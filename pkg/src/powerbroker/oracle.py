"""Brute-force cross-checks for the closed-form contracts.

``grid_search`` enumerates stationary two-state contracts on a lattice and
keeps the best enforceable one. ``deviation_probe`` walks the event tree of
leader draws and tries every one-shot deviation on a probe grid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .commitment import alpha_grim, build_commitment, grim_state, two_phase_automaton
from .engine import (
    AGENTS,
    BLISS,
    FEAS_TOL,
    ContractAutomaton,
    InvalidParameter,
    Params,
    StatePolicy,
    UnsupportedRegime,
    dec_check,
    principal_ex_ante,
    solve_values,
    stage_nash,
)
from .nocommitment import build_nocommitment, principal_punishment

MODES = ("commitment", "nocommitment")
ON_PATH = ("Exclusion", "PostL", "PostR")
TIE_TOL = 1e-12
NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class GridSpec:
    s_step: float
    y_step: float
    mode: str = "commitment"

    def __post_init__(self):
        if not (self.s_step > 0 and self.y_step > 0):
            raise InvalidParameter("grid steps must be positive")
        if self.mode not in MODES:
            raise InvalidParameter(f"mode must be one of {MODES}, got {self.mode!r}")

    def s_grid(self, m: float) -> np.ndarray:
        pts = np.arange(-m, m + 1e-12, self.s_step)
        return np.unique(np.clip(np.concatenate([pts, [-m, 0.0, m]]), -m, m))

    def y_grid(self) -> np.ndarray:
        pts = np.arange(0.0, 1.0 + 1e-12, self.y_step)
        return np.unique(np.clip(np.concatenate([pts, [0.0, 1.0]]), 0.0, 1.0))


@dataclass
class GridResult:
    automaton: ContractAutomaton
    value: float
    profile: dict
    n_feasible: int
    certified: bool

    def to_dict(self) -> dict:
        return {"regime": self.automaton.regime, "value": self.value, **self.profile,
                "n_feasible": self.n_feasible, "certified": self.certified}


def _two_state_values(u_L, u_R, q_L, q_R, q_0, beta):
    """Values at Exclusion, PostL, PostR for stage payoffs u_k when k leads.

    q is the probability that R leads in each state; the leader's identity
    decides the next state (L -> PostL, R -> PostR; Exclusion keeps itself
    after L).
    """
    a11 = 1.0 - beta * (1.0 - q_L)
    a12 = -beta * q_L
    a21 = -beta * (1.0 - q_R)
    a22 = 1.0 - beta * q_R
    r1 = (1.0 - q_L) * u_L + q_L * u_R
    r2 = (1.0 - q_R) * u_L + q_R * u_R
    det = a11 * a22 - a12 * a21
    w_PL = (r1 * a22 - a12 * r2) / det
    w_PR = (a11 * r2 - a21 * r1) / det
    w_ex = ((1.0 - q_0) * u_L + q_0 * (u_R + beta * w_PR)) / (1.0 - beta * (1.0 - q_0))
    return w_ex, w_PL, w_PR


def _contract(par: Params, mode: str, s_L, s_R, y_L, y_R, regime: str) -> ContractAutomaton:
    frag = {f"Punish{k}": grim_state(par, k) for k in AGENTS}
    leader = {lab: {"L": lab, "R": lab} for lab in frag}
    deviation = {lab: {"L": lab, "R": lab, "P": lab} for lab in frag}
    return two_phase_automaton(
        par, f"{mode}/{regime}",
        StatePolicy(-par.m, y_L, y_R), StatePolicy(s_L, y_L, y_R), StatePolicy(s_R, y_L, y_R),
        punish={"L": "PunishL", "R": "PunishR"},
        extra_states=frag, extra_leader=leader, extra_deviation=deviation,
    )


def _on_path_certified(auto: ContractAutomaton, mode: str, alpha_P: float | None) -> bool:
    over = {"P": alpha_P} if mode == "nocommitment" else None
    rep = dec_check(auto, mode=mode, punishment_values=over)
    return all(r.satisfied for r in rep.records if r.state in ON_PATH)


def grid_search(par: Params, grid: GridSpec) -> GridResult:
    """Best enforceable stationary contract on the grid.

    Agents are held to the grim-trigger value; without commitment the
    principal's on-path values must also exceed her punishment value.
    """
    if not par.grim_valid:
        raise UnsupportedRegime("grid search uses grim-trigger punishments: needs 1 - beta >= 2 m beta")
    beta, b, t, m = par.beta, par.b, par.theta, par.m
    ac = alpha_grim(par)
    alpha_P = principal_punishment(par).alpha if grid.mode == "nocommitment" else None
    ss = grid.s_grid(m)
    ys = grid.y_grid()
    iL, iR = np.triu_indices(len(ys))
    yL, yR = ys[iL], ys[iR]
    q_0 = 0.5 - m

    best = None  # (value, -y_R, y_L, s_R, s_L)
    n_feasible = 0
    qR = (0.5 + ss)[:, None]
    for s_L in ss:
        q_L = 0.5 + s_L
        eL, lL, rL = _two_state_values(b - yL, -yR, q_L, qR, q_0, beta)
        eR, lR, rR = _two_state_values(-(1.0 - yL), b - (1.0 - yR), q_L, qR, q_0, beta)
        eP, lP, rP = _two_state_values(-np.abs(yL - t), -np.abs(yR - t), q_L, qR, q_0, beta)
        ok = (-yL + beta * np.minimum(lL, eL) - beta * ac >= -FEAS_TOL)
        ok &= (-(1.0 - yR) + beta * rR - beta * ac >= -FEAS_TOL)
        if alpha_P is not None:
            ok &= np.minimum(np.minimum(eP, lP), rP) - alpha_P >= -FEAS_TOL
        n_feasible += int(ok.sum())
        if not ok.any():
            continue
        val = np.where(ok, eP, -np.inf)
        top = val.max()
        if best is not None and top < best[0] - TIE_TOL:
            continue
        ri, ci = np.nonzero(val >= top - TIE_TOL)
        # smaller y_R, then larger y_L, then larger s_R
        j = np.lexsort((-ss[ri], -yL[ci], yR[ci]))[0]
        cand = (float(val[ri[j], ci[j]]), -float(yR[ci[j]]), float(yL[ci[j]]), float(ss[ri[j]]),
                float(s_L))
        if best is None or _better(cand, best):
            best = cand

    if best is None:
        auto = stage_nash(par, f"{grid.mode}/StageNash")
        return GridResult(auto, principal_ex_ante(auto), {}, 0, True)
    _, neg_yR, y_L, s_R, s_L = best
    auto = _contract(par, grid.mode, s_L, s_R, y_L, -neg_yR, "GridBest")
    profile = {"s_L": s_L, "s_R": s_R, "y_L": y_L, "y_R": -neg_yR}
    return GridResult(auto, principal_ex_ante(auto), profile, n_feasible,
                      _on_path_certified(auto, grid.mode, alpha_P))


def _better(a, b) -> bool:
    # value first (up to ties), then smaller y_R, larger y_L, larger s_R, larger s_L
    if abs(a[0] - b[0]) > TIE_TOL:
        return a[0] > b[0]
    return a[1:] > b[1:]


@dataclass
class ProbeResult:
    max_gain: float
    worst: dict
    nodes: int
    checks: int = 0
    gains: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"max_gain": self.max_gain, "worst": self.worst, "nodes": self.nodes,
                "checks": self.checks}


DEFAULT_PROBE = tuple(np.round(np.linspace(0.0, 1.0, 11), 12))


def deviation_probe(automaton: ContractAutomaton, params: Params | None = None,
                    horizon: int = 6, probe_grid=DEFAULT_PROBE, *,
                    s_probe: int = 11, node_budget: int = NODE_BUDGET) -> ProbeResult:
    """Largest one-shot deviation gain over the event tree of leader draws.

    The tree is rooted at the initial state and at every deviation target,
    so punishment phases are probed too. Continuation values come from the
    exact Bellman solution, so the horizon causes no truncation error.
    """
    par = params or automaton.params
    if horizon < 0:
        raise InvalidParameter("horizon must be non-negative")
    roots = [automaton.initial]
    for dev in automaton.deviation_transitions.values():
        for tgt in dev.values():
            if tgt not in roots:
                roots.append(tgt)
    per_root = 2 ** (horizon + 1) - 1
    if per_root * len(roots) > node_budget:
        raise InvalidParameter(
            f"event tree of {per_root * len(roots)} nodes exceeds the budget of {node_budget}")
    w = solve_values(automaton, par).w
    probe = np.asarray(probe_grid, dtype=float)
    s_grid = np.linspace(-par.m, par.m, s_probe)
    check_p = automaton.mode == "nocommitment"
    # gains depend only on the node's state; cache them but still walk the tree
    cache = {}

    def state_gains(lab):
        if lab in cache:
            return cache[lab]
        pol = automaton.states[lab]
        out = []
        for k in AGENTS:
            nxt = automaton.leader_transitions[lab][k]
            tgt = automaton.deviation_transitions[lab][k]
            comply = -abs(pol.y(k) - BLISS[k]) + par.beta * w[k][nxt]
            moves = probe[np.abs(probe - pol.y(k)) > 1e-12]
            if len(moves):
                dev = -np.abs(moves - BLISS[k]) + par.beta * w[k][tgt]
                j = int(np.argmax(dev))
                out.append((float(dev[j] - comply), k, float(moves[j])))
        if check_p:
            tgt = automaton.deviation_transitions[lab]["P"]
            tp = automaton.states[tgt]
            v_L = -abs(tp.y_L - par.theta) + par.beta * w["P"][automaton.leader_transitions[tgt]["L"]]
            v_R = -abs(tp.y_R - par.theta) + par.beta * w["P"][automaton.leader_transitions[tgt]["R"]]
            moves = s_grid[np.abs(s_grid - pol.s) > 1e-12] if tgt == lab else s_grid
            if len(moves):
                dev = (0.5 - moves) * v_L + (0.5 + moves) * v_R
                j = int(np.argmax(dev))
                out.append((float(dev[j] - w["P"][lab]), "P", float(moves[j])))
        cache[lab] = out
        return out

    best = (-np.inf, {})
    nodes = checks = 0
    for root in roots:
        frontier = [(root, "")]
        for depth in range(horizon + 1):
            nxt_frontier = []
            for lab, hist in frontier:
                nodes += 1
                for gain, player, action in state_gains(lab):
                    checks += 1
                    if gain > best[0]:
                        best = (gain, {"root": root, "history": hist, "state": lab,
                                       "player": player, "action": action, "gain": gain})
                if depth < horizon:
                    for k in AGENTS:
                        nxt_frontier.append((automaton.leader_transitions[lab][k], hist + k))
            frontier = nxt_frontier
    max_gain = float(best[0]) if checks else 0.0
    return ProbeResult(max_gain, best[1], nodes, checks,
                       {lab: [g for g, *_ in v] for lab, v in cache.items()})


def closed_form(par: Params, mode: str) -> ContractAutomaton:
    return build_commitment(par) if mode == "commitment" else build_nocommitment(par)


def oracle_report(par: Params, grid: GridSpec) -> dict:
    try:
        auto = closed_form(par, grid.mode)
        cf = {"regime": auto.regime, "value": principal_ex_ante(auto),
              "states": auto.to_dict()["states"]}
    except UnsupportedRegime as err:
        auto, cf = None, {"regime": None, "value": None, "error": str(err)}
    res = grid_search(par, grid)
    gap = None if auto is None else cf["value"] - res.value
    certified = res.certified and (
        auto is None or dec_check(auto, mode=grid.mode).certified)
    return {"closed_form": cf, "grid_best": res.to_dict(), "value_gap": gap,
            "certified": certified}


def oracle_report_json(par: Params, grid: GridSpec, **kw) -> str:
    return json.dumps(oracle_report(par, grid), **kw)
