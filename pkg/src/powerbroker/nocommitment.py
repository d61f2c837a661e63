"""Contracts when the principal cannot commit.

Without commitment the principal must also be deterred from deviating: her
continuation value at every state has to weakly exceed her punishment value
``alpha_P``. The constructions here are the punishment fragments for each
player and the regime solvers that stitch them to an on-path contract.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .commitment import (
    alpha_grim,
    build_commitment,
    grim_state,
    thresholds,
    two_phase_automaton,
)
from .engine import (
    ContractAutomaton,
    InvalidParameter,
    ModelError,
    Params,
    StatePolicy,
    UnsupportedRegime,
    dec_check,
    solve_values,
    stage_nash,
)

GRIM_TRIGGER = "GrimTrigger"
PRINCIPAL_PUNISH = "PrincipalPunish"
BACK_TO_BUSINESS = "BackToBusiness"
UNPUNISHED = "Unpunished"

REPLICA = "CommitmentReplica"
FIRST_BEST = "FirstBest"
LENIENT = "OpportunisticLenient"
UNRAVELING = "PartialUnraveling"
STAGE_NASH = "StageNash"

B_LOW = 1e-6
BISECT_TOL = 1e-10
SLOPE_TOL = 1e-9


class UncharacterizedRegion(UnsupportedRegime):
    """No construction is available for these parameters."""

    label = "Uncharacterized"


class NoBracket(ModelError):
    """A threshold search found no sign change on its bracket."""


@dataclass
class PunishmentScheme:
    target: str
    style: str
    alpha: float
    entry: str | None = None
    states: dict[str, StatePolicy] = field(default_factory=dict)
    leader_transitions: dict[str, dict[str, str]] = field(default_factory=dict)
    deviation_transitions: dict[str, dict[str, str]] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def _pq(m: float) -> tuple[float, float]:
    return 0.5 + m, 0.5 - m


def _self_loop(lab: str, deviation: dict[str, str] | None = None):
    dev = {"L": lab, "R": lab, "P": lab}
    dev.update(deviation or {})
    return {"L": lab, "R": lab}, dev


def polarization_alpha(par: Params) -> float:
    """Principal's value of stage Nash forever: friend endorsed, bliss policies."""
    pm, qm = _pq(par.m)
    return -(pm * par.theta + qm * (1.0 - par.theta)) / (1.0 - par.beta)


def _y_hat_L(par: Params, alpha_L: float) -> float:
    """L's policy making his DEC bind at (s=-m, y_R=1) when his deviation costs alpha_L."""
    beta = par.beta
    pm, qm = _pq(par.m)
    rhs = beta * (pm * par.b - qm) / (1.0 - beta) - beta * alpha_L
    return rhs / (1.0 + beta * pm / (1.0 - beta))


def _theta0_punishment(par: Params) -> dict:
    """Jointly determined punishments of P and L at theta = 0.

    Unknowns (alpha_P, y_hat_L, alpha_L, y_hat_R): P is punished at
    (s=-m, y_hat_L, 1), L at (s=m, 0, y_hat_R); L's DEC binds in P's
    punishment and P's DEC' binds in L's punishment.
    """
    beta, b = par.beta, par.b
    pm, qm = _pq(par.m)
    A = np.array([
        [1.0 - beta, pm, 0.0, 0.0],
        [0.0, 1.0 + beta * pm / (1.0 - beta), beta, 0.0],
        [0.0, 0.0, 1.0 - beta, pm],
        [1.0 - beta, 0.0, 0.0, pm],
    ])
    rhs = np.array([-qm, beta * (pm * b - qm) / (1.0 - beta), qm * b, 0.0])
    a_P, y_L, a_L, y_R = np.linalg.solve(A, rhs)
    capped = y_R > 1.0
    if capped:
        y_R = 1.0
        a_L = alpha_grim(par)
        y_L = _y_hat_L(par, a_L)
        a_P = -(pm * y_L + qm) / (1.0 - beta)
    if y_L > 1.0:
        # L has slack even at the far end of the policy space
        y_L, y_R, a_L = 1.0, 1.0, alpha_grim(par)
        a_P = -1.0 / (1.0 - beta)
        capped = True
    return {"alpha_P": float(a_P), "y_hat_L": float(y_L), "alpha_L": float(a_L),
            "y_hat_R": float(y_R), "capped": bool(capped)}


def _stage_nash_scheme(par: Params, extras: dict) -> PunishmentScheme:
    lab = "PunishP"
    lt, dt = _self_loop(lab)
    return PunishmentScheme("P", GRIM_TRIGGER, polarization_alpha(par), lab,
                            {lab: StatePolicy(-par.m, 0.0, 1.0)}, {lab: lt}, {lab: dt}, extras)


def principal_punishment(par: Params) -> PunishmentScheme:
    """Harshest credible punishment of the principal and its value alpha_P."""
    th = thresholds(par)
    pm, qm = _pq(par.m)
    t = par.theta
    if t > th.theta_bar:
        return _stage_nash_scheme(par, {"theta_P": None, "y_hat_L": None, "y_hat_R": None})
    if t == 0.0:
        sol = _theta0_punishment(par)
        y_L, y_R = sol["y_hat_L"], sol["y_hat_R"]
        states = {
            "PunishP": StatePolicy(-par.m, min(y_L, 1.0), 1.0),
            "PunishL": StatePolicy(par.m, 0.0, y_R),
            "PunishR": grim_state(par, "R"),
        }
        leader, deviation = {}, {}
        for lab in states:
            leader[lab], deviation[lab] = _self_loop(lab, {"P": "PunishP"})
        deviation["PunishP"]["L"] = "PunishL"
        deviation["PunishL"]["R"] = "PunishR"
        frag = ContractAutomaton(par, "nocommitment/Punishment", "PunishP", states, leader,
                                 deviation)
        if y_L <= 1.0 and dec_check(frag).certified:
            return PunishmentScheme("P", PRINCIPAL_PUNISH, sol["alpha_P"], "PunishP",
                                    states, leader, deviation,
                                    {"theta_P": y_L / 2.0, "enforceable": True, **sol})
        # the harsher punishment is not self-enforcing: stage Nash is all that remains
        return _stage_nash_scheme(par, {"theta_P": y_L / 2.0, "enforceable": False, **sol})
    # moderate principal: L is held to the grim-trigger value
    a_L = th.alpha_grim
    y_hat = min(_y_hat_L(par, a_L), 1.0)
    y_L = y_hat if y_hat >= 2.0 * t else 0.0
    alpha = -(pm * abs(y_L - t) + qm * (1.0 - t)) / (1.0 - par.beta)
    states = {"PunishP": StatePolicy(-par.m, y_L, 1.0), "PunishL": grim_state(par, "L")}
    leader, deviation = {}, {}
    for lab in states:
        leader[lab], deviation[lab] = _self_loop(lab, {"P": "PunishP"})
    deviation["PunishP"]["L"] = "PunishL"
    return PunishmentScheme("P", PRINCIPAL_PUNISH, alpha, "PunishP", states, leader, deviation,
                            {"theta_P": y_hat / 2.0, "y_hat_L": y_hat, "alpha_L": a_L,
                             "y_hat_R": 1.0})


def b_bar0(par: Params) -> float:
    """Smallest rent at which the commitment optimum survives without commitment, theta = 0."""
    if par.theta != 0.0:
        raise InvalidParameter("b_bar0 is defined for theta = 0 only")
    beta, m = par.beta, par.m
    return (1.0 - beta) ** 2 / (beta * (2.0 - beta * (1.5 - m)) * (0.5 + m))


def b_bar_firstbest(beta: float, m: float, theta: float) -> float:
    """Rent above which one-period punishments sustain the first best (sufficient, not tight)."""
    Params(beta, m, 1.0, theta)
    return (1.0 - theta) * (1.0 + 2.0 * beta * m) / (2.0 * beta * m)


def b_firstbest_exact(beta: float, m: float, theta: float) -> float:
    """Exact rent needed by the one-period punishment construction."""
    return (1.0 - theta) * (1.0 - 2.0 * beta * m) / (2.0 * beta * m)


def stick_value_P(par: Params) -> float:
    """Principal's value at L's stick state when the on-path contract is opportunistic."""
    beta, m = par.beta, par.m
    pm, qm = _pq(m)
    tb = thresholds(par).theta_bar
    v_L = tb / (1.0 - beta) - par.theta / (1.0 - 2 * beta * m) \
        - beta / (1.0 - beta) * qm / (1.0 - 2 * beta * m)
    return (-pm * (1.0 - par.theta) + qm * v_L) / (1.0 - beta * pm)


def theta_hat_root(par: Params) -> float:
    """Unclamped root in theta of stick value minus full-polarization value."""
    def f(t):
        p = par.replace(theta=t)
        return stick_value_P(p) - polarization_alpha(p)
    f0, f1 = f(0.0), f(0.25)
    return -f0 * 0.25 / (f1 - f0)


def theta_hat_nc(par: Params) -> float:
    """Bliss point above which the commitment optimum is sustainable without commitment."""
    tb = thresholds(par).theta_bar
    if tb >= 0.5:
        raise UnsupportedRegime("theta_hat requires theta_bar < 1/2")
    return float(min(max(theta_hat_root(par), tb), 0.5))


class _Linear:
    """Accumulates a square linear system over named unknowns."""

    def __init__(self, names, dtype=float):
        self.ix = {k: n for n, k in enumerate(names)}
        self.A = np.zeros((len(names), len(names)), dtype=dtype)
        self.r = np.zeros(len(names), dtype=dtype)
        self.n = 0

    def eq(self, terms, const):
        for k, c in terms:
            self.A[self.n, self.ix[k]] += c
        self.r[self.n] = const
        self.n += 1

    def solve(self):
        x = np.linalg.solve(self.A, self.r)
        return {k: x[i] for k, i in self.ix.items()}


def _on_path_bellman(sys: _Linear, par: Params, q_L, q_R) -> None:
    """Bellman equations of the two embracing states; q is the probability that R leads.

    Policies are signed as y_L <= theta <= y_R so the principal's loss is linear.
    """
    beta, b, t = par.beta, par.b, par.theta
    for q, wL, wR, wP in ((q_L, "wLL", "wRL", "wPL"), (q_R, "wLR", "wRR", "wPR")):
        sys.eq([(wL, 1.0), ("y_L", 1 - q), ("wLL", -(1 - q) * beta),
                ("y_R", q), ("wLR", -q * beta)], (1 - q) * b)
        sys.eq([(wR, 1.0), ("y_L", -(1 - q)), ("wRL", -(1 - q) * beta),
                ("y_R", -q), ("wRR", -q * beta)], -(1 - q) + q * (b - 1))
        sys.eq([(wP, 1.0), ("y_L", -(1 - q)), ("wPL", -(1 - q) * beta),
                ("y_R", q), ("wPR", -q * beta)], (2 * q - 1) * t)


def _lenient_system(par: Params) -> dict:
    """Opportunistic contract whose stick for L makes P's DEC' bind.

    R is held to the grim value; L's DEC binds at PostL against his stick
    value and R's DEC binds at PostR. Callers verify the policy ordering.
    """
    beta, b, t = par.beta, par.b, par.theta
    pm, qm = _pq(par.m)
    a_P = polarization_alpha(par)
    sys = _Linear(["y_L", "y_R", "y_hat", "alpha_L", "wLL", "wLR", "wRL", "wRR",
                   "wPL", "wPR", "wPS"])
    _on_path_bellman(sys, par, qm, pm)
    # stick state (s=m, y_L, y_hat), L's lead returns to PostL
    sys.eq([("alpha_L", 1 - pm * beta), ("y_hat", pm), ("y_L", qm), ("wLL", -qm * beta)],
           qm * b)
    sys.eq([("wPS", 1 - pm * beta), ("y_hat", pm), ("y_L", -qm), ("wPL", -qm * beta)],
           (pm - qm) * t)
    # binding constraints
    sys.eq([("y_L", -1.0), ("wLL", beta), ("alpha_L", -beta)], 0.0)
    sys.eq([("y_R", 1.0), ("wRR", beta)], 1.0 + beta * alpha_grim(par))
    sys.eq([("wPS", 1.0)], a_P)
    out = {k: float(v) for k, v in sys.solve().items()}
    out["alpha_P"] = a_P
    return out


def _unraveling_system(par: Params, s_R):
    """On-path s_L=-m, s_R free; L's deviation only skips to PostR next period.

    Returns the principal's PostR value minus the full-polarization value,
    together with the solved policies. ``s_R`` may be complex (complex-step
    differentiation).
    """
    beta = par.beta
    sys = _Linear(["y_L", "y_R", "wLL", "wLR", "wRL", "wRR", "wPL", "wPR"],
                  complex if np.iscomplexobj(s_R) else float)
    _on_path_bellman(sys, par, 0.5 - par.m, 0.5 + s_R)
    sys.eq([("y_L", -1.0), ("wLL", beta), ("wLR", -beta)], 0.0)
    sys.eq([("y_R", 1.0), ("wRR", beta)], 1.0 + beta * alpha_grim(par))
    sol = sys.solve()
    return sol["wPR"] - polarization_alpha(par), sol



def _dr_ds_at_floor(par: Params) -> float:
    h = 1e-20
    val, _ = _unraveling_system(par, complex(-par.m, h))
    return float(val.imag / h)


def _b_theta_bar(beta: float, m: float, theta: float) -> float:
    """Rent at which theta_bar reaches theta (theta_bar is linear in b + 1)."""
    C = thresholds(Params(beta, m, 1.0, theta)).theta_bar / 2.0
    return theta / C - 1.0


def _bisect(f, lo, hi, tol=BISECT_TOL):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def b_hat(beta: float, m: float, theta: float) -> float:
    """Rent below which the principal's DEC' at PostR fails under the lenient stick."""
    hi = min(b_bar_firstbest(beta, m, theta), _b_theta_bar(beta, m, theta))
    if hi <= B_LOW:
        raise NoBracket("theta <= theta_bar for every rent: no interior region")

    def g(b):
        p = Params(beta, m, b, theta)
        sol = _lenient_system(p)
        return sol["wPR"] - sol["alpha_P"]

    glo, ghi = g(B_LOW), g(hi)
    if glo >= 0:
        raise NoBracket("principal's PostR constraint never binds on the bracket")
    if ghi < 0:
        raise NoBracket("principal's PostR constraint always binds on the bracket")
    return _bisect(g, B_LOW, hi)


def unraveling_endorsement(par: Params) -> float | None:
    """Larger root s_R* of the principal's binding PostR constraint, or None if none exists."""
    m = par.m
    slope = _dr_ds_at_floor(par)

    def h(s):
        if abs(s + m) < 1e-12:
            return slope
        return _unraveling_system(par, s)[0] / (s + m)

    if h(m) >= 0:
        return m
    if slope <= 0:
        # both roots sit at -m when the slope vanishes
        return -m if slope > -SLOPE_TOL else None
    return float(brentq(h, -m, m, xtol=1e-14, rtol=1e-14))


def b_check(beta: float, m: float, theta: float, b_upper: float | None = None) -> float:
    """Rent at which the two roots of the unraveling constraint meet at -m."""
    if b_upper is None:
        b_upper = b_hat(beta, m, theta)

    def slope(b):
        return _dr_ds_at_floor(Params(beta, m, b, theta))

    if slope(b_upper) <= 0:
        raise NoBracket("no partial-endorsement root below b_hat")
    if slope(B_LOW) > 0:
        raise NoBracket("partial endorsement survives down to the smallest rent")
    return _bisect(slope, B_LOW, b_upper)


def solve_sR_and_b_check(par: Params) -> tuple[float | None, float]:
    return unraveling_endorsement(par), b_check(par.beta, par.m, par.theta)


def _stick_fragment(par: Params, y_L: float, y_R: float) -> PunishmentScheme:
    lab = "StickL"
    return PunishmentScheme(
        "L", BACK_TO_BUSINESS, float("nan"), lab,
        {lab: StatePolicy(par.m, y_L, y_R)},
        {lab: {"L": "PostL", "R": lab}},
        {lab: {"L": lab, "R": "PunishR", "P": "PunishP"}},
    )


def l_punishment(par: Params, on_path: ContractAutomaton) -> PunishmentScheme:
    """Punishment of L attached to an on-path contract, with L's value there."""
    if "PostL" not in on_path.states:
        # stage Nash forever is its own punishment
        alpha = solve_values(on_path, par).w["L"][on_path.initial]
        return PunishmentScheme("L", GRIM_TRIGGER, alpha, on_path.initial)
    if par.theta == 0.0 and "StickL" not in on_path.states:
        nxt = on_path.leader_transitions["PostL"]["L"]
        alpha = solve_values(on_path, par).w["L"][nxt]
        return PunishmentScheme("L", UNPUNISHED, alpha, None)
    if on_path.regime.endswith(UNRAVELING):
        alpha = solve_values(on_path, par).w["L"]["PostR"]
        return PunishmentScheme("L", BACK_TO_BUSINESS, alpha, "PostR",
                                extras={"one_period": True})
    if "StickL" in on_path.states:
        scheme = _stick_fragment(par, on_path.states["StickL"].y_L, on_path.states["StickL"].y_R)
        scheme.alpha = solve_values(on_path, par).w["L"]["StickL"]
        return scheme
    scheme = _stick_fragment(par, on_path.states["PostL"].y_L, 1.0)
    probe = _attach(par, on_path, scheme, regime=on_path.regime)
    scheme.alpha = solve_values(probe, par).w["L"]["StickL"]
    return scheme


def _stage_nash_punishments(par: Params):
    states = {"PunishR": grim_state(par, "R"), "PunishP": StatePolicy(-par.m, 0.0, 1.0)}
    leader, deviation = {}, {}
    for lab in states:
        leader[lab], deviation[lab] = _self_loop(lab, {"P": "PunishP"})
    return states, leader, deviation


def _attach(par, on_path: ContractAutomaton, l_scheme: PunishmentScheme | None,
            regime: str, l_target: str | None = None) -> ContractAutomaton:
    """On-path Exclusion/PostL/PostR of ``on_path`` with stage-Nash punishments for R and P."""
    states, leader, deviation = _stage_nash_punishments(par)
    if l_scheme is not None and l_scheme.states:
        states.update(l_scheme.states)
        leader.update(l_scheme.leader_transitions)
        deviation.update(l_scheme.deviation_transitions)
        l_target = l_scheme.entry
    src = on_path.states
    return two_phase_automaton(
        par, regime, src["Exclusion"], src["PostL"], src["PostR"],
        punish={"L": l_target, "R": "PunishR", "P": "PunishP"},
        extra_states=states, extra_leader=leader, extra_deviation=deviation,
    )


def commitment_replica(par: Params) -> ContractAutomaton:
    """Commitment optimum on path, enforced by punishments the principal is willing to carry out."""
    on_path = build_commitment(par)
    regime = f"nocommitment/{REPLICA}"
    if par.theta == 0.0:
        frag = principal_punishment(par)
        states, leader, deviation = _stage_nash_punishments(par)
        states.update(frag.states)
        leader.update(frag.leader_transitions)
        deviation.update(frag.deviation_transitions)
        src = on_path.states
        return two_phase_automaton(
            par, regime, src["Exclusion"], src["PostL"], src["PostR"],
            punish={"R": "PunishR", "P": "PunishP"},
            extra_states=states, extra_leader=leader, extra_deviation=deviation,
        )
    scheme = _stick_fragment(par, on_path.states["PostL"].y_L, 1.0)
    return _attach(par, on_path, scheme, regime)


def first_best_one_shot(par: Params) -> ContractAutomaton:
    """First best enforced by fully endorsing the non-deviator for one period."""
    t, m = par.theta, par.m
    on = StatePolicy(-m, t, t)
    states, leader, deviation = {}, {}, {}
    for k, s in (("L", m), ("R", -m)):
        lab = f"OneShotPunish{k}"
        states[lab] = StatePolicy(s, t, t)
        leader[lab] = {"L": "PostL", "R": "PostR"}
        deviation[lab] = {"L": "OneShotPunishL", "R": "OneShotPunishR", "P": "PunishP"}
    states["PunishP"] = StatePolicy(-m, 0.0, 1.0)
    leader["PunishP"], deviation["PunishP"] = _self_loop("PunishP")
    return two_phase_automaton(
        par, f"nocommitment/{FIRST_BEST}", on, on, StatePolicy(m, t, t),
        punish={"L": "OneShotPunishL", "R": "OneShotPunishR", "P": "PunishP"},
        extra_states=states, extra_leader=leader, extra_deviation=deviation,
    )


def lenient_contract(par: Params, sol: dict | None = None) -> ContractAutomaton:
    sol = sol or _lenient_system(par)
    m = par.m
    y_L, y_R = sol["y_L"], sol["y_R"]
    on = {
        "Exclusion": StatePolicy(-m, y_L, y_R),
        "PostL": StatePolicy(-m, y_L, y_R),
        "PostR": StatePolicy(m, y_L, y_R),
    }
    proto = ContractAutomaton(par, "", "Exclusion", on, {}, {})
    scheme = _stick_fragment(par, y_L, sol["y_hat"])
    auto = _attach(par, proto, scheme, f"nocommitment/{LENIENT}")
    auto.notes.update({"alpha_L": sol["alpha_L"], "alpha_P": sol["alpha_P"]})
    return auto


def unraveling_contract(par: Params, s_R: float) -> ContractAutomaton:
    _, sol = _unraveling_system(par, s_R)
    m = par.m
    y_L, y_R = float(np.real(sol["y_L"])), float(np.real(sol["y_R"]))
    on = {
        "Exclusion": StatePolicy(-m, y_L, y_R),
        "PostL": StatePolicy(-m, y_L, y_R),
        "PostR": StatePolicy(s_R, y_L, y_R),
    }
    proto = ContractAutomaton(par, "", "Exclusion", on, {}, {})
    auto = _attach(par, proto, None, f"nocommitment/{UNRAVELING}", l_target="PostR")
    auto.notes["s_R"] = s_R
    return auto


def _certified(auto: ContractAutomaton) -> bool:
    return dec_check(auto, mode="nocommitment").certified


def _try_replica(par: Params) -> ContractAutomaton | None:
    try:
        auto = commitment_replica(par)
    except (UnsupportedRegime, InvalidParameter):
        return None
    return auto if _certified(auto) else None


def _interior(par: Params) -> ContractAutomaton | None:
    """Opportunistic region where the principal's stick for L must be softened."""
    sol = _lenient_system(par)
    try:
        if sol["wPR"] >= sol["alpha_P"]:
            auto = lenient_contract(par, sol)
        else:
            s = unraveling_endorsement(par)
            if s is None:
                return stage_nash(par, f"nocommitment/{STAGE_NASH}")
            auto = unraveling_contract(par, s)
    except InvalidParameter:
        return None
    return auto if _certified(auto) else None


def build_nocommitment(par: Params) -> ContractAutomaton:
    """Best contract characterised for the no-commitment game.

    The commitment optimum bounds what is achievable, so a certified replica
    of it is returned whenever one exists. Raises UncharacterizedRegion where
    no construction applies.
    """
    th = thresholds(par)
    t = par.theta
    if t == 0.0:
        if not par.grim_valid:
            raise UnsupportedRegime("theta = 0 construction requires 1 - beta >= 2 m beta")
        if par.b >= b_bar0(par):
            return commitment_replica(par)
        return stage_nash(par, f"nocommitment/{STAGE_NASH}")
    if par.b >= b_bar_firstbest(par.beta, par.m, t):
        return first_best_one_shot(par)
    replica = _try_replica(par)
    if replica is not None:
        return replica
    if par.grim_valid and th.theta_bar < t:
        auto = _interior(par)
        if auto is not None:
            return auto
    raise UncharacterizedRegion(
        f"no characterised no-commitment contract at beta={par.beta}, m={par.m}, "
        f"b={par.b}, theta={t}")


@dataclass
class NcThresholds:
    b_bar0: float | None
    b_bar: float
    theta_hat_nc: float | None
    b_hat: float | None
    b_check: float | None
    regime: str
    diagnostics: dict = field(default_factory=dict)

    def report(self) -> dict:
        return {"b_bar0": self.b_bar0, "b_bar": self.b_bar, "theta_hat_nc": self.theta_hat_nc,
                "b_hat": self.b_hat, "b_check": self.b_check, "regime": self.regime}

    def to_json(self, **kw) -> str:
        return json.dumps(self.report(), **kw)


def nc_thresholds(par: Params) -> NcThresholds:
    diag = {}
    bb0 = b_bar0(par) if par.theta == 0.0 else None
    th_hat = bh = bc = None
    try:
        th_hat = theta_hat_nc(par)
        diag["theta_hat_root"] = theta_hat_root(par)
    except UnsupportedRegime as err:
        diag["theta_hat_nc"] = str(err)
    if par.theta > 0 and par.grim_valid:
        try:
            bh = b_hat(par.beta, par.m, par.theta)
            bc = b_check(par.beta, par.m, par.theta, bh)
        except NoBracket as err:
            diag["b_hat" if bh is None else "b_check"] = str(err)
    try:
        regime = build_nocommitment(par).regime.split("/", 1)[1]
    except UncharacterizedRegion:
        regime = "Uncharacterized"
    except UnsupportedRegime:
        regime = "Unsupported"
    return NcThresholds(bb0, b_bar_firstbest(par.beta, par.m, par.theta), th_hat, bh, bc,
                        regime, diag)


__all__ = [
    "BACK_TO_BUSINESS", "GRIM_TRIGGER", "PRINCIPAL_PUNISH", "UNPUNISHED",
    "NcThresholds", "NoBracket", "PunishmentScheme", "UncharacterizedRegion",
    "b_bar0", "b_bar_firstbest", "b_check", "b_hat", "build_nocommitment",
    "commitment_replica", "first_best_one_shot", "l_punishment", "lenient_contract",
    "nc_thresholds", "polarization_alpha", "principal_punishment", "solve_sR_and_b_check",
    "theta_hat_nc", "theta_hat_root", "unraveling_contract", "unraveling_endorsement",
]
