"""Optimal contracts when the principal can commit.

Thresholds, regime classification, contract construction and the
comparative statics built on top of them.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .engine import (
    ContractAutomaton,
    Params,
    StatePolicy,
    UnsupportedRegime,
    principal_ex_ante,
)

TIE_TOL = 1e-12

FIRST_BEST = "FirstBest"
FULL_EMBRACE = "FullEmbrace"
PARTIAL_EMBRACE = "PartialEmbrace"
OPPORTUNISTIC = "Opportunistic"
UNKNOWN = "Unknown"

# first-best constructions
FB_SLACK = "slack"
FB_ONE_SIDED = "one-sided DEC"
FB_TWO_SIDED = "two-sided DEC"


@dataclass(frozen=True)
class ThresholdSet:
    theta_bar: float
    theta_breve: float
    theta_hat_align: float
    theta_underline: float
    psi: float
    alpha_grim: float
    beta_hat: float
    grim_valid: bool

    @property
    def first_best_cutoff(self) -> float:
        return max(1.0 - self.theta_bar, 1.0 - self.theta_breve)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def alpha_grim(par: Params) -> float:
    """Agent's value from the start of a grim-trigger punishment."""
    return ((0.5 - par.m) * par.b - (0.5 + par.m)) / (1.0 - par.beta)


def dec_intercept(par: Params) -> float:
    """Constant term of the binding-DEC policies y_L(s) = K + psi s, y_R(s) = 1 - K + psi s."""
    return par.beta * ((par.b - 1.0) / (2.0 * (1.0 - par.beta)) - alpha_grim(par))


def thresholds(par: Params) -> ThresholdSet:
    beta, m, b = par.beta, par.m, par.b
    pm = 0.5 + m
    ac = alpha_grim(par)
    return ThresholdSet(
        theta_bar=2.0 * beta / (1.0 - beta) * (1.0 - beta * pm) * (b + 1.0) * m,
        theta_breve=beta * (0.5 + m * (1.0 + 2.0 * b)),
        theta_hat_align=pm * beta,
        theta_underline=2.0 * beta / (1.0 - beta) * (b + 1.0) * m * beta * pm,
        psi=-beta * ((b + 1.0 - 2.0 * beta * b) / (1.0 - beta) + 2.0 * beta * ac),
        alpha_grim=ac,
        beta_hat=1.0 / (1.0 + 2.0 * m * (1.0 + b)),
        grim_valid=par.grim_valid,
    )


def y_L_binding(par: Params, s_L: float, th: ThresholdSet | None = None) -> float:
    th = th or thresholds(par)
    return dec_intercept(par) + th.psi * s_L


def y_R_binding(par: Params, s_R: float, th: ThresholdSet | None = None) -> float:
    th = th or thresholds(par)
    return 1.0 - dec_intercept(par) + th.psi * s_R


@dataclass(frozen=True)
class CommitRegime:
    name: str
    construction: str | None = None

    def __str__(self):
        return self.name if self.construction is None else f"{self.name} ({self.construction})"


def _first_best_construction(par: Params, th: ThresholdSet) -> str | None:
    t = par.theta
    if 1.0 - th.theta_breve <= t + TIE_TOL and t <= th.theta_hat_align + TIE_TOL:
        return FB_SLACK
    if th.theta_hat_align < t < th.theta_underline:
        return FB_ONE_SIDED
    if t + TIE_TOL >= max(1.0 - th.theta_bar, th.theta_underline):
        return FB_TWO_SIDED
    return None


def classify(par: Params) -> CommitRegime:
    th = thresholds(par)
    t = par.theta
    # ties go to the lower-theta regime
    if t > th.first_best_cutoff + TIE_TOL:
        return CommitRegime(FIRST_BEST, _first_best_construction(par, th))
    if not par.grim_valid:
        warnings.warn("1 - beta < 2 m beta: second-best regimes are not characterised",
                      RuntimeWarning, stacklevel=2)
        return CommitRegime(UNKNOWN)
    if t <= th.theta_underline + TIE_TOL:
        return CommitRegime(FULL_EMBRACE)
    if t <= th.theta_bar + TIE_TOL:
        return CommitRegime(PARTIAL_EMBRACE)
    return CommitRegime(OPPORTUNISTIC)


def grim_state(par: Params, target: str) -> StatePolicy:
    """Punishment of ``target``: the other agent is fully endorsed forever, bliss policies."""
    s = par.m if target == "L" else -par.m
    return StatePolicy(s, 0.0, 1.0)


def two_phase_automaton(
    par: Params,
    regime: str,
    exclusion: StatePolicy,
    post_L: StatePolicy,
    post_R: StatePolicy,
    punish: dict[str, str],
    extra_states: dict[str, StatePolicy] | None = None,
    extra_leader: dict[str, dict[str, str]] | None = None,
    extra_deviation: dict[str, dict[str, str]] | None = None,
) -> ContractAutomaton:
    """Exclusion phase followed by a two-state embracing phase.

    ``punish`` maps each player to its deviation target from the on-path
    states; ``None`` means the deviation goes unpunished.
    """
    states = {"Exclusion": exclusion, "PostL": post_L, "PostR": post_R}
    leader = {
        "Exclusion": {"L": "Exclusion", "R": "PostR"},
        "PostL": {"L": "PostL", "R": "PostR"},
        "PostR": {"L": "PostL", "R": "PostR"},
    }
    deviation = {}
    for lab in states:
        deviation[lab] = {
            i: (punish.get(i) or (leader[lab][i] if i != "P" else lab)) for i in ("L", "R", "P")
        }
    states.update(extra_states or {})
    leader.update(extra_leader or {})
    deviation.update(extra_deviation or {})
    auto = ContractAutomaton(par, regime, "Exclusion", states, leader, deviation)
    auto.validate()
    return auto


def _grim_fragment(par: Params, targets=("L", "R")):
    states, leader, deviation = {}, {}, {}
    for k in targets:
        lab = f"Punish{k}"
        states[lab] = grim_state(par, k)
        leader[lab] = {"L": lab, "R": lab}
        deviation[lab] = {"L": lab, "R": lab, "P": lab}
    return states, leader, deviation


def embracing_policies(par: Params, regime: CommitRegime | None = None):
    """On-path (s, y_L, y_R) after the first R lead, keyed by who led last."""
    regime = regime or classify(par)
    th = thresholds(par)
    t, m, beta = par.theta, par.m, par.beta
    name = regime.name
    if name == FIRST_BEST:
        if regime.construction == FB_SLACK:
            s_L, s_R = m, m
        elif regime.construction == FB_ONE_SIDED:
            pm = 0.5 + m
            s_L = m
            s_R = m - (t - beta * pm) / (beta * (beta * pm * (par.b + 1.0) - t))
        elif regime.construction == FB_TWO_SIDED:
            K = dec_intercept(par)
            s_L = (t - K) / th.psi
            s_R = (t - 1.0 + K) / th.psi
        else:
            raise UnsupportedRegime(
                f"first best at theta={t} but no first-best construction covers it")
        s_L, s_R = float(np.clip(s_L, -m, m)), float(np.clip(s_R, -m, m))
        return StatePolicy(s_L, t, t), StatePolicy(s_R, t, t)
    if name == UNKNOWN or not par.grim_valid:
        raise UnsupportedRegime(
            "second-best contract requires 1 - beta >= 2 m beta (grim trigger worst punishment)")
    if name == FULL_EMBRACE:
        y_R = 1.0 - beta * (2 * m * (par.b + 1) + t * (0.5 - m)) / (1.0 - beta * (0.5 - m))
        pol = StatePolicy(m, t, max(y_R, t))
        return pol, pol
    if name == PARTIAL_EMBRACE:
        s_L = (th.alpha_grim * beta + t - (par.b - 1) * beta / (2 * (1 - beta))) / th.psi
        s_L = float(np.clip(s_L, -m, m))
        y_R = max(1.0 - th.theta_bar, t)
        return StatePolicy(s_L, t, y_R), StatePolicy(m, t, y_R)
    if name == OPPORTUNISTIC:
        y_L, y_R = min(th.theta_bar, t), max(1.0 - th.theta_bar, t)
        return StatePolicy(-m, y_L, y_R), StatePolicy(m, y_L, y_R)
    raise UnsupportedRegime(f"unknown regime {name!r}")


def build_commitment(par: Params) -> ContractAutomaton:
    """Optimal commitment contract: exclusion phase, then embracing phase.

    Deviating agents are punished by grim trigger; the principal is bound by
    her commitment and has no deviation transition.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        regime = classify(par)
    post_L, post_R = embracing_policies(par, regime)
    th = thresholds(par)
    y_L0 = min(par.theta, th.theta_bar)
    # R leading during exclusion faces the same continuation as at PostR
    exclusion = StatePolicy(-par.m, y_L0, post_R.y_R)
    states, leader, deviation = _grim_fragment(par)
    auto = two_phase_automaton(
        par, f"commitment/{regime.name}", exclusion, post_L, post_R,
        punish={"L": "PunishL", "R": "PunishR"},
        extra_states=states, extra_leader=leader, extra_deviation=deviation,
    )
    auto.notes["construction"] = regime.construction
    return auto


def polarization(automaton: ContractAutomaton) -> float:
    """y_R - y_L in the embracing phase (the initial state if there is none)."""
    lab = "PostR" if "PostR" in automaton.states else automaton.initial
    pol = automaton.states[lab]
    return pol.y_R - pol.y_L


def single_agent_value(par: Params) -> float:
    """Principal's value if L alone leads forever and never moderates."""
    return -par.theta / (1.0 - par.beta)


@dataclass(frozen=True)
class CompetitionResult:
    theta_tilde: float
    bracketed: bool
    diagnostic: str = ""


def competition_threshold(beta: float, m: float, b: float, *, grid: int = 200,
                          tol: float = 1e-10) -> CompetitionResult:
    """Smallest theta above which two agents beat delegating to L alone.

    The gain from competition is scanned on a theta grid; the last sign change
    is refined by bisection.
    """
    probe = Params(beta, m, b, 0.0)
    if not probe.grim_valid:
        raise UnsupportedRegime("competition threshold needs 1 - beta >= 2 m beta")

    def gain(t):
        par = probe.replace(theta=t)
        return principal_ex_ante(build_commitment(par)) - single_agent_value(par)

    hi_end = 0.5 - 1e-9
    ts = np.linspace(0.0, hi_end, grid + 1)
    gs = np.array([gain(t) for t in ts])
    if gs[-1] <= 0:
        return CompetitionResult(float(hi_end), False,
                                 "two agents never strictly preferred on [0, 1/2)")
    neg = np.nonzero(gs <= 0)[0]
    if len(neg) == 0 or (len(neg) == 1 and neg[0] == 0):
        return CompetitionResult(0.0, True, "two agents preferred for all theta > 0")
    lo, hi = ts[neg[-1]], ts[neg[-1] + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gain(mid) > 0:
            hi = mid
        else:
            lo = mid
    return CompetitionResult(float(0.5 * (lo + hi)), True)


@dataclass
class RegionRow:
    beta: float
    theta: float
    regime: str
    s_L: float
    s_R: float
    y_L: float
    y_R: float
    w_P0: float
    polarization: float


def region_row(par: Params, build=build_commitment) -> RegionRow:
    try:
        auto = build(par)
    except UnsupportedRegime as err:
        nan = float("nan")
        return RegionRow(par.beta, par.theta, err.label, nan, nan, nan, nan, nan, nan)
    if "PostL" in auto.states:
        pl, pr = auto.states["PostL"], auto.states["PostR"]
    else:
        pl = pr = auto.states[auto.initial]
    return RegionRow(par.beta, par.theta, auto.regime.split("/", 1)[1], pl.s, pr.s, pl.y_L,
                     pr.y_R, principal_ex_ante(auto), polarization(auto))


def region_sweep(m: float, b: float, betas, thetas, build=build_commitment) -> list[RegionRow]:
    """Regime map over a (beta, theta) grid."""
    return [region_row(Params(beta, m, b, t), build) for beta in betas for t in thetas]
