"""Seeded Monte Carlo play of a contract automaton."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    AGENTS,
    PLAYERS,
    ContractAutomaton,
    InvalidParameter,
    Params,
    solve_values,
)

RNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class Deviation:
    path: int
    period: int
    player: str
    action: float


@dataclass(frozen=True)
class SimConfig:
    periods: int
    paths: int
    seed: int
    deviations: tuple[Deviation, ...] = ()

    def __post_init__(self):
        if self.periods < 1 or self.paths < 1:
            raise InvalidParameter("periods and paths must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")
        devs = tuple(d if isinstance(d, Deviation) else Deviation(*d) for d in self.deviations)
        for d in devs:
            if not 0 <= d.period < self.periods:
                raise InvalidParameter(f"deviation at period {d.period} outside 0..{self.periods - 1}")
            if not 0 <= d.path < self.paths:
                raise InvalidParameter(f"deviation on path {d.path} outside 0..{self.paths - 1}")
            if d.player not in PLAYERS:
                raise InvalidParameter(f"unknown deviator {d.player!r}")
        object.__setattr__(self, "deviations", devs)


@dataclass
class SimTrace:
    labels: list[str]
    params: Params
    config: SimConfig
    state: np.ndarray       # (paths, periods) state index
    s: np.ndarray           # endorsement actually played
    r_leads: np.ndarray     # True where R led
    y: np.ndarray
    payoff: dict[str, np.ndarray]
    terminal: np.ndarray    # state index after the last period
    tail: dict[str, np.ndarray]  # continuation value at the terminal state
    deviated: np.ndarray = field(default=None)

    @property
    def discount(self) -> np.ndarray:
        return self.params.beta ** np.arange(self.config.periods)

    def discounted(self, player: str, start: int = 0) -> np.ndarray:
        """Per-path payoff discounted to ``start``, tail included."""
        T = self.config.periods
        d = self.params.beta ** np.arange(T - start)
        return self.payoff[player][:, start:] @ d + self.params.beta ** (T - start) * self.tail[player]

    def leader_frequencies(self) -> dict[str, dict]:
        out = {}
        for n, lab in enumerate(self.labels):
            mask = (self.state == n) & ~self.deviated
            visits = int(mask.sum())
            if visits:
                out[lab] = {"visits": visits, "r_share": float(self.r_leads[mask].mean())}
        return out

    def first_r_lead(self) -> np.ndarray:
        """Period of each path's first R lead, -1 if R never led."""
        hit = self.r_leads.any(axis=1)
        return np.where(hit, self.r_leads.argmax(axis=1), -1)

    def constant_sum_error(self) -> float:
        return float(np.max(np.abs(self.payoff["L"] + self.payoff["R"] - (self.params.b - 1.0))))

    def summary(self) -> dict:
        first = self.first_r_lead()
        out = {
            "leader_frequencies": self.leader_frequencies(),
            "first_r_lead": {"mean": float(first[first >= 0].mean()) if (first >= 0).any() else None,
                             "never": int((first < 0).sum())},
        }
        for i in PLAYERS:
            mean, se = empirical_value(self, i)
            out[f"value_{i}"] = {"mean": mean, "se": se}
        return out


def _stage_payoffs(par: Params, y, r_leads):
    b = par.b
    return {
        "L": -np.abs(y) + np.where(r_leads, 0.0, b),
        "R": -np.abs(y - 1.0) + np.where(r_leads, b, 0.0),
        "P": -np.abs(y - par.theta),
    }


def simulate(automaton: ContractAutomaton, params: Params | None = None,
             config: SimConfig | None = None) -> SimTrace:
    """Play the automaton forward on independent seeded paths.

    A scripted agent deviation takes effect only if that agent leads in the
    scripted period; a principal deviation replaces the endorsement and hands
    play to her deviation target within the same period.
    """
    par = params or automaton.params
    if config is None:
        raise InvalidParameter("a SimConfig is required")
    labels = automaton.labels
    idx = {lab: n for n, lab in enumerate(labels)}
    pol = [automaton.states[lab] for lab in labels]
    s_of = np.array([p.s for p in pol])
    yL_of = np.array([p.y_L for p in pol])
    yR_of = np.array([p.y_R for p in pol])
    nxt = np.array([[idx[automaton.leader_transitions[lab][k]] for k in AGENTS] for lab in labels])
    dev_to = {i: np.array([idx[automaton.deviation_transitions[lab][i]] for lab in labels])
              for i in PLAYERS}

    P, T = config.paths, config.periods
    seqs = np.random.SeedSequence(config.seed).spawn(P)
    draws = np.stack([np.random.Generator(np.random.PCG64(sq)).random(T) for sq in seqs])

    by_period: dict[int, list[Deviation]] = {}
    for d in config.deviations:
        by_period.setdefault(d.period, []).append(d)

    state = np.zeros((P, T), dtype=np.int64)
    s = np.zeros((P, T))
    r_leads = np.zeros((P, T), dtype=bool)
    y = np.zeros((P, T))
    deviated = np.zeros((P, T), dtype=bool)
    cur = np.full(P, idx[automaton.initial], dtype=np.int64)
    for t in range(T):
        state[:, t] = cur
        s_t = s_of[cur].copy()
        acting = cur.copy()  # state whose policies are played this period
        p_devs = [d for d in by_period.get(t, []) if d.player == "P"]
        for d in p_devs:
            if not -par.m - 1e-12 <= d.action <= par.m + 1e-12:
                raise InvalidParameter(f"endorsement {d.action} outside [-m, m]")
            s_t[d.path] = d.action
            acting[d.path] = dev_to["P"][cur[d.path]]
            deviated[d.path, t] = True
        r = draws[:, t] < 0.5 + s_t
        y_t = np.where(r, yR_of[acting], yL_of[acting])
        new = nxt[acting, r.astype(np.int64)]
        for d in by_period.get(t, []):
            if d.player == "P":
                continue
            leads = r[d.path] if d.player == "R" else not r[d.path]
            if not leads:
                continue
            if not 0.0 <= d.action <= 1.0:
                raise InvalidParameter(f"policy {d.action} outside [0, 1]")
            y_t[d.path] = d.action
            new[d.path] = dev_to[d.player][acting[d.path]]
            deviated[d.path, t] = True
        s[:, t] = s_t
        r_leads[:, t] = r
        y[:, t] = y_t
        cur = new

    w = solve_values(automaton, par).w
    tail = {i: np.array([w[i][lab] for lab in labels])[cur] for i in PLAYERS}
    return SimTrace(labels, par, config, state, s, r_leads, y, _stage_payoffs(par, y, r_leads),
                    cur, tail, deviated)


def empirical_value(trace: SimTrace, player: str, start: int = 0) -> tuple[float, float]:
    """Mean discounted payoff across paths and its standard error."""
    if player not in PLAYERS:
        raise InvalidParameter(f"unknown player {player!r}")
    vals = trace.discounted(player, start)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return float(vals.mean()), se


def trace_header(trace: SimTrace, automaton: ContractAutomaton) -> dict:
    return {
        "rng": RNG_NAME,
        "numpy_version": np.__version__,
        "seeding": "SeedSequence(seed).spawn(paths)",
        "seed": trace.config.seed,
        "periods": trace.config.periods,
        "paths": trace.config.paths,
        "params": trace.params.to_dict(),
        "regime": automaton.regime,
    }


def write_jsonl(trace: SimTrace, automaton: ContractAutomaton, fh) -> None:
    """Header line, one line per (path, period), then a summary line."""
    fh.write(json.dumps({"header": trace_header(trace, automaton)}) + "\n")
    P, T = trace.state.shape
    for p in range(P):
        for t in range(T):
            fh.write(json.dumps({
                "path": p, "period": t,
                "state": trace.labels[trace.state[p, t]],
                "s": float(trace.s[p, t]),
                "leader": "R" if trace.r_leads[p, t] else "L",
                "y": float(trace.y[p, t]),
                "u_L": float(trace.payoff["L"][p, t]),
                "u_R": float(trace.payoff["R"][p, t]),
                "u_P": float(trace.payoff["P"][p, t]),
                "deviation": bool(trace.deviated[p, t]),
            }) + "\n")
    fh.write(json.dumps({"summary": trace.summary()}) + "\n")
