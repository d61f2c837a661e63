"""
Embracing the enemy
===================

Start with the simplest case: the principal shares the friend's bliss point,
rents are modest, and she can commit. The optimal contract shuts R out until
he first leads, then endorses him fully in exchange for a moderate policy.
"""

from powerbroker import Params, build_commitment, dec_check, principal_ex_ante, solve_values, stage_nash

par = Params(beta=0.5, m=0.25, b=1.0, theta=0.0)
auto = build_commitment(par)
print(auto.regime)
for lab in ("Exclusion", "PostL", "PostR"):
    print(f"{lab:10s}", auto.states[lab])

# R moderates to 3/7 once embraced; his DEC binds exactly
rep = dec_check(auto)
print("R's slack at PostR:", rep.get("PostR", "R").value)

# values are discounted sums; multiply by 1 - beta for per-period terms
w = solve_values(auto).w["P"]
print("ex ante:   ", principal_ex_ante(auto))
print("stage Nash:", principal_ex_ante(stage_nash(par)))

# once R has led, the principal would rather be back at stage Nash:
# honouring the embrace is exactly what commitment buys her
print("at PostR:  ", w["PostR"], "per period", (1 - par.beta) * w["PostR"])
