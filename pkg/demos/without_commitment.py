"""
Losing the ability to commit
============================

Without commitment the principal must want to carry out her own
punishments. At theta = 0 that works only when the rent clears a cutoff;
just below it the game collapses to stage Nash.
"""

from powerbroker import Params, b_bar0, build_nocommitment, principal_ex_ante

par = Params(beta=0.5, m=0.25, b=1.0, theta=0.0)
cut = b_bar0(par)
print("rent cutoff:", cut)

for b in (0.40, 0.48, cut, 0.49, 0.60, 1.00):
    auto = build_nocommitment(par.replace(b=b))
    print(f"b={b:.4f}  {auto.regime:32s}  value {principal_ex_ante(auto):.4f}")

# a centrist principal facing small rents: the stick for L has to be softened,
# and below a second cutoff the endorsement of R unravels
for b in (0.62, 0.70, 0.80, 0.90):
    auto = build_nocommitment(Params(0.2, 0.2, b, 0.3))
    print(f"b={b:.2f}  {auto.regime:32s}  s_R={auto.states.get('PostR', auto.states[auto.initial]).s:+.4f}")
