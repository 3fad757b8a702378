"""
Two agents inferring each other
===============================

Each agent sees its own posture exactly and its partner's through a noisy
channel, and prefers to match. Its generative model spans both hidden
states, so perception is joint inference over "me" and "you".
"""

from eperson.scenarios import make_scenario, run_episode

# %%
# The second-person Level-2 cell is the joint entropy over (self, other).
# It collapses once the first round of observations has been absorbed.
records = run_episode(make_scenario("signaling"), max_steps=4, seed=1)
for r in records:
    print(f"t={r.t} {r.agent:<3} posture={r.control}  belief about partner "
          f"{[round(x, 3) for x in r.beliefs['other']]}  u(s_I, s_You) = {r.uncertainty['level2.second']:.4f}")

# %%
# A decoupled variant, where the partner is invisible, keeps the other factor
# at its prior: joint uncertainty never falls below ln 2.
records = run_episode(make_scenario("signaling", decoupled=True), max_steps=4, seed=1)
print("decoupled:", [round(r.uncertainty["level2.second"], 4) for r in records if r.agent == "I"])
