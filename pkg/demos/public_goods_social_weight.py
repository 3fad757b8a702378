"""
Social weighting in a public goods game
=======================================

Keeping the endowment pays more for each player individually, and mutual
contribution pays more jointly. An agent with social weight ``w`` picks the
action whose blended change in expected free energy (its own and its
partner's) is closest to neutral.
"""

from eperson.scenarios import make_scenario, run_episode
from eperson.scenarios import public_goods

LABELS = ["contribute+penalize", "contribute", "keep+penalize", "keep"]

# %%
# Contribution rate as a function of w, ten seeds of ten rounds each.
for w in (0.0, 0.1, 0.25, 0.5):
    hits = n = 0
    for seed in range(10):
        for r in run_episode(make_scenario("public-goods", w=w), 10, seed):
            if r.t > 0:
                hits += public_goods.contributes(r.control)
                n += 1
    print(f"w = {w:<4}  contribution rate {hits / n:.2f}")

# %%
# The valence of the chosen action is recorded in the trace.
for r in run_episode(make_scenario("public-goods", w=0.5), 3, 0):
    if r.t > 0:
        print(f"t={r.t} {r.agent:<3} {LABELS[r.control]:<20} valence {r.valence:+.4f}")

# %%
# A third party broadcasting a strict norm makes free riding costly even for
# purely self-interested players (w = 0).
for norm, name in ((public_goods.LENIENT, "lenient"), (public_goods.STRICT, "strict")):
    recs = run_episode(make_scenario("public-goods-norm", norm=norm), 10, 0)
    pair = [r for r in recs if r.agent != "they" and r.t > 0]
    print(f"{name:<8} norm: contribution rate {sum(public_goods.contributes(r.control) for r in pair) / len(pair):.2f}")
