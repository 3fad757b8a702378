"""
A rat in a T-maze looks before it leaps
=======================================

The baited arm is unknown at the start. A cue at the bottom of the maze
reveals it. Expected free energy makes the agent visit the cue first
because that is where the observations carry information, then commit to
the arm the cue points at.
"""

import numpy as np

from eperson.scenarios import make_scenario, run_episode
from eperson.scenarios import tmaze

# %%
# One episode. The higher level of the agent holds a belief over contexts;
# its entropy is the ``level3.first`` cell of the uncertainty matrix.
sc = make_scenario("tmaze")
records = run_episode(sc, max_steps=3, seed=4)
names = {tmaze.CENTER: "centre", tmaze.LEFT: "left arm", tmaze.RIGHT: "right arm", tmaze.CUE: "cue"}
print("true context:", "reward left" if sc.env.context == 0 else "reward right")
for r in records:
    where = "-" if r.control is None else names[r.control]
    print(f"t={r.t}  move to {where:<9}  context belief {np.round(r.beliefs['high'], 3)}"
          f"  u(s^h) = {r.uncertainty['level3.first']:.4f} nats")

# %%
# The first move's policy table. Cue-first policies carry the epistemic
# value; going straight to an arm is a coin flip with a large expected loss.
first = records[1]
best = sorted(first.policies, key=lambda p: p.G)[:4]
for p in best:
    print(f"policy {p.controls}: G = {p.G:+.3f}  epistemic {p.epistemic:.3f}  pragmatic {p.pragmatic:+.3f}")

# %%
# Over many seeds the pattern holds: cue first, then the correct arm.
hits = 0
for seed in range(50):
    sc = make_scenario("tmaze")
    recs = run_episode(sc, 3, seed)
    hits += recs[1].control == tmaze.CUE and recs[2].control == tmaze.LEFT + sc.env.context
print(f"cue then correct arm in {hits}/50 episodes")
