"""
Four robots at a crossing
=========================

Each robot drives one lane through a 5 x 5 grid and models the robot it is
most likely to meet. Predicting the other's move lets it wait when the
centre is about to be taken. A forward-always baseline crashes every time.
"""

from eperson.scenarios import make_scenario, run_episode

# %%
for label, baseline in (("EFE planners", False), ("forward-always", True)):
    crashes = steps = 0
    for seed in range(30):
        sc = make_scenario("intersection", baseline=baseline)
        recs = run_episode(sc, 40, seed)
        crashes += sc.env.collided
        steps += max(r.t for r in recs)
    print(f"{label:<15} collisions {crashes}/30, mean episode length {steps / 30:.1f}")

# %%
# The controls of one planned episode (0 forward, 1 wait), per robot.
sc = make_scenario("intersection")
recs = run_episode(sc, 40, 3)
for agent in sc.agent_ids:
    print(f"{agent:<6}", "".join(str(r.control) for r in recs if r.agent == agent and r.t > 0))
print("collided:", sc.env.collided)
