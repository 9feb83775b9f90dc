"""
When ordinal backward induction is not enough
=============================================

A preference over trajectory distributions that looks at *where* a
distribution lives can defeat every policy at once.  Here the ranking
rewards ``a1`` inside one cylinder and punishes it everywhere else.
"""

# %%
from dpp.instances import CYLINDER_ROOT, no_optimal
from dpp.model import history_key
from dpp.planner import brute_force_optimal, plan_backward, verify_optimal

dpp = no_optimal()
print(dpp.interface)

# %% The planner still returns something, and it survives one-step deviations.
plan = plan_backward(dpp)
for h, a in sorted(plan.actions.items(), key=lambda kv: (len(kv[0]), kv[0])):
    print(f"{history_key(h):>12}  ->  {a}")
print("local check:", verify_optimal(dpp, plan.policy).verdict)

# %% Comparing against every deterministic competitor tells a different story.
v = verify_optimal(dpp, plan.policy, global_check=True)
print("global check:", v.verdict, "at", history_key(v.witness["history"]))

# %% Exhaustive search confirms that no policy is optimal.
bf = brute_force_optimal(dpp)
print(f"{len(bf.optimal)} optimal out of {bf.n_policies}")

phi = dpp.relation.phi
for c in bf.certificate:
    if c["history"] == CYLINDER_ROOT and phi(c["policy_outcome"]) == 0 and phi(c["competitor_outcome"]) == 1:
        print("beaten inside the cylinder:", phi(c["policy_outcome"]), "<", phi(c["competitor_outcome"]))
        break
