"""
Planning on features instead of histories
=========================================

If equal features imply equal futures, an optimal policy can read only the
feature.  We check that assumption, plan on discounted feature-action
frequencies, and look at a case where a feature forgets too much.
"""

# %%
from dpp.features import check_markov_feature, feature_policy_exists, plan_frequency
from dpp.instances import random_mfa_instance, repeat
from dpp.planner import optimal_action_sets, plan_backward, verify_optimal

inst = random_mfa_instance(4)
print("horizon", inst.dpp.interface.horizon, "weights", inst.gamma.weights)
print("Markov feature:", check_markov_feature(inst.dpp, inst.phi).verdict)

# %%
res = plan_frequency(inst.dpp, inst.rel_circ, inst.phi, inst.gamma)
for (t, x), a in sorted(res.policy.feature_table.items(), key=str):
    print(f"t={t} last={x[0]}  ->  {a}")
print("verified:", verify_optimal(inst.dpp, res.policy).verdict)

# %% Repeating the first action needs memory the last observation lacks.
dpp, phi = repeat()
sets = optimal_action_sets(dpp, plan_backward(dpp).policy)
found = feature_policy_exists(dpp, phi, sets)
print("feature policy exists:", found.exists)
for h, s in found.witness["sets"].items():
    print("  ", "|".join(h), "needs one of", s)
