"""
Which preferences are expected utilities?
=========================================

Two relations on the same small environment: a risk-averse one and a
lexicographic one.  Both can be planned with, yet neither is an expected
utility.  The axiom checker says which property breaks, and the utility
fitter returns a concrete pair it cannot explain.
"""

# %%
from dpp.instances import late_lexicographic, late_risk
from dpp.model import attainable
from dpp.planner import plan_backward, verify_optimal
from dpp.preorders import AXIOMS, TestsetSpec, build_testset, check_axiom
from dpp.representability import fit_utility

spec = TestsetSpec(seed=0)

# %%
for name, dpp in (("risk-averse", late_risk()), ("lexicographic", late_lexicographic())):
    omega = attainable(dpp.env).trajectories
    ts = build_testset(omega, spec)
    print(f"\n{name}: {len(ts)} tested distributions")
    for ax in AXIOMS:
        rep = check_axiom(dpp.relation, ax, ts)
        print(f"  {ax:<13} {rep.verdict}")
        if rep.witness is not None and ax == "convexity":
            print("    witness:", rep.witness.dists, "alpha =", rep.witness.alpha)
    pi = plan_backward(dpp).policy
    print("  planned policy is", verify_optimal(dpp, pi).verdict)
    fit = fit_utility(dpp.relation, omega, spec)
    print("  utility fit:", fit.verdict, "via", fit.witness["kind"])

# %% An ordinary expected-utility relation is recovered up to an affine map.
from dpp.preorders import expected_utility_relation
from dpp.representability import affine_equivalence

u = {"w0": 3, "w1": -1, "w2": 5, "w3": 0}
fit = fit_utility(expected_utility_relation(u), list(u), spec)
res = affine_equivalence(u, fit.utility)
print(fit.verdict, fit.utility, "scale", res.scale, "shift", res.shift)
