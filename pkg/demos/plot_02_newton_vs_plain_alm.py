"""
Newton acceleration against the plain augmented Lagrangian
==========================================================

Both modes share the same subproblem solver and stopping test. The only
difference is whether a Newton step on the reduced KKT system is tried
first at each outer iteration.
"""

from pdalm import RunSpec, run_benchmark

report = run_benchmark(RunSpec(problem_names="all", modes=["pdalm", "alm"]))

print(f"{'problem':20s} {'pdalm':>6s} {'alm':>6s} {'newton':>7s}")
by_key = {(r["problem"], r["mode"]): r for r in report.rows}
for name in sorted({r["problem"] for r in report.rows}):
    pd, al = by_key[(name, "pdalm")], by_key[(name, "alm")]
    print(f"{name:20s} {pd['outer_iters']:6d} {al['outer_iters']:6d} {pd['newton_accepted']:7d}")

###############################################################################
# The performance profile reports, for each mode, the fraction of problems
# solved within a factor alpha of the fastest mode on that problem.

for mode, fractions in report.profile.items():
    print(mode, fractions)
