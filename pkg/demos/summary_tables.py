# %% [markdown]
# Singularity types and collapse of compact quotients
#
# For each geometry and flow: the singularity type from the scaled curvature
# fit, whether the rescaled limit converges, and how a standard lattice
# quotient behaves in that limit.

# %%
from thurston_flows import DiagonalMetric, collapse_analysis, run_and_classify, run_limit_case

ROWS = [
    # geometry, flow, initial metric, limit case, collapse case
    ("nil", "rf", (1, 1, 1), "nil-rf", None),
    ("sol", "rf", (2, 1, 1), "sol-rf", None),
    ("sl2tilde", "rf", (1, 2, 1), "sl2-rf", None),
    ("isome2tilde", "rf", (2, 1, 1), "isome2-rf", None),
    ("nil", "xcf-", (1, 1, 1), "nil-xcf", None),
    ("sol", "xcf-", (2, 1, 1), "sol-xcf", None),
    ("sl2tilde", "xcf-", (1, 2, 2), "sl2-xcf-b=c", "b=c"),
    ("sl2tilde", "xcf-", (1, 2, 1), "sl2-xcf-b!=c", "b!=c"),
    ("isome2tilde", "xcf-", (2, 1, 1), "isome2-xcf", None),
]

# %%
header = f"{'geometry':12s} {'flow':5s} {'g0':10s} {'type':5s} {'T0':>8s} {'limit':16s} {'diff':>8s} {'collapse':9s} compact"
print(header)
print("-" * len(header))
for kind, flow, g0, case, ccase in ROWS:
    rep = run_and_classify(kind, flow, DiagonalMetric(*g0))
    lim = run_limit_case(case)
    col, comp = collapse_analysis(kind, flow, case=ccase).table_entries()
    T0 = f"{rep.T0:.4f}" if rep.T0 is not None else "-"
    print(f"{kind:12s} {flow:5s} {str(g0):10s} {rep.singularity_type:5s} {T0:>8s} {lim.reference:16s} "
          f"{lim.final_difference:8.1e} {col:9s} {comp}")

# %% [markdown]
# The Sol cross curvature flow row carries a note: its curvature blows up like
# 1/sqrt(T0 - t), so the scaled curvature stays bounded.

# %%
print(run_and_classify("sol", "xcf-", DiagonalMetric(2, 1, 1)).notes)
