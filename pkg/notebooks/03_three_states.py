# %% [markdown]
# # Channels that need three input states
#
# The global search runs 2-, 3- and 4-state multi-start searches. For the
# stretched channel the best ensemble has three states, beating every pair.

# %%
from qubit_capacity import (
    average_ensembles,
    chi,
    divergence_radius_check,
    equidistance_check,
    make_stretched,
    optimize_global,
    optimize_horizontal,
    optimize_vertical,
    symmetric_triple_solve,
)
from qubit_capacity.capacity import ring_replacement

ch = make_stretched(0.5, 0.6)
res = optimize_global(ch, seed=0)
print("C_2, C_3, C_4:", [round(res.diagnostics[k], 6) for k in ("C_2", "C_3", "C_4")])
for p, w in res.ensemble.members:
    print(f"  p={p:.5f}  w=({w.x:+.5f}, {w.y:+.5f}, {w.z:+.5f})")

# %% [markdown]
# Optimality certificates: every output sits at the same relative-entropy
# distance from the average output, and no output of the channel is farther.

# %%
print("equidistance residual:", equidistance_check(ch, res))
print("divergence radius excess:", divergence_radius_check(ch, res))

# %% [markdown]
# A reduced solver for the symmetric triple (north pole plus a mirrored
# pair) reaches the same value with a 1-D root find.

# %%
print("symmetric triple:", symmetric_triple_solve(ch).value)

# %% [markdown]
# The averaging argument in action: the mixture of the vertical and
# horizontal optima beats the mean of their chi values, and the mirrored pair can be spread into a ring of
# four without changing chi.

# %%
v, h = optimize_vertical(ch), optimize_horizontal(ch)
mixed = average_ensembles(v.ensemble, h.ensemble)
print("mean of chi(V), chi(H):", 0.5 * (v.value + h.value), " chi(mix):", chi(ch, mixed))
ring = ring_replacement(res.ensemble, (1, 2))
print("four-state ring:", len(ring), chi(ch, ring))
