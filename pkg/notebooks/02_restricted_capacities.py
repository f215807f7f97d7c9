# %% [markdown]
# # Vertical and horizontal two-state capacities
#
# Restricting the inputs to the two poles (vertical) or to a pair mirrored
# about the z-axis (horizontal) reduces the capacity problem to one
# dimension. For the stretched family the two restricted optima trade places
# at a crossing point in `s`.

# %%
import math

from qubit_capacity import (
    find_crossing,
    make_amplitude_damping,
    make_shifted_depolarizing,
    make_squeezed,
    make_stretched,
    optimize_horizontal,
    optimize_vertical,
)

for name, ch in [("depolarizing", make_shifted_depolarizing(0.5)), ("amplitude damping", make_amplitude_damping(0.5))]:
    v, h = optimize_vertical(ch), optimize_horizontal(ch)
    print(f"{name:18s} C_V={v.value:.5f} (z={v.avg_output.z:.3f})  C_H={h.value:.5f} (z={h.avg_output.z:.3f})")

# %%
s = find_crossing(lambda s: make_stretched(0.5, s), 0.5, math.sqrt(0.5))
ch = make_stretched(0.5, s)
v, h = optimize_vertical(ch), optimize_horizontal(ch)
print(f"stretched crossing s={s:.5f}: C_V={v.value:.5f} C_H={h.value:.5f}")
print("average outputs differ:", tuple(round(c, 4) for c in v.avg_output), tuple(round(c, 4) for c in h.avg_output))

# %% [markdown]
# Two different optimal ensembles with different average outputs means
# neither can be the true optimum: averaging them gives a strictly larger
# chi. The same crossing exists for the squeezed family.

# %%
q = find_crossing(lambda q: make_squeezed(0.5, q), 0.4, 0.5)
print(f"squeezed crossing q={q:.5f}: C={optimize_vertical(make_squeezed(0.5, q)).value:.5f}")
