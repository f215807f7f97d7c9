# %% [markdown]
# # Product measurements versus the Holevo quantity
#
# For the squeezed channel the three-state Holevo capacity exceeds the best
# pair, and the best pair measured with a single projective measurement
# falls further below.

# %%
from qubit_capacity import Povm, accessible_information, chi, make_squeezed, optimize_global, optimize_shannon

ch = make_squeezed(0.5, 0.435)
cap = optimize_global(ch, seed=0)
shan = optimize_shannon(ch, seed=0)
c2, c3 = cap.diagnostics["C_2"], cap.diagnostics["C_3"]
print(f"C={cap.value:.5f}  C_2={c2:.5f}  C_Shan={shan.value:.5f}")
print(f"(C_3 - C_2) / (C_2 - C_Shan) = {(c3 - c2) / (c2 - shan.value):.3f}")

# %% [markdown]
# The Shannon optimum uses orthogonal inputs measured along the optimal axis.
# Its mutual information never exceeds the Holevo chi of the same ensemble.

# %%
axis = shan.measurement_axis
print("inputs:", shan.ensemble.states.round(5).tolist(), "axis:", tuple(round(a, 5) for a in axis))
print("I_acc:", accessible_information(ch, shan.ensemble, Povm.projective(tuple(axis))))
print("chi of the same ensemble:", chi(ch, shan.ensemble))
