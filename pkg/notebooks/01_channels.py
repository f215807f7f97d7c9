# %% [markdown]
# # Qubit channels as maps on the Bloch ball
#
# A channel here is a diagonal affine map `w -> t + L w`. Its image of the
# ball is an ellipsoid; complete positivity is a stronger condition than
# the ellipsoid fitting inside the ball, and is checked with the Choi matrix.

# %%
import math

import numpy as np

from qubit_capacity import (
    choi_matrix,
    entropy,
    is_cp,
    make_amplitude_damping,
    make_shifted_depolarizing,
    make_stretched,
)
from qubit_capacity.channel_core import choi_min_eigenvalue

dep = make_shifted_depolarizing(0.5)
print("north pole ->", dep.apply((0, 0, 1)))
print("south pole ->", dep.apply((0, 0, -1)))
print("entropy of the image of the south pole:", entropy(dep.apply((0, 0, -1))))

# %% [markdown]
# Amplitude damping shares the same vertical axis but its sides are
# stretched to `sqrt(mu)`.

# %%
amp = make_amplitude_damping(0.5)
print(amp.lam, amp.shift)
print(np.round(choi_matrix(amp).real, 4))

# %% [markdown]
# The stretched family interpolates between the two. Scanning `s` shows the
# smallest Choi eigenvalue crossing zero at `s = sqrt(mu)`.

# %%
for s in (0.5, 0.6, 0.7, math.sqrt(0.5), 0.72, 0.75):
    ch = make_stretched(0.5, s, override=True)
    print(f"s={s:.5f}  min eig={choi_min_eigenvalue(ch):+.2e}  cp={is_cp(ch)}")
