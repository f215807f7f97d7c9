"""Independent reference computations used by the tests."""
import math

import numpy as np


def _h2_of_norm(r):
    r = np.clip(r, 0.0, 1.0)
    p, q = 0.5 * (1 + r), 0.5 * (1 - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return np.nan_to_num(out)


def brute_force_two_state(channel, n_theta=400, n_p=200):
    """Max chi over in-plane pure pairs on a (theta1, theta2, p) grid.

    Probabilities sit at bin centres so both endpoints are excluded; angles
    cover the full x-z circle.
    """
    l1, _, l3 = channel.lam
    t1, _, t3 = channel.shift
    th = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    ox, oz = t1 + l1 * np.sin(th), t3 + l3 * np.cos(th)
    s_out = _h2_of_norm(np.hypot(ox, oz))
    p = (np.arange(n_p) + 0.5) / n_p
    best = -np.inf
    arg = None
    for i in range(n_theta):
        ax = p[:, None] * ox[i] + (1 - p[:, None]) * ox[None, :]
        az = p[:, None] * oz[i] + (1 - p[:, None]) * oz[None, :]
        val = _h2_of_norm(np.hypot(ax, az)) - p[:, None] * s_out[i] - (1 - p[:, None]) * s_out[None, :]
        k = np.unravel_index(np.argmax(val), val.shape)
        if val[k] > best:
            best = float(val[k])
            arg = (th[i], th[k[1]], p[k[0]])
    return best, arg


def matrix_chi(channel, probs, states):
    """chi from 2x2 density matrices and eigenvalues (no Bloch-norm shortcut)."""
    from qubit_capacity.channel_core import BlochVector

    def s(m):
        ev = np.linalg.eigvalsh(m)
        ev = ev[ev > 1e-15]
        return float(-(ev * np.log2(ev)).sum())

    outs = [BlochVector(*channel.apply(w)).density_matrix() for w in states]
    avg = sum(p * o for p, o in zip(probs, outs))
    return s(avg) - sum(p * s(o) for p, o in zip(probs, outs))
