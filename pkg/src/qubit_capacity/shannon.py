"""Single-letter Shannon capacity: accessible information under product measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .capacity import CapacityResult, Ensemble, _finish
from .channel_core import BlochVector, QubitChannel, as_bloch


@dataclass(frozen=True)
class Povm:
    """Qubit POVM with elements ``E_k = weight_k (I + n_k.sigma)``.

    Completeness ``sum E_k = I`` means the weights sum to 1 and the weighted
    directions cancel. ``|n_k| <= 1`` keeps each element positive.
    """

    elements: tuple[tuple[float, BlochVector], ...]

    def __post_init__(self):
        elements = tuple((float(w), as_bloch(n)) for w, n in self.elements)
        object.__setattr__(self, "elements", elements)
        weights = np.array([w for w, _ in elements])
        dirs = np.array([tuple(n) for _, n in elements]).reshape(-1, 3)
        if np.any(weights < -1e-12):
            raise ValueError("POVM weights must be nonnegative")
        if any(n.norm > 1.0 + 1e-12 for _, n in elements):
            raise ValueError("POVM element is not positive semidefinite")
        if abs(weights.sum() - 1.0) > 1e-12 or np.abs(weights @ dirs).max() > 1e-12:
            raise ValueError("POVM elements do not sum to the identity")

    @classmethod
    def projective(cls, axis) -> "Povm":
        n = np.asarray(axis, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(((0.5, tuple(n)), (0.5, tuple(-n))))

    @classmethod
    def trivial(cls) -> "Povm":
        return cls(((1.0, (0.0, 0.0, 0.0)),))

    def matrices(self) -> list[np.ndarray]:
        return [2.0 * w * n.density_matrix() for w, n in self.elements]


def mutual_information(joint: np.ndarray) -> float:
    """I(J;K) in bits for a joint distribution array, with 0 log 0 = 0."""
    joint = np.asarray(joint, dtype=float)
    pj = joint.sum(axis=1, keepdims=True)
    pk = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log2(joint[mask] / (pj @ pk)[mask])))


def joint_distribution(channel: QubitChannel, ensemble: Ensemble, povm: Povm) -> np.ndarray:
    # Tr[(I + a.s)/2 * w (I + n.s)] = w (1 + a.n)
    outs = np.array([tuple(channel.apply(w)) for _, w in ensemble.members])
    weights = np.array([w for w, _ in povm.elements])
    dirs = np.array([tuple(n) for _, n in povm.elements])
    cond = weights * (1.0 + outs @ dirs.T)
    return ensemble.probs[:, None] * np.clip(cond, 0.0, None)


def accessible_information(channel: QubitChannel, ensemble: Ensemble, povm: Povm) -> float:
    return mutual_information(joint_distribution(channel, ensemble, povm))


def _mi_binary(p, a, b, nx, nz) -> float:
    """MI for two inputs with output Bloch x-z coords ``a``, ``b`` and axis ``(nx, nz)``."""
    qa = 0.5 * (1.0 + a[0] * nx + a[1] * nz)
    qb = 0.5 * (1.0 + b[0] * nx + b[1] * nz)
    m = p * qa + (1.0 - p) * qb
    return _h(m) - p * _h(qa) - (1.0 - p) * _h(qb)


def _h(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def _best_axis(p, a, b, grid: int = 24):
    """Inner search over the measurement angle in the x-z plane (period pi)."""
    def f(phi):
        return _mi_binary(p, a, b, math.sin(phi), math.cos(phi))

    phis = np.linspace(0.0, math.pi, grid, endpoint=False)
    vals = [f(x) for x in phis]
    k = int(np.argmax(vals))
    step = math.pi / grid
    r = minimize_scalar(lambda x: -f(x), bounds=(phis[k] - step, phis[k] + step),
                        method="bounded", options={"xatol": 1e-10})
    if -r.fun >= vals[k]:
        return float(r.x), float(-r.fun)
    return float(phis[k]), float(vals[k])


def _decode2(v):
    t1, t2, logit = v
    p = 1.0 / (1.0 + math.exp(-logit)) if logit > -700 else 0.0
    return p, (math.sin(t1), math.cos(t1)), (math.sin(t2), math.cos(t2))


def optimize_shannon(channel: QubitChannel, seed: int = 0, n_random: int = 12,
                     extended: bool = False, budget: float = 1.0) -> CapacityResult:
    """Maximize accessible information over 2-state x-z ensembles and projective measurements.

    Nested search: for fixed inputs the best measurement axis is found by a
    1-D scan plus Brent refinement; the outer Nelder-Mead runs over the two
    polar angles and the logit of the first probability. With
    ``extended=True`` a 3-state / 3-outcome search is reported as a
    diagnostic alongside.
    """
    l1, _, l3 = channel.lam
    t1, _, t3 = channel.shift

    def image(c):
        return (t1 + l1 * c[0], t3 + l3 * c[1])

    def f(v):
        p, s1, s2 = _decode2(v)
        return -_best_axis(p, image(s1), image(s2))[1]

    starts = [
        np.array([0.0, math.pi, 0.3]),
        np.array([0.0, math.pi, 0.0]),
        np.array([math.pi / 2, -math.pi / 2, 0.0]),
        np.array([1.2, -1.2, 0.0]),
    ]
    for k in range(n_random):
        rng = np.random.default_rng([seed, 7919, k])
        starts.append(np.concatenate([rng.uniform(0, 2 * math.pi, 2), rng.normal(0, 1, 1)]))

    best = None
    evaluations = 0
    for x0 in starts:
        r = minimize(f, x0, method="Nelder-Mead",
                     options={"xatol": 1e-9, "fatol": 1e-13, "maxfev": max(1, int(3000 * budget))})
        evaluations += int(r.nfev)
        if best is None or r.fun < best.fun - 1e-15:
            best = r
    p, s1, s2 = _decode2(best.x)
    phi, value = _best_axis(p, image(s1), image(s2))
    states = [(s1[0], 0.0, s1[1]), (s2[0], 0.0, s2[1])]
    res = _finish(channel, [p, 1.0 - p], states, evaluations)
    axis = BlochVector(math.sin(phi), 0.0, math.cos(phi))
    diagnostics = {"measurement_angle": phi}
    if len(res.ensemble) == 2:
        w1, w2 = res.ensemble.states
        diagnostics["input_overlap"] = float(w1 @ w2)
    if extended:
        diagnostics["extended_value"] = _extended_search(channel, seed)
    return replace(res, value=value, measurement_axis=axis, equidistance_residual=math.nan,
                   diagnostics=diagnostics)


def _trine_weights(phis):
    """Weights making three in-plane unit directions a complete POVM (None if infeasible)."""
    dirs = np.array([[math.sin(a), math.cos(a)] for a in phis])
    m = np.vstack([np.ones(3), dirs.T])
    try:
        w = np.linalg.solve(m, np.array([1.0, 0.0, 0.0]))
    except np.linalg.LinAlgError:
        return None, dirs
    if np.any(w < 0.0):
        return None, dirs
    return w, dirs


def _extended_search(channel: QubitChannel, seed: int, n_starts: int = 3) -> float:
    """Diagnostic: 3 pure x-z inputs against 3-outcome rank-one POVMs."""
    l1, _, l3 = channel.lam
    t1, _, t3 = channel.shift

    def inner(probs, outs):
        def g(phis):
            w, dirs = _trine_weights(phis)
            if w is None:
                return 1.0
            cond = w * (1.0 + outs @ dirs.T)
            return -mutual_information(probs[:, None] * np.clip(cond, 0.0, None))

        best = 0.0
        for x0 in ([0.0, 2.1, 4.2], [0.0, math.pi, 1.6]):
            r = minimize(g, x0, method="Nelder-Mead", options={"xatol": 1e-6, "fatol": 1e-11, "maxfev": 300})
            best = max(best, -r.fun)
        return best

    def outer(v):
        angles, logits = v[:3], np.append(v[3:], 0.0)
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
        outs = np.column_stack([t1 + l1 * np.sin(angles), t3 + l3 * np.cos(angles)])
        return -inner(probs, outs)

    best = 0.0
    starts = [np.array([0.0, math.pi, math.pi / 2, 3.0, 2.7])]
    for k in range(n_starts - 1):
        rng = np.random.default_rng([seed, 104729, k])
        starts.append(np.concatenate([rng.uniform(0, 2 * math.pi, 3), rng.normal(0, 1, 2)]))
    for x0 in starts:
        r = minimize(outer, x0, method="Nelder-Mead", options={"xatol": 1e-5, "fatol": 1e-9, "maxfev": 600})
        best = max(best, -r.fun)
    return float(best)
