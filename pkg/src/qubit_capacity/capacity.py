"""Holevo chi and its maximization over input ensembles of a qubit channel."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .channel_core import (
    BlochVector,
    QubitChannel,
    as_bloch,
    entropy,
    entropy_of_norm,
    fibonacci_sphere,
    relative_entropy,
    relative_entropy_to,
)

MAX_STATES = 8
PRUNE_PROB = 1e-9
MERGE_DIST = 1e-6
THREE_STATE_GAIN = 1e-6

NORTH = BlochVector(0.0, 0.0, 1.0)
SOUTH = BlochVector(0.0, 0.0, -1.0)


class NoSignChangeError(ValueError):
    """The crossing bracket does not contain a sign change of C_V - C_H."""


class NoSolutionError(ValueError):
    """No symmetric triple satisfies the equidistance condition."""


@dataclass(frozen=True)
class Ensemble:
    """Finite list of ``(prob, state)`` pairs, states as Bloch vectors."""

    members: tuple[tuple[float, BlochVector], ...]

    def __post_init__(self):
        members = tuple((float(p), as_bloch(w)) for p, w in self.members)
        object.__setattr__(self, "members", members)
        if not 1 <= len(members) <= MAX_STATES:
            raise ValueError(f"ensemble size {len(members)} outside [1, {MAX_STATES}]")
        if any(p < 0.0 for p, _ in members):
            raise ValueError("negative probability in ensemble")
        total = sum(p for p, _ in members)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(w.norm > 1.0 + 1e-12 for _, w in members):
            raise ValueError("ensemble state outside the Bloch ball")

    @classmethod
    def from_arrays(cls, probs, states) -> "Ensemble":
        probs = np.asarray(probs, dtype=float)
        probs = probs / probs.sum()
        return cls(tuple(zip(probs.tolist(), (as_bloch(w) for w in states))))

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    @property
    def states(self) -> np.ndarray:
        return np.array([tuple(w) for _, w in self.members], dtype=float).reshape(-1, 3)

    def average(self) -> BlochVector:
        return as_bloch(self.probs @ self.states)

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> list:
        return [{"p": p, "w": list(w)} for p, w in self.members]

    @classmethod
    def from_json(cls, items) -> "Ensemble":
        return cls.from_arrays([it["p"] for it in items], [it["w"] for it in items])


@dataclass(frozen=True)
class CapacityResult:
    value: float
    ensemble: Ensemble
    avg_output: BlochVector
    equidistance_residual: float = math.nan
    evaluations: int = 0
    measurement_axis: Optional[BlochVector] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "ensemble": self.ensemble.to_json(),
            "avg_output": list(self.avg_output),
            "equidistance_residual": self.equidistance_residual,
            "evaluations": self.evaluations,
        }
        if self.measurement_axis is not None:
            out["measurement_axis"] = list(self.measurement_axis)
        if self.diagnostics:
            out["diagnostics"] = dict(self.diagnostics)
        return out


def _chi_raw(lam, shift, probs, states) -> float:
    """chi for plain sequences; the optimizers' hot loop."""
    l1, l2, l3 = lam
    t1, t2, t3 = shift
    ax = ay = az = 0.0
    avg_entropy = 0.0
    for p, (x, y, z) in zip(probs, states):
        ox, oy, oz = t1 + l1 * x, t2 + l2 * y, t3 + l3 * z
        ax += p * ox
        ay += p * oy
        az += p * oz
        avg_entropy += p * entropy_of_norm(math.sqrt(ox * ox + oy * oy + oz * oz))
    return entropy_of_norm(math.sqrt(ax * ax + ay * ay + az * az)) - avg_entropy


def chi(channel: QubitChannel, ensemble: Ensemble) -> float:
    """``S[Phi(avg)] - sum_j p_j S[Phi(rho_j)]`` in bits."""
    return float(_chi_raw(channel.lam, channel.shift, ensemble.probs.tolist(), ensemble.states.tolist()))


def output_average(channel: QubitChannel, ensemble: Ensemble) -> BlochVector:
    return channel.apply(ensemble.average())


def merge_duplicates(probs, states, dist: float = MERGE_DIST, prune: float = 0.0):
    """Drop states with prob <= ``prune`` and merge states closer than ``dist``."""
    out_p: list[float] = []
    out_w: list[np.ndarray] = []
    for p, w in zip(probs, np.asarray(states, dtype=float)):
        if p <= prune:
            continue
        for k, v in enumerate(out_w):
            if np.linalg.norm(v - w) <= dist:
                out_p[k] += p
                break
        else:
            out_p.append(float(p))
            out_w.append(w.copy())
    total = sum(out_p)
    return [p / total for p in out_p], out_w


def average_ensembles(e1: Ensemble, e2: Ensemble) -> Ensemble:
    probs = np.concatenate([0.5 * e1.probs, 0.5 * e2.probs])
    states = np.vstack([e1.states, e2.states])
    p, w = merge_duplicates(probs, states, dist=1e-12)
    return Ensemble.from_arrays(p, w)


def _canonical_order(probs, states):
    keys = [(-round(w[2], 9), -round(w[0], 9), -round(w[1], 9)) for w in states]
    order = sorted(range(len(states)), key=lambda k: keys[k])
    return [probs[k] for k in order], [states[k] for k in order]


def _is_axially_symmetric(channel: QubitChannel) -> bool:
    l1, l2, _ = channel.lam
    t1, t2, _ = channel.shift
    return abs(l1 - l2) < 1e-15 and t1 == 0.0 and t2 == 0.0


def _rotate_to_xz(states: np.ndarray) -> np.ndarray:
    """Rotate about z so the off-axis state with the largest transverse part sits at +x."""
    rho = np.hypot(states[:, 0], states[:, 1])
    k = int(np.argmax(rho))
    if rho[k] < 1e-9:
        return states
    ang = -math.atan2(states[k, 1], states[k, 0])
    c, s = math.cos(ang), math.sin(ang)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    out = states @ rot.T
    out[np.abs(out) < 1e-15] = 0.0
    return out


def equidistance_check(channel: QubitChannel, result: CapacityResult) -> float:
    """Largest deviation of ``H[Phi(rho_i), Phi(rho*)]`` from the claimed capacity."""
    avg = channel.apply(result.ensemble.average())
    worst = 0.0
    for _, w in result.ensemble.members:
        d = relative_entropy(channel.apply(w), avg)
        if math.isinf(d):
            return math.inf
        worst = max(worst, abs(d - result.value))
    return worst


def divergence_radius_check(channel: QubitChannel, result: CapacityResult, grid: int = 10_000) -> float:
    """``max_gamma H[Phi(gamma), Phi(rho*)] - value`` over ``grid`` pure states gamma."""
    if grid < 100:
        raise ValueError("grid must be at least 100")
    pts = fibonacci_sphere(grid)
    lam = np.asarray(channel.lam)
    images = np.asarray(channel.shift) + pts * lam
    avg = channel.apply(result.ensemble.average())
    return float(relative_entropy_to(images, avg).max()) - result.value


def _finish(channel: QubitChannel, probs, states, evaluations: int, canonical_rotation=False,
            **diagnostics) -> CapacityResult:
    probs, states = merge_duplicates(probs, states, prune=PRUNE_PROB)
    states = np.array(states)
    if canonical_rotation:
        states = _rotate_to_xz(states)
    probs, states = _canonical_order(probs, list(states))
    ens = Ensemble.from_arrays(probs, states)
    res = CapacityResult(
        value=chi(channel, ens),
        ensemble=ens,
        avg_output=output_average(channel, ens),
        evaluations=evaluations,
        diagnostics=diagnostics,
    )
    return replace(res, equidistance_residual=equidistance_check(channel, res))


def _maximize_1d(f: Callable[[float], float], lo: float, hi: float, grid: int = 201):
    """Global max of a 1-D function: coarse grid, then bounded Brent around the best cell."""
    xs = np.linspace(lo, hi, grid)
    vals = [f(x) for x in xs]
    k = int(np.argmax(vals))
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, grid - 1)]
    r = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded",
                        options={"xatol": 1e-12, "maxiter": 500})
    if -r.fun >= vals[k]:
        return float(r.x), float(-r.fun), grid + int(r.nfev)
    return float(xs[k]), float(vals[k]), grid + int(r.nfev)


def optimize_vertical(channel: QubitChannel) -> CapacityResult:
    """chi maximized over mixtures of the two poles (the z-axis line)."""
    def f(p):
        return _chi_raw(channel.lam, channel.shift, (p, 1.0 - p), (NORTH, SOUTH))

    p, _, nfev = _maximize_1d(f, 0.0, 1.0)
    return _finish(channel, [p, 1.0 - p], [NORTH, SOUTH], nfev)


def optimize_horizontal(channel: QubitChannel) -> CapacityResult:
    """chi maximized over equiprobable pairs ``(+-sqrt(1 - z^2), 0, z)``."""
    def pair(z):
        x = math.sqrt(max(0.0, 1.0 - z * z))
        return ((x, 0.0, z), (-x, 0.0, z))

    def f(z):
        return _chi_raw(channel.lam, channel.shift, (0.5, 0.5), pair(z))

    z, _, nfev = _maximize_1d(f, -1.0, 1.0)
    return _finish(channel, [0.5, 0.5], list(pair(z)), nfev)


def find_crossing(family: Callable[[float], QubitChannel], lo: float, hi: float,
                  tol: float = 1e-7) -> float:
    """Parameter in ``[lo, hi]`` where vertical and horizontal capacities agree (bisection)."""
    def gap(x):
        ch = family(x)
        return optimize_vertical(ch).value - optimize_horizontal(ch).value

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoSignChangeError(f"C_V - C_H has the same sign at {lo} ({g_lo:+.3g}) and {hi} ({g_hi:+.3g})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------------
# n-state search
# ----------------------------------------------------------------------------

class _Layout:
    """Maps an unconstrained parameter vector to (probs, pure states)."""

    def __init__(self, n: int, plane: Optional[str]):
        if plane not in (None, "xz"):
            raise ValueError(f"unsupported plane selector {plane!r}")
        self.n = n
        self.plane = plane
        self.n_angles = n if plane else 2 * n
        self.dim = self.n_angles + n - 1

    def decode(self, v):
        n = self.n
        v = v.tolist() if isinstance(v, np.ndarray) else list(v)
        if self.plane:
            states = [(math.sin(t), 0.0, math.cos(t)) for t in v[:n]]
        else:
            states = []
            for k in range(n):
                th, ph = v[2 * k], v[2 * k + 1]
                st = math.sin(th)
                states.append((st * math.cos(ph), st * math.sin(ph), math.cos(th)))
        logits = v[self.n_angles:] + [0.0]
        top = max(logits)
        ex = [math.exp(a - top) for a in logits]
        total = sum(ex)
        return [e / total for e in ex], states

    def encode(self, probs, states) -> np.ndarray:
        angles = []
        for x, y, z in states:
            th = math.acos(max(-1.0, min(1.0, z)))
            if self.plane:
                angles.append(math.atan2(x, z))
            else:
                angles.extend([th, math.atan2(y, x)])
        p = np.maximum(np.asarray(probs, dtype=float), 1e-12)
        logits = np.log(p[:-1]) - math.log(p[-1])
        return np.concatenate([angles, logits])

    def random(self, rng: np.random.Generator) -> np.ndarray:
        if self.plane:
            angles = rng.uniform(0.0, 2 * math.pi, self.n)
        else:
            th = np.arccos(rng.uniform(-1.0, 1.0, self.n))
            ph = rng.uniform(0.0, 2 * math.pi, self.n)
            angles = np.column_stack([th, ph]).ravel()
        return np.concatenate([angles, rng.normal(0.0, 1.0, self.n - 1)])


def _ring(n: int, theta: float, plane: Optional[str]):
    if plane:
        return [(((-1) ** k) * math.sin(theta), 0.0, math.cos(theta)) for k in range(n)]
    return [tuple(BlochVector.from_angles(theta, 2 * math.pi * k / n)) for k in range(n)]


def _pad(states, probs, n, fill_states, eps=0.02):
    """Truncate or extend a start design to exactly ``n`` states."""
    states = list(states)[:n]
    probs = list(probs)[:n]
    k = 0
    while len(states) < n:
        states.append(fill_states[k % len(fill_states)])
        probs.append(eps)
        k += 1
    total = sum(probs)
    return [p / total for p in probs], states


def _deterministic_starts(n: int, plane: Optional[str]):
    eq = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)] if plane else [(1.0, 0.0, 0.0), (-0.5, 0.866, 0.0), (-0.5, -0.866, 0.0)]
    starts = []
    # vertical pair
    starts.append(_pad([tuple(NORTH), tuple(SOUTH)], [0.6, 0.4], n, eq))
    # horizontal pair slightly above the equator
    h = math.sin(1.4), math.cos(1.4)
    starts.append(_pad([(h[0], 0.0, h[1]), (-h[0], 0.0, h[1])], [0.5, 0.5], n,
                       [tuple(NORTH), tuple(SOUTH)]))
    # north pole plus a ring at two southern latitudes
    for theta in (1.9, 2.3):
        ring = _ring(max(n - 1, 1), theta, plane)
        starts.append(_pad([tuple(NORTH)] + ring, [0.4] + [0.6 / len(ring)] * len(ring), n, eq))
    # n states equally spaced on the x-z great circle, two phases
    for offset in (0.0, math.pi / n):
        circ = [(math.sin(offset + 2 * math.pi * k / n), 0.0, math.cos(offset + 2 * math.pi * k / n))
                for k in range(n)]
        starts.append((([1.0 / n] * n), circ))
    # south pole plus a northern ring; an equatorial ring
    ring = _ring(max(n - 1, 1), 1.2, plane)
    starts.append(_pad([tuple(SOUTH)] + ring, [0.3] + [0.7 / len(ring)] * len(ring), n, eq))
    starts.append(([1.0 / n] * n, _ring(n, 1.6, plane)))
    return starts


def _nelder_mead(f, x0, xatol, maxfev, fatol=1e-15):
    r = minimize(f, x0, method="Nelder-Mead",
                 options={"xatol": xatol, "fatol": fatol, "maxfev": maxfev, "adaptive": len(x0) > 6})
    return r.x, float(r.fun), int(r.nfev)


def _cap(maxfev: int, budget: float) -> int:
    return max(1, int(maxfev * budget))


def optimize_n_state(channel: QubitChannel, n: int, plane: Optional[str] = None, seed: int = 0,
                     n_random: int = 24, warm_start: Optional[Ensemble] = None,
                     polish: int = 2, budget: float = 1.0) -> CapacityResult:
    """Maximize chi over ensembles of ``n`` pure states.

    Multi-start Nelder-Mead on polar/azimuthal angles plus softmax logits.
    The 8 deterministic designs and ``n_random`` seeded random starts are
    searched loosely; the best ``polish`` are then restarted until the
    simplex collapses below 1e-9. ``budget`` scales every evaluation cap.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must be between 1 and 4")
    lam, shift = channel.lam, channel.shift
    symmetric = plane is None and _is_axially_symmetric(channel)
    if n == 1:
        return _finish(channel, [1.0], [tuple(NORTH)], 1)
    layout = _Layout(n, plane)

    def f(v):
        probs, states = layout.decode(v)
        return -_chi_raw(lam, shift, probs, states)

    starts = [layout.encode(p, w) for p, w in _deterministic_starts(n, plane)]
    if warm_start is not None:
        starts.append(layout.encode(*_warm_pad(warm_start, n)))
    for k in range(n_random):
        starts.append(layout.random(np.random.default_rng([seed, n, k])))

    evaluations = 0
    coarse = []
    for x0 in starts:
        x, fx, nfev = _nelder_mead(f, x0, 1e-4, _cap(120 * layout.dim, budget), fatol=1e-10)
        evaluations += nfev
        coarse.append((fx, x))
    # stable sort keeps deterministic starts ahead on exact ties
    coarse.sort(key=lambda item: item[0])

    best_x, best_f = coarse[0][1], coarse[0][0]
    for fx, x in coarse[:polish]:
        for _ in range(8):
            x_new, f_new, nfev = _nelder_mead(f, x, 1e-9, _cap(2000 * layout.dim, budget))
            evaluations += nfev
            improved = f_new < fx - 1e-14
            x, fx = x_new, min(fx, f_new)
            if not improved:
                break
        if fx < best_f:
            best_x, best_f = x, fx
    probs, states = layout.decode(best_x)
    return _finish(channel, probs, states, evaluations, canonical_rotation=symmetric, n_requested=n)


def _warm_pad(ensemble: Ensemble, n: int):
    """Pad an ensemble to ``n`` states by splitting its heaviest member (chi unchanged)."""
    probs = list(ensemble.probs)
    states = [tuple(w) for w in ensemble.states]
    probs, states = probs[:n], states[:n]
    while len(states) < n:
        k = int(np.argmax(probs))
        probs[k] *= 0.5
        probs.append(probs[k])
        states.append(states[k])
    total = sum(probs)
    return [p / total for p in probs], states


def optimize_global(channel: QubitChannel, seed: int = 0, n_random: int = 24,
                    budget: float = 1.0) -> CapacityResult:
    """Best of the 2-, 3- and 4-state searches over the full sphere.

    Each size is warm-started from the previous optimum, so the sequence of
    values is non-decreasing. Ties within 1e-9 go to the smaller ensemble.
    """
    per_n = {}
    results = {}
    prev = None
    evaluations = 0
    for n in (2, 3, 4):
        res = optimize_n_state(channel, n, seed=seed, n_random=n_random, warm_start=prev, budget=budget)
        if prev is not None and res.value < results[n - 1].value:
            res = results[n - 1]
        results[n] = res
        per_n[n] = float(res.value)
        evaluations += res.evaluations
        prev = res.ensemble
    best = results[2]
    for n in (3, 4):
        if results[n].value > best.value + 1e-9:
            best = results[n]
    diagnostics = {
        "C_2": per_n[2],
        "C_3": per_n[3],
        "C_4": per_n[4],
        "three_states_needed": bool(per_n[3] > per_n[2] + THREE_STATE_GAIN),
        "effective_states": len(best.ensemble),
    }
    return replace(best, evaluations=evaluations, diagnostics=diagnostics)


def symmetric_triple_solve(channel: QubitChannel, grid: int = 721) -> CapacityResult:
    """Triple north pole + ``(+-sin t, 0, cos t)`` fixed by output equidistance.

    For each polar angle the weight ``p`` on the pole is the root of
    ``H[Phi(north), Phi(rho*)] = H[Phi(side), Phi(rho*)]``; chi is then
    maximized over the angle.
    """
    lam, shift = channel.lam, channel.shift
    north_img = channel.apply(NORTH)

    def triple(theta, p):
        s, c = math.sin(theta), math.cos(theta)
        return [p, 0.5 * (1 - p), 0.5 * (1 - p)], [tuple(NORTH), (s, 0.0, c), (-s, 0.0, c)]

    def solve_p(theta):
        s, c = math.sin(theta), math.cos(theta)
        side_img = channel.apply((s, 0.0, c))

        def g(p):
            avg = channel.apply((0.0, 0.0, p + (1 - p) * c))
            return relative_entropy(north_img, avg) - relative_entropy(side_img, avg)

        a, b = 1e-9, 1.0 - 1e-9
        ga, gb = g(a), g(b)
        if not (np.isfinite(ga) and np.isfinite(gb)) or (ga > 0) == (gb > 0):
            return None
        return brentq(g, a, b, xtol=1e-14, rtol=1e-15)

    def value(theta):
        p = solve_p(theta)
        if p is None:
            return -math.inf
        return _chi_raw(lam, shift, *triple(theta, p))

    thetas = np.linspace(1e-3, math.pi - 1e-3, grid)
    vals = np.array([value(t) for t in thetas])
    if not np.isfinite(vals).any():
        raise NoSolutionError("equidistance equation has no root in (0, 1) for any angle")
    k = int(np.argmax(vals))
    lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, grid - 1)]
    r = minimize_scalar(lambda t: -value(t), bounds=(lo, hi), method="bounded",
                        options={"xatol": 1e-12})
    theta = float(r.x) if -r.fun >= vals[k] else float(thetas[k])
    p = solve_p(theta)
    probs, states = triple(theta, p)
    return _finish(channel, probs, states, grid + int(r.nfev), theta=theta, p_north=p)


def rotate_about_z(ensemble: Ensemble, angle: float) -> Ensemble:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return Ensemble.from_arrays(ensemble.probs, ensemble.states @ rot.T)


def ring_replacement(ensemble: Ensemble, pair: Sequence[int]) -> Ensemble:
    """Replace a mirror pair ``(+-x, 0, z)`` by three states 120 degrees apart at the same height.

    Each new state carries 2/3 of one pair member's weight, so total weight and
    (for channels symmetric about z) chi are preserved.
    """
    i, j = pair
    probs = ensemble.probs
    states = ensemble.states
    w = states[i]
    rho, z = math.hypot(w[0], w[1]), w[2]
    base = math.atan2(w[1], w[0])
    new_p = [probs[k] for k in range(len(probs)) if k not in (i, j)]
    new_w = [states[k] for k in range(len(probs)) if k not in (i, j)]
    each = (probs[i] + probs[j]) / 3.0
    for k in range(3):
        a = base + 2 * math.pi * k / 3
        new_p.append(each)
        new_w.append((rho * math.cos(a), rho * math.sin(a), z))
    return Ensemble.from_arrays(new_p, new_w)


def average_identity_rhs(channel: QubitChannel, e1: Ensemble, e2: Ensemble) -> float:
    """Right side of the two-ensemble averaging identity for ``chi[(e1 + e2)/2]``."""
    r1 = np.asarray(output_average(channel, e1))
    r2 = np.asarray(output_average(channel, e2))
    return (0.5 * (chi(channel, e1) + chi(channel, e2))
            + entropy(0.5 * (r1 + r2)) - 0.5 * entropy(r1) - 0.5 * entropy(r2))
