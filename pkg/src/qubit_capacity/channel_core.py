"""Qubit states in Bloch form, entropies, and diagonal affine qubit channels.

A qubit density matrix is written ``rho = (I + w.sigma) / 2`` with ``w`` a real
3-vector of norm at most one. Every channel handled here acts on Bloch vectors
as ``w -> t + Lambda w`` with a diagonal ``Lambda``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EPS = 1e-12
PURE_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class DomainError(ValueError):
    """Raised when channel parameters fall outside the allowed family range."""


class CPViolation(DomainError):
    """Raised when a channel required to be completely positive is not."""


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (_I2 + self.x * PAULI[0] + self.y * PAULI[1] + self.z * PAULI[2])

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "BlochVector":
        """Pure state at polar angle ``theta`` and azimuth ``phi``."""
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))


def as_bloch(w) -> BlochVector:
    if isinstance(w, BlochVector):
        return w
    x, y, z = (float(c) for c in w)
    return BlochVector(x, y, z)


def binary_entropy(p: float) -> float:
    """Shannon entropy of ``(p, 1 - p)`` in bits, with ``0 log 0 = 0``."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def entropy_of_norm(r: float) -> float:
    if r > 1.0:
        if r > 1.0 + EPS:
            raise ValueError(f"Bloch vector norm {r} exceeds 1")
        r = 1.0
    return binary_entropy(0.5 * (1.0 + r))


def entropy(w) -> float:
    """Von Neumann entropy (bits) of the state with Bloch vector ``w``."""
    x, y, z = w
    return entropy_of_norm(math.sqrt(x * x + y * y + z * z))


def relative_entropy(p, q) -> float:
    """Relative entropy ``Tr P log P - Tr P log Q`` in bits.

    Uses the spectral form of ``log Q``: with ``u = |q|`` it equals
    ``alpha I + beta (q/u).sigma`` where ``alpha = log2((1 - u^2)/4) / 2`` and
    ``beta = log2((1 + u)/(1 - u)) / 2``. Returns ``inf`` when ``Q`` is pure and
    ``P != Q``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    u = min(float(np.linalg.norm(q)), 1.0)
    if u >= 1.0 - PURE_TOL:
        if np.linalg.norm(p - q) <= 1e-10:
            return 0.0
        return math.inf
    alpha = 0.5 * math.log2((1.0 - u * u) / 4.0)
    if u == 0.0:
        d_beta = 0.0
    else:
        beta = 0.5 * math.log2((1.0 + u) / (1.0 - u))
        d_beta = beta * float(p @ q) / u
    return max(-entropy(p) - alpha - d_beta, 0.0)


@dataclass(frozen=True)
class QubitChannel:
    """Affine qubit map ``w -> shift + lam * w`` (componentwise).

    Positivity (image of the Bloch ball inside the ball) is checked on
    construction unless ``check_positive`` is off, which is only meant for
    probing the CP boundary. ``require_cp=True`` also demands complete
    positivity.
    """

    lam: tuple[float, float, float]
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    require_cp: bool = field(default=False, compare=False)
    check_positive: bool = field(default=True, compare=False)

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lam)
        shift = tuple(float(v) for v in self.shift)
        if len(lam) != 3 or len(shift) != 3:
            raise ValueError("lam and shift must be triples")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "shift", shift)
        if self.check_positive and max_image_norm(lam, shift) > 1.0 + 1e-9:
            raise DomainError(f"channel lam={lam} shift={shift} maps states outside the Bloch ball")
        if self.require_cp and not is_cp(self):
            raise CPViolation(f"channel lam={lam} shift={shift} is not completely positive")

    def apply(self, w) -> BlochVector:
        return apply(self, w)

    def relabel(self, order: Sequence[int]) -> "QubitChannel":
        """Channel in permuted coordinates; axis ``k`` of the result is axis ``order[k]`` here."""
        if sorted(order) != [0, 1, 2]:
            raise ValueError(f"not a permutation of the axes: {order}")
        return QubitChannel(
            tuple(self.lam[k] for k in order), tuple(self.shift[k] for k in order),
            self.require_cp, self.check_positive,
        )

    @property
    def is_unital(self) -> bool:
        return all(t == 0.0 for t in self.shift)

    def to_json(self) -> dict:
        return {"lambda": list(self.lam), "shift": list(self.shift)}

    @classmethod
    def from_json(cls, obj: dict, check_positive: bool = True) -> "QubitChannel":
        """Parse either ``{"lambda", "shift"}`` or a named family ``{"family": ..., params}``."""
        if "family" in obj:
            params = {k: v for k, v in obj.items() if k != "family"}
            return make_family(obj["family"], **params)
        return cls(tuple(obj["lambda"]), tuple(obj.get("shift", (0.0, 0.0, 0.0))),
                   check_positive=check_positive)


def max_image_norm(lam, shift) -> float:
    """Largest ``|shift + lam * w|`` over unit vectors ``w``.

    Maximizing ``|t + L w|^2`` on the sphere is a trust-region subproblem: the
    maximizer has ``w_k = l_k t_k / (nu - l_k^2)`` with ``nu >= max l_k^2``,
    and ``nu`` solves the secular equation ``|w| = 1`` (found by bisection).
    """
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(shift, dtype=float)
    a = lam * lam
    b = lam * t
    candidates = [np.eye(3)[k] * sgn for k in range(3) for sgn in (1.0, -1.0)]
    active = b != 0.0
    if active.any():
        top = float(a.max())

        def secular(nu):
            return float(np.sum((b[active] / (nu - a[active])) ** 2)) - 1.0

        left = top + 1e-300 if not np.any(a[active] == top) else top
        right = top + float(np.abs(b).sum()) + 1.0
        hard = np.all(a[active] < top) and secular(top) <= 0.0
        if hard:
            nu = top
        else:
            for _ in range(200):
                mid = 0.5 * (left + right)
                if secular(mid) > 0.0:
                    left = mid
                else:
                    right = mid
            nu = 0.5 * (left + right)
        w = np.zeros(3)
        w[active] = b[active] / (nu - a[active])
        rest = 1.0 - float(w @ w)
        if hard and rest > 0.0:
            k = int(np.flatnonzero(~active & (a == top))[0])
            w[k] = math.sqrt(rest)
        candidates.append(w / np.linalg.norm(w))
    return max(float(np.linalg.norm(t + lam * w)) for w in candidates)


def apply(channel: QubitChannel, w) -> BlochVector:
    l1, l2, l3 = channel.lam
    t1, t2, t3 = channel.shift
    x, y, z = w
    return BlochVector(t1 + l1 * x, t2 + l2 * y, t3 + l3 * z)


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name}={value} outside [0, 1]")


def identity_channel() -> QubitChannel:
    return QubitChannel((1.0, 1.0, 1.0))


def make_shifted_depolarizing(mu: float) -> QubitChannel:
    """Ball shrunk to radius ``mu`` and pushed up until it touches the north pole."""
    _check_unit("mu", mu)
    return QubitChannel((mu, mu, mu), (0.0, 0.0, 1.0 - mu))


def make_amplitude_damping(mu: float) -> QubitChannel:
    _check_unit("mu", mu)
    r = math.sqrt(mu)
    return QubitChannel((r, r, mu), (0.0, 0.0, 1.0 - mu))


def make_stretched(mu: float, s: float, override: bool = False) -> QubitChannel:
    """Shifted depolarizing channel with its sides stretched to ``s``.

    ``mu <= s <= sqrt(mu)`` is the completely positive window for this shift.
    Beyond ``sqrt(mu)`` the image also leaves the Bloch ball near the north
    pole, so ``override`` skips both the range and the positivity check.
    """
    _check_unit("mu", mu)
    if not override and not (mu - 1e-15 <= s <= math.sqrt(mu) + 1e-15):
        raise DomainError(f"s={s} outside [mu, sqrt(mu)] = [{mu}, {math.sqrt(mu)}]")
    return QubitChannel((s, s, mu), (0.0, 0.0, 1.0 - mu), check_positive=not override)


def make_squeezed(mu: float, q: float) -> QubitChannel:
    """Shifted depolarizing channel squeezed to ``q`` along y and z.

    The shift stays at ``1 - mu``, so the north pole lands at height
    ``1 - mu + q`` rather than on the sphere.
    """
    _check_unit("mu", mu)
    if not 0.0 <= q <= mu:
        raise DomainError(f"q={q} outside [0, mu]")
    return QubitChannel((mu, q, q), (0.0, 0.0, 1.0 - mu), require_cp=True)


def make_qc(t3: float, mu: float) -> QubitChannel:
    """Quantum-classical channel collapsing the ball onto a segment of the z-axis."""
    if abs(t3) + abs(mu) > 1.0 + 1e-15:
        raise DomainError(f"|t3| + |mu| = {abs(t3) + abs(mu)} > 1")
    return QubitChannel((0.0, 0.0, mu), (0.0, 0.0, t3))


def make_cq(t1: float, t2: float, t3: float, mu: float) -> QubitChannel:
    """Classical-quantum channel whose image is a z-parallel segment offset by ``(t1, t2)``."""
    if t1 * t1 + t2 * t2 + (abs(t3) + abs(mu)) ** 2 > 1.0 + 1e-12:
        raise DomainError("CQ parameters violate |t1|^2 + |t2|^2 + (|t3| + |mu|)^2 <= 1")
    return QubitChannel((0.0, 0.0, mu), (t1, t2, t3))


def make_horizontal_cq(nu: float, t3: float) -> QubitChannel:
    """CQ channel with image segment ``{(nu w1, 0, t3)}``, built in z-frame then relabeled."""
    return make_cq(t3, 0.0, 0.0, nu).relabel((2, 1, 0))


def mix_channels(a: float, phi1: QubitChannel, phi2: QubitChannel) -> QubitChannel:
    _check_unit("a", a)
    lam = tuple(a * l1 + (1.0 - a) * l2 for l1, l2 in zip(phi1.lam, phi2.lam))
    shift = tuple(a * t1 + (1.0 - a) * t2 for t1, t2 in zip(phi1.shift, phi2.shift))
    return QubitChannel(lam, shift)


FAMILIES = {
    "identity": identity_channel,
    "depolarizing": make_shifted_depolarizing,
    "shifted_depolarizing": make_shifted_depolarizing,
    "amplitude_damping": make_amplitude_damping,
    "stretched": make_stretched,
    "squeezed": make_squeezed,
    "qc": make_qc,
    "cq": make_cq,
    "horizontal_cq": make_horizontal_cq,
}


def make_family(family: str, **params) -> QubitChannel:
    try:
        ctor = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown channel family {family!r}") from None
    return ctor(**params)


def _act_on_matrix(channel: QubitChannel, m: np.ndarray) -> np.ndarray:
    # linear extension: Phi(I) = I + t.sigma, Phi(sigma_k) = lam_k sigma_k
    c0 = 0.5 * np.trace(m)
    out = c0 * (_I2 + sum(t * s for t, s in zip(channel.shift, PAULI)))
    for lam_k, s in zip(channel.lam, PAULI):
        out = out + lam_k * 0.5 * np.trace(s @ m) * s
    return out


def choi_matrix(channel: QubitChannel) -> np.ndarray:
    """Choi matrix ``sum_ij E_ij (x) Phi(E_ij)`` (trace 2, no 1/2 normalization)."""
    c = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(e, _act_on_matrix(channel, e))
    return c


def choi_min_eigenvalue(channel: QubitChannel) -> float:
    return float(np.linalg.eigvalsh(choi_matrix(channel)).min())


def is_cp(channel: QubitChannel, tol: float = 1e-10) -> bool:
    return choi_min_eigenvalue(channel) >= -tol


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` quasi-uniform unit vectors (golden-angle spiral), shape ``(n, 3)``."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def entropy_array(norms: np.ndarray) -> np.ndarray:
    """Vectorized entropy of states given their Bloch norms."""
    r = np.clip(np.asarray(norms, dtype=float), 0.0, 1.0)
    p = 0.5 * (1.0 + r)
    q = 0.5 * (1.0 - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        hp = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        hq = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return hp + hq


def relative_entropy_to(points: np.ndarray, q: Iterable[float]) -> np.ndarray:
    """Relative entropy from each row of ``points`` to the mixed state ``q``."""
    q = np.asarray(q, dtype=float)
    u = float(np.linalg.norm(q))
    if u >= 1.0 - PURE_TOL:
        raise ValueError("reference state must be mixed")
    points = np.asarray(points, dtype=float)
    alpha = 0.5 * math.log2((1.0 - u * u) / 4.0)
    if u == 0.0:
        lin = 0.0
    else:
        lin = 0.5 * math.log2((1.0 + u) / (1.0 - u)) * (points @ q) / u
    return -entropy_array(np.linalg.norm(points, axis=1)) - alpha - lin
