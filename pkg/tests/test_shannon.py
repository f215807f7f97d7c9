import math

import numpy as np
import pytest

from qubit_capacity import (
    Ensemble,
    Povm,
    QubitChannel,
    accessible_information,
    chi,
    identity_channel,
    make_qc,
    optimize_shannon,
)
from qubit_capacity.shannon import joint_distribution, mutual_information

POLES = Ensemble(((0.5, (0, 0, 1)), (0.5, (0, 0, -1))))


def test_identity_poles():
    assert accessible_information(identity_channel(), POLES, Povm.projective((0, 0, 1))) == pytest.approx(1.0)


def test_trivial_povm():
    assert accessible_information(identity_channel(), POLES, Povm.trivial()) == 0.0


def test_qc_vertical_optimum():
    e = Ensemble(((0.6, (0, 0, 1)), (0.4, (0, 0, -1))))
    val = accessible_information(make_qc(0.5, 0.5), e, Povm.projective((0, 0, 1)))
    assert val == pytest.approx(0.32193, abs=5e-5)


def test_mutual_information_independent():
    assert mutual_information(np.outer([0.3, 0.7], [0.5, 0.5])) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("elements", [
    ((0.5, (0, 0, 1)), (0.4, (0, 0, -1))),
    ((0.5, (0, 0, 1)), (0.5, (0, 0, 1))),
    ((0.5, (0, 0, 1.2)), (0.5, (0, 0, -1.2))),
    ((1.5, (0, 0, 0)), (-0.5, (0, 0, 0))),
])
def test_povm_validation(elements):
    with pytest.raises(ValueError):
        Povm(elements)


def test_povm_matrices_complete():
    povm = Povm.projective((1, 1, 0))
    assert sum(povm.matrices()) == pytest.approx(np.eye(2))


def test_joint_distribution_matches_trace():
    rng = np.random.default_rng(5)
    ch = QubitChannel((0.5, 0.4, 0.6), (0.1, 0.0, 0.2))
    w = rng.normal(size=(3, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    e = Ensemble.from_arrays([0.2, 0.3, 0.5], w)
    povm = Povm.projective(rng.normal(size=3))
    joint = joint_distribution(ch, e, povm)
    for j, (p, wj) in enumerate(e.members):
        rho = ch.apply(wj).density_matrix()
        for k, m in enumerate(povm.matrices()):
            assert joint[j, k] == pytest.approx(p * np.trace(rho @ m).real, abs=1e-14)


def test_holevo_bound_random():
    rng = np.random.default_rng(9)
    ch = QubitChannel((0.7, -0.3, 0.5), (0.0, 0.1, 0.3))
    for _ in range(300):
        n = int(rng.integers(2, 5))
        w = rng.normal(size=(n, 3))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        e = Ensemble.from_arrays(rng.dirichlet(np.ones(n)), w)
        povm = Povm.projective(rng.normal(size=3))
        assert accessible_information(ch, e, povm) <= chi(ch, e) + 1e-12


class TestOptimizeShannon:
    def test_squeezed(self, results):
        r = results.shannon_result("squeezed")
        assert r.value == pytest.approx(0.2128, abs=5e-5)
        assert r.diagnostics["input_overlap"] == pytest.approx(-1.0, abs=1e-6)
        assert math.isnan(r.equidistance_residual)

    def test_stretched_matches_vertical(self, results):
        assert results.shannon_result("stretched").value == pytest.approx(0.32193, abs=5e-5)

    def test_identity(self, results):
        assert results.shannon_result("identity").value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("name", ["squeezed", "stretched", "stretched_08", "amplitude_damping"])
    def test_below_holevo(self, results, name):
        assert results.shannon_result(name).value <= results.global_result(name).value + 1e-9

    def test_value_is_achieved(self, results):
        ch = results.channel("squeezed")
        r = results.shannon_result("squeezed")
        mi = accessible_information(ch, r.ensemble, Povm.projective(tuple(r.measurement_axis)))
        assert mi == pytest.approx(r.value, abs=1e-12)

    def test_axis_is_locally_optimal(self, results):
        ch = results.channel("squeezed")
        r = results.shannon_result("squeezed")
        phi = r.diagnostics["measurement_angle"]
        for d in (-1e-3, 1e-3):
            axis = (math.sin(phi + d), 0.0, math.cos(phi + d))
            assert accessible_information(ch, r.ensemble, Povm.projective(axis)) <= r.value + 1e-12

    def test_deterministic(self):
        ch = make_qc(0.3, 0.6)
        assert optimize_shannon(ch, seed=2, n_random=3) == optimize_shannon(ch, seed=2, n_random=3)

    def test_gap_ratio(self, results):
        c = results.global_result("squeezed").diagnostics
        gain = c["C_3"] - c["C_2"]
        shan_gap = c["C_2"] - results.shannon_result("squeezed").value
        assert gain / shan_gap == pytest.approx(1.8, abs=0.1)
