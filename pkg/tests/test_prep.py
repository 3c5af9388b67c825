from fractions import Fraction

import numpy as np
import pytest

from nmrqc import gates as G
from nmrqc import prep as P
from nmrqc.engine import SimOptions, simulate
from nmrqc.spin_system import load_system
from nmrqc.states import coherence_order_filter, effective_pure_target, thermal_deviation


def homonuclear(n, j=50.0):
    couplings = [{"i": i, "j": i + 1, "value": j} for i in range(n - 1)]
    return load_system({"spins": [{"offset_hz": 0.0}] * n, "j_hz": couplings})


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("target", [0, 1])
def test_temporal_average_exact(n, target):
    if target >= 2**n:
        pytest.skip("target out of range")
    sys = homonuclear(n)
    scheme = P.temporal_average(sys, target)
    want = effective_pure_target(n, target)
    assert np.abs(scheme.combined.matrix - want.matrix).max() < 1e-14
    assert scheme.experiments >= scheme.lower_bound


def test_temporal_circuits_are_permutation_unitaries(three_spin):
    scheme = P.temporal_average(three_spin, 0)
    for circ in scheme.circuits:
        u = G.circuit_unitary(circ)
        assert np.all((np.abs(u) < 1e-12) | (np.abs(u - 1.0) < 1e-12))


def test_two_spin_scheme_is_cnot_expressible():
    sys = homonuclear(2)
    scheme = P.temporal_average(sys, 0)
    assert scheme.experiments == 3
    kinds = [tuple(g.kind for g in c.gates) for c in scheme.circuits]
    assert kinds == [(), ("cnot", "cnot"), ("cnot", "cnot")]


def test_classic_two_spin_triple_identity():
    """The worked two-spin identity over abstract labels: permuting
    {a, b, -b, -a} twice and adding all three gives {3a, -a, -a, -a}."""
    a, b = Fraction(5, 7), Fraction(2, 9)
    start = [a, b, -b, -a]
    sys = homonuclear(2)
    scheme = P.temporal_average(sys, 0)
    experiments = []
    for circ in scheme.circuits:
        u = G.circuit_unitary(circ)
        images = [int(np.argmax(np.abs(u[:, src]))) for src in range(4)]
        out = [None] * 4
        for src, dst in enumerate(images):
            out[dst] = start[src]
        experiments.append(out)
    assert experiments[0] == [a, b, -b, -a]
    assert experiments[1] == [a, -b, -a, b]
    assert experiments[2] == [a, -a, b, -b]
    total = [sum(col) for col in zip(*experiments)]
    assert total == [3 * a, -a, -a, -a]


def test_spatial_average_output_state(chloroform):
    seq, state = P.spatial_average(chloroform)
    want = effective_pure_target(2, 0)
    assert np.abs(state.matrix - want.matrix).max() < 1e-8
    kinds = [ev.kind for ev in seq.events]
    assert kinds == ["hard_pulse", "crusher", "hard_pulse", "delay", "hard_pulse", "crusher"]


def test_spatial_average_with_offsets():
    sys = load_system(
        {"spins": [{"offset_hz": 80.0}, {"offset_hz": -35.0}],
         "j_hz": [{"i": 0, "j": 1, "value": 215.0}]}
    )
    _, state = P.spatial_average(sys)
    assert np.abs(state.matrix - effective_pure_target(2, 0).matrix).max() < 1e-8


def test_spatial_sequence_is_input_specific(chloroform):
    # the sequence is designed for the thermal input; feeding it the
    # target state does not return the target
    seq, _ = P.spatial_average(chloroform)
    target = effective_pure_target(2, 0)
    out = simulate(seq, target, chloroform, SimOptions()).state
    assert np.abs(out.matrix - target.matrix).max() > 0.05


def test_crusher_is_a_norm_decreasing_projection(chloroform):
    seq, _ = P.spatial_average(chloroform)
    # after the first pulse the state has transverse terms; the crusher
    # strictly decreases the Frobenius norm
    rho = thermal_deviation(2, [0.5, 0.5])
    from nmrqc.engine import event_propagator

    rho = rho.evolve(event_propagator(seq.events[0], chloroform))
    crushed = coherence_order_filter(rho, {0})
    assert np.linalg.norm(crushed.matrix) < np.linalg.norm(rho.matrix) - 1e-6
    # idempotent, and a no-op on an order-0-only state
    again = coherence_order_filter(crushed, {0})
    assert np.abs(again.matrix - crushed.matrix).max() == 0.0


def test_spatial_average_validation():
    with pytest.raises(ValueError, match="2 spins"):
        P.spatial_average(homonuclear(3))
    uncoupled = load_system({"spins": [{"offset_hz": 0.0}, {"offset_hz": 0.0}]})
    with pytest.raises(ValueError, match="coupling"):
        P.spatial_average(uncoupled)


def test_logical_label_population_lists():
    sys = homonuclear(3)
    circuit, rearranged, desc = P.logical_label(sys, weight=2.0)
    assert np.allclose(rearranged.diagonal(), [6, -2, -2, -2, 2, 2, 2, -6])
    block = P.conditioned_block(rearranged, desc)
    # conditioned two-spin block is the scaled effective pure target
    want = desc["scale"] * effective_pure_target(2, 0).diagonal()
    assert np.allclose(block, want)
    u = G.circuit_unitary(circuit)
    assert np.all((np.abs(u) < 1e-12) | (np.abs(u - 1.0) < 1e-12))


def test_logical_label_needs_three_spins(chloroform):
    with pytest.raises(ValueError, match="3 spins"):
        P.logical_label(chloroform)


def test_prep_cost_reports():
    assert P.prep_cost("temporal", 2) == {
        "experiments": 3, "signal_scale": 1.0, "lower_bound": 2
    }
    assert P.prep_cost("temporal", 3)["experiments"] == 3
    assert P.prep_cost("logical", 3)["signal_scale"] == pytest.approx(3 / 8)
    assert P.prep_cost("spatial", 2)["experiments"] == 1
    with pytest.raises(ValueError):
        P.prep_cost("osmotic", 2)


def test_sv_resource_estimate():
    assert P.sv_spins_needed(1, 1e-5) == 10**10
    assert P.sv_spins_needed(3, 0.5) == 12
    with pytest.raises(ValueError):
        P.sv_spins_needed(1, 0.0)
