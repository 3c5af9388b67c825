"""Effective pure state preparation: temporal averaging, spatial averaging,
logical labelling, and the scaling costs of each scheme.

All preparation circuits are permutation unitaries (0/1 entries).  The
temporal schemes are normalized so the summed experiment diagonals land
exactly on states.effective_pure_target without rescaling; the thermal
weight that achieves this is returned alongside the circuits.
"""

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import gates as G
from .engine import SimOptions, simulate
from .pulses import Crusher, Delay, HardPulse, PulseSequence
from .states import DensityMatrix, effective_pure_target, thermal_deviation

# Three-experiment scheme for three spins: each row lists the population
# deviation (units of the thermal weight) that every basis state receives;
# rows are permutations of the thermal multiset {3,1,1,-1,1,-1,-1,-3} and
# columns sum to {7,-1,-1,-1,-1,-1,-1,-1}.
_THREE_SPIN_ROWS = (
    (3, 1, 1, 1, -1, -1, -3, -1),
    (3, 1, -3, -1, 1, -1, -1, 1),
    (1, -3, 1, -1, -1, 1, 3, -1),
)


@dataclass(frozen=True)
class TemporalScheme:
    circuits: tuple
    combined: DensityMatrix
    weight: float
    experiments: int
    lower_bound: int


def _row_to_permutation(row, values):
    """Permutation images sending thermal populations onto a row pattern.

    States holding value v in the thermal arrangement are matched, in
    ascending order, to the states the row assigns v to.
    """
    images = [None] * len(values)
    for v in sorted(set(values)):
        sources = [m for m, val in enumerate(values) if val == v]
        dests = [m for m, val in enumerate(row) if val == v]
        for src, dst in zip(sources, dests):
            images[src] = dst
    return tuple(images)


def _cyclic_rotation_images(n, shift):
    """Ground state fixed; the 2^n - 1 excited states rotated by `shift`."""
    size = 2**n - 1
    images = [0] * 2**n
    for m in range(1, 2**n):
        images[m] = 1 + ((m - 1 + shift) % size)
    return tuple(images)


def _relabel_for_target(images, n, target):
    """Turn a ground-state scheme into one targeting basis state s.

    Post-composing every permutation with the XOR flip 0 <-> s moves the
    summed outlier onto s while leaving the thermal input untouched.
    """
    if target == 0:
        return images
    return tuple(img ^ target for img in images)


def temporal_average(sys, target=0):
    """Permutation circuits whose summed outputs give the target exactly.

    n = 1 is already effective pure; n = 2 uses the classic three cyclic
    permutations of the excited populations (CNOT pairs); n = 3 uses a
    three-experiment scheme; larger n falls back to all 2^n - 1 cyclic
    rotations, which is exact but not experiment-minimal.
    """
    n = sys.n
    if not 0 <= target < 2**n:
        raise ValueError(f"target state {target} out of range")
    thermal_values = [n - 2 * bin(m).count("1") for m in range(2**n)]

    if n == 1:
        perms = [tuple(range(2))]
        weight = 0.5
    elif n == 2:
        perms = [
            (0, 1, 2, 3),
            (0, 3, 1, 2),  # excited 3-cycle, realized below as CNOT pairs
            (0, 2, 3, 1),
        ]
        weight = 1.0 / 8.0
    elif n == 3:
        perms = [_row_to_permutation(row, thermal_values) for row in _THREE_SPIN_ROWS]
        weight = 1.0 / 8.0
    else:
        perms = [_cyclic_rotation_images(n, k) for k in range(2**n - 1)]
        weight = 1.0 / (n * 2**n)

    perms = [_relabel_for_target(p, n, target) for p in perms]
    circuits = [_permutation_circuit(p, n) for p in perms]

    thermal = thermal_deviation(sys, [weight] * n)
    combined = None
    for circ in circuits:
        out = G.apply_circuit(circ, thermal)
        combined = out if combined is None else combined + out
    return TemporalScheme(
        circuits=tuple(circuits),
        combined=combined,
        weight=weight,
        experiments=len(circuits),
        lower_bound=ceil((2**n - 1) / n),
    )


def _permutation_circuit(images, n):
    """CNOT realization for the 2-spin 3-cycles, permutation gate otherwise."""
    if n == 2 and images == (0, 3, 1, 2):
        return G.Circuit(2, [G.cnot(0, 1), G.cnot(1, 0)])
    if n == 2 and images == (0, 2, 3, 1):
        return G.Circuit(2, [G.cnot(1, 0), G.cnot(0, 1)])
    if images == tuple(range(2**n)):
        return G.Circuit(n, [])
    return G.Circuit(n, [G.permutation(range(n), images)])


def spatial_average(sys):
    """Single-experiment gradient scheme for two coupled spins.

    Returns the built-in pulse sequence and its simulated output, which
    equals effective_pure_target(2, 0) exactly for ideal pulses.  The
    input is the equal-weight thermal deviation Iz + Sz (weight 1/2 per
    spin); the last pulse's phase carries the software-frame correction
    for offset precession during the coupling delay.
    """
    if sys.n != 2:
        raise ValueError("spatial averaging scheme is defined for 2 spins")
    j = sys.j_couplings[0, 1]
    if j == 0.0:
        raise ValueError("spatial averaging needs a J coupling")
    tau = 1.0 / (2.0 * abs(j))
    # frame correction for spin 0 during tau, plus the mirrored phase for J < 0
    last_phase = 90.0 if j > 0 else -90.0
    last_phase += 360.0 * sys.offsets[0] * tau
    events = (
        HardPulse((1,), 60.0, 0.0),
        Crusher(),
        HardPulse((0,), 45.0, 0.0),
        Delay(tau),
        HardPulse((0,), 45.0, last_phase),
        Crusher(),
    )
    seq = PulseSequence(2, events)
    rho0 = thermal_deviation(sys, [0.5, 0.5])
    result = simulate(seq, rho0, sys, SimOptions())
    return seq, result.state


def logical_label(sys, weight=1.0):
    """Population rearrangement that embeds a 2-spin effective pure state.

    For a homonuclear 3-spin system, permutes the thermal populations
    {3a, a, a, -a, a, -a, -a, -3a} into {3a, -a, -a, -a, a, a, a, -3a};
    the last two spins are then effective pure conditioned on spin 0
    being |0>.  Returns the permutation circuit, the rearranged state,
    and a descriptor of the conditioned block.
    """
    if sys.n != 3:
        raise ValueError("logical labelling scheme is defined for 3 spins")
    images = (0, 4, 5, 1, 6, 2, 3, 7)
    circuit = G.Circuit(3, [G.permutation(range(3), images)])
    thermal = thermal_deviation(sys, [weight] * 3)
    rearranged = G.apply_circuit(circuit, thermal)
    descriptor = {
        "condition_spin": 0,
        "condition_value": 0,
        "subsystem_spins": (1, 2),
        "block_states": (0, 1, 2, 3),
        "scale": 4.0 * weight,
    }
    return circuit, rearranged, descriptor


def conditioned_block(rho, descriptor):
    """Diagonal of the conditioned subsystem block."""
    states = descriptor["block_states"]
    return rho.diagonal()[list(states)]


def prep_cost(scheme, n):
    """Experiment count and signal scale of a preparation scheme.

    Temporal averaging pays in experiments (3 for two spins, as in the
    classic worked scheme); logical labelling keeps one experiment but the
    signal scales as n/2^n; spatial averaging keeps one experiment with a
    signal falling off as 2^(1-n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    bound = ceil((2**n - 1) / n)
    if scheme == "temporal":
        if n == 1:
            experiments = 1
        elif n in (2, 3):
            experiments = 3
        else:
            experiments = 2**n - 1
        return {"experiments": experiments, "signal_scale": 1.0, "lower_bound": bound}
    if scheme == "logical":
        return {"experiments": 1, "signal_scale": n / 2**n, "lower_bound": bound}
    if scheme == "spatial":
        return {"experiments": 1, "signal_scale": 2.0 ** (1 - n), "lower_bound": bound}
    raise ValueError(f"unknown scheme {scheme!r}")


def sv_spins_needed(k, alpha):
    """Entropy-cooling resource bound: ceil(k / alpha^2) spins."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < alpha <= 1:
        raise ValueError("polarization must be in (0, 1]")
    return int(np.ceil(k / alpha**2))
