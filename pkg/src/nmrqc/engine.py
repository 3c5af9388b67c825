"""Evolve density matrices under pulse sequences.

Piecewise-constant propagators for soft pulses, exact rotations for hard
pulses, diagonal exponentials for weak-coupling delays, coherence-order
filtering for crushers, and an optional phenomenological relaxation map
interleaved after every timed event.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .operators import IX, IY, embed, popcounts
from .spin_system import HamiltonianModel, internal_hamiltonian
from .states import DensityMatrix, coherence_order_filter


@dataclass(frozen=True)
class SimOptions:
    """Simulation switches.

    relaxation        : apply the T1/T2 map after every timed event.
    pulse_model       : 'physical' integrates soft pulses step by step;
                        'ideal' replaces them with instantaneous rotations.
    capture           : None or 'events' (keep a state snapshot per event).
    soft_step_cap     : upper bound on the integrator step (s); None picks
                        an accuracy-based step automatically.
    coupling          : 'weak' or 'strong' internal Hamiltonian.
    equilibrium_weights : per-spin thermal weights the diagonal relaxes
                        toward; None means zero deviation (high-T limit).
    """

    relaxation: bool = False
    pulse_model: str = "physical"
    capture: str = None
    soft_step_cap: float = None
    coupling: str = "weak"
    equilibrium_weights: tuple = None

    def __post_init__(self):
        if self.pulse_model not in ("physical", "ideal"):
            raise ValueError("pulse_model must be 'physical' or 'ideal'")
        if self.capture not in (None, "events"):
            raise ValueError("capture must be None or 'events'")
        if self.soft_step_cap is not None and self.soft_step_cap <= 0:
            raise ValueError("soft_step_cap must be positive")


@dataclass(frozen=True)
class SimResult:
    state: DensityMatrix
    frame_phases: tuple
    trajectory: tuple = None


def hard_pulse_matrix(spins, angle_deg, phase_deg, n):
    """Exact rotation exp(-i*angle*sum_s (Ix cos(phase) + Iy sin(phase)))."""
    half = np.deg2rad(angle_deg) / 2.0
    ph = np.deg2rad(phase_deg)
    axis_x, axis_y = np.cos(ph), np.sin(ph)
    single = np.array(
        [
            [np.cos(half), -1j * np.sin(half) * (axis_x - 1j * axis_y)],
            [-1j * np.sin(half) * (axis_x + 1j * axis_y), np.cos(half)],
        ],
        dtype=complex,
    )
    out = np.eye(1, dtype=complex)
    for s in range(n):
        out = np.kron(out, single if s in spins else np.eye(2, dtype=complex))
    return out


def _soft_pulse_steps(ev, sys, options):
    """Step count and grid for integrating one soft pulse."""
    drive_freq = abs(ev.carrier)
    if options.soft_step_cap is not None and drive_freq > 0:
        required = 1.0 / (20.0 * drive_freq)
        if options.soft_step_cap > required:
            raise ValueError(
                f"soft-pulse step cap {options.soft_step_cap:g} s too coarse: "
                f"drive period / 20 requires <= {required:g} s"
            )
    f_acc = max(
        [ev.amplitude, drive_freq]
        + [abs(v) for v in sys.offsets]
        + [abs(ev.carrier - sys.offsets[i]) for i in sys.spins_on_channel(ev.channel)]
        + [abs(v) for v in np.asarray(sys.j_couplings).ravel()]
    )
    nsteps = max(8, int(np.ceil(20.0 * f_acc * ev.duration)))
    if options.soft_step_cap is not None:
        nsteps = max(nsteps, int(np.ceil(ev.duration / options.soft_step_cap)))
    return nsteps


def soft_pulse_propagator(ev, sys, options=SimOptions()):
    """Time-ordered piecewise-constant propagator of a soft pulse.

    The drive acts on every spin of the addressed channel, rotating at the
    carrier offset in the channel frame; all other spins evolve under the
    internal Hamiltonian only.  Steps sample the drive phase at midpoints.
    """
    n = sys.n
    if options.pulse_model == "ideal":
        angle = 360.0 * ev.amplitude * ev.duration
        return hard_pulse_matrix(sys.spins_on_channel(ev.channel), angle, ev.phase, n)
    h0 = internal_hamiltonian(sys, HamiltonianModel(options.coupling))
    spins = sys.spins_on_channel(ev.channel)
    if not spins or ev.duration == 0.0:
        return kernels.expm_hermitian(h0, ev.duration) if ev.duration else np.eye(2**n, dtype=complex)
    hx = np.zeros((2**n, 2**n), dtype=complex)
    hy = np.zeros((2**n, 2**n), dtype=complex)
    for s in spins:
        hx += embed(IX, s, n)
        hy += embed(IY, s, n)
    nsteps = _soft_pulse_steps(ev, sys, options)
    dt = ev.duration / nsteps
    t_mid = (np.arange(nsteps) + 0.5) * dt
    theta = 2.0 * np.pi * ev.carrier * t_mid + np.deg2rad(ev.phase)
    w1 = 2.0 * np.pi * ev.amplitude
    return kernels.piecewise_propagator(h0, hx, hy, w1 * np.cos(theta), w1 * np.sin(theta), dt)


def delay_propagator(duration, sys, options=SimOptions()):
    h = internal_hamiltonian(sys, HamiltonianModel(options.coupling))
    if options.coupling == "weak":
        return np.diag(np.exp(-1j * np.real(np.diag(h)) * duration))
    return kernels.expm_hermitian(h, duration)


def event_propagator(ev, sys, options=SimOptions()):
    """Unitary propagator of one pulse event.

    Crushers are not unitary; they raise here and are applied by `simulate`
    through the coherence-order filter.
    """
    n = sys.n
    if ev.kind == "hard_pulse":
        return hard_pulse_matrix(ev.spins, ev.angle, ev.phase, n)
    if ev.kind == "soft_pulse":
        return soft_pulse_propagator(ev, sys, options)
    if ev.kind == "delay":
        return delay_propagator(ev.duration, sys, options)
    if ev.kind == "frame_shift":
        return np.eye(2**n, dtype=complex)
    if ev.kind == "crusher":
        raise ValueError("crusher has no unitary propagator; it is a coherence-order filter")
    raise ValueError(f"unknown event kind {ev.kind!r}")


def sequence_propagator(seq, sys, options=SimOptions()):
    """Product of all event propagators; fails if the sequence has crushers."""
    u = np.eye(2**sys.n, dtype=complex)
    for ev in seq.events:
        if ev.kind == "crusher":
            raise ValueError("sequence contains a crusher; use simulate on a state")
        u = event_propagator(ev, sys, options) @ u
    return u


def simulate(seq, rho0, sys, options=SimOptions()):
    """Left-fold of event propagators/filters over the initial state.

    With relaxation on, every event of nonzero duration is followed by the
    relaxation map for that duration.  Returns the final state, the
    sequence's frame report, and an optional per-event trajectory.
    """
    if rho0.n != sys.n or seq.n != sys.n:
        raise ValueError("state, sequence and system spin counts must agree")
    rho = rho0
    snapshots = [] if options.capture == "events" else None
    for ev in seq.events:
        if ev.kind == "crusher":
            rho = coherence_order_filter(rho, {0})
        else:
            rho = rho.evolve(event_propagator(ev, sys, options))
        if options.relaxation and ev.duration > 0.0:
            rho = relax(rho, ev.duration, sys, options.equilibrium_weights)
        if snapshots is not None:
            snapshots.append(rho)
    return SimResult(rho, seq.frame_phases, tuple(snapshots) if snapshots is not None else None)


_HADAMARD_2 = np.array([[0.5, 0.5], [0.5, -0.5]])
_HADAMARD_2_INV = np.array([[1.0, 1.0], [1.0, -1.0]])


def relax(rho, duration, sys, equilibrium_weights=None):
    """Phenomenological T1/T2 map over `duration` seconds.

    Off-diagonal elements decay as exp(-t * sum over flipped spins of
    1/T2_i).  The diagonal is expanded over z-product words; each word
    decays as exp(-t * sum over its spins of 1/T1_i) toward equilibrium
    (zero for every word unless equilibrium weights are given, which set
    the single-spin word targets).  Trace and Hermiticity are preserved.
    """
    if not sys.has_relaxation:
        raise ValueError("spin system has no T1/T2 parameters")
    if duration == 0.0:
        return rho
    n = sys.n
    dim = 2**n
    pc = popcounts(n)
    states = np.arange(dim)

    # T2 on coherences: rate[r, s] = sum of 1/T2 over differing bits
    rate = np.zeros((dim, dim))
    for i in range(n):
        bit = (states >> (n - 1 - i)) & 1
        differs = bit[:, None] != bit[None, :]
        rate += differs / sys.t2[i]
    decay = np.exp(-duration * rate)
    np.fill_diagonal(decay, 1.0)
    mat = rho.matrix * decay

    # T1 on populations, in the z-word basis (per-spin Hadamard transform)
    diag = np.real(np.diag(mat)).reshape((2,) * n)
    coeffs = diag
    for axis in range(n):
        coeffs = np.moveaxis(np.tensordot(_HADAMARD_2, coeffs, axes=([1], [axis])), 0, axis)
    word_rate = np.zeros((2,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = 2
        word_rate = word_rate + (np.arange(2) / sys.t1[i]).reshape(shape)
    eq = np.zeros((2,) * n)
    if equilibrium_weights is not None:
        w = np.asarray(equilibrium_weights, dtype=float)
        for i in range(n):
            idx = tuple(1 if k == i else 0 for k in range(n))
            eq[idx] = w[i]
    coeffs = eq + (coeffs - eq) * np.exp(-duration * word_rate)
    new_diag = coeffs
    for axis in range(n):
        new_diag = np.moveaxis(
            np.tensordot(_HADAMARD_2_INV, new_diag, axes=([1], [axis])), 0, axis
        )
    out = mat.astype(complex).copy()
    np.fill_diagonal(out, new_diag.reshape(-1) + 0.0j)
    return DensityMatrix(out, rho.kind, validate=False)


def error_rate(sys, pair):
    """Per-gate error estimate 1/(2 J T2) for a coupled pair."""
    i, j = pair
    jij = abs(sys.j_couplings[i, j])
    if jij == 0.0:
        raise ValueError(f"spins {i} and {j} are not coupled")
    if sys.t2 is None:
        raise ValueError("spin system has no T2 parameters")
    t2 = min(sys.t2[i], sys.t2[j])
    return 1.0 / (2.0 * jij * t2)


FAULT_TOLERANCE_THRESHOLD = 1e-5  # accuracy threshold, 0.001 %


def threshold_check(rate):
    """True when the error rate meets the fault-tolerance threshold."""
    return rate <= FAULT_TOLERANCE_THRESHOLD
