"""Lower circuits to pulse sequences for a given spin system.

The compiler keeps a software rotating frame per spin: logical z-rotations
become zero-duration frame shifts, offset precession during unrefocused
delays is absorbed the same way, and every emitted pulse phase is
corrected by the spin's pending frame angle.  Unwanted J couplings during
delays are refocused with pi-pulse echoes on a Sylvester-Hadamard
schedule, which cancels spectator couplings and spectator offsets exactly
for ideal pulses.

The report convention (see pulses.PulseSequence): the simulated propagator
of a compiled circuit equals frame_unitary(report) times the circuit
unitary, up to global phase.
"""

from dataclasses import dataclass

import numpy as np

from . import gates as G
from .pulses import Delay, FrameShift, HardPulse, PulseSequence


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompileOptions:
    refocus: bool = True
    route: bool = True


class _Emitter:
    """Event buffer plus per-spin pending z-rotation bookkeeping (degrees).

    pending[i] collects logical z-angles not physically executed, minus
    offset precession that physically happened without being wanted; the
    final report is -pending.
    """

    def __init__(self, sys):
        self.sys = sys
        self.events = []
        self.pending = [0.0] * sys.n

    def rot_z(self, spin, angle_deg):
        self.pending[spin] += angle_deg
        self.events.append(FrameShift(spin, angle_deg))

    def pulse(self, spin, angle_deg, nominal_phase_deg):
        self.events.append(
            HardPulse((spin,), angle_deg, nominal_phase_deg - self.pending[spin])
        )

    def refocused_delay(self, duration, active_pair, use_echoes=True):
        """Delay evolving only the active pair's coupling (plus their offsets).

        The active pair is assigned the constant Hadamard row; spectators
        get distinct alternating rows, so every spectator offset and every
        coupling other than the active one averages to zero exactly.
        """
        a, b = active_pair
        spectators = [s for s in range(self.sys.n) if s not in (a, b)]
        if not spectators or not use_echoes:
            self.events.append(Delay(duration))
        else:
            nslices = 2
            while nslices - 1 < len(spectators):
                nslices *= 2
            rows = {s: idx + 1 for idx, s in enumerate(spectators)}

            def sign(row, col):
                return -1 if bin(row & col).count("1") % 2 else 1

            for k in range(nslices):
                self.events.append(Delay(duration / nslices))
                for s in spectators:
                    now = sign(rows[s], k)
                    nxt = sign(rows[s], k + 1) if k + 1 < nslices else 1
                    if now != nxt:
                        self.pulse(s, 180.0, 0.0)
        # only the active pair accumulates offset precession
        for i in (a, b):
            self.pending[i] -= 360.0 * self.sys.offsets[i] * duration

    def finish(self):
        report = tuple(-p for p in self.pending)
        return PulseSequence(self.sys.n, self.events, report)


def _coupling(sys, a, b):
    return float(sys.j_couplings[a, b])


def _compile_rotation(em, gate):
    if gate.axis == "z":
        em.rot_z(gate.spins[0], gate.angle)
    elif gate.axis == "x":
        em.pulse(gate.spins[0], gate.angle, 0.0)
    elif gate.axis == "y":
        em.pulse(gate.spins[0], gate.angle, 90.0)
    else:
        em.pulse(gate.spins[0], gate.angle, gate.phase)


def _compile_hadamard(em, gate):
    spin = gate.spins[0]
    em.pulse(spin, 90.0, 90.0)
    em.pulse(spin, 180.0, 0.0)


def _compile_cnot(em, gate, options):
    a, b = gate.spins
    j = _coupling(em.sys, a, b)
    if j == 0.0:
        raise CompileError(f"cnot({a},{b}) requires a nonzero J coupling")
    tau = 1.0 / (2.0 * abs(j))
    if j > 0:
        em.rot_z(a, 90.0)
        em.rot_z(b, 90.0)
        em.pulse(b, 90.0, 0.0)
        em.refocused_delay(tau, (a, b), options.refocus)
        em.pulse(b, 90.0, 90.0)
    else:
        em.rot_z(a, 90.0)
        em.rot_z(b, -90.0)
        em.pulse(b, 90.0, 0.0)
        em.refocused_delay(tau, (a, b), options.refocus)
        em.pulse(b, 90.0, -90.0)


def _compile_inept(em, gate, options):
    a, b = gate.spins
    j = _coupling(em.sys, a, b)
    if j == 0.0:
        raise CompileError(f"inept({a},{b}) requires a nonzero J coupling")
    tau = 1.0 / (2.0 * abs(j))
    if j > 0:
        em.pulse(b, 90.0, 180.0)
        em.refocused_delay(tau, (a, b), options.refocus)
        em.pulse(b, 90.0, -90.0)
        em.rot_z(b, 180.0)
    else:
        em.pulse(b, 90.0, 0.0)
        em.refocused_delay(tau, (a, b), options.refocus)
        em.pulse(b, 90.0, -90.0)


def _compile_cphase(em, gate, options):
    a, b = gate.spins
    j = _coupling(em.sys, a, b)
    if j == 0.0:
        raise CompileError(f"controlled_phase({a},{b}) requires a nonzero J coupling")
    theta = gate.angle % 360.0
    if theta == 0.0:
        return
    if j < 0:
        theta -= 360.0  # negative branch keeps the delay nonnegative
    em.rot_z(a, theta / 2.0)
    em.rot_z(b, theta / 2.0)
    tau = np.deg2rad(theta) / (2.0 * np.pi * j)
    em.refocused_delay(tau, (a, b), options.refocus)


def _wire_permutation(gate):
    """Spin-relabelling tau with images[m] = bits of m permuted, or None."""
    k = len(gate.spins)
    tau = {}
    for pos in range(k):
        img = gate.images[1 << (k - 1 - pos)]
        if img == 0 or img & (img - 1):
            return None
        tau[pos] = k - img.bit_length()
    for m in range(2**k):
        want = 0
        for pos in range(k):
            if (m >> (k - 1 - pos)) & 1:
                want |= 1 << (k - 1 - tau[pos])
        if gate.images[m] != want:
            return None
    return tau


def _transpositions(tau):
    """Decompose a position permutation into transpositions (cycle walk)."""
    seen = set()
    swaps = []
    for start in sorted(tau):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        cur = tau[start]
        while cur != start:
            cycle.append(cur)
            seen.add(cur)
            cur = tau[cur]
        for idx in range(len(cycle) - 1, 0, -1):
            swaps.append((cycle[0], cycle[idx]))
    return swaps


def _swap_gates(sa, sb):
    return [G.cnot(sa, sb), G.cnot(sb, sa), G.cnot(sa, sb)]


def _compile_permutation(em, gate, options):
    tau = _wire_permutation(gate)
    if tau is None:
        raise CompileError(
            "only wire permutations (qubit relabellings) are pulse-compilable; "
            "general permutation gates run at circuit level"
        )
    for p, q in _transpositions(tau):
        for g in _swap_gates(gate.spins[p], gate.spins[q]):
            _compile_into(em, g, options)


def _compile_into(em, gate, options):
    sys = em.sys
    if gate.kind == "rotation":
        _compile_rotation(em, gate)
    elif gate.kind == "hadamard":
        _compile_hadamard(em, gate)
    elif gate.kind in ("cnot", "inept", "controlled_phase"):
        a, b = gate.spins
        if _coupling(sys, a, b) == 0.0 and options.route:
            routed = _route_two_spin(gate, sys)
            for g in routed.gates:
                _compile_into(em, g, options)
            return
        if gate.kind == "cnot":
            _compile_cnot(em, gate, options)
        elif gate.kind == "inept":
            _compile_inept(em, gate, options)
        else:
            _compile_cphase(em, gate, options)
    elif gate.kind == "permutation":
        _compile_permutation(em, gate, options)
    elif gate.kind == "qft_block":
        sub = G.qft_circuit(gate.spins, gate.convention)
        for g in sub.gates:
            _compile_into(em, g, options)
    else:
        raise CompileError(f"unsupported gate kind {gate.kind!r}")


def refocus(duration, active_pair, sys):
    """Standalone refocused-delay fragment (see _Emitter.refocused_delay).

    Its simulated propagator equals frame_unitary(report) times the pure
    J evolution of the active pair, up to global phase.
    """
    em = _Emitter(sys)
    em.refocused_delay(duration, tuple(active_pair))
    return em.finish()


def compile_gate(gate, sys, options=CompileOptions()):
    """Pulse sequence for a single gate (see compile_circuit)."""
    em = _Emitter(sys)
    _compile_into(em, gate, options)
    return em.finish()


def compile_circuit(circuit, sys, options=CompileOptions()):
    """Lower a circuit to one pulse sequence with a final frame report.

    The simulated propagator of the result (ideal pulses, no relaxation)
    equals frame_unitary(result.frame_phases) @ circuit_unitary(circuit)
    up to global phase.
    """
    if circuit.n != sys.n:
        raise CompileError(f"circuit has {circuit.n} spins, system has {sys.n}")
    em = _Emitter(sys)
    for gate in circuit.gates:
        _compile_into(em, gate, options)
    return em.finish()


def shortest_coupling_path(sys, start, goal):
    """Lexicographically smallest shortest path in the coupling graph."""
    n = sys.n
    adj = {
        i: sorted(j for j in range(n) if j != i and sys.j_couplings[i, j] != 0.0)
        for i in range(n)
    }
    dist = {goal: 0}
    frontier = [goal]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    if start not in dist:
        raise CompileError(f"spins {start} and {goal} are not connected by couplings")
    path = [start]
    cur = start
    while cur != goal:
        cur = min(u for u in adj[cur] if dist.get(u, np.inf) == dist[cur] - 1)
        path.append(cur)
    return path


def route_cnot(control, target, sys):
    """CNOT between possibly uncoupled spins via SWAP chains.

    Swaps the control state along a shortest coupling path until it sits
    next to the target, applies the directly-coupled CNOT, and swaps back.
    Every SWAP is three CNOTs; spectators are restored exactly.
    """
    return _route_two_spin(G.cnot(control, target), sys)


def _route_two_spin(gate, sys):
    a, b = gate.spins
    if sys.j_couplings[a, b] != 0.0:
        return G.Circuit(sys.n, [gate])
    path = shortest_coupling_path(sys, a, b)
    out = []
    for i in range(len(path) - 2):
        out.extend(_swap_gates(path[i], path[i + 1]))
    moved = G.Gate(
        gate.kind,
        (path[-2], path[-1]),
        axis=gate.axis,
        angle=gate.angle,
        phase=gate.phase,
        images=gate.images,
        convention=gate.convention,
    )
    out.append(moved)
    for i in range(len(path) - 3, -1, -1):
        out.extend(_swap_gates(path[i], path[i + 1]))
    return G.Circuit(sys.n, out)


def bloch_siegert_phase(soft_pulse, spectator_offset_hz):
    """Second-order estimate of the phase a far-off-resonance spin picks up.

    phase = omega_1^2 * duration / (2 * delta_omega), signed by the
    spectator's offset from the pulse carrier; returned in degrees.
    """
    delta_hz = spectator_offset_hz - soft_pulse.carrier
    if abs(delta_hz) < soft_pulse.amplitude:
        raise ValueError(
            "spectator too close to the pulse carrier; the second-order "
            "estimate is invalid on resonance"
        )
    w1 = 2.0 * np.pi * soft_pulse.amplitude
    dw = 2.0 * np.pi * delta_hz
    phase_rad = w1 * w1 * soft_pulse.duration / (2.0 * dw)
    return float(np.rad2deg(phase_rad))


def compensate(seq, sys):
    """Insert frame shifts that undo predicted Bloch-Siegert phases.

    For every soft pulse, every same-channel spin further than one Rabi
    amplitude from the carrier is treated as a spectator: its predicted
    phase is added to the frame bookkeeping, later hard-pulse phases are
    advanced accordingly, and the final report absorbs the correction.
    """
    extra = [0.0] * seq.n
    events = []
    for ev in seq.events:
        if ev.kind == "hard_pulse":
            by_phase = {}
            for s in ev.spins:
                by_phase.setdefault(extra[s], []).append(s)
            for phase_extra, spins in sorted(by_phase.items()):
                events.append(HardPulse(spins, ev.angle, ev.phase + phase_extra))
        else:
            events.append(ev)
        if ev.kind == "soft_pulse":
            for s in sys.spins_on_channel(ev.channel):
                delta = sys.offsets[s] - ev.carrier
                if abs(delta) >= ev.amplitude:
                    shift = bloch_siegert_phase(ev, sys.offsets[s])
                    extra[s] += shift
                    events.append(FrameShift(s, shift))
    report = tuple(r + x for r, x in zip(seq.frame_phases, extra))
    return PulseSequence(seq.n, events, report)
