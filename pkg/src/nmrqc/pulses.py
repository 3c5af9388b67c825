"""Timed pulse-sequence IR: hard/soft pulses, delays, crushers, frame shifts.

A PulseSequence is the physical program a spectrometer would run.  Pulse
phases are physical (already corrected for software rotating frames); the
zero-duration frame_shift events and the final per-spin frame report carry
the bookkeeping that relates the physical propagator back to the logical
one.  The report convention: simulating the sequence yields, up to global
phase, prod_i exp(-i*deg2rad(frame_phases[i])*Iz^i) times the intended
circuit unitary.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HardPulse:
    """Ideal zero-duration rotation of a spin set about an in-plane axis."""

    spins: tuple
    angle: float  # degrees
    phase: float  # degrees, physical

    kind = "hard_pulse"
    duration = 0.0

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(sorted(int(s) for s in self.spins)))
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "phase", float(self.phase))


@dataclass(frozen=True)
class SoftPulse:
    """Constant-amplitude selective pulse on one transmitter channel."""

    channel: int
    carrier: float  # Hz, offset of the pulse carrier in the channel frame
    amplitude: float  # Hz, nutation frequency
    duration: float  # s
    phase: float  # degrees, physical

    kind = "soft_pulse"

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("soft pulse duration must be >= 0")
        if self.amplitude < 0:
            raise ValueError("soft pulse amplitude must be >= 0")


@dataclass(frozen=True)
class Delay:
    duration: float  # s

    kind = "delay"

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("delay duration must be >= 0")


@dataclass(frozen=True)
class Crusher:
    """Ideal gradient crusher: destroys all coherence orders except 0."""

    kind = "crusher"
    duration = 0.0


@dataclass(frozen=True)
class FrameShift:
    """Bookkeeping-only z-rotation marker (no physical evolution)."""

    spin: int
    phase: float  # degrees

    kind = "frame_shift"
    duration = 0.0


@dataclass(frozen=True)
class PulseSequence:
    n: int
    events: tuple = field(default_factory=tuple)
    frame_phases: tuple = None  # degrees, per spin

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.frame_phases is None:
            object.__setattr__(self, "frame_phases", tuple(0.0 for _ in range(self.n)))
        else:
            phases = tuple(float(v) for v in self.frame_phases)
            if len(phases) != self.n:
                raise ValueError("frame_phases must have one entry per spin")
            object.__setattr__(self, "frame_phases", phases)

    @property
    def duration(self):
        return sum(ev.duration for ev in self.events)

    def __len__(self):
        return len(self.events)

    def concatenated(self, other):
        if other.n != self.n:
            raise ValueError("spin count mismatch")
        phases = tuple(a + b for a, b in zip(self.frame_phases, other.frame_phases))
        return PulseSequence(self.n, self.events + other.events, phases)


def frame_unitary(frame_phases_deg, n):
    """prod_i exp(-i * phase_i * Iz^i) as a diagonal matrix."""
    diag = np.ones(2**n, dtype=complex)
    for spin, deg in enumerate(frame_phases_deg):
        half = np.deg2rad(deg) / 2.0
        for m in range(2**n):
            if (m >> (n - 1 - spin)) & 1:
                diag[m] *= np.exp(1j * half)
            else:
                diag[m] *= np.exp(-1j * half)
    return np.diag(diag)


# ---------------------------------------------------------------------------
# serialization: one event per line, explicit units, trailing frame report

def sequence_to_text(seq):
    lines = [f"spins {seq.n}"]
    for ev in seq.events:
        if ev.kind == "hard_pulse":
            spins = ",".join(str(s) for s in ev.spins)
            lines.append(f"HARD spins={spins} angle_deg={ev.angle:.17g} phase_deg={ev.phase:.17g}")
        elif ev.kind == "soft_pulse":
            lines.append(
                f"SOFT channel={ev.channel} carrier_hz={ev.carrier:.17g} "
                f"amplitude_hz={ev.amplitude:.17g} duration_s={ev.duration:.17g} "
                f"phase_deg={ev.phase:.17g}"
            )
        elif ev.kind == "delay":
            lines.append(f"DELAY duration_s={ev.duration:.17g}")
        elif ev.kind == "crusher":
            lines.append("CRUSHER")
        elif ev.kind == "frame_shift":
            lines.append(f"FRAME spin={ev.spin} phase_deg={ev.phase:.17g}")
        else:
            raise ValueError(f"cannot serialize event kind {ev.kind!r}")
    report = " ".join(f"{i}={v:.17g}" for i, v in enumerate(seq.frame_phases))
    lines.append(f"FRAMEREPORT {report}")
    return "\n".join(lines) + "\n"


def _kv(parts):
    out = {}
    for p in parts:
        key, val = p.split("=", 1)
        out[key] = val
    return out


def sequence_from_text(text):
    n = None
    events = []
    phases = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].upper()
        if op == "SPINS":
            n = int(parts[1])
        elif op == "HARD":
            kv = _kv(parts[1:])
            spins = [int(s) for s in kv["spins"].split(",")]
            events.append(HardPulse(spins, float(kv["angle_deg"]), float(kv["phase_deg"])))
        elif op == "SOFT":
            kv = _kv(parts[1:])
            events.append(
                SoftPulse(
                    int(kv["channel"]),
                    float(kv["carrier_hz"]),
                    float(kv["amplitude_hz"]),
                    float(kv["duration_s"]),
                    float(kv["phase_deg"]),
                )
            )
        elif op == "DELAY":
            kv = _kv(parts[1:])
            events.append(Delay(float(kv["duration_s"])))
        elif op == "CRUSHER":
            events.append(Crusher())
        elif op == "FRAME":
            kv = _kv(parts[1:])
            events.append(FrameShift(int(kv["spin"]), float(kv["phase_deg"])))
        elif op == "FRAMEREPORT":
            kv = _kv(parts[1:])
            phases = [float(kv[str(i)]) for i in range(len(kv))]
        else:
            raise ValueError(f"unknown sequence line: {raw!r}")
    if n is None:
        raise ValueError("sequence file must declare 'spins <n>'")
    return PulseSequence(n, events, phases)
