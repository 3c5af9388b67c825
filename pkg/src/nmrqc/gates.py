"""Abstract gate layer: canonical unitaries, circuits, QFT and the FFT oracle.

Gates are independent of any pulse realization; the compiler lowers them
separately.  Unitaries follow the package rotation convention
U = exp(-i * angle * (Ix cos(phase) + Iy sin(phase))) and the basis ordering
of operators.py (spin 0 = leftmost bit).
"""

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    IZ,
    bit_of,
    check_spin_count,
    embed,
    phase_aligned_distance,
    rotation_generator,
)

SQRT2 = np.sqrt(2.0)

HADAMARD_2x2 = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
ROT90Y_2x2 = np.array([[1, -1], [1, 1]], dtype=complex) / SQRT2
CNOT_4x4 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
INEPT_4x4 = np.array(
    [[1, 0, 0, 0], [0, 1j, 0, 0], [0, 0, 0, 1], [0, 0, -1j, 0]], dtype=complex
)


@dataclass(frozen=True)
class Gate:
    """One gate: kind plus spin indices and parameters.

    kinds and their params:
      rotation(spin; axis 'x'|'y'|'z' or phase_deg for an x-y plane axis;
               angle_deg)
      hadamard(spin)
      cnot(control, target) / inept(control, target)
      controlled_phase(spin_a, spin_b, angle_deg)
      permutation(spins, images): bijection over the 2^k states of `spins`
      qft_block(spins, convention '+'|'-')
    """

    kind: str
    spins: tuple
    axis: str = None
    angle: float = None
    phase: float = None
    images: tuple = None
    convention: str = None

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(int(s) for s in self.spins))
        if len(set(self.spins)) != len(self.spins):
            raise ValueError(f"repeated spin indices in {self.kind} gate")


def rotation(spin, axis, angle_deg):
    """Rotation about x, y, z, or an azimuth given as a phase in degrees."""
    if isinstance(axis, str):
        if axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be x, y, z or a phase, got {axis!r}")
        return Gate("rotation", (spin,), axis=axis, angle=float(angle_deg))
    return Gate("rotation", (spin,), axis="phase", angle=float(angle_deg), phase=float(axis))


def hadamard(spin):
    return Gate("hadamard", (spin,))


def cnot(control, target):
    return Gate("cnot", (control, target))


def inept(control, target):
    return Gate("inept", (control, target))


def controlled_phase(spin_a, spin_b, angle_deg):
    return Gate("controlled_phase", (spin_a, spin_b), angle=float(angle_deg))


def permutation(spins, images):
    images = tuple(int(v) for v in images)
    k = len(spins)
    if sorted(images) != list(range(2**k)):
        raise ValueError("permutation images must be a bijection over 2^k states")
    return Gate("permutation", tuple(spins), images=images)


def qft_block(spins, convention="-"):
    if convention not in ("+", "-"):
        raise ValueError("QFT convention must be '+' or '-'")
    return Gate("qft_block", tuple(spins), convention=convention)


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over a fixed number of spins."""

    n: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        check_spin_count(self.n)
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= s < self.n for s in g.spins):
                raise ValueError(f"gate {g.kind} uses spin out of range for n={self.n}")

    def __len__(self):
        return len(self.gates)

    def appended(self, *gates):
        return Circuit(self.n, self.gates + tuple(gates))


def _phase_rad(gate):
    if gate.axis == "x":
        return 0.0
    if gate.axis == "y":
        return np.pi / 2
    return np.deg2rad(gate.phase)


def _embed_on_spins(mat_small, spins, n):
    """Embed a 2^k unitary acting on `spins` (in order) into the n-spin space."""
    k = len(spins)
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    others = [s for s in range(n) if s not in spins]
    for m in range(dim):
        sub = 0
        for idx, s in enumerate(spins):
            sub |= bit_of(m, s, n) << (k - 1 - idx)
        base = m
        for s in spins:
            base &= ~(1 << (n - 1 - s))
        for sub2 in range(2**k):
            amp = mat_small[sub2, sub]
            if amp != 0:
                m2 = base
                for idx, s in enumerate(spins):
                    if (sub2 >> (k - 1 - idx)) & 1:
                        m2 |= 1 << (n - 1 - s)
                u[m2, m] = amp
    return u


def gate_matrix(gate, n):
    """The 2^n x 2^n unitary of a gate embedded in an n-spin register."""
    check_spin_count(n)
    if any(not 0 <= s < n for s in gate.spins):
        raise ValueError(f"gate spins {gate.spins} out of range for n={n}")
    if gate.kind == "rotation":
        angle = np.deg2rad(gate.angle)
        if gate.axis == "z":
            exponent = -1j * angle * np.diag(embed(IZ, gate.spins[0], n))
            return np.diag(np.exp(exponent))
        gen = rotation_generator(gate.spins, _phase_rad(gate), n)
        return _expm_generator(angle, gen)
    if gate.kind == "hadamard":
        return _embed_on_spins(HADAMARD_2x2, gate.spins, n)
    if gate.kind == "cnot":
        return _embed_on_spins(CNOT_4x4, gate.spins, n)
    if gate.kind == "inept":
        return _embed_on_spins(INEPT_4x4, gate.spins, n)
    if gate.kind == "controlled_phase":
        a, b = gate.spins
        diag = np.ones(2**n, dtype=complex)
        for m in range(2**n):
            if bit_of(m, a, n) and bit_of(m, b, n):
                diag[m] = np.exp(1j * np.deg2rad(gate.angle))
        return np.diag(diag)
    if gate.kind == "permutation":
        k = len(gate.spins)
        small = np.zeros((2**k, 2**k), dtype=complex)
        for src, dst in enumerate(gate.images):
            small[dst, src] = 1.0
        return _embed_on_spins(small, gate.spins, n)
    if gate.kind == "qft_block":
        small = qft_matrix(2 ** len(gate.spins), gate.convention)
        return _embed_on_spins(small, gate.spins, n)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def _expm_generator(angle, gen):
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def circuit_unitary(circuit):
    """Product of the gate matrices, first gate applied first."""
    u = np.eye(2**circuit.n, dtype=complex)
    for g in circuit.gates:
        u = gate_matrix(g, circuit.n) @ u
    return u


def apply_circuit(circuit, rho):
    """U rho U(dagger) for the circuit unitary; tag preserved."""
    if rho.n != circuit.n:
        raise ValueError(f"state has {rho.n} spins, circuit has {circuit.n}")
    return rho.evolve(circuit_unitary(circuit))


def apply_circuit_to_vector(circuit, psi):
    """Apply a circuit to a state vector without forming 2^n matrices.

    Permutations and QFT blocks act by index arithmetic / register reshape,
    everything else as a small tensor contraction.  This is what keeps the
    12-qubit period-finding runs cheap.
    """
    n = circuit.n
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 2**n:
        raise ValueError("state vector length mismatch")
    for g in circuit.gates:
        psi = _apply_gate_vector(g, psi, n)
    return psi


def _apply_gate_vector(gate, psi, n):
    if gate.kind == "permutation":
        spins, images = gate.spins, gate.images
        k = len(spins)
        idx = np.arange(2**n)
        sub = np.zeros(2**n, dtype=np.int64)
        for pos, s in enumerate(spins):
            sub |= ((idx >> (n - 1 - s)) & 1) << (k - 1 - pos)
        newsub = np.asarray(images)[sub]
        out_idx = idx.copy()
        for pos, s in enumerate(spins):
            bit = (newsub >> (k - 1 - pos)) & 1
            out_idx = (out_idx & ~(1 << (n - 1 - s))) | (bit << (n - 1 - s))
        out = np.zeros_like(psi)
        out[out_idx] = psi
        return out
    if gate.kind == "qft_block":
        return _apply_dense_block(qft_matrix(2 ** len(gate.spins), gate.convention), gate.spins, psi, n)
    if gate.kind == "controlled_phase":
        a, b = gate.spins
        idx = np.arange(2**n)
        both = (((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)).astype(bool)
        out = psi.copy()
        out[both] *= np.exp(1j * np.deg2rad(gate.angle))
        return out
    if gate.kind == "rotation" and gate.axis == "z":
        s = gate.spins[0]
        idx = np.arange(2**n)
        half = np.deg2rad(gate.angle) / 2
        phase = np.where((idx >> (n - 1 - s)) & 1, np.exp(1j * half), np.exp(-1j * half))
        return psi * phase
    small = _small_matrix(gate)
    return _apply_dense_block(small, gate.spins, psi, n)


def _small_matrix(gate):
    k = len(gate.spins)
    return gate_matrix(
        Gate(
            gate.kind,
            tuple(range(k)),
            axis=gate.axis,
            angle=gate.angle,
            phase=gate.phase,
            images=gate.images,
            convention=gate.convention,
        ),
        k,
    )


def _apply_dense_block(small, spins, psi, n):
    k = len(spins)
    t = psi.reshape((2,) * n)
    axes = list(spins)
    t = np.moveaxis(t, axes, range(k))
    shape = t.shape
    t = small @ t.reshape(2**k, -1)
    t = t.reshape(shape)
    t = np.moveaxis(t, range(k), axes)
    return t.reshape(-1)


def fft_reference(x, convention="-"):
    """Direct O(N^2) discrete Fourier transform, the oracle for QFT tests.

    y_k = (1/sqrt(N)) sum_j x_j exp(sign * 2*pi*i * j*k / N) with sign
    given by `convention`.  The '-' convention is the default used across
    the package (it reproduces the canonical shift-phase examples).
    """
    if convention not in ("+", "-"):
        raise ValueError("convention must be '+' or '-'")
    x = np.asarray(x, dtype=complex)
    nvals = x.size
    sign = 1.0 if convention == "+" else -1.0
    out = np.zeros(nvals, dtype=complex)
    for k in range(nvals):
        acc = 0.0 + 0.0j
        for j in range(nvals):
            acc += x[j] * np.exp(sign * 2j * np.pi * j * k / nvals)
        out[k] = acc / np.sqrt(nvals)
    return out


def qft_matrix(nstates, convention="-"):
    """Dense QFT unitary with entries (1/sqrt(N)) exp(sign*2*pi*i jk/N)."""
    if nstates < 1 or nstates & (nstates - 1) != 0:
        raise ValueError(f"QFT size must be a power of two, got {nstates}")
    if convention not in ("+", "-"):
        raise ValueError("convention must be '+' or '-'")
    sign = 1.0 if convention == "+" else -1.0
    j = np.arange(nstates)
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / nstates) / np.sqrt(nstates)


def qft_circuit(spins, convention="-"):
    """Hadamard + controlled-phase ladder with a final bit-reversal gate.

    `spins` lists the block qubits most-significant first.  The returned
    circuit's unitary equals qft_matrix(2^k, convention) on the block, up
    to global phase.
    """
    if convention not in ("+", "-"):
        raise ValueError("convention must be '+' or '-'")
    spins = tuple(spins)
    k = len(spins)
    n = max(spins) + 1
    sign = 1.0 if convention == "+" else -1.0
    gates = []
    for q in range(k):
        gates.append(hadamard(spins[q]))
        for t in range(q + 1, k):
            gates.append(controlled_phase(spins[q], spins[t], sign * 180.0 / 2 ** (t - q)))
    if k > 1:
        images = tuple(int(format(m, f"0{k}b")[::-1], 2) for m in range(2**k))
        gates.append(permutation(spins, images))
    return Circuit(n, gates)


def circuits_equal_up_to_phase(c1_or_u, c2_or_u, tol=1e-10):
    u1 = circuit_unitary(c1_or_u) if isinstance(c1_or_u, Circuit) else np.asarray(c1_or_u)
    u2 = circuit_unitary(c2_or_u) if isinstance(c2_or_u, Circuit) else np.asarray(c2_or_u)
    return phase_aligned_distance(u1, u2) <= tol


# ---------------------------------------------------------------------------
# line-oriented circuit serialization
#
#   ROT <spin> <x|y|z|phase_deg> <angle_deg>
#   HAD <spin>
#   CNOT <control> <target>
#   INEPT <control> <target>
#   CPHASE <a> <b> <angle_deg>
#   PERM <spins...> : <images...>
#   QFT <spins...> <+|->
#
# '#' starts a comment; the first non-comment line may be 'spins <n>' to fix
# the register size (otherwise the largest index used determines it).

def circuit_to_text(circuit):
    lines = [f"spins {circuit.n}"]
    for g in circuit.gates:
        if g.kind == "rotation":
            axis = g.axis if g.axis != "phase" else f"{g.phase:.17g}"
            lines.append(f"ROT {g.spins[0]} {axis} {g.angle:.17g}")
        elif g.kind == "hadamard":
            lines.append(f"HAD {g.spins[0]}")
        elif g.kind == "cnot":
            lines.append(f"CNOT {g.spins[0]} {g.spins[1]}")
        elif g.kind == "inept":
            lines.append(f"INEPT {g.spins[0]} {g.spins[1]}")
        elif g.kind == "controlled_phase":
            lines.append(f"CPHASE {g.spins[0]} {g.spins[1]} {g.angle:.17g}")
        elif g.kind == "permutation":
            spins = " ".join(str(s) for s in g.spins)
            images = " ".join(str(v) for v in g.images)
            lines.append(f"PERM {spins} : {images}")
        elif g.kind == "qft_block":
            lines.append(f"QFT {' '.join(str(s) for s in g.spins)} {g.convention}")
        else:
            raise ValueError(f"cannot serialize gate kind {g.kind!r}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text):
    gates = []
    declared_n = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].upper()
        if op == "SPINS":
            declared_n = int(parts[1])
        elif op == "ROT":
            spin, axis = int(parts[1]), parts[2]
            angle = float(parts[3])
            if axis in ("x", "y", "z"):
                gates.append(rotation(spin, axis, angle))
            else:
                gates.append(rotation(spin, float(axis), angle))
        elif op == "HAD":
            gates.append(hadamard(int(parts[1])))
        elif op == "CNOT":
            gates.append(cnot(int(parts[1]), int(parts[2])))
        elif op == "INEPT":
            gates.append(inept(int(parts[1]), int(parts[2])))
        elif op == "CPHASE":
            gates.append(controlled_phase(int(parts[1]), int(parts[2]), float(parts[3])))
        elif op == "PERM":
            sep = parts.index(":")
            gates.append(permutation([int(v) for v in parts[1:sep]],
                                     [int(v) for v in parts[sep + 1:]]))
        elif op == "QFT":
            gates.append(qft_block([int(v) for v in parts[1:-1]], parts[-1]))
        else:
            raise ValueError(f"unknown circuit line: {raw!r}")
    used = max((max(g.spins) for g in gates), default=-1) + 1
    n = declared_n if declared_n is not None else max(used, 1)
    if used > n:
        raise ValueError("gate spin index exceeds declared register size")
    return Circuit(n, gates)
