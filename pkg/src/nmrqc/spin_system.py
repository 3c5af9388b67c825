"""Molecule model: spins, offsets, J couplings, relaxation, internal Hamiltonian.

Frequencies are plain Hz at every interface; conversion to angular
frequency happens only inside Hamiltonian construction.  Offsets are
per-spin rotating-frame offsets, i.e. each spin's Larmor frequency
relative to its transmitter channel's carrier.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import yaml

from .operators import IX, IY, bit_of, check_spin_count, embed, iz_diagonal


@dataclass(frozen=True)
class SpinSystem:
    """A molecule with n spin-1/2 nuclei.

    Parameters
    ----------
    offsets : sequence of float
        Rotating-frame offset of each spin in Hz.
    j_couplings : array-like, shape (n, n)
        Symmetric scalar coupling matrix in Hz, zero diagonal.
    t1, t2 : sequence of float or None
        Per-spin relaxation times in seconds.  None disables relaxation.
    labels : sequence of str or None
        Spin names; defaults to s0, s1, ...
    channel_of : sequence of int or None
        Transmitter channel of each spin; defaults to one channel per spin.
    """

    offsets: tuple = ()
    j_couplings: np.ndarray = field(default=None)
    t1: tuple = None
    t2: tuple = None
    labels: tuple = None
    channel_of: tuple = None

    def __post_init__(self):
        n = len(self.offsets)
        check_spin_count(n)
        j = np.asarray(self.j_couplings, dtype=float)
        if j.shape != (n, n):
            raise ValueError(f"J matrix must be {n}x{n}, got {j.shape}")
        if not np.allclose(j, j.T, rtol=0, atol=0):
            raise ValueError("asymmetric J couplings")
        if np.any(np.diag(j) != 0):
            raise ValueError("J matrix diagonal must be zero")
        j = j.copy()
        j.setflags(write=False)
        object.__setattr__(self, "j_couplings", j)
        object.__setattr__(self, "offsets", tuple(float(v) for v in self.offsets))
        for name in ("t1", "t2"):
            times = getattr(self, name)
            if times is not None:
                times = tuple(float(v) for v in times)
                if len(times) != n:
                    raise ValueError(f"{name} must have one entry per spin")
                if any(v <= 0 for v in times):
                    raise ValueError(f"nonpositive {name} relaxation time")
                object.__setattr__(self, name, times)
        if self.t1 is not None and self.t2 is not None:
            for i, (t1, t2) in enumerate(zip(self.t1, self.t2)):
                if t2 > 2 * t1 + 1e-12:
                    raise ValueError(f"spin {i}: T2 must not exceed 2*T1")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(f"s{i}" for i in range(n)))
        else:
            object.__setattr__(self, "labels", tuple(str(v) for v in self.labels))
        if self.channel_of is None:
            object.__setattr__(self, "channel_of", tuple(range(n)))
        else:
            object.__setattr__(self, "channel_of", tuple(int(v) for v in self.channel_of))
        if len(self.labels) != n or len(self.channel_of) != n:
            raise ValueError("labels/channel_of must have one entry per spin")

    @property
    def n(self):
        return len(self.offsets)

    @property
    def has_relaxation(self):
        return self.t1 is not None and self.t2 is not None

    def coupling_graph(self):
        """Set of unordered spin pairs with nonzero J."""
        return {
            frozenset((i, j))
            for i, j in combinations(range(self.n), 2)
            if self.j_couplings[i, j] != 0.0
        }

    def spins_on_channel(self, channel):
        return [i for i in range(self.n) if self.channel_of[i] == channel]


@dataclass(frozen=True)
class HamiltonianModel:
    """Coupling model: weak keeps only IzIz terms, strong adds transverse ones."""

    mode: str = "weak"

    def __post_init__(self):
        if self.mode not in ("weak", "strong"):
            raise ValueError(f"unknown coupling mode {self.mode!r}")


def load_system(source):
    """Build a validated SpinSystem from a config document.

    `source` is a mapping, YAML/JSON text, or a path to such a file with keys:

    spins:
      - {label: H, offset_hz: 0.0, channel: 0, t1_s: 10.0, t2_s: 2.0}
      - {label: C, offset_hz: 500.0, channel: 1, t1_s: 15.0, t2_s: 0.3}
    j_hz:
      - {i: 0, j: 1, value: 215.0}

    A full matrix under key `j_matrix` is accepted instead of `j_hz`;
    it must be symmetric.  T1/T2 keys are optional but must be supplied
    for either all spins or none.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if "\n" not in text and not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        doc = yaml.safe_load(text)
    if not isinstance(doc, dict) or "spins" not in doc:
        raise ValueError("config must be a mapping with a 'spins' key")

    spins = doc["spins"]
    n = len(spins)
    check_spin_count(n)
    offsets = [float(s["offset_hz"]) for s in spins]
    labels = [str(s.get("label", f"s{i}")) for i, s in enumerate(spins)]
    channels = [int(s.get("channel", i)) for i, s in enumerate(spins)]
    t1 = [s.get("t1_s") for s in spins]
    t2 = [s.get("t2_s") for s in spins]
    for name, times in (("t1_s", t1), ("t2_s", t2)):
        present = [v is not None for v in times]
        if any(present) and not all(present):
            raise ValueError(f"{name} must be given for all spins or none")
    t1 = tuple(float(v) for v in t1) if all(v is not None for v in t1) else None
    t2 = tuple(float(v) for v in t2) if all(v is not None for v in t2) else None

    j = np.zeros((n, n))
    if "j_matrix" in doc:
        j = np.asarray(doc["j_matrix"], dtype=float)
        if j.shape != (n, n):
            raise ValueError(f"j_matrix must be {n}x{n}")
        if not np.allclose(j, j.T, rtol=0, atol=0):
            raise ValueError("asymmetric J couplings in j_matrix")
    for entry in doc.get("j_hz", []):
        i, k, value = int(entry["i"]), int(entry["j"]), float(entry["value"])
        if not (0 <= i < n and 0 <= k < n) or i == k:
            raise ValueError(f"bad coupling indices ({i}, {k})")
        if j[i, k] != 0.0 and j[i, k] != value:
            raise ValueError(f"conflicting J values for pair ({i}, {k})")
        j[i, k] = j[k, i] = value

    return SpinSystem(
        offsets=offsets, j_couplings=j, t1=t1, t2=t2, labels=labels, channel_of=channels
    )


def internal_hamiltonian(sys, model=HamiltonianModel()):
    """Internal Hamiltonian in angular-frequency units (rad/s), 2^n x 2^n.

    Weak mode:  H = sum_i 2*pi*offset_i Iz^i - sum_{i<j} 2*pi*J_ij Iz^i Iz^j,
    which is diagonal in the Zeeman basis.  Strong mode adds the transverse
    coupling terms -2*pi*J_ij (Ix^i Ix^j + Iy^i Iy^j).

    The sign of the coupling term is tied to the detection convention: with
    I+ observation a lone spin at offset nu appears at +nu, and a coupling
    partner in |0> must shift the observed line by -J/2 (the multiplet_lines
    labelling).  Both requirements together fix the minus sign here.
    """
    n = sys.n
    dim = 2**n
    diag = np.zeros(dim)
    for i in range(n):
        diag += 2 * np.pi * sys.offsets[i] * iz_diagonal(i, n)
    for i, j in combinations(range(n), 2):
        if sys.j_couplings[i, j] != 0.0:
            diag -= 2 * np.pi * sys.j_couplings[i, j] * iz_diagonal(i, n) * iz_diagonal(j, n)
    h = np.diag(diag.astype(complex))
    if model.mode == "strong":
        for i, j in combinations(range(n), 2):
            jij = sys.j_couplings[i, j]
            if jij != 0.0:
                h -= 2 * np.pi * jij * (
                    embed(IX, i, n) @ embed(IX, j, n) + embed(IY, i, n) @ embed(IY, j, n)
                )
    return h


def internal_hamiltonian_diagonal(sys):
    """Diagonal (rad/s) of the weak-coupling Hamiltonian, as a vector."""
    return np.real(np.diag(internal_hamiltonian(sys, HamiltonianModel("weak"))))


def multiplet_lines(sys, spin):
    """Spectral lines of one spin under weak coupling.

    Returns a list of (frequency_hz, label) pairs, one per configuration of
    the other spins.  The label is the neighbour bit string in spin order
    (spins < spin, then spins > spin, i.e. all spins except `spin`).
    A neighbour in |0> shifts the line by -J/2, in |1> by +J/2.
    """
    n = sys.n
    if not 0 <= spin < n:
        raise ValueError(f"spin index {spin} out of range for n={n}")
    others = [j for j in range(n) if j != spin]
    lines = []
    for cfg in range(2 ** len(others)):
        bits = [(cfg >> (len(others) - 1 - k)) & 1 for k in range(len(others))]
        freq = sys.offsets[spin]
        for j, b in zip(others, bits):
            sign = -1.0 if b == 0 else +1.0
            freq += sign * sys.j_couplings[spin, j] / 2.0
        lines.append((freq, "".join(str(b) for b in bits)))
    return lines


def line_frequency_for_state(sys, spin, state):
    """Frequency of the multiplet line of `spin` selected by a basis state."""
    n = sys.n
    freq = sys.offsets[spin]
    for j in range(n):
        if j == spin:
            continue
        sign = -1.0 if bit_of(state, j, n) == 0 else +1.0
        freq += sign * sys.j_couplings[spin, j] / 2.0
    return freq
