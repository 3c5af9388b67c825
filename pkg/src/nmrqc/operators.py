"""Single-spin operators, tensor embeddings and basis bookkeeping.

Basis ordering convention (used everywhere in this package): an n-spin
Zeeman basis state |b_0 b_1 ... b_{n-1}> is indexed by the integer whose
MOST significant bit is spin 0, i.e. bit_of(m, 0, n) is the leftmost
binary digit of m.  |0> is spin up (+1/2 eigenvalue of Iz).
"""

import numpy as np

MAX_SPINS = 12

E2 = np.eye(2, dtype=complex)
IX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
IY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
IZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
IPLUS = IX + 1j * IY
IMINUS = IX - 1j * IY

_SINGLE = {"e": E2, "x": IX, "y": IY, "z": IZ}


def check_spin_count(n):
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in [1, {MAX_SPINS}], got {n}")


def bit_of(state, spin, n):
    """Bit of `spin` in basis-state index `state` (spin 0 = leftmost bit)."""
    return (state >> (n - 1 - spin)) & 1


def popcounts(n):
    """Array of bit counts for all 2**n basis states."""
    states = np.arange(2**n)
    counts = np.zeros(2**n, dtype=np.int64)
    for s in range(n):
        counts += (states >> s) & 1
    return counts


def embed(op, spin, n):
    """Embed a single-spin operator at position `spin` in an n-spin space."""
    out = op if spin == 0 else E2
    for s in range(1, n):
        out = np.kron(out, op if s == spin else E2)
    return out


def single_spin(axis):
    """Single-spin angular momentum operator for axis in {'x','y','z','e'}."""
    return _SINGLE[axis]


def product_word(word):
    """Tensor word over {e, x, y, z}: e.g. 'zz' -> Iz x Iz (n = len(word))."""
    out = _SINGLE[word[0]]
    for ch in word[1:]:
        out = np.kron(out, _SINGLE[ch])
    return out


def rotation_generator(spins, phase_rad, n):
    """Sum over `spins` of (Ix cos(phase) + Iy sin(phase))."""
    gen = np.zeros((2**n, 2**n), dtype=complex)
    for s in spins:
        gen += np.cos(phase_rad) * embed(IX, s, n) + np.sin(phase_rad) * embed(IY, s, n)
    return gen


def iz_diagonal(spin, n):
    """Diagonal of the embedded Iz operator (+1/2 for bit 0, -1/2 for bit 1)."""
    states = np.arange(2**n)
    bits = (states >> (n - 1 - spin)) & 1
    return 0.5 - bits.astype(float)


def is_hermitian(mat, tol=1e-12):
    scale = max(np.linalg.norm(mat), 1.0)
    return np.linalg.norm(mat - mat.conj().T) <= tol * scale


def phase_aligned_distance(u, v):
    """Frobenius distance between matrices after quotienting a global phase."""
    tr = np.trace(v.conj().T @ u)
    if abs(tr) < 1e-300:
        return float(np.linalg.norm(u - v))
    return float(np.linalg.norm(u - (tr / abs(tr)) * v))
