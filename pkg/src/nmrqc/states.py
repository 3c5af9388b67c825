"""Density matrices and product-operator expansions for n spin-1/2 nuclei.

Two representations are used side by side and never mixed silently:

* ``full``      -- unit trace, the complete density matrix.
* ``deviation`` -- the traceless part only, after dropping the identity
                   component that NMR cannot observe.

Arithmetic across the two tags raises; ``to_full`` / ``to_deviation``
convert explicitly.
"""

import numpy as np
from scipy.linalg import sqrtm

from .operators import check_spin_count, is_hermitian, iz_diagonal, popcounts, product_word

HERMITICITY_TOL = 1e-12

_EXTRACT = None  # lazy 4x2x2 tensor for product-operator transforms
_REBUILD = None


class DensityMatrix:
    """Immutable 2^n x 2^n Hermitian state, tagged full or deviation."""

    __slots__ = ("matrix", "kind", "n")

    def __init__(self, matrix, kind, validate=True):
        matrix = np.array(matrix, dtype=complex)
        dim = matrix.shape[0]
        if matrix.shape != (dim, dim) or dim & (dim - 1) != 0:
            raise ValueError(f"matrix must be square with power-of-two dim, got {matrix.shape}")
        n = dim.bit_length() - 1
        check_spin_count(n)
        if kind not in ("full", "deviation"):
            raise ValueError(f"kind must be 'full' or 'deviation', got {kind!r}")
        if validate:
            if not is_hermitian(matrix, HERMITICITY_TOL):
                raise ValueError("density matrix must be Hermitian")
            tr = np.trace(matrix).real
            if kind == "full" and abs(tr - 1.0) > 1e-9:
                raise ValueError(f"full density matrix must have unit trace, got {tr}")
            if kind == "deviation" and abs(tr) > 1e-9:
                raise ValueError(f"deviation matrix must be traceless, got trace {tr}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n", n)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self):
        return 2**self.n

    def diagonal(self):
        return np.real(np.diag(self.matrix)).copy()

    def evolve(self, unitary):
        """Conjugate by a unitary: U rho U(dagger). Preserves the tag."""
        return DensityMatrix(unitary @ self.matrix @ unitary.conj().T, self.kind, validate=False)

    def to_full(self):
        if self.kind == "full":
            return self
        return DensityMatrix(self.matrix + np.eye(self.dim) / self.dim, "full", validate=False)

    def to_deviation(self):
        if self.kind == "deviation":
            return self
        return DensityMatrix(self.matrix - np.eye(self.dim) / self.dim, "deviation", validate=False)

    def __add__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        if self.kind != "deviation" or other.kind != "deviation":
            raise ValueError("only deviation matrices can be added")
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return DensityMatrix(self.matrix + other.matrix, "deviation", validate=False)

    def scaled(self, factor):
        if self.kind != "deviation":
            raise ValueError("only deviation matrices can be rescaled")
        return DensityMatrix(float(factor) * self.matrix, "deviation", validate=False)

    def __repr__(self):
        return f"DensityMatrix(n={self.n}, kind={self.kind!r})"


def basis_state(n, index):
    """Full density matrix |index><index|."""
    check_spin_count(n)
    if not 0 <= index < 2**n:
        raise ValueError(f"basis state {index} out of range for n={n}")
    mat = np.zeros((2**n, 2**n), dtype=complex)
    mat[index, index] = 1.0
    return DensityMatrix(mat, "full", validate=False)


def pure_state(amplitudes):
    """Full density matrix |psi><psi| from a (normalized) amplitude vector."""
    psi = np.asarray(amplitudes, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), "full", validate=False)


def thermal_deviation(sys_or_n, weights):
    """Thermal-equilibrium deviation sum_i w_i * 2 Iz^i.

    Diagonal, with population deviation sum_i w_i*(+1 for bit 0, -1 for
    bit 1) on each basis state.  Equal weights give the homonuclear
    pattern, e.g. {3a, a, a, -a, a, -a, -a, -3a} for three spins.
    """
    n = sys_or_n if isinstance(sys_or_n, int) else sys_or_n.n
    check_spin_count(n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"need {n} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite")
    diag = np.zeros(2**n)
    for i in range(n):
        diag += weights[i] * 2.0 * iz_diagonal(i, n)
    return DensityMatrix(np.diag(diag.astype(complex)), "deviation", validate=False)


def effective_pure_target(n, basis_index):
    """Deviation part of the effective pure state |s><s|: |s><s| - I/2^n.

    Normalized so the outlier population deviation is (2^n - 1)/2^n; the
    remaining 2^n - 1 populations all equal -1/2^n.  For s = 0 this equals
    the sum of all 2^n - 1 z-only product-operator words with the textbook
    coefficients (Iz + Sz + 2 IzSz for two spins, and so on).
    """
    check_spin_count(n)
    if not 0 <= basis_index < 2**n:
        raise ValueError(f"basis state {basis_index} out of range for n={n}")
    diag = np.full(2**n, -1.0 / 2**n)
    diag[basis_index] += 1.0
    return DensityMatrix(np.diag(diag.astype(complex)), "deviation", validate=False)


def _build_po_tensors():
    global _EXTRACT, _REBUILD
    if _EXTRACT is not None:
        return
    words = [product_word(ch) for ch in "exyz"]
    # extraction: c_w = Tr(rho W) / Tr(W W); rebuild: rho = sum c_w W
    _EXTRACT = np.stack([w.T / np.trace(w @ w) for w in words]).copy()
    _REBUILD = np.stack(words).copy()


def to_product_operators(rho):
    """Expand a state over tensor words of {E, Ix, Iy, Iz}.

    Returns a real array of shape (4,)*n; axis i indexes spin i's factor in
    the order (E, Ix, Iy, Iz).  The coefficient of a word W is
    Tr(rho W)/Tr(W W), so e.g. 2a*Iz expands to coefficient 2a on 'z'.
    """
    _build_po_tensors()
    n = rho.n
    # tensor with row/column index pairs per spin: (r0, c0, r1, c1, ...)
    t = rho.matrix.reshape((2,) * (2 * n))
    order = [axis for i in range(n) for axis in (i, n + i)]
    t = t.transpose(order)
    for _ in range(n):
        # contract the leading (r, c) slot into a coefficient axis, cycling
        # axes so each spin is processed once
        t = np.tensordot(_EXTRACT, t, axes=([1, 2], [0, 1]))
        t = np.moveaxis(t, 0, t.ndim - 1)
    return np.real(t)


def from_product_operators(coeffs):
    """Inverse of to_product_operators."""
    _build_po_tensors()
    coeffs = np.asarray(coeffs)
    n = coeffs.ndim
    t = coeffs.astype(complex)
    for _ in range(n):
        t = np.tensordot(t, _REBUILD, axes=([0], [0]))  # appends (r, c)
    # axes now (r0, c0, r1, c1, ...) -> (r0, r1, ..., c0, c1, ...)
    rows = list(range(0, 2 * n, 2))
    cols = list(range(1, 2 * n, 2))
    t = t.transpose(rows + cols).reshape(2**n, 2**n)
    kind = "deviation" if abs(np.trace(t)) < 1e-9 else "full"
    return DensityMatrix(t, kind, validate=False)


def word_label(indices):
    """Word label like 'ezx' from per-spin indices into (e, x, y, z)."""
    return "".join("exyz"[i] for i in indices)


def expectation(rho, operator):
    """Tr(rho O)."""
    operator = np.asarray(operator)
    if operator.shape != rho.matrix.shape:
        raise ValueError(f"operator shape {operator.shape} != state shape {rho.matrix.shape}")
    return complex(np.trace(rho.matrix @ operator))


def coherence_orders(n):
    """Matrix of coherence orders p[r, s] = popcount(s) - popcount(r)."""
    pc = popcounts(n)
    return pc[None, :] - pc[:, None]


def coherence_order_filter(rho, keep_orders):
    """Zero all elements whose coherence order is not in keep_orders.

    keep_orders must be closed under negation so Hermiticity is preserved.
    The order-0 block (populations and zero-quantum coherences) is what an
    ideal gradient crusher leaves behind.
    """
    keep = set(int(p) for p in keep_orders)
    if set(-p for p in keep) != keep:
        raise ValueError("keep_orders must be symmetric under negation")
    mask = np.isin(coherence_orders(rho.n), sorted(keep))
    return DensityMatrix(np.where(mask, rho.matrix, 0.0), rho.kind, validate=False)


def trace_distance(rho1, rho2):
    """(1/2) * trace norm of the difference; works for matching tags."""
    if rho1.kind != rho2.kind:
        raise ValueError("cannot compare states with different representation tags")
    eigs = np.linalg.eigvalsh(rho1.matrix - rho2.matrix)
    return 0.5 * float(np.sum(np.abs(eigs)))


def fidelity(rho1, rho2):
    """Uhlmann fidelity (Tr sqrt(sqrt(r1) r2 sqrt(r1)))^2 for full states."""
    if rho1.kind != "full" or rho2.kind != "full":
        raise ValueError("fidelity is defined for full density matrices")
    s = sqrtm(rho1.matrix)
    inner = sqrtm(s @ rho2.matrix @ s)
    val = np.real(np.trace(inner)) ** 2
    return float(min(max(val, 0.0), 1.0))


def distance(rho1, rho2):
    """Both comparison metrics; fidelity is None for deviation states."""
    td = trace_distance(rho1, rho2)
    fid = fidelity(rho1, rho2) if rho1.kind == "full" and rho2.kind == "full" else None
    return {"trace_distance": td, "fidelity": fid}


def dump_state(rho):
    """Serialize to the text matrix format (dim, tag, rows of re/im pairs)."""
    lines = [f"dim {rho.dim}", f"repr {rho.kind}"]
    for row in rho.matrix:
        lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def load_state(text):
    """Parse the text matrix format written by dump_state."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("dim ") or not lines[1].startswith("repr "):
        raise ValueError("state file must start with 'dim N' and 'repr full|deviation'")
    dim = int(lines[0].split()[1])
    kind = lines[1].split()[1]
    rows = []
    for ln in lines[2 : 2 + dim]:
        vals = [float(v) for v in ln.split()]
        if len(vals) != 2 * dim:
            raise ValueError("bad matrix row length")
        rows.append([complex(vals[2 * k], vals[2 * k + 1]) for k in range(dim)])
    if len(rows) != dim:
        raise ValueError(f"expected {dim} matrix rows")
    return DensityMatrix(np.array(rows), kind)
