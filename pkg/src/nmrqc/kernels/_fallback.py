"""Pure numpy implementations of the propagator kernels."""

import numpy as np

BACKEND = "python"


def expm_hermitian(h, t):
    """exp(-i * h * t) for Hermitian h, via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def piecewise_propagator(h0, hx, hy, cx, cy, dt):
    """Time-ordered product of step propagators for a piecewise-constant drive.

    Step k evolves under h0 + cx[k]*hx + cy[k]*hy for time dt; step 0 acts
    first.  Returns the accumulated unitary.
    """
    dim = h0.shape[0]
    u = np.eye(dim, dtype=complex)
    for k in range(len(cx)):
        h = h0 + cx[k] * hx + cy[k] * hy
        u = expm_hermitian(h, dt) @ u
    return u
