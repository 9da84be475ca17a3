"""Small dense complex-matrix kernel.

Everything here works on plain ``numpy`` arrays. Matrices are at most a few
qubits wide, so no attempt is made at sparse or batched tricks beyond what
numpy gives for free.
"""

import numpy as np

HERM_TOL = 1e-10
PSD_FLOOR = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class LinAlgError(ValueError):
    """Raised on shape, Hermiticity or positivity violations."""


def dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def kron(*mats):
    """Kronecker product of any number of matrices, left to right."""
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def is_hermitian(m, tol=HERM_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dag(m))) < tol


def _hermitize(m, tol=HERM_TOL):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinAlgError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - dag(m)), initial=0.0) >= tol:
        raise LinAlgError("matrix is not Hermitian within tolerance")
    return (m + dag(m)) / 2


def partial_trace(m, keep, dims=(2, 2)):
    """Reduce a bipartite operator to one factor.

    ``keep`` is 1-based: ``keep=1`` returns the first tensor factor (traces out
    the second), ``keep=2`` returns the second.
    """
    m = np.asarray(m)
    da, db = dims
    if m.shape != (da * db, da * db):
        raise LinAlgError(f"shape {m.shape} does not match dims {dims}")
    t = m.reshape(da, db, da, db)
    if keep == 1:
        return np.einsum("ijkj->ik", t)
    if keep == 2:
        return np.einsum("ijil->jl", t)
    raise LinAlgError(f"keep must be 1 or 2, got {keep!r}")


def herm_eig(m):
    """Eigen-decomposition of a Hermitian matrix; eigenvalues ascending."""
    h = _hermitize(m)
    w, v = np.linalg.eigh(h)
    return w, v


def expm_herm(h, scale=1.0):
    """``exp(-i * scale * h)`` for Hermitian ``h``."""
    w, v = herm_eig(h)
    return (v * np.exp(-1j * scale * w)) @ dag(v)


def sqrtm_psd(m, floor=PSD_FLOOR):
    w, v = herm_eig(m)
    if w[0] < -floor:
        raise LinAlgError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dag(v)


def trace_norm(m):
    """Sum of singular values (equals sum of |eigenvalues| for Hermitian input)."""
    m = np.asarray(m, dtype=complex)
    if is_hermitian(m):
        return float(np.sum(np.abs(np.linalg.eigvalsh((m + dag(m)) / 2))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def phase_distance(u, v):
    """``min_phi ||u - e^{i phi} v||_F``; zero iff equal up to global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    overlap = np.trace(dag(v) @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.linalg.norm(u - phase * v))


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    return np.max(np.abs(dag(u) @ u - np.eye(u.shape[0]))) < tol
