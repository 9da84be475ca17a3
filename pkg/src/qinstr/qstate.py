"""Density matrices, cardinal states and state-level figures of merit.

States are plain complex ``numpy`` arrays (2x2 or 4x4). Two-qubit states are
ordered ``kron(target, instruction)``: qubit 1 is the data qubit sigma, qubit
2 the instruction qubit rho. Entropies are in nats.
"""

import logging

import numpy as np

from .linalg import X, Y, Z, dag, herm_eig, kron, partial_trace, sqrtm_psd, trace_norm

log = logging.getLogger(__name__)

DM_TOL = 1e-9
REPAIR_LIMIT = 1e-7

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-i": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}
CARDINAL = tuple(_KETS)


class StateError(ValueError):
    pass


def ket(name):
    try:
        return _KETS[name].copy()
    except KeyError:
        raise StateError(f"unknown state name {name!r}; expected one of {CARDINAL}") from None


def pure_state(name):
    """Projector onto one of the six cardinal states ``0 1 + - +i -i``."""
    v = ket(name)
    return np.outer(v, v.conj())


def projector(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def check_dm(m, tol=DM_TOL):
    """Raise ``StateError`` unless ``m`` is Hermitian, unit-trace and PSD."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise StateError(f"density matrix must be 2x2 or 4x4, got {m.shape}")
    herm = np.max(np.abs(m - dag(m)))
    if herm > tol:
        raise StateError(f"not Hermitian (residual {herm:.2e})")
    tr = np.trace(m)
    if abs(tr - 1) > tol:
        raise StateError(f"trace is {tr:.12g}, expected 1")
    lam = np.linalg.eigvalsh((m + dag(m)) / 2)[0]
    if lam < -tol:
        raise StateError(f"negative eigenvalue {lam:.2e}")
    return m


def is_dm(m, tol=DM_TOL):
    try:
        check_dm(m, tol)
    except StateError:
        return False
    return True


def repair_dm(m, limit=REPAIR_LIMIT):
    """Clip slightly negative eigenvalues and renormalise.

    Finite-sample reconstructions can leave eigenvalues a hair below zero;
    anything more negative than ``limit`` is treated as a genuine error.
    """
    w, v = herm_eig((np.asarray(m) + dag(np.asarray(m))) / 2)
    if w[0] < -limit:
        raise StateError(f"eigenvalue {w[0]:.3e} too negative to repair")
    clipped = np.clip(w, 0.0, None)
    repair = float(np.sum(clipped - w))
    if repair > 0:
        log.debug("repaired density matrix, clipped weight %.3e", repair)
    out = (v * clipped) @ dag(v)
    return out / np.trace(out).real


def _psd_sqrt(m, noise=1e-14):
    w, v = herm_eig((m + dag(m)) / 2)
    if w[0] < -1e-8:
        raise StateError(f"fidelity needs PSD input, min eigenvalue {w[0]:.2e}")
    w = np.where(w < noise, 0.0, w)
    return (v * np.sqrt(w)) @ dag(v)


def state_fidelity(a, b):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``.

    Evaluated as the squared nuclear norm of ``sqrt(a) sqrt(b)``, which keeps
    rank-deficient inputs accurate to rounding level.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise StateError(f"dimension mismatch {a.shape} vs {b.shape}")
    s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    f = float(np.sum(s) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise StateError(f"dimension mismatch {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(a - b)


def von_neumann_entropy(m):
    """``-Tr(m ln m)`` in nats, with ``0 ln 0 = 0``."""
    w = np.linalg.eigvalsh((np.asarray(m) + dag(np.asarray(m))) / 2)
    w = w[w > 1e-15]
    return float(max(0.0, -np.sum(w * np.log(w))))


def _require_two_qubit(m):
    m = np.asarray(m)
    if m.shape != (4, 4):
        raise StateError(f"expected a two-qubit (4x4) state, got {m.shape}")
    return m


def mutual_information(omega):
    omega = _require_two_qubit(omega)
    return (
        von_neumann_entropy(partial_trace(omega, 1))
        + von_neumann_entropy(partial_trace(omega, 2))
        - von_neumann_entropy(omega)
    )


_YY = kron(Y, Y)


def concurrence(omega):
    """Wootters concurrence of a two-qubit state."""
    omega = _require_two_qubit(omega)
    flipped = _YY @ omega.conj() @ _YY
    s = sqrtm_psd((omega + dag(omega)) / 2, floor=1e-8)
    r = s @ flipped @ s
    lam = np.sqrt(np.clip(np.linalg.eigvalsh((r + dag(r)) / 2), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bloch(m):
    m = np.asarray(m)
    if m.shape != (2, 2):
        raise StateError(f"Bloch vector needs a 2x2 state, got {m.shape}")
    return np.array([np.trace(m @ p).real for p in (X, Y, Z)])


def from_bloch(r):
    x, y, z = r
    return 0.5 * (np.eye(2) + x * X + y * Y + z * Z)


def purity(m):
    m = np.asarray(m)
    return float(np.trace(m @ m).real)


def random_pure_ket(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_dm(rng, dim=2, rank=None):
    """Random density matrix from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ dag(g)
    return m / np.trace(m).real


def random_unitary(rng, dim=2):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def dm_to_json(m):
    m = np.asarray(m)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def dm_from_json(obj):
    m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if m.shape != (obj["dim"], obj["dim"]):
        raise StateError("declared dim does not match matrix shape")
    return m
