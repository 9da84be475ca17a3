"""Kraus-form quantum channels.

Choi matrices use column stacking, ``J = sum_k vec(K) vec(K)^dag``, which puts
the channel input on the first tensor factor and the output on the second:
``J = sum_ij |i><j| (x) E(|i><j|)``. The chi matrix is expressed in the
unnormalised Pauli basis and carries ``Tr chi = 1`` for trace-preserving maps.
"""

from dataclasses import dataclass
from functools import reduce
from itertools import product

import numpy as np

from .linalg import PAULIS, dag, herm_eig, kron, partial_trace

CPTP_TOL = 1e-9


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple
    dim: int

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise ChannelError(f"Kraus operator shape {k.shape} != ({self.dim}, {self.dim})")
        object.__setattr__(self, "kraus", ops)

    def __call__(self, m, qubit=None):
        return apply(self, m, qubit)

    def to_json(self):
        return {
            "dim": self.dim,
            "kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in self.kraus],
        }


@dataclass(frozen=True)
class CptpReport:
    tp_residual: float
    min_choi_eig: float
    tol: float = CPTP_TOL

    @property
    def ok(self):
        return self.tp_residual <= self.tol and self.min_choi_eig >= -self.tol

    def __bool__(self):
        return self.ok


def identity_channel(dim=2):
    return KrausChannel((np.eye(dim),), dim)


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return KrausChannel((u,), u.shape[0])


def amplitude_damping(p):
    """Decay |1> -> |0> with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"damping probability must lie in [0, 1], got {p}")
    a1 = np.diag([1.0, np.sqrt(1.0 - p)])
    a2 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]])
    return KrausChannel((a1, a2), 2)


def damping_kraus(gamma1, t):
    e = np.exp(-gamma1 * t)
    return (
        np.array([[1.0, 0.0], [0.0, np.sqrt(e)]]),
        np.array([[0.0, np.sqrt(1.0 - e)], [0.0, 0.0]]),
    )


def dephasing_kraus(gamma_phi, t):
    e = np.exp(-gamma_phi * t)
    s = np.sqrt(1.0 - e)
    return (
        np.sqrt(e) * np.eye(2),
        np.array([[s, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 0.0], [0.0, s]]),
    )


def decoherence_channel(gamma1, gamma_phi, t):
    """Dephasing for time ``t`` followed by amplitude damping for time ``t``.

    Six Kraus operators ``A_i D_j`` enumerated with ``i`` outer, ``j`` inner.
    Rates are in 1/s, ``t`` in seconds; an infinite coherence time is a rate
    of zero.
    """
    if gamma1 < 0 or gamma_phi < 0 or t < 0:
        raise ChannelError("rates and duration must be non-negative")
    a = damping_kraus(gamma1, t)
    d = dephasing_kraus(gamma_phi, t)
    return KrausChannel(tuple(ai @ dj for ai, dj in product(a, d)), 2)


def compose(outer, inner):
    """Channel that applies ``inner`` first, then ``outer``."""
    if outer.dim != inner.dim:
        raise ChannelError(f"dimension mismatch {outer.dim} vs {inner.dim}")
    return KrausChannel(tuple(a @ b for a, b in product(outer.kraus, inner.kraus)), outer.dim)


def power(c, n):
    """``n``-fold self composition, kept at minimal Kraus rank."""
    out = identity_channel(c.dim)
    for _ in range(n):
        out = canonical(compose(c, out))
    return out


def conjugate(c, v):
    """The channel ``V c(V^dag . V) V^dag``: ``c`` expressed in the basis ``V``."""
    v = np.asarray(v, dtype=complex)
    return KrausChannel(tuple(v @ k @ dag(v) for k in c.kraus), c.dim)


def tensor(*channels):
    ops = tuple(reduce(np.kron, ks) for ks in product(*(c.kraus for c in channels)))
    return KrausChannel(ops, int(np.prod([c.dim for c in channels])))


def lift(c, qubit, n_qubits=2):
    """Act with a single-qubit channel on one qubit of a register."""
    if c.dim != 2:
        raise ChannelError("only single-qubit channels can be lifted")
    if n_qubits == 1:
        return c
    eye = np.eye(2)
    if qubit == 0:
        return KrausChannel(tuple(kron(k, eye) for k in c.kraus), 4)
    if qubit == 1:
        return KrausChannel(tuple(kron(eye, k) for k in c.kraus), 4)
    raise ChannelError(f"qubit index {qubit} out of range")


def apply(c, m, qubit=None):
    """Apply ``c`` to the state ``m``.

    With ``qubit`` given, a single-qubit channel is tensored with identity on
    the other qubit of a two-qubit ``m`` at call time.
    """
    m = np.asarray(m, dtype=complex)
    if qubit is not None and m.shape[0] != c.dim:
        c = lift(c, qubit, int(np.log2(m.shape[0])))
    if m.shape != (c.dim, c.dim):
        raise ChannelError(f"state shape {m.shape} does not match channel dim {c.dim}")
    return sum(k @ m @ dag(k) for k in c.kraus)


def vec(m):
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, dim):
    return np.asarray(v).reshape(dim, dim, order="F")


def choi(c):
    return sum(np.outer(vec(k), vec(k).conj()) for k in c.kraus)


def superop(c):
    """Liouville matrix acting on ``vec(rho)`` (column stacking)."""
    return sum(np.kron(k.conj(), k) for k in c.kraus)


def superop_from_unitary(u):
    u = np.asarray(u, dtype=complex)
    return np.kron(u.conj(), u)


def choi_from_superop(s, dim):
    # J[(i,a),(j,b)] = <a|E(|i><j|)|b>; S[(b,a),(j,i)] in column stacking
    t = np.asarray(s).reshape(dim, dim, dim, dim)  # [b_out_col, a_out_row, j_in_col, i_in_row]
    return t.transpose(3, 1, 2, 0).reshape(dim * dim, dim * dim)


def superop_from_choi(j, dim):
    t = np.asarray(j).reshape(dim, dim, dim, dim)  # [i, a, j, b]
    return t.transpose(3, 1, 2, 0).reshape(dim * dim, dim * dim)


def apply_superop(s, m):
    dim = np.asarray(m).shape[0]
    return unvec(np.asarray(s) @ vec(m), dim)


def kraus_from_choi(j, tol=1e-12):
    dim = int(round(np.sqrt(np.asarray(j).shape[0])))
    w, v = herm_eig(j)
    ops = [np.sqrt(wi) * unvec(v[:, i], dim) for i, wi in enumerate(w) if wi > tol]
    if not ops:
        ops = [np.zeros((dim, dim))]
    return KrausChannel(tuple(ops[::-1]), dim)


def canonical(c):
    """Same channel with the minimal number of Kraus operators."""
    return kraus_from_choi(choi(c))


def is_cptp(c, tol=CPTP_TOL):
    j = choi(c) if isinstance(c, KrausChannel) else np.asarray(c)
    return cptp_report(j, tol)


def cptp_report(j, tol=CPTP_TOL):
    j = np.asarray(j)
    dim = int(round(np.sqrt(j.shape[0])))
    tp = float(np.max(np.abs(partial_trace(j, 1, (dim, dim)) - np.eye(dim))))
    lam = float(np.linalg.eigvalsh((j + dag(j)) / 2)[0])
    return CptpReport(tp, lam, tol)


def pauli_basis(n_qubits):
    return [reduce(np.kron, ps) for ps in product(PAULIS, repeat=n_qubits)]


def _pauli_vec_matrix(dim):
    n = int(round(np.log2(dim)))
    return np.column_stack([vec(p) for p in pauli_basis(n)])


def chi_from_choi(j):
    j = np.asarray(j)
    dim = int(round(np.sqrt(j.shape[0])))
    b = _pauli_vec_matrix(dim)
    return dag(b) @ j @ b / dim**2


def choi_from_chi(chi):
    chi = np.asarray(chi)
    dim = int(round(np.sqrt(chi.shape[0])))
    b = _pauli_vec_matrix(dim)
    return b @ chi @ dag(b)


def chi_matrix(c):
    return chi_from_choi(choi(c))
