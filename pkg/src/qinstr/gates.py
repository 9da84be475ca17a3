"""Gate vocabulary and unitary constructors.

Conventions
-----------
* ``R_n(a) = exp(-i a/2 n.sigma)`` for a unit axis ``n``.
* ``PhasedX(theta, phi) = Rz(-phi) Rx(theta) Rz(phi)`` (matrix product).
* ``VirtualZ(phi) = Rz(phi)``; it takes no time.
* ``SwapPow(delta) = exp(-i delta SWAP) = cos(delta) I - i sin(delta) SWAP``.
  Angles are always the partial-swap angle delta itself; there is no hidden
  factor of two as in some circuit libraries' swap-power exponent.
* Qubits are 0-based. Qubit 0 is the data (target) qubit, qubit 1 the
  instruction qubit. Multi-qubit matrices are ordered like ``op.qubits``.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import I2, SWAP, X, Y, Z, expm_herm, kron

T_1QB = 30e-9
T_CZ = 60e-9

ONE_QUBIT = {"PhasedX", "VirtualZ", "H", "Rot", "I", "QmeMark"}
TWO_QUBIT = {"CZ", "CZGeneral", "CNOT", "SwapPow"}

H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ_MAT = np.diag([1, 1, 1, -1]).astype(complex)


class GateError(ValueError):
    pass


def _unit(axis):
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-9:
        raise GateError(f"rotation axis must be a unit 3-vector, got {axis!r}")
    return n


def rotation(axis, angle):
    """``exp(-i angle/2 n.sigma)``."""
    n = _unit(axis)
    gen = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * gen


def rx(angle):
    return rotation((1, 0, 0), angle)


def ry(angle):
    return rotation((0, 1, 0), angle)


def rz(angle):
    return rotation((0, 0, 1), angle)


def phased_x(theta, phi):
    return rz(-phi) @ rx(theta) @ rz(phi)


def cz_general(phi01, phi10, phi11):
    return np.diag(
        [1, np.exp(-1j * phi01), np.exp(-1j * phi10), np.exp(-1j * phi11)]
    ).astype(complex)


def swap_pow(delta):
    return expm_herm(SWAP, delta)


def cnot():
    """Control on the first listed qubit."""
    return kron(np.diag([1, 0]), I2) + kron(np.diag([0, 1]), X)


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple
    params: dict = field(default_factory=dict, hash=False, compare=True)
    duration: float = None

    def __post_init__(self):
        if self.kind not in ONE_QUBIT | TWO_QUBIT:
            raise GateError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT else 2
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != arity or len(set(qubits)) != arity:
            raise GateError(f"{self.kind} acts on {arity} distinct qubit(s), got {qubits}")
        object.__setattr__(self, "qubits", qubits)
        if self.duration is None:
            object.__setattr__(self, "duration", default_duration(self.kind))

    def unitary(self):
        return unitary_of(self)

    def to_json(self):
        params = {}
        for k, v in self.params.items():
            params[k] = [float(x) for x in v] if isinstance(v, (tuple, list, np.ndarray)) else v
        return {
            "kind": self.kind,
            "params": params,
            "qubits": list(self.qubits),
            "dur_ns": round(self.duration * 1e9, 6),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], tuple(obj["qubits"]), dict(obj.get("params", {})), obj["dur_ns"] * 1e-9)


def default_duration(kind):
    if kind == "VirtualZ":
        return 0.0
    if kind in TWO_QUBIT:
        return T_CZ
    return T_1QB


def unitary_of(g):
    p = g.params
    k = g.kind
    if k == "PhasedX":
        return phased_x(p["theta"], p["phi"])
    if k == "VirtualZ":
        return rz(p["phi"])
    if k == "H":
        return H_MAT.copy()
    if k == "I":
        return I2.copy()
    if k == "Rot":
        return rotation(p["axis"], p["angle"])
    if k == "QmeMark":
        return rotation(p["axis"], np.pi) if p["coin"] else I2.copy()
    if k == "CZ":
        return CZ_MAT.copy()
    if k == "CZGeneral":
        return cz_general(p["phi01"], p["phi10"], p["phi11"])
    if k == "CNOT":
        return cnot()
    if k == "SwapPow":
        return swap_pow(p["delta"])
    raise GateError(f"unknown gate kind {k!r}")


def embed(u, qubits, n_qubits=2):
    """Lift a gate matrix acting on ``qubits`` to the full register."""
    qubits = tuple(qubits)
    if n_qubits == 1:
        return u
    if len(qubits) == 1:
        return kron(u, I2) if qubits[0] == 0 else kron(I2, u)
    if qubits == (0, 1):
        return u
    if qubits == (1, 0):
        return SWAP @ u @ SWAP
    raise GateError(f"cannot embed on qubits {qubits} of a {n_qubits}-qubit register")
