"""Circuit IR and the partial-swap compiler.

``exp(-i delta SWAP) = exp(-i delta/2) exp(-i delta/2 (XX + YY + ZZ))``; the
second factor has a three-CNOT realisation, and each CNOT becomes a CZ
sandwiched by Hadamards on its target. Runs of single-qubit gates between CZs
collapse into one ``PhasedX`` preceded by a ``VirtualZ`` per qubit.

Moment rule: a moment holds at most one timed gate per qubit. A ``VirtualZ``
may share the moment with the timed gate on its qubit and is applied first.
"""

from dataclasses import dataclass, field

import numpy as np

from .gates import H_MAT, GateOp, embed, ry, rz, unitary_of
from .linalg import dag, phase_distance

TWO_PI = 2 * np.pi


class CircuitError(ValueError):
    pass


@dataclass
class Circuit:
    moments: list = field(default_factory=list)
    n_qubits: int = 2
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.moments = [tuple(m) for m in self.moments]
        for m in self.moments:
            _check_moment(m, self.n_qubits)

    def append(self, moment):
        moment = tuple(moment)
        _check_moment(moment, self.n_qubits)
        self.moments.append(moment)

    def __len__(self):
        return len(self.moments)

    def to_json(self):
        return {
            "n_qubits": self.n_qubits,
            "metadata": self.metadata,
            "moments": [[g.to_json() for g in m] for m in self.moments],
        }

    @classmethod
    def from_json(cls, obj):
        moments = [[GateOp.from_json(g) for g in m] for m in obj["moments"]]
        return cls(moments, obj.get("n_qubits", 2), dict(obj.get("metadata", {})))


def _check_moment(moment, n_qubits):
    timed = set()
    for g in moment:
        for q in g.qubits:
            if q >= n_qubits:
                raise CircuitError(f"qubit {q} out of range for {n_qubits}-qubit circuit")
        if g.kind == "VirtualZ":
            continue
        overlap = timed.intersection(g.qubits)
        if overlap:
            raise CircuitError(f"qubit(s) {sorted(overlap)} used twice in one moment")
        timed.update(g.qubits)


def moment_unitary(moment, n_qubits=2):
    _check_moment(moment, n_qubits)
    u = np.eye(2**n_qubits, dtype=complex)
    ordered = [g for g in moment if g.kind == "VirtualZ"] + [g for g in moment if g.kind != "VirtualZ"]
    for g in ordered:
        u = embed(unitary_of(g), g.qubits, n_qubits) @ u
    return u


def circuit_unitary(c):
    u = np.eye(2**c.n_qubits, dtype=complex)
    for m in c.moments:
        u = moment_unitary(m, c.n_qubits) @ u
    return u


def depth(c):
    """Number of moments that take time (pure-VirtualZ moments are free)."""
    return sum(1 for m in c.moments if any(g.kind != "VirtualZ" for g in m))


def simulate(c, rho):
    u = circuit_unitary(c)
    return u @ rho @ dag(u)


def zxz_angles(u):
    """``(theta, phi, lam)`` with ``u ~ PhasedX(theta, phi) @ Rz(lam)`` up to phase."""
    u = np.asarray(u, dtype=complex)
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    beta = 2 * np.arctan2(s, c)
    if s < 1e-12:
        a = cc = np.angle(v[1, 1])
    elif c < 1e-12:
        a = np.angle(v[1, 0])
        cc = -a
    else:
        plus, minus = np.angle(v[1, 1]), np.angle(v[1, 0])
        a, cc = plus + minus, plus - minus
    # ZYZ (a, beta, cc) -> ZXZ: Rz(a) Ry(b) Rz(c) = Rz(a + pi/2) Rx(b) Rz(c - pi/2)
    za, zc = a + np.pi / 2, cc - np.pi / 2
    phi = -za
    lam = zc - phi
    if beta < 1e-12:
        return 0.0, 0.0, _wrap(lam)
    return float(beta), _wrap(phi), _wrap(lam)


def _wrap(x):
    y = (x + np.pi) % TWO_PI - np.pi
    return 0.0 if abs(y) < 1e-14 else float(y)


def _layer_gates(u, qubit):
    theta, phi, lam = zxz_angles(u)
    return (
        GateOp("PhasedX", (qubit,), {"theta": theta, "phi": phi}),
        GateOp("VirtualZ", (qubit,), {"phi": lam}),
    )


def merge_single_qubit_run(gates):
    """Collapse single-qubit gates on one qubit into ``(PhasedX, VirtualZ)``.

    Gates are listed in time order; the result applies the ``VirtualZ`` first.
    """
    gates = list(gates)
    if not gates:
        return _layer_gates(np.eye(2), 0)
    qubits = {g.qubits for g in gates}
    if len(qubits) != 1 or len(next(iter(qubits))) != 1:
        raise CircuitError("merge needs single-qubit gates on one common qubit")
    u = np.eye(2, dtype=complex)
    for g in gates:
        u = unitary_of(g) @ u
    return _layer_gates(u, gates[0].qubits[0])


def _layer_moment(u0, u1):
    px0, vz0 = _layer_gates(u0, 0)
    px1, vz1 = _layer_gates(u1, 1)
    return (vz0, px0, vz1, px1)


def _cz_moment():
    return (GateOp("CZ", (0, 1)),)


def dswap_layers(delta):
    """Four ``(u_q0, u_q1)`` single-qubit layers around three CZs for ``exp(-i delta SWAP)``."""
    a = b = c = delta / 2
    # time-ordered single-qubit runs between the CNOTs of the canonical circuit,
    # CNOT targets: q0, q1, q0
    runs = [
        (np.eye(2), rz(np.pi / 2)),
        (rz(2 * c + np.pi / 2), ry(2 * a + np.pi / 2)),
        (np.eye(2), ry(-2 * b - np.pi / 2)),
        (rz(-np.pi / 2), np.eye(2)),
    ]
    targets = (0, 1, 0)
    layers = [list(r) for r in runs]
    for k, t in enumerate(targets):
        layers[k][t] = H_MAT @ layers[k][t]  # H before the CZ
        layers[k + 1][t] = layers[k + 1][t] @ H_MAT  # H after the CZ
    return [tuple(layer) for layer in layers]


def decompose_dswap(delta):
    """Three-CZ circuit equal to ``exp(-i delta SWAP)`` up to global phase."""
    if not -2 * np.pi < delta < 2 * np.pi:
        raise CircuitError(f"delta must lie in (-2pi, 2pi), got {delta}")
    layers = dswap_layers(delta)
    c = Circuit(metadata={"delta": float(delta)})
    for k, (u0, u1) in enumerate(layers):
        c.append(_layer_moment(u0, u1))
        if k < 3:
            c.append(_cz_moment())
    return c


def build_dme2_circuit(delta, steps, axis, mask, merge=True):
    """Compiled DME2 circuit for one QME coin sequence.

    Unmerged: per step seven partial-swap moments plus one QME moment (8N).
    Merged: the last layer of step n, the QME and the first layer of step
    n+1 become one layer, giving ``6N + 1`` moments.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (steps,):
        raise CircuitError(f"mask length {mask.size} != steps {steps}")
    layers = dswap_layers(delta)
    axis = tuple(float(a) for a in axis)
    meta = {"delta": float(delta), "steps": int(steps), "axis": list(axis), "mask": [int(b) for b in mask]}
    c = Circuit(metadata=meta)
    if not merge:
        meta["step_tags"] = []
        for n, bit in enumerate(mask):
            for k, (u0, u1) in enumerate(layers):
                c.append(_layer_moment(u0, u1))
                if k < 3:
                    c.append(_cz_moment())
            c.append((GateOp("QmeMark", (1,), {"axis": axis, "coin": bool(bit)}),))
            meta["step_tags"].extend([n] * 8)
        return c
    qme = [unitary_of(GateOp("QmeMark", (1,), {"axis": axis, "coin": True})), np.eye(2)]
    first, last = layers[0], layers[3]
    tags = []
    c.append(_layer_moment(*first))
    tags.append(0)
    for n, bit in enumerate(mask):
        for k in (1, 2, 3):
            c.append(_cz_moment())
            tags.append(n)
            if k < 3:
                c.append(_layer_moment(*layers[k]))
                tags.append(n)
        q = qme[0] if bit else qme[1]
        if n + 1 < steps:
            c.append(_layer_moment(first[0] @ last[0], first[1] @ q @ last[1]))
        else:
            c.append(_layer_moment(last[0], q @ last[1]))
        tags.append(n)
    meta["step_tags"] = tags
    return c


def same_up_to_phase(u, v, tol=1e-9):
    return phase_distance(u, v) < tol


def single_qubit_layers(c):
    """Indices of moments that hold only single-qubit gates."""
    return [i for i, m in enumerate(c.moments) if all(len(g.qubits) == 1 for g in m)]
