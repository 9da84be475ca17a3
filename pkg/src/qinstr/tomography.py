"""Shot simulation, readout calibration, state and process tomography.

Measurements are projective in Z after one of three pre-rotations per qubit:
``Ry(-pi/2)`` maps X onto Z, ``Rx(pi/2)`` maps Y onto Z and ``I`` leaves Z.
Readout error enters through the beta matrix, which maps the Z-string
expectation values (II, IZ, ZI, ZZ for two qubits) of the rotated state to
outcome probabilities (00, 01, 10, 11). Each (setting, outcome) therefore has
an effective measurement operator, and both the linear-inversion seed and the
maximum-likelihood fit use it. Tomography without readout correction simply
uses the ideal beta.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from itertools import product

import numpy as np
from scipy.optimize import minimize

from . import channels
from .gates import rx, ry
from .linalg import I2, Z, dag, kron
from .qstate import check_dm, repair_dm, state_fidelity

log = logging.getLogger(__name__)

PREROTATIONS = {"Ry-90": ry(-np.pi / 2), "Rx90": rx(np.pi / 2), "I": I2}
SETTING_NAMES = tuple(PREROTATIONS)
PROCESS_INPUTS = ("0", "1", "+", "+i")
BETA_IDEAL_1Q = np.array([[0.5, 0.5], [0.5, -0.5]])

STATE_SHOTS = 2000
PROCESS_SHOTS = 500


class TomographyError(ValueError):
    pass


class ProjectionError(RuntimeError):
    """CPTP projection failed to converge; carries the final residual."""

    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit assignment matrices ``M[read, prepared]``."""

    matrices: tuple

    def __post_init__(self):
        ms = tuple(np.asarray(m, dtype=float) for m in self.matrices)
        for m in ms:
            if m.shape != (2, 2) or np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
                raise TomographyError("assignment entries must be probabilities in a 2x2 matrix")
            if np.max(np.abs(m.sum(axis=0) - 1)) > 1e-12:
                raise TomographyError("assignment matrix columns must sum to 1")
        object.__setattr__(self, "matrices", ms)

    @classmethod
    def ideal(cls, n_qubits=1):
        return cls((np.eye(2),) * n_qubits)

    @classmethod
    def symmetric(cls, eps, n_qubits=1):
        m = np.array([[1 - eps, eps], [eps, 1 - eps]])
        return cls((m,) * n_qubits)

    @property
    def n_qubits(self):
        return len(self.matrices)

    def assignment(self):
        return reduce(np.kron, self.matrices)


def beta_from_readout(rm):
    return reduce(np.kron, [m @ BETA_IDEAL_1Q for m in rm.matrices])


def _z_strings(n):
    return [reduce(np.kron, ps) for ps in product((I2, Z), repeat=n)]


def settings(n_qubits):
    return list(product(SETTING_NAMES, repeat=n_qubits))


def _rotation(setting):
    return reduce(np.kron, [PREROTATIONS[s] for s in setting])


def effective_povm(setting, beta):
    """Operators ``E_o`` with ``p_o = Tr(E_o rho)`` for one setting."""
    n = len(setting)
    r = _rotation(setting)
    zs = [dag(r) @ z @ r for z in _z_strings(n)]
    return np.array([sum(beta[o, j] * zs[j] for j in range(len(zs))) for o in range(2**n)])


def outcome_labels(n_qubits):
    return ["".join(b) for b in product("01", repeat=n_qubits)]


def born_probabilities(m, setting, rm=None):
    n = len(setting)
    rm = ReadoutModel.ideal(n) if rm is None else rm
    povm = effective_povm(setting, beta_from_readout(rm))
    p = np.einsum("oij,ji->o", povm, m).real
    return np.clip(p, 0.0, None) / np.clip(p, 0.0, None).sum()


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _entropy(seed):
    return [int(s) for s in np.atleast_1d(seed)]


def measure_shots(m, setting, shots, rm=None, seed=0):
    """Multinomial outcome counts, keyed ``"00"``.. (or ``"0"``, ``"1"``)."""
    if shots <= 0:
        raise TomographyError(f"shots must be positive, got {shots}")
    p = born_probabilities(m, tuple(setting), rm)
    counts = _rng(seed).multinomial(int(shots), p)
    return dict(zip(outcome_labels(len(setting)), (int(c) for c in counts)))


def simulate_tomography(m, shots=None, rm=None, seed=0):
    """Data for every setting: counts, or exact probabilities when ``shots`` is None.

    The generator for setting ``k`` is seeded by ``(seed, k)``.
    """
    m = np.asarray(m, dtype=complex)
    n = int(round(np.log2(m.shape[0])))
    data = {}
    for k, s in enumerate(settings(n)):
        if shots is None:
            data[s] = born_probabilities(m, s, rm)
        else:
            c = measure_shots(m, s, shots, rm, np.random.default_rng(_entropy(seed) + [k]))
            data[s] = np.array([c[o] for o in outcome_labels(n)], dtype=float)
    return data


def counts_to_json(setting, counts, shots, seed):
    return {"setting": list(setting), "counts": dict(counts), "shots": int(shots), "seed": seed}


@dataclass
class StateEstimate:
    dm: np.ndarray
    linear: np.ndarray
    nll_trace: list = field(default_factory=list)
    converged: bool = True


def _design(data, beta):
    keys = list(data)
    n = len(keys[0])
    expected = set(settings(n))
    if set(keys) != expected:
        missing = sorted(expected - set(keys))
        raise TomographyError(f"incomplete tomography data; missing settings {missing}")
    ops = np.concatenate([effective_povm(s, beta) for s in keys])
    freq = np.concatenate([np.asarray(data[s], dtype=float) for s in keys])
    return n, ops, freq


def linear_inversion(data, beta):
    """Least-squares Pauli-coefficient solve; may be unphysical."""
    n, ops, freq = _design(data, beta)
    d = 2**n
    paulis = channels.pauli_basis(n)
    norm = np.concatenate([np.full(d, np.asarray(data[s], float).sum()) for s in data])
    if np.any(norm <= 0):
        raise TomographyError("a setting has no recorded outcomes")
    y = freq / norm
    # p = Tr(E rho), rho = (I + sum_P c_P P) / d
    a = np.einsum("kij,pji->kp", ops, np.array(paulis[1:])).real / d
    b = y - np.einsum("kii->k", ops).real / d
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    return (np.eye(d) + sum(c * p for c, p in zip(coef, paulis[1:]))) / d


def _nll_and_grad(params, ops, weights, d):
    t = _unpack(params, d)
    a = dag(t) @ t
    tr = np.trace(a).real
    rho = a / tr
    p = np.einsum("kij,ji->k", ops, rho).real
    p = np.clip(p, 1e-14, None)
    nll = -float(np.sum(weights * np.log(p)))
    g_rho = -np.einsum("k,kij->ij", weights / p, ops)
    g_a = (g_rho - np.trace(g_rho @ rho).real * np.eye(d)) / tr
    k = 2 * g_a @ dag(t)
    grad_t = k.T
    mask = np.tril(np.ones((d, d), bool))
    grad = np.concatenate([grad_t.real[mask], -grad_t.imag[mask]])
    return nll, grad


def _unpack(params, d):
    mask = np.tril(np.ones((d, d), bool))
    m = mask.sum()
    t = np.zeros((d, d), dtype=complex)
    t[mask] = params[:m] + 1j * params[m:]
    return t


def _pack(rho, d):
    w, v = np.linalg.eigh((rho + dag(rho)) / 2)
    w = np.clip(w, 1e-6, None)
    rho = (v * w) @ dag(v)
    # rho = T^dag T with T lower triangular: take the Cholesky factor of the reversed matrix
    j = np.eye(d)[::-1]
    l = np.linalg.cholesky(j @ rho.conj() @ j)
    t = (j @ l @ j).T
    mask = np.tril(np.ones((d, d), bool))
    return np.concatenate([t.real[mask], t.imag[mask]])


def state_tomography(data, beta=None, maxiter=2000, tol=1e-14):
    """Maximum-likelihood state estimate from per-setting counts or probabilities."""
    keys = list(data)
    if not keys:
        raise TomographyError("no tomography data")
    n = len(keys[0])
    d = 2**n
    beta = beta_from_readout(ReadoutModel.ideal(n)) if beta is None else np.asarray(beta, float)
    if beta.shape != (d, d):
        raise TomographyError(f"beta shape {beta.shape} does not match {n} qubit(s)")
    _, ops, weights = _design(data, beta)
    if weights.sum() <= 0:
        raise TomographyError("degenerate data: no counts")
    try:
        seed_dm = linear_inversion(data, beta)
        x0 = _pack(seed_dm, d)
    except np.linalg.LinAlgError:
        seed_dm = np.eye(d) / d
        x0 = _pack(seed_dm, d)
    trace = [_nll_and_grad(x0, ops, weights, d)[0]]

    def record(xk):
        trace.append(_nll_and_grad(xk, ops, weights, d)[0])

    res = minimize(
        _nll_and_grad, x0, args=(ops, weights, d), jac=True, method="L-BFGS-B",
        callback=record, options={"maxiter": maxiter, "ftol": tol, "gtol": 1e-12},
    )
    t = _unpack(res.x, d)
    rho = dag(t) @ t
    rho = repair_dm(rho / np.trace(rho).real)
    check_dm(rho)
    return StateEstimate(rho, seed_dm, trace, bool(res.success))


def reconstruct(m, shots=None, rm=None, seed=0, correct=True):
    """Simulate tomography of ``m`` and return the MLE density matrix."""
    n = int(round(np.log2(np.asarray(m).shape[0])))
    rm = ReadoutModel.ideal(n) if rm is None else rm
    data = simulate_tomography(m, shots, rm, seed)
    beta = beta_from_readout(rm if correct else ReadoutModel.ideal(n))
    return state_tomography(data, beta).dm


@dataclass
class ProcessMap:
    """Chi matrix in the Pauli basis {I, X, Y, Z}, normalised to unit trace."""

    chi: np.ndarray
    cptp_projected: bool = False

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=complex)
        if np.max(np.abs(self.chi - dag(self.chi))) > 1e-8:
            raise TomographyError("chi must be Hermitian")

    @property
    def dim(self):
        return int(round(np.sqrt(self.chi.shape[0])))

    def choi(self):
        return channels.choi_from_chi(self.chi)

    def superop(self):
        return channels.superop_from_choi(self.choi(), self.dim)

    def apply(self, rho):
        return channels.apply_superop(self.superop(), rho)

    @classmethod
    def from_channel(cls, c):
        return cls(channels.chi_matrix(c))

    @classmethod
    def from_unitary(cls, u):
        return cls.from_channel(channels.unitary_channel(u))

    @classmethod
    def from_superop(cls, s):
        dim = int(round(np.sqrt(np.asarray(s).shape[0])))
        return cls(channels.chi_from_choi(channels.choi_from_superop(s, dim)))

    def to_json(self):
        return {"re": self.chi.real.tolist(), "im": self.chi.imag.tolist(), "basis": "IXYZ",
                "cptp_projected": self.cptp_projected}

    @classmethod
    def from_json(cls, obj):
        if obj.get("basis", "IXYZ") != "IXYZ":
            raise TomographyError(f"unsupported chi basis {obj['basis']!r}")
        return cls(np.asarray(obj["re"]) + 1j * np.asarray(obj["im"]), bool(obj.get("cptp_projected", False)))


def process_tomography(outputs):
    """Chi matrix from the images of |0>, |1>, |+>, |+i>."""
    missing = [k for k in PROCESS_INPUTS if k not in outputs]
    if missing:
        raise TomographyError(f"process tomography needs outputs for inputs {missing}")
    e00, e11 = np.asarray(outputs["0"]), np.asarray(outputs["1"])
    e01 = np.asarray(outputs["+"]) + 1j * np.asarray(outputs["+i"]) - 0.5 * (1 + 1j) * (e00 + e11)
    e10 = dag(e01)
    j = kron(np.diag([1, 0]), e00) + kron(np.array([[0, 1], [0, 0]]), e01) \
        + kron(np.array([[0, 0], [1, 0]]), e10) + kron(np.diag([0, 1]), e11)
    return ProcessMap(channels.chi_from_choi((j + dag(j)) / 2))


def _psd_part(j):
    w, v = np.linalg.eigh((j + dag(j)) / 2)
    return (v * np.clip(w, 0.0, None)) @ dag(v)


def _tp_part(j, dim):
    t = np.einsum("iaja->ij", j.reshape(dim, dim, dim, dim))
    return j - kron(t - np.eye(dim), np.eye(dim) / dim)


def cptp_project(pmap, tol=1e-9, max_iter=10_000):
    """Closest CPTP map in Choi space (Dykstra alternating projections)."""
    j0 = pmap.choi()
    dim = pmap.dim
    if channels.cptp_report(j0, tol * 0.1).ok:
        return ProcessMap(pmap.chi.copy(), True)
    x = j0.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    delta = np.inf
    for it in range(max_iter):
        y = _psd_part(x + p)
        p = x + p - y
        x_new = _tp_part(y + q, dim)
        q = y + q - x_new
        delta = float(np.max(np.abs(x_new - x)))
        x = x_new
        if delta < tol and channels.cptp_report(x, tol).ok:
            log.debug("cptp projection converged in %d iterations", it + 1)
            break
    else:
        raise ProjectionError(f"CPTP projection did not converge (residual {delta:.2e})", delta)
    return ProcessMap(channels.chi_from_choi((x + dag(x)) / 2), True)


def process_fidelity(a, b):
    """``(Tr sqrt(sqrt(chi_a) chi_b sqrt(chi_a)))**2`` on unit-trace chi matrices."""
    ca = a.chi if isinstance(a, ProcessMap) else np.asarray(a)
    cb = b.chi if isinstance(b, ProcessMap) else np.asarray(b)
    if ca.shape != cb.shape:
        raise TomographyError(f"chi dimension mismatch {ca.shape} vs {cb.shape}")
    ca = ca / np.trace(ca).real
    cb = cb / np.trace(cb).real
    return state_fidelity(_psd_part(ca), _psd_part(cb))


def gate_fidelity_from_process(fp, d):
    return (d * fp + 1) / (d + 1)


def gate_fidelity(a, b, d=None):
    fp = process_fidelity(a, b)
    d = (a.dim if isinstance(a, ProcessMap) else int(round(np.sqrt(np.asarray(a).shape[0])))) if d is None else d
    return gate_fidelity_from_process(fp, d)


def channel_outputs(apply_fn, inputs=PROCESS_INPUTS):
    from .qstate import pure_state

    return {k: apply_fn(pure_state(k)) for k in inputs}


def process_from_outputs(outputs, shots=None, rm=None, seed=0, project=True):
    """Tomograph each output state, then build (and optionally project) chi.

    With ``shots=None`` the exact output states are used directly.
    """
    if shots is not None:
        outputs = {k: reconstruct(v, shots, rm, seed=_entropy(seed) + [i])
                   for i, (k, v) in enumerate(outputs.items())}
    pm = process_tomography(outputs)
    return cptp_project(pm) if project else pm
