"""Decoherence instrumentation of compiled circuits.

After every moment each qubit idles through a dephasing + amplitude-damping
channel lasting the moment's duration. During two-qubit moments qubit 0 (the
data qubit, which is the one flux-tuned through the CZ trajectory) uses its
effective coherence times; qubit 1 uses its idling values. The 5 ns spacing
after each CZ pulse is counted as part of the CZ moment.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import channels
from .compiler import build_dme2_circuit, moment_unitary
from .gates import TWO_QUBIT
from .linalg import dag, kron

US = 1e-6
NS = 1e-9


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class QubitCoherence:
    """Coherence times in seconds; ``math.inf`` switches a channel off."""

    t1: float = math.inf
    t2r: float = math.inf
    t1_eff: float = None
    t2r_eff: float = None

    def __post_init__(self):
        if self.t1_eff is None:
            object.__setattr__(self, "t1_eff", self.t1)
        if self.t2r_eff is None:
            object.__setattr__(self, "t2r_eff", self.t2r)
        for t1, t2 in ((self.t1, self.t2r), (self.t1_eff, self.t2r_eff)):
            if t1 <= 0 or t2 <= 0:
                raise NoiseError("coherence times must be positive")
            if _gamma_phi(t1, t2) < -1e-12:
                raise NoiseError(f"T2R={t2} exceeds 2*T1={2 * t1}: negative pure-dephasing rate")

    def rates(self, effective=False):
        t1, t2 = (self.t1_eff, self.t2r_eff) if effective else (self.t1, self.t2r)
        return 1.0 / t1, max(0.0, _gamma_phi(t1, t2))


def _gamma_phi(t1, t2r):
    return 1.0 / t2r - 0.5 / t1


@dataclass(frozen=True)
class NoiseParams:
    q1: QubitCoherence = field(default_factory=QubitCoherence)
    q2: QubitCoherence = field(default_factory=QubitCoherence)
    t_1qb: float = 30 * NS
    t_cz: float = 60 * NS
    cz_gap: float = 5 * NS

    @classmethod
    def sim(cls):
        """Values used for the noisy-circuit model of the N sweep."""
        return cls(
            q1=QubitCoherence(20 * US, 10 * US, 10 * US, 5 * US),
            q2=QubitCoherence(20 * US, 10 * US),
        )

    @classmethod
    def device(cls):
        """Measured two-qubit device table."""
        return cls(
            q1=QubitCoherence(23 * US, 13 * US, 17 * US, 5 * US),
            q2=QubitCoherence(39 * US, 25 * US),
        )

    @classmethod
    def noiseless(cls):
        return cls()

    @property
    def is_noiseless(self):
        return all(
            math.isinf(t)
            for q in (self.q1, self.q2)
            for t in (q.t1, q.t2r, q.t1_eff, q.t2r_eff)
        )

    def qubit(self, k):
        return (self.q1, self.q2)[k]

    def with_q1(self, **changes):
        d = asdict(self.q1)
        d.update(changes)
        return NoiseParams(QubitCoherence(**d), self.q2, self.t_1qb, self.t_cz, self.cz_gap)

    def to_json(self):
        def us(x):
            return None if math.isinf(x) else round(x / US, 9)

        def q(c):
            return {"t1_us": us(c.t1), "t2r_us": us(c.t2r), "t1_eff_us": us(c.t1_eff), "t2r_eff_us": us(c.t2r_eff)}

        return {
            "q1": q(self.q1),
            "q2": q(self.q2),
            "t_1qb_ns": round(self.t_1qb / NS, 9),
            "t_cz_ns": round(self.t_cz / NS, 9),
            "cz_gap_ns": round(self.cz_gap / NS, 9),
        }

    @classmethod
    def from_json(cls, obj):
        def sec(x):
            return math.inf if x is None else float(x) * US

        def q(d):
            return QubitCoherence(
                sec(d.get("t1_us")),
                sec(d.get("t2r_us")),
                sec(d["t1_eff_us"]) if "t1_eff_us" in d else None,
                sec(d["t2r_eff_us"]) if "t2r_eff_us" in d else None,
            )

        try:
            return cls(
                q(obj["q1"]),
                q(obj["q2"]),
                float(obj.get("t_1qb_ns", 30)) * NS,
                float(obj.get("t_cz_ns", 60)) * NS,
                float(obj.get("cz_gap_ns", 5)) * NS,
            )
        except (KeyError, TypeError) as exc:
            raise NoiseError(f"malformed noise parameter file: {exc}") from exc


PRESETS = {"none": NoiseParams.noiseless, "sim": NoiseParams.sim, "device": NoiseParams.device}


def load_noise(spec):
    """``none``, ``sim``, ``device`` or ``file:<path>``."""
    if spec in PRESETS:
        return PRESETS[spec]()
    if isinstance(spec, str) and spec.startswith("file:"):
        with open(spec[5:]) as fh:
            return NoiseParams.from_json(json.load(fh))
    raise NoiseError(f"unknown noise spec {spec!r}")


@lru_cache(maxsize=256)
def _lifted_noise_superop(gamma1, gamma_phi, t, qubit, n_qubits):
    ch = channels.decoherence_channel(gamma1, gamma_phi, t)
    return channels.superop(channels.lift(ch, qubit, n_qubits))


@dataclass
class NoisyMoment:
    unitary: np.ndarray
    noise: tuple  # one single-qubit KrausChannel per qubit
    duration: float
    two_qubit: bool
    rates: tuple = ()

    def apply(self, rho):
        rho = self.unitary @ rho @ dag(self.unitary)
        n = len(self.noise)
        for q, ch in enumerate(self.noise):
            rho = channels.apply(ch, rho, qubit=q if n > 1 else None)
        return rho

    def superop(self):
        s = channels.superop_from_unitary(self.unitary)
        n = len(self.noise)
        for q, (g1, gphi) in enumerate(self.rates):
            s = _lifted_noise_superop(g1, gphi, self.duration, q, n) @ s
        return s


def moment_duration(moment, params):
    timed = [g for g in moment if g.kind != "VirtualZ"]
    if not timed:
        return 0.0
    if any(g.kind in TWO_QUBIT for g in timed):
        return params.t_cz + params.cz_gap
    return max(g.duration if g.kind == "I" else params.t_1qb for g in timed)


def instrument(circuit, params):
    """Noisy executable sequence: one ``NoisyMoment`` per circuit moment."""
    out = []
    for m in circuit.moments:
        for g in m:
            if g.kind not in TWO_QUBIT and len(g.qubits) != 1:
                raise NoiseError(f"unknown gate kind {g.kind!r}")
        t = moment_duration(m, params)
        two = any(g.kind in TWO_QUBIT for g in m)
        rates = tuple(params.qubit(q).rates(effective=two and q == 0) for q in range(circuit.n_qubits))
        noise = tuple(channels.decoherence_channel(g1, gphi, t) for g1, gphi in rates)
        out.append(NoisyMoment(moment_unitary(m, circuit.n_qubits), noise, t, two, rates))
    return out


def simulate_noisy(circuit, rho, params):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2**circuit.n_qubits,) * 2:
        raise NoiseError(f"input shape {rho.shape} does not match a {circuit.n_qubits}-qubit circuit")
    for nm in instrument(circuit, params):
        rho = nm.apply(rho)
    return rho


def circuit_superop(circuit, params=None):
    if params is None:
        s = np.eye(4**circuit.n_qubits, dtype=complex)
        for m in circuit.moments:
            s = channels.superop_from_unitary(moment_unitary(m, circuit.n_qubits)) @ s
        return s
    s = np.eye(4**circuit.n_qubits, dtype=complex)
    for nm in instrument(circuit, params):
        s = nm.superop() @ s
    return s


def dme2_moment_superops(delta, steps, axis, params=None):
    """Per-moment superoperators for both coin values plus the coin positions.

    Returns ``(seq0, seq1, coin_moment)``: ``seq0[i]``/``seq1[i]`` are moment
    ``i`` with every coin off/on, and ``coin_moment[k]`` is the index of the
    single merged layer that coin ``k`` controls.
    """
    c0 = build_dme2_circuit(delta, steps, axis, np.zeros(steps, bool))
    c1 = build_dme2_circuit(delta, steps, axis, np.ones(steps, bool))
    if params is None:
        seq0 = [channels.superop_from_unitary(moment_unitary(m)) for m in c0.moments]
        seq1 = [channels.superop_from_unitary(moment_unitary(m)) for m in c1.moments]
    else:
        seq0 = [nm.superop() for nm in instrument(c0, params)]
        seq1 = [nm.superop() for nm in instrument(c1, params)]
    coin_moment = [i for i, (a, b) in enumerate(zip(c0.moments, c1.moments)) if a != b]
    if len(coin_moment) != steps:
        # a coin can be invisible only if the QME rotation is trivial, which it never is
        raise NoiseError("could not locate one coin-controlled layer per step")
    return seq0, seq1, coin_moment


def dme2_average_superop(delta, steps, axis, params=None):
    """Compiled DME2 superoperator averaged over all ``2**steps`` coin sequences.

    Each coin touches exactly one merged layer, so the average of the whole
    circuit factorises into per-moment averages. Exact, and linear in steps.
    """
    seq0, seq1, coin_moment = dme2_moment_superops(delta, steps, axis, params)
    coins = set(coin_moment)
    s = np.eye(16, dtype=complex)
    for i, (a, b) in enumerate(zip(seq0, seq1)):
        s = (0.5 * (a + b) if i in coins else a) @ s
    return s


def dme2_mask_outputs(rho_in, sigma_in, steps, theta, axis, masks, params=None, delta=None):
    """Joint output of the compiled circuit for each coin sequence in ``masks``."""
    delta = theta / steps if delta is None else delta
    seq0, seq1, coin_moment = dme2_moment_superops(delta, steps, axis, params)
    masks = np.asarray(masks, dtype=bool).reshape(-1, steps)
    coin_of = {m: k for k, m in enumerate(coin_moment)}
    v0 = channels.vec(kron(sigma_in, rho_in))
    out = np.empty((len(masks), 4, 4), dtype=complex)
    for r, mask in enumerate(masks):
        v = v0
        for i, (a, b) in enumerate(zip(seq0, seq1)):
            v = (b if i in coin_of and mask[coin_of[i]] else a) @ v
        out[r] = channels.unvec(v, 4)
    return out


def dme2_noisy_output(rho_in, sigma_in, steps, theta, axis, params=None, delta=None):
    """Mask-averaged joint output of the compiled (optionally noisy) DME2 circuit.

    ``delta`` defaults to ``theta / steps``; passing it separately allows
    interrupted runs (``n < N`` steps at the full-run step angle).
    """
    delta = theta / steps if delta is None else delta
    s = dme2_average_superop(delta, steps, axis, params)
    return channels.apply_superop(s, kron(sigma_in, rho_in))


def dme2_target_channel(rho_in, steps, theta, axis, params=None):
    """Single-qubit superoperator acting on the data qubit (instruction traced out)."""
    s = dme2_average_superop(theta / steps, steps, axis, params)
    cols = []
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1
        e = channels.unvec(basis, 2)
        out = channels.apply_superop(s, kron(e, rho_in))
        cols.append(channels.vec(np.einsum("ijkj->ik", out.reshape(2, 2, 2, 2))))
    return np.column_stack(cols)
