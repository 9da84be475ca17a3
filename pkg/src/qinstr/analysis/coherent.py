"""Repeated-CZ amplification of phase errors and effective-coherence extraction."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .. import channels
from ..compiler import Circuit, moment_unitary
from ..gates import GateOp, cz_general, rx
from ..linalg import I2, kron
from ..noise import NS, instrument
from ..tomography import ProcessMap, gate_fidelity
from .rb import FitError


def _cz_moment(phase_errors):
    e01, e10, e11 = phase_errors
    return (GateOp("CZGeneral", (0, 1), {"phi01": e01, "phi10": e10, "phi11": np.pi + e11}),)


_PAD = (GateOp("I", (0,)), GateOp("I", (1,)))


def _block_superops(phase_errors, noise):
    c = Circuit([_cz_moment(phase_errors), _PAD])
    if noise is None:
        return [channels.superop_from_unitary(moment_unitary(m)) for m in c.moments]
    return [nm.superop() for nm in instrument(c, noise)]


@dataclass
class AmplificationSeries:
    cz_count: np.ndarray
    gate_fidelity: np.ndarray
    period: float = None
    fit: dict = None

    def to_json(self):
        return {
            "x": self.cz_count.tolist(),
            "mean": self.gate_fidelity.tolist(),
            "period": self.period,
            "fit": self.fit,
        }


def cz_phase_error_amplification(phase_errors=(0.0, 0.0, 0.0), n_max=60, noise=None, fit=True):
    """Gate fidelity to the ideal ``CZ**m`` after ``m`` noisy, mis-phased CZs.

    Each CZ is followed by an identity layer standing in for single-qubit
    gates. Even ``m`` compares to the two-qubit identity (the paired-block
    circuit); odd ``m`` compares to a single ideal CZ, so the series is
    indexed by CZ count and ``m = 1`` is a single gate instance.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    sops = _block_superops(phase_errors, noise)
    block = sops[1] @ sops[0]
    ideal_cz = cz_general(0, 0, np.pi)
    s = np.eye(16, dtype=complex)
    fg = []
    for m in range(1, n_max + 1):
        s = block @ s
        ref = ProcessMap.from_unitary(np.linalg.matrix_power(ideal_cz, m % 2))
        fg.append(gate_fidelity(ProcessMap.from_superop(s), ref))
    ms = np.arange(1, n_max + 1)
    series = AmplificationSeries(ms, np.array(fg))
    if fit and np.ptp(series.gate_fidelity) > 1e-9:
        try:
            f = fit_damped_sine(ms, series.gate_fidelity)
            series.fit = f
            # a period longer than the record is a decay, not an oscillation
            if f["period"] <= n_max:
                series.period = f["period"]
        except FitError:
            pass
    return series


def damped_sine(n, a, tau, omega, phase, b):
    n = np.asarray(n, float)
    return a * np.exp(-n / tau) * np.cos(omega * n + phase) + b


def fit_damped_sine(n, y, omega0=None):
    """Least-squares damped cosine; the FFT peak seeds the frequency."""
    n = np.asarray(n, float)
    y = np.asarray(y, float)
    if n.size < 5:
        raise FitError("need at least five points")
    if omega0 is None:
        spacing = n[1] - n[0]
        pad = 16 * n.size
        spec = np.abs(np.fft.rfft(y - y.mean(), pad))
        freqs = np.fft.rfftfreq(pad, spacing)
        omega0 = 2 * np.pi * freqs[1 + np.argmax(spec[1:])]
    amp = (y.max() - y.min()) / 2
    best = None
    for phase0 in (0.0, np.pi / 2, np.pi, -np.pi / 2):
        try:
            popt, _ = curve_fit(
                damped_sine, n, y, p0=(amp, n.max() * 2, omega0, phase0, y.mean()),
                bounds=([0, 1e-3, 0, -2 * np.pi, -2], [2, np.inf, np.pi, 2 * np.pi, 2]),
                maxfev=20000,
            )
        except (RuntimeError, ValueError):
            continue
        res = float(np.sum((damped_sine(n, *popt) - y) ** 2))
        if best is None or res < best[0]:
            best = (res, popt)
    if best is None:
        raise FitError("damped-sine fit did not converge")
    a, tau, omega, phase, b = (float(x) for x in best[1])
    return {"amplitude": a, "tau": tau, "omega": omega, "phase": phase, "offset": b,
            "period": 2 * np.pi / omega if omega > 0 else float("inf"), "residual": best[0]}


@dataclass(frozen=True)
class CoherenceFit:
    kind: str
    n_char: float
    time: float  # n_char * (t_cz + gap)
    time_no_gap: float  # n_char * t_cz
    fit: dict

    def to_json(self):
        return {"kind": self.kind, "n_char": self.n_char, "time_us": self.time * 1e6,
                "time_no_gap_us": self.time_no_gap * 1e6, "fit": self.fit}


def _exp_decay(n, a, tau, b):
    return a * np.exp(-np.asarray(n, float) / tau) + b


def effective_coherence(n, survival, kind="t1", t_cz=60 * NS, gap=5 * NS):
    """Characteristic gate count of a decay and the matching effective time.

    ``kind='t1'`` fits ``A exp(-n/tau) + B``; ``kind='t2r'`` fits an
    exponentially damped sinusoid. A curve without measurable decay raises
    ``FitError('no decay')``.
    """
    n = np.asarray(n, float)
    y = np.asarray(survival, float)
    if n.size < 5:
        raise FitError("need at least five points")
    if np.ptp(y) < 1e-9:
        raise FitError("no decay")
    if kind == "t1":
        try:
            popt, _ = curve_fit(_exp_decay, n, y, p0=(y[0] - y[-1], n.max() / 2, y[-1]),
                                bounds=([-2, 1e-6, -1], [2, np.inf, 2]), maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"exponential fit failed: {exc}") from exc
        a, tau, b = (float(x) for x in popt)
        fit = {"amplitude": a, "tau": tau, "offset": b}
    elif kind == "t2r":
        fit = fit_damped_sine(n, y)
        tau = fit["tau"]
    else:
        raise ValueError(f"kind must be 't1' or 't2r', got {kind!r}")
    if not np.isfinite(tau) or tau > 1e3 * n.max():
        raise FitError("no decay")
    return CoherenceFit(kind, tau, tau * (t_cz + gap), tau * t_cz, fit)


def simulate_t1_decay(noise, n_values):
    """P(|10>) after ``n`` back-to-back CZs starting from |10>."""
    sop = instrument(Circuit([(GateOp("CZ", (0, 1)),)]), noise)[0].superop()
    v = channels.vec(np.diag([0, 0, 1.0, 0]).astype(complex))
    out, n_done = [], 0
    for n in sorted(n_values):
        v = np.linalg.matrix_power(sop, int(n - n_done)) @ v
        n_done = n
        out.append(channels.unvec(v, 4)[2, 2].real)
    return np.array(out)


def simulate_ramsey_decay(noise, n_values, phase_error=0.1):
    """Ramsey with interleaved CZs: |+0>, n x (CZ, Rz(phase_error) on qubit 0), X90, P(qubit 0 = 1)."""
    c = Circuit([(GateOp("CZ", (0, 1)), GateOp("VirtualZ", (0,), {"phi": phase_error}))])
    sop = instrument(c, noise)[0].superop()
    plus = np.full((2, 2), 0.5, dtype=complex)
    v0 = channels.vec(kron(plus, np.diag([1.0, 0]).astype(complex)))
    x90 = kron(rx(np.pi / 2), I2)
    out = []
    for n in n_values:
        rho = channels.unvec(np.linalg.matrix_power(sop, int(n)) @ v0, 4)
        rho = x90 @ rho @ x90.conj().T
        out.append(rho[2, 2].real + rho[3, 3].real)
    return np.array(out)
