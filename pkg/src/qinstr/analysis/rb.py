"""Randomised benchmarking: Clifford group, simulated 1q RB, decay fits and error arithmetic."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .. import channels
from ..compiler import zxz_angles
from ..gates import H_MAT, phased_x, rz
from ..linalg import dag, phase_distance


class FitError(RuntimeError):
    pass


def _canon(u):
    """Phase-fixed copy used as a dictionary key."""
    flat = u.ravel()
    k = np.argmax(np.abs(flat) > 1e-9)
    v = u * abs(flat[k]) / flat[k]
    return tuple(np.round(v, 8).ravel().tolist())


def clifford_group():
    """The 24 single-qubit Cliffords (modulo phase), generated from H and S."""
    s = np.diag([1, 1j])
    found = {_canon(np.eye(2)): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (H_MAT, s):
                v = g @ u
                key = _canon(v)
                if key not in found:
                    found[key] = v
                    nxt.append(v)
        frontier = nxt
    return list(found.values())


def compile_clifford(u):
    """Native form ``PhasedX(theta, phi) @ Rz(lam)``: a single 30 ns pulse."""
    theta, phi, lam = zxz_angles(u)
    return phased_x(theta, phi) @ rz(lam)


def _inverse_index(group, u):
    target = dag(u)
    for i, g in enumerate(group):
        if phase_distance(g, target) < 1e-8:
            return i
    raise FitError("sequence product is not a Clifford")  # unreachable for a closed group


def simulate_rb_1q(lengths, k=25, seed=0, depolarizing=None, noise=None):
    """Mean ground-state survival over ``k`` random sequences per length.

    Each Clifford is followed by either a depolarizing channel of parameter
    ``depolarizing`` or the idle decoherence of qubit 0 under ``noise`` for
    one single-qubit gate time. Returns ``(mean, std)`` arrays.
    """
    group = clifford_group()
    native = [compile_clifford(g) for g in group]
    if depolarizing is not None:
        lam = float(depolarizing)
        after = lam * np.eye(4) + (1 - lam) * np.outer(channels.vec(np.eye(2) / 2), channels.vec(np.eye(2)).conj())
    elif noise is not None:
        g1, gphi = noise.q1.rates()
        after = channels.superop(channels.decoherence_channel(g1, gphi, noise.t_1qb))
    else:
        after = np.eye(4)
    sops = [after @ channels.superop_from_unitary(u) for u in native]
    start = channels.vec(np.diag([1.0, 0.0]).astype(complex))
    means, stds = [], []
    for li, m in enumerate(lengths):
        surv = []
        for j in range(k):
            rng = np.random.default_rng([int(seed), li, j])
            seq = rng.integers(0, len(group), size=int(m))
            u = np.eye(2, dtype=complex)
            v = start
            for c in seq:
                u = group[c] @ u
                v = sops[c] @ v
            v = sops[_inverse_index(group, u)] @ v
            surv.append(v[0].real)
        means.append(np.mean(surv))
        stds.append(np.std(surv))
    return np.array(means), np.array(stds)


@dataclass(frozen=True)
class RbFit:
    A: float
    p: float
    B: float
    cov: np.ndarray
    sigma: np.ndarray = None

    @property
    def p_err(self):
        return float(np.sqrt(self.cov[1, 1])) if np.all(np.isfinite(self.cov)) else float("nan")

    def to_json(self):
        return {"A": self.A, "p": self.p, "B": self.B, "p_err": self.p_err}


def rb_model(m, a, p, b):
    return a * p ** np.asarray(m, float) + b


def rb_fit(lengths, survival, sigma=None):
    """Weighted least squares of ``A p**m + B``; ``sigma`` taken as absolute."""
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(survival, dtype=float)
    if m.size < 3:
        raise FitError("need at least three sequence lengths")
    if sigma is not None:
        sigma = np.maximum(np.asarray(sigma, dtype=float), 1e-6)
    p0 = (max(y[0] - y[-1], 1e-3), 0.99, float(y[-1]))
    try:
        popt, pcov = curve_fit(
            rb_model, m, y, p0=p0, sigma=sigma, absolute_sigma=sigma is not None,
            bounds=([-2, 0, -1], [2, 1, 2]), maxfev=20000, xtol=1e-14, ftol=1e-14,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"RB fit did not converge: {exc}") from exc
    a, p, b = (float(x) for x in popt)
    if not 0 < p <= 1:
        raise FitError(f"fitted p={p} outside (0, 1]")
    return RbFit(a, p, b, pcov, sigma)


def clifford_errors(p_r, p_g=None, mode="1q"):
    """Error per Clifford (and per interleaved gate) from fitted decay constants.

    ``1q``: ``eps = (1 - p)/2``; ``2q``: ``eps = 3(1 - p)/4``; ``interleaved``
    normalises ``p_g`` by the reference: ``eps_g = (1 - p_g/p_r)/2``, and
    ``interleaved-2q`` uses the 3/4 prefactor.
    """
    if mode in ("1q", "2q"):
        factor = 0.5 if mode == "1q" else 0.75
        eps = factor * (1 - p_r)
        return {"mode": mode, "p": p_r, "epsilon": eps, "fidelity": 1 - eps}
    if mode in ("interleaved", "interleaved-2q"):
        if p_g is None:
            raise ValueError("interleaved mode needs p_g")
        factor = 0.5 if mode == "interleaved" else 0.75
        eps_r = factor * (1 - p_r)
        eps_g = factor * (1 - p_g / p_r)
        return {"mode": mode, "p": p_r, "p_g": p_g, "epsilon_ref": eps_r, "epsilon": eps_g,
                "fidelity": 1 - eps_g}
    raise ValueError(f"unknown mode {mode!r}")


def p_from_error(eps, mode="1q"):
    """Inverse of the reference error formula."""
    factor = 0.5 if mode == "1q" else 0.75
    return 1 - eps / factor
