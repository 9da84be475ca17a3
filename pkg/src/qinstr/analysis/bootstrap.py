"""Bootstrap uncertainty for fidelities of randomisation-averaged states and maps."""

from dataclasses import dataclass

import numpy as np

from ..linalg import partial_trace
from ..qstate import state_fidelity
from ..tomography import PROCESS_INPUTS, TomographyError, cptp_project, process_fidelity, process_tomography

R_STATE = 295
R_PROCESS = 105


@dataclass(frozen=True)
class BootstrapConfig:
    n_samp: int = 100
    N_samp: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n_samp < 1 or self.N_samp < 1:
            raise ValueError("bootstrap counts must be >= 1")


@dataclass
class BootstrapResult:
    mean: float
    sigma: float
    samples: np.ndarray

    def to_json(self):
        return {"mean": float(self.mean), "sigma": float(self.sigma)}


def _summary(samples):
    samples = np.asarray(samples, dtype=float)
    sigma = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
    return BootstrapResult(float(samples.mean()), sigma, samples)


def _resample_mean(rng, stack, n):
    idx = rng.integers(0, len(stack), size=n)
    return stack[idx].mean(axis=0)


def bootstrap_state(dms, cfg, reference, keep=1):
    """Mean and spread of ``F_s(reference, <resampled average>)``.

    Two-qubit inputs are reduced to factor ``keep`` (1 = data qubit) after
    averaging.
    """
    stack = np.asarray(dms, dtype=complex)
    if stack.ndim != 3 or len(stack) == 0:
        raise ValueError("need a non-empty list of density matrices")
    out = []
    for i in range(cfg.N_samp):
        rng = np.random.default_rng([cfg.seed, i])
        avg = _resample_mean(rng, stack, cfg.n_samp)
        if avg.shape[0] != np.asarray(reference).shape[0]:
            avg = partial_trace(avg, keep)
        out.append(state_fidelity(avg, reference))
    return _summary(out)


def bootstrap_process(outputs, cfg, reference, project=True):
    """``outputs[input_name]`` holds one output state per randomisation."""
    missing = [k for k in PROCESS_INPUTS if k not in outputs]
    if missing:
        raise TomographyError(f"missing input-state groups {missing}")
    stacks = {k: np.asarray(outputs[k], dtype=complex) for k in PROCESS_INPUTS}
    out = []
    for i in range(cfg.N_samp):
        mapping = {}
        for j, k in enumerate(PROCESS_INPUTS):
            rng = np.random.default_rng([cfg.seed, i, j])
            avg = _resample_mean(rng, stacks[k], cfg.n_samp)
            mapping[k] = partial_trace(avg, 1) if avg.shape == (4, 4) else avg
        pm = process_tomography(mapping)
        out.append(process_fidelity(cptp_project(pm) if project else pm, reference))
    return _summary(out)
