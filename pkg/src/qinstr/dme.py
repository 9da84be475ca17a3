"""Density matrix exponentiation with perfect refresh and with QME.

The joint two-qubit state is ``kron(sigma, rho)``: data qubit first,
instruction qubit second. One Trotter step conjugates the joint state by
``exp(-i SWAP delta)`` with ``delta = theta / N``.

QME (quantum measurement emulation) applies either the identity or a
pi-rotation about the instruction axis to the instruction qubit with equal
probability. Averaged over the coin it dephases the instruction qubit in its
own eigenbasis, which is what lets the same physical qubit serve as N
approximate copies of the instruction.
"""

from dataclasses import dataclass, field

import numpy as np

from . import channels
from .gates import GateOp, rotation, swap_pow
from .linalg import dag, expm_herm, kron, partial_trace
from .qstate import bloch, check_dm, purity

ENUMERATION_LIMIT = 20
_BATCH_LEVELS = 12

MODES = ("refresh", "qme_enumerate", "qme_sample")


class ConfigError(ValueError):
    pass


class GuardError(RuntimeError):
    """Raised when a request exceeds a resource guard (e.g. mask enumeration)."""


@dataclass
class DmeConfig:
    rho_in: np.ndarray
    sigma_in: np.ndarray
    steps: int
    theta: float
    qme_axis: object = "auto"
    mode: str = "refresh"
    r: int = None
    seed: int = 0

    def __post_init__(self):
        self.rho_in = np.asarray(self.rho_in, dtype=complex)
        self.sigma_in = np.asarray(self.sigma_in, dtype=complex)
        check_dm(self.rho_in)
        check_dm(self.sigma_in)
        if self.rho_in.shape != (2, 2) or self.sigma_in.shape != (2, 2):
            raise ConfigError("instruction and data states must be single-qubit")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError(f"steps must be a positive integer, got {self.steps}")
        self.steps = int(self.steps)
        if not 0 < abs(self.delta) <= 2 * np.pi:
            raise ConfigError(f"step angle theta/N = {self.delta} outside (0, 2pi]")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.axis = resolve_axis(self.rho_in, self.qme_axis)

    @property
    def delta(self):
        return self.theta / self.steps

    @property
    def instruction_purity(self):
        return purity(self.rho_in)


def resolve_axis(rho_in, axis="auto"):
    """QME axis: the normalised Bloch vector of ``rho_in`` unless given."""
    if isinstance(axis, str):
        if axis != "auto":
            raise ConfigError(f"qme_axis must be 'auto' or a 3-vector, got {axis!r}")
        r = bloch(rho_in)
        norm = np.linalg.norm(r)
        if norm < 1e-9:
            raise ConfigError("auto QME axis undefined for an instruction with zero Bloch vector")
        return r / norm
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-9:
        raise ConfigError(f"qme_axis must be a unit 3-vector, got {axis!r}")
    return n


def ideal_unitary(rho_in, theta):
    """``exp(-i rho theta)``."""
    return expm_herm(rho_in, theta)


def ideal_output(rho_in, sigma_in, theta):
    u = ideal_unitary(rho_in, theta)
    return u @ sigma_in @ dag(u)


def dswap_step(joint, delta):
    joint = np.asarray(joint)
    if joint.shape != (4, 4):
        raise ConfigError(f"joint state must be 4x4, got {joint.shape}")
    u = swap_pow(delta)
    return u @ joint @ dag(u)


def dme_refresh(cfg):
    """Trajectory ``[sigma(0), ..., sigma(N)]`` with a fresh instruction every step."""
    u = swap_pow(cfg.delta)
    sigma = cfg.sigma_in.copy()
    out = [sigma]
    for _ in range(cfg.steps):
        joint = u @ kron(sigma, cfg.rho_in) @ dag(u)
        sigma = partial_trace(joint, 1)
        out.append(sigma)
    return out


def damping_probability(theta, steps):
    return 1.0 - np.cos(theta / steps) ** (2 * steps)


def _pole_basis(rho_in):
    """Unitary whose first column is the dominant eigenvector of ``rho_in``."""
    w, v = np.linalg.eigh(rho_in)
    return v[:, ::-1]


def closed_form_channel(rho_in, steps, theta):
    """Exact N-step refresh-DME channel for a pure instruction.

    Ideal rotation ``exp(-i rho theta)`` followed by amplitude damping towards
    the instruction state with probability ``1 - cos(theta/N)**(2N)``.

    Each step scales the coherence by the signed factor ``cos(delta)``; when
    it is negative and N is odd the leftover sign is an extra pi rotation
    about the instruction axis, which the damping commutes with.
    """
    rho_in = np.asarray(rho_in, dtype=complex)
    if abs(purity(rho_in) - 1) > 1e-9:
        raise ConfigError("closed form only covers pure instruction states; simulate steps instead")
    angle = theta
    if np.cos(theta / steps) < 0 and steps % 2 == 1:
        angle = theta + np.pi
    damp = channels.conjugate(channels.amplitude_damping(damping_probability(theta, steps)), _pole_basis(rho_in))
    return channels.compose(damp, channels.unitary_channel(ideal_unitary(rho_in, angle)))


def qme_gate(axis, coin):
    return GateOp("QmeMark", (1,), {"axis": tuple(float(a) for a in axis), "coin": bool(coin)})


def qme_unitary(axis, coin):
    return rotation(axis, np.pi) if coin else np.eye(2, dtype=complex)


@dataclass
class Dme2Result:
    joint: list
    masks: np.ndarray = None
    finals: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def sigma(self):
        return [partial_trace(j, 1) for j in self.joint]

    @property
    def rho(self):
        return [partial_trace(j, 2) for j in self.joint]


def _step_ops(cfg):
    u = swap_pow(cfg.delta)
    q = kron(np.eye(2), qme_unitary(cfg.axis, True))
    return u, q


def run_mask(cfg, mask):
    """Joint-state trajectory for one QME coin sequence."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (cfg.steps,):
        raise ConfigError(f"mask length {mask.size} != steps {cfg.steps}")
    u, q = _step_ops(cfg)
    joint = kron(cfg.sigma_in, cfg.rho_in)
    out = [joint]
    for bit in mask:
        joint = u @ joint @ dag(u)
        if bit:
            joint = q @ joint @ dag(q)
        out.append(joint)
    return out


def dme2_enumerate(cfg):
    """Average over all ``2**N`` QME coin sequences of the joint trajectory.

    The walk branches depth-first until the remaining subtree fits a numpy
    batch, so memory stays bounded near the enumeration limit.
    """
    n = cfg.steps
    if n > ENUMERATION_LIMIT:
        raise GuardError(f"N={n} exceeds the enumeration limit {ENUMERATION_LIMIT}; use sampling")
    u, q = _step_ops(cfg)
    ud, qd = dag(u), dag(q)
    sums = [np.zeros((4, 4), dtype=complex) for _ in range(n + 1)]

    def batch(states, level):
        sums[level] += states.sum(axis=0)
        while level < n:
            states = u @ states @ ud
            states = np.concatenate([states, q @ states @ qd])
            level += 1
            sums[level] += states.sum(axis=0)

    def walk(state, level):
        if n - level <= _BATCH_LEVELS:
            batch(state[None], level)
            return
        sums[level] += state
        nxt = u @ state @ ud
        walk(nxt, level + 1)
        walk(q @ nxt @ qd, level + 1)

    walk(kron(cfg.sigma_in, cfg.rho_in), 0)
    joint = [s / 2.0**k for k, s in enumerate(sums)]
    return Dme2Result(joint, meta={"mode": "qme_enumerate", "masks": 2**n, "instruction_purity": cfg.instruction_purity})


def _entropy(seed):
    return [int(s) for s in np.atleast_1d(seed)]


def mask_rng(seed, k):
    """Generator for mask ``k``; independent of evaluation order.

    ``seed`` may be an integer or a tuple such as ``(base_seed, point_index)``.
    """
    return np.random.default_rng(_entropy(seed) + [int(k)])


def sample_masks(steps, r, seed, unique=False):
    if r <= 0:
        raise ConfigError(f"r must be positive, got {r}")
    if unique:
        if r > 2**steps:
            raise ConfigError(f"cannot draw {r} distinct masks from 2**{steps}")
        idx = np.sort(np.random.default_rng(_entropy(seed)).choice(2**steps, size=r, replace=False))
        return ((idx[:, None] >> np.arange(steps)[::-1]) & 1).astype(bool)
    return np.array([mask_rng(seed, k).integers(0, 2, size=steps).astype(bool) for k in range(r)])


def dme2_sample(cfg, r=None, seed=None, unique=False):
    """Average over ``r`` random coin sequences; keeps per-mask final states."""
    r = cfg.r if r is None else r
    seed = cfg.seed if seed is None else seed
    if r is None:
        raise ConfigError("sampling mode needs r")
    masks = sample_masks(cfg.steps, r, seed, unique)
    trajs = np.array([run_mask(cfg, m) for m in masks])  # (r, N+1, 4, 4)
    joint = list(trajs.sum(axis=0) / r)
    return Dme2Result(
        joint,
        masks=masks,
        finals=trajs[:, -1],
        meta={"mode": "qme_sample", "r": int(r), "seed": _entropy(seed), "unique": bool(unique),
              "instruction_purity": cfg.instruction_purity},
    )


def run(cfg):
    """Dispatch on ``cfg.mode``."""
    if cfg.mode == "refresh":
        return dme_refresh(cfg)
    if cfg.mode == "qme_enumerate":
        return dme2_enumerate(cfg)
    return dme2_sample(cfg)


@dataclass(frozen=True)
class ErrorBounds:
    theta: float
    steps: int
    discretization: float
    qme_bound: float
    discretization_asymptote: float
    qme_asymptote: float


def error_bounds(theta, steps):
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    delta = theta / steps
    return ErrorBounds(
        theta=theta,
        steps=steps,
        discretization=float(damping_probability(theta, steps)),
        qme_bound=float(2 * steps * np.sin(delta) ** 2),
        discretization_asymptote=float(theta**2 / steps),
        qme_asymptote=float(2 * theta**2 / steps),
    )
