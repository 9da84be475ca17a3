"""How the joint state approaches its mask average as randomisations accumulate."""

import numpy as np

from ..linalg import partial_trace
from ..qstate import concurrence, mutual_information, state_fidelity


def qme_convergence(finals, r_grid, reference=None):
    """Cumulative averages of the first ``r`` per-mask joint states.

    Returns one dict per ``r`` with concurrence, mutual information (nats)
    and, when ``reference`` is given, the data-qubit fidelity to it.
    """
    finals = np.asarray(finals, dtype=complex)
    if finals.ndim != 3 or finals.shape[1:] != (4, 4):
        raise ValueError("finals must be a stack of 4x4 joint states")
    r_grid = sorted(int(r) for r in r_grid)
    if not r_grid or r_grid[0] < 1 or r_grid[-1] > len(finals):
        raise ValueError(f"r grid must lie in [1, {len(finals)}]")
    csum = np.cumsum(finals, axis=0)
    out = []
    for r in r_grid:
        avg = csum[r - 1] / r
        row = {"r": r, "concurrence": concurrence(avg), "mutual_information": mutual_information(avg)}
        if reference is not None:
            row["fidelity"] = state_fidelity(partial_trace(avg, 1), reference)
        out.append(row)
    return out


def single_mask_stats(finals):
    """Per-mask concurrence and mutual information."""
    finals = np.asarray(finals, dtype=complex)
    return (np.array([concurrence(f) for f in finals]),
            np.array([mutual_information(f) for f in finals]))
