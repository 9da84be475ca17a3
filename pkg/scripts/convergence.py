"""Concurrence and mutual information of the mask average as randomisations accumulate."""

import json
from pathlib import Path

import numpy as np

from _common import parser
from qinstr.analysis import qme_convergence, single_mask_stats
from qinstr.dme import DmeConfig, dme2_enumerate, sample_masks
from qinstr.noise import dme2_mask_outputs, load_noise
from qinstr.qstate import concurrence, mutual_information, pure_state


def main():
    p = parser(__doc__)
    p.add_argument("--noise", default="sim")
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--r-max", type=int, default=295)
    p.add_argument("--seeds", type=int, default=5)
    a = p.parse_args()
    rho, sigma = pure_state("0"), pure_state("+")
    cfg = DmeConfig(rho, sigma, a.steps, np.pi)
    full = dme2_enumerate(cfg).joint[-1]
    print(f"enumerated: C={concurrence(full):.2e}  MI={mutual_information(full):.4f}")
    r_grid = [r for r in (1, 2, 5, 10, 20, 50, 100, 150, 200, 250, a.r_max) if r <= a.r_max]
    params = load_noise(a.noise)
    curves = {}
    for seed in range(a.seed, a.seed + a.seeds):
        masks = sample_masks(a.steps, a.r_max, seed)
        finals = dme2_mask_outputs(rho, sigma, a.steps, np.pi, cfg.axis, masks, params)
        conc, mi = single_mask_stats(finals)
        curves[seed] = qme_convergence(finals, r_grid)
        print(f"seed {seed}: single-mask median C={np.median(conc):.3f} MI={np.median(mi):.3f}")
        print("   " + "  ".join(f"r={row['r']}:{row['concurrence']:.3f}" for row in curves[seed]))
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "convergence.json").write_text(json.dumps({"noise": a.noise, "curves": curves}, indent=2) + "\n")


if __name__ == "__main__":
    main()
