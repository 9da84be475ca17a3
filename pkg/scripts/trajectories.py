"""Bloch trajectories of data and instruction qubits for the two DME2 showcase runs."""

from _common import parser, run_and_save

RUNS = {
    "traj_plus_pi2": ["--rho", "+", "--sigma", "+i", "--steps", "4", "--theta", "pi/2"],
    "traj_zero_pi": ["--rho", "0", "--sigma", "+", "--steps", "8", "--theta", "pi"],
}


def main():
    p = parser(__doc__)
    p.add_argument("--noise", default="sim")
    p.add_argument("--shots", default="2000")
    a = p.parse_args()
    for name, argv in RUNS.items():
        out = run_and_save(["trajectory", *argv, "--noise", a.noise, "--shots", a.shots, "--seed", str(a.seed)],
                           a.out_dir, name)
        print(name)
        for row in out["series"]:
            print(f"  n={row['n']:2d}  sigma=({row['sigma_x']:+.3f},{row['sigma_y']:+.3f},{row['sigma_z']:+.3f})"
                  f"  F_ideal={row['fidelity_ideal']:.4f}")


if __name__ == "__main__":
    main()
