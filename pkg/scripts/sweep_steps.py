"""Output fidelity versus number of DME2 steps, noiseless and with the simulation noise preset."""

from _common import parser, run_and_save


def main():
    p = parser(__doc__)
    p.add_argument("--noise", default="sim")
    p.add_argument("--n-max", default="12")
    p.add_argument("--r", default=None, help="randomisations for bootstrap error bars")
    a = p.parse_args()
    for theta in ("pi/2", "pi"):
        argv = ["sweep-n", "--theta", theta, "--noise", a.noise, "--n-max", a.n_max, "--seed", str(a.seed)]
        if a.r:
            argv += ["--r", a.r]
        out = run_and_save(argv, a.out_dir, "sweep_theta_" + theta.replace("/", "_"))
        print(f"theta={theta}")
        print("   N depth  F_ideal(clean)  F_ideal(noisy)  F(noisy,DME2)")
        for row in out["series"]:
            print(f"  {row['N']:2d} {row['depth']:5d}  {row['fidelity_ideal_noiseless']:14.4f}"
                  f"  {row['fidelity_ideal']:14.4f}  {row['fidelity_dme2']:13.4f}")


if __name__ == "__main__":
    main()
