"""Process fidelity versus N for each cardinal instruction and the optimal step count."""

from _common import parser, run_and_save


def main():
    p = parser(__doc__)
    p.add_argument("--noise", default="sim")
    p.add_argument("--n-max", default="16")
    p.add_argument("--shots", default="500")
    p.add_argument("--r", default="105")
    a = p.parse_args()
    out = run_and_save(["process", "--noise", a.noise, "--n-max", a.n_max, "--shots", a.shots,
                        "--r", a.r, "--seed", str(a.seed)], a.out_dir, "process")
    for row in out["summary"]:
        fids = {k: v for k, v in row.items() if k.startswith("fidelity_")}
        print(f"  {row['state']:>3}  N_opt={row['n_opt']:2d}  " + "  ".join(f"{k}={v:.4f}" for k, v in fids.items()
                                                                             if isinstance(v, float)))
    print(f"mean N_opt = {out['mean_n_opt']:.2f}")


if __name__ == "__main__":
    main()
