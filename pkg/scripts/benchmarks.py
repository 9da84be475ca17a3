"""Gate benchmarks: single-qubit RB, repeated-CZ phase-error amplification and effective coherence."""

from _common import parser, run_and_save


def main():
    p = parser(__doc__)
    p.add_argument("--noise", default="device")
    a = p.parse_args()
    rb = run_and_save(["rb", "--noise", a.noise, "--seed", str(a.seed)], a.out_dir, "rb")
    print(f"RB: p = {rb['fit']['p']:.5f}, errors = {rb['errors']}")
    for err in ("0", "0.08pi"):
        amp = run_and_save(["cz-amplify", "--phi11-err", err, "--n-max", "60", "--noise", a.noise],
                           a.out_dir, f"cz_amplify_{err}")
        f = [row["gate_fidelity"] for row in amp["series"]]
        print(f"CZ amplification phi11 error {err}: period {amp['period']}, F(1)={f[0]:.4f}, F(60)={f[-1]:.4f}")
    rep = run_and_save(["noise-report", "--noise", a.noise], a.out_dir, "noise_report")
    print("effective coherence:", rep["effective_coherence"])


if __name__ == "__main__":
    main()
