"""Command-line experiment runner.

Every command produces a record ``{"payload": ..., "timing": ...}``. The
payload is a pure function of the command line (including ``--seed``), so
re-runs are byte-identical; wall time and the finish timestamp live in
``timing`` only.
"""

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, analysis, dme, noise, tomography
from .compiler import build_dme2_circuit, decompose_dswap, depth
from .dme import ConfigError, DmeConfig, GuardError
from .linalg import partial_trace
from .qstate import CARDINAL, StateError, bloch, dm_to_json, pure_state, state_fidelity

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GUARD = 0, 2, 3, 4

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")


def parse_angle(text):
    """``pi``, ``-pi/2``, ``0.08pi``, ``3pi/4`` or plain radians."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text))
    if m:
        coef = m.group(1)
        coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def parse_shots(text):
    if text in (None, "exact"):
        return None
    try:
        n = int(text)
    except ValueError:
        raise ConfigError(f"--shots must be 'exact' or a positive integer, got {text!r}") from None
    if n <= 0:
        raise ConfigError("--shots must be positive")
    return n


def _int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def workers():
    try:
        cap = int(os.environ.get("QINSTR_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else n)


def _pmap(fn, items):
    items = list(items)
    if workers() == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers()) as ex:
        return list(ex.map(fn, items))


def _state(name):
    try:
        return pure_state(name)
    except StateError as exc:
        raise ConfigError(str(exc)) from exc


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _bloch_row(prefix, m):
    x, y, z = bloch(m)
    return {f"{prefix}_x": x, f"{prefix}_y": y, f"{prefix}_z": z}


def _tomo(m, shots, seed):
    return m if shots is None else tomography.reconstruct(m, shots, seed=seed)


# --- commands -----------------------------------------------------------


def cmd_trajectory(a):
    theta = parse_angle(a.theta)
    rho_in, sigma_in = _state(a.rho), _state(a.sigma)
    shots = parse_shots(a.shots)
    params = noise.load_noise(a.noise)
    cfg_echo = {"rho": a.rho, "sigma": a.sigma, "steps": a.steps, "theta": theta, "mode": a.mode,
                "r": a.r, "unique": a.unique, "noise": a.noise, "shots": a.shots}
    if a.steps < 0:
        raise ConfigError("steps must be >= 0")
    if a.steps == 0:
        rows = [{"n": 0, **_bloch_row("sigma", sigma_in), **_bloch_row("rho", rho_in), "fidelity_ideal": 1.0}]
        return cfg_echo, {"metric": "bloch_trajectory", "series": rows,
                          "final": {"sigma": dm_to_json(sigma_in), "rho": dm_to_json(rho_in)}}
    mode = {"refresh": "refresh", "enumerate": "qme_enumerate", "sample": "qme_sample"}[a.mode]
    cfg = DmeConfig(rho_in, sigma_in, a.steps, theta, mode=mode, r=a.r, seed=a.seed)
    masks = None
    if mode == "refresh":
        if not params.is_noiseless:
            raise ConfigError("noise applies to the compiled two-qubit circuit; use --mode enumerate or sample")
        sigmas = dme.dme_refresh(cfg)
        rhos = [rho_in] * len(sigmas)
    else:
        res = dme.dme2_sample(cfg, unique=a.unique) if mode == "qme_sample" else dme.dme2_enumerate(cfg)
        masks = res.masks
        joints = res.joint
        if not params.is_noiseless:
            joints = [joints[0]]
            for n in range(1, a.steps + 1):
                if masks is None:
                    joints.append(noise.dme2_noisy_output(rho_in, sigma_in, n, theta, cfg.axis, params, cfg.delta))
                else:
                    outs = noise.dme2_mask_outputs(rho_in, sigma_in, n, theta, cfg.axis, masks[:, :n], params, cfg.delta)
                    joints.append(outs.mean(axis=0))
        sigmas = [partial_trace(j, 1) for j in joints]
        rhos = [partial_trace(j, 2) for j in joints]
    rows = []
    for n, (s, r) in enumerate(zip(sigmas, rhos)):
        s_hat = _tomo(s, shots, [a.seed, n, 0])
        r_hat = _tomo(r, shots, [a.seed, n, 1])
        ideal = dme.ideal_output(rho_in, sigma_in, n * cfg.delta)
        rows.append({"n": n, **_bloch_row("sigma", s_hat), **_bloch_row("rho", r_hat),
                     "fidelity_ideal": state_fidelity(s_hat, ideal)})
    out = {"metric": "bloch_trajectory", "series": rows,
           "final": {"sigma": dm_to_json(sigmas[-1]), "rho": dm_to_json(rhos[-1])},
           "instruction_purity": cfg.instruction_purity}
    return cfg_echo, out


def _sweep_point(args):
    n, theta, rho_in, sigma_in, params, r, boot, seed = args
    axis = dme.resolve_axis(rho_in)
    ideal = dme.ideal_output(rho_in, sigma_in, theta)
    clean = partial_trace(noise.dme2_noisy_output(rho_in, sigma_in, n, theta, axis), 1)
    noisy = partial_trace(noise.dme2_noisy_output(rho_in, sigma_in, n, theta, axis, params), 1)
    row = {"N": n, "depth": 6 * n + 1,
           "fidelity_ideal_noiseless": state_fidelity(clean, ideal),
           "fidelity_ideal": state_fidelity(noisy, ideal),
           "fidelity_dme2": state_fidelity(noisy, clean),
           "refresh_fidelity_ideal": state_fidelity(
               dme.closed_form_channel(rho_in, n, theta)(sigma_in), ideal)}
    if r:
        masks = dme.sample_masks(n, r, (seed, n))
        finals = noise.dme2_mask_outputs(rho_in, sigma_in, n, theta, axis, masks, params)
        b = analysis.bootstrap_state(finals, boot, ideal)
        b2 = analysis.bootstrap_state(finals, boot, clean)
        row.update({"bootstrap_mean": b.mean, "bootstrap_sigma": b.sigma,
                    "bootstrap_dme2_mean": b2.mean, "bootstrap_dme2_sigma": b2.sigma})
    return row


def cmd_sweep_n(a):
    theta = parse_angle(a.theta)
    rho_in, sigma_in = _state(a.rho), _state(a.sigma)
    params = noise.load_noise(a.noise)
    if not 1 <= a.n_min <= a.n_max:
        raise ConfigError("need 1 <= n-min <= n-max")
    dme.resolve_axis(rho_in)
    boot = analysis.BootstrapConfig(a.n_samp, a.N_samp, a.seed)
    pts = [(n, theta, rho_in, sigma_in, params, a.r, boot, a.seed) for n in range(a.n_min, a.n_max + 1)]
    rows = _pmap(_sweep_point, pts)
    best = max(rows, key=lambda r: r["fidelity_ideal"])
    cfg_echo = {"rho": a.rho, "sigma": a.sigma, "theta": theta, "n_min": a.n_min, "n_max": a.n_max,
                "noise": a.noise, "r": a.r, "n_samp": a.n_samp, "N_samp": a.N_samp}
    return cfg_echo, {"metric": "state_fidelity", "series": rows, "n_opt": best["N"],
                      "noise_params": params.to_json()}


def _process_point(args):
    name, n, theta, params, shots, seed = args
    rho_in = pure_state(name)
    axis = dme.resolve_axis(rho_in)
    sop = noise.dme2_target_channel(rho_in, n, theta, axis, params)
    if shots is None:
        pm = tomography.ProcessMap.from_superop(sop)
    else:
        pm0 = tomography.ProcessMap.from_superop(sop)
        outs = tomography.channel_outputs(pm0.apply)
        pm = tomography.process_from_outputs(outs, shots, seed=[seed, n, CARDINAL.index(name)])
    ideal = tomography.ProcessMap.from_unitary(dme.ideal_unitary(rho_in, theta))
    return pm, tomography.process_fidelity(pm, ideal)


def cmd_process(a):
    theta = parse_angle(a.theta)
    params = noise.load_noise(a.noise)
    shots = parse_shots(a.shots)
    states = [s.strip() for s in a.states.split(",")] if a.states else list(CARDINAL)
    for s in states:
        _state(s)
    if a.n_max < 1:
        raise ConfigError("n-max must be >= 1")
    ns = range(1, a.n_max + 1)
    pts = [(s, n, theta, params, shots, a.seed) for s in states for n in ns]
    results = _pmap(_process_point, pts)
    boot = analysis.BootstrapConfig(a.n_samp, a.N_samp, a.seed)
    series, summary = [], []
    for i, s in enumerate(states):
        chunk = results[i * a.n_max:(i + 1) * a.n_max]
        fid = [f for _, f in chunk]
        series.extend({"state": s, "N": n, "fidelity_ideal": f} for n, f in zip(ns, fid))
        k = int(np.argmax(fid))
        n_opt = k + 1
        pm = chunk[k][0]
        rho_in = pure_state(s)
        axis = dme.resolve_axis(rho_in)
        chi_ideal = tomography.ProcessMap.from_unitary(dme.ideal_unitary(rho_in, theta))
        chi_dme = tomography.ProcessMap.from_channel(dme.closed_form_channel(rho_in, n_opt, theta))
        chi_dme2 = tomography.ProcessMap.from_superop(noise.dme2_target_channel(rho_in, n_opt, theta, axis))
        row = {"state": s, "n_opt": n_opt, "n_opt_at_boundary": n_opt == a.n_max,
               "fidelity_ideal": tomography.process_fidelity(pm, chi_ideal),
               "fidelity_dme": tomography.process_fidelity(pm, chi_dme),
               "fidelity_dme2": tomography.process_fidelity(pm, chi_dme2),
               "chi": pm.to_json()}
        if a.r:
            masks = dme.sample_masks(n_opt, a.r, (a.seed, CARDINAL.index(s)))
            outs = {k_: noise.dme2_mask_outputs(rho_in, pure_state(k_), n_opt, theta, axis, masks, params)
                    for k_ in tomography.PROCESS_INPUTS}
            b = analysis.bootstrap_process(outs, boot, chi_ideal)
            row.update({"bootstrap_mean": b.mean, "bootstrap_sigma": b.sigma})
        summary.append(row)
    cfg_echo = {"theta": theta, "states": states, "n_max": a.n_max, "noise": a.noise, "shots": a.shots,
                "r": a.r, "n_samp": a.n_samp, "N_samp": a.N_samp}
    return cfg_echo, {"metric": "process_fidelity", "series": series, "summary": summary,
                      "mean_n_opt": float(np.mean([r["n_opt"] for r in summary]))}


def cmd_compile(a):
    if a.delta is not None:
        delta = parse_angle(a.delta)
        c = decompose_dswap(delta)
        cfg_echo = {"delta": delta}
    else:
        theta = parse_angle(a.theta)
        if a.steps is None or a.steps < 1:
            raise ConfigError("give --delta, or --steps >= 1 with --theta and --rho")
        axis = dme.resolve_axis(_state(a.rho))
        if a.mask is not None:
            if len(a.mask) != a.steps or set(a.mask) - {"0", "1"}:
                raise ConfigError(f"--mask must be {a.steps} characters of 0/1")
            mask = np.array([ch == "1" for ch in a.mask])
        else:
            mask = dme.sample_masks(a.steps, 1, a.seed)[0]
        c = build_dme2_circuit(theta / a.steps, a.steps, axis, mask, merge=not a.no_merge)
        cfg_echo = {"steps": a.steps, "theta": theta, "rho": a.rho, "mask": "".join("1" if b else "0" for b in mask),
                    "merge": not a.no_merge}
    rows = [{"moment": i, "gates": " ".join(f"{g.kind}{list(g.qubits)}" for g in m)} for i, m in enumerate(c.moments)]
    return cfg_echo, {"metric": "circuit", "series": rows, "depth": depth(c), "moments": len(c),
                      "circuit": c.to_json()}


def cmd_rb(a):
    lengths = _int_list(a.lengths)
    if len(lengths) < 3 or min(lengths) < 1:
        raise ConfigError("need at least three positive sequence lengths")
    params = noise.load_noise(a.noise)
    mean, std = analysis.simulate_rb_1q(lengths, a.k, a.seed, depolarizing=a.depolarizing,
                                        noise=None if params.is_noiseless else params)
    rows = [{"m": m, "mean": mu, "sigma": s} for m, mu, s in zip(lengths, mean, std)]
    if np.ptp(mean) < 1e-12:
        fit, errors = None, {"mode": "1q", "p": 1.0, "epsilon": 0.0, "fidelity": 1.0}
    else:
        f = analysis.rb_fit(lengths, mean, std / np.sqrt(a.k))
        fit, errors = f.to_json(), analysis.clifford_errors(f.p)
    cfg_echo = {"lengths": lengths, "k": a.k, "depolarizing": a.depolarizing, "noise": a.noise}
    return cfg_echo, {"metric": "rb_survival", "series": rows, "fit": fit, "errors": errors}


def cmd_cz_amplify(a):
    errs = tuple(parse_angle(x) for x in (a.phi01_err, a.phi10_err, a.phi11_err))
    params = noise.load_noise(a.noise)
    s = analysis.cz_phase_error_amplification(errs, a.n_max, None if params.is_noiseless else params)
    rows = [{"cz_count": int(m), "gate_fidelity": f} for m, f in zip(s.cz_count, s.gate_fidelity)]
    cfg_echo = {"phase_errors": list(errs), "n_max": a.n_max, "noise": a.noise}
    return cfg_echo, {"metric": "gate_fidelity", "series": rows, "period": s.period, "fit": s.fit}


def cmd_noise_report(a):
    params = noise.load_noise(a.noise)
    rows = []
    for k, name in enumerate(("q1", "q2")):
        q = params.qubit(k)
        for eff in (False, True):
            g1, gphi = q.rates(effective=eff)
            t = params.t_cz + params.cz_gap if eff else params.t_1qb
            rows.append({"qubit": name, "context": "cz" if eff else "idle", "gamma1_per_us": g1 * 1e-6,
                         "gamma_phi_per_us": gphi * 1e-6, "gate_time_ns": round(t * 1e9, 9),
                         "excited_survival_per_gate": math.exp(-g1 * t)})
    out = {"metric": "noise_rates", "series": rows, "params": params.to_json()}
    if not params.is_noiseless:
        n1 = np.arange(0, 1201, 40)
        n2 = np.arange(0, 301, 3)
        t1 = analysis.effective_coherence(n1, analysis.simulate_t1_decay(params, n1), "t1",
                                          params.t_cz, params.cz_gap)
        t2 = analysis.effective_coherence(n2, analysis.simulate_ramsey_decay(params, n2), "t2r",
                                          params.t_cz, params.cz_gap)
        out["effective_coherence"] = {"t1": t1.to_json(), "t2r": t2.to_json()}
    return {"noise": a.noise}, out


COMMANDS = {
    "trajectory": cmd_trajectory,
    "sweep-n": cmd_sweep_n,
    "process": cmd_process,
    "compile": cmd_compile,
    "rb": cmd_rb,
    "cz-amplify": cmd_cz_amplify,
    "noise-report": cmd_noise_report,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--noise", default="none", help="none | sim | device | file:<path>")
    common.add_argument("--shots", default="exact", help="'exact' or shots per tomography setting")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="qinstr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trajectory", parents=[common], help="step-by-step Bloch trajectories")
    t.add_argument("--rho", default="+")
    t.add_argument("--sigma", default="+i")
    t.add_argument("--steps", type=int, default=4)
    t.add_argument("--theta", default="pi/2")
    t.add_argument("--mode", choices=("refresh", "enumerate", "sample"), default="enumerate")
    t.add_argument("--r", type=int, default=None)
    t.add_argument("--unique", action="store_true", help="sample masks without replacement")

    s = sub.add_parser("sweep-n", parents=[common], help="fidelity versus number of steps")
    s.add_argument("--rho", default="+i")
    s.add_argument("--sigma", default="0")
    s.add_argument("--theta", default="pi")
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--n-max", type=int, default=12)
    s.add_argument("--r", type=int, default=None, help="randomisations for bootstrap error bars")
    s.add_argument("--n-samp", type=int, default=100)
    s.add_argument("--N-samp", dest="N_samp", type=int, default=50)

    pr = sub.add_parser("process", parents=[common], help="process fidelity and N_opt per instruction")
    pr.add_argument("--theta", default="pi/2")
    pr.add_argument("--states", default=None, help="comma-separated instruction states")
    pr.add_argument("--n-max", type=int, default=16)
    pr.add_argument("--r", type=int, default=None)
    pr.add_argument("--n-samp", type=int, default=100)
    pr.add_argument("--N-samp", dest="N_samp", type=int, default=50)

    c = sub.add_parser("compile", parents=[common], help="emit a compiled circuit")
    c.add_argument("--delta", default=None)
    c.add_argument("--steps", type=int, default=None)
    c.add_argument("--theta", default="pi")
    c.add_argument("--rho", default="0")
    c.add_argument("--mask", default=None)
    c.add_argument("--no-merge", action="store_true")

    r = sub.add_parser("rb", parents=[common], help="simulated single-qubit randomised benchmarking")
    r.add_argument("--depolarizing", type=float, default=None)
    r.add_argument("--lengths", default="1,2,4,8,16,32,64,128")
    r.add_argument("--k", type=int, default=100)

    z = sub.add_parser("cz-amplify", parents=[common], help="repeated-CZ phase-error amplification")
    z.add_argument("--phi01-err", default="0")
    z.add_argument("--phi10-err", default="0")
    z.add_argument("--phi11-err", default="0")
    z.add_argument("--n-max", type=int, default=60)

    sub.add_parser("noise-report", parents=[common], help="noise parameters and derived rates")
    return p


def _load_schema():
    return json.loads(resources.files("qinstr").joinpath("schema/record.schema.json").read_text())


def _to_csv(series):
    buf = io.StringIO()
    if series:
        cols = list(dict.fromkeys(k for row in series for k in row))
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in series:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in cols})
    return buf.getvalue()


def run(argv=None):
    """Execute a command and return ``(record, parsed_args)``."""
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    cfg, outputs = COMMANDS[args.command](args)
    payload = _clean({"command": args.command, "config": cfg, "version": __version__,
                      "seed": args.seed, "outputs": outputs})
    timing = {"wall_time_s": round(time.perf_counter() - t0, 6),
              "finished_utc": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    record = {"payload": payload, "timing": timing}
    jsonschema.validate(record, _load_schema())
    return record, args


def dumps_payload(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def main(argv=None):
    try:
        record, args = run(argv)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (tomography.ProjectionError, analysis.FitError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, noise.NoiseError, StateError, tomography.TomographyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.format == "csv":
        text = _to_csv(record["payload"]["outputs"].get("series", []))
    else:
        text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
