"""Experiment runner: one JSON config in, CSV/JSON/gnuplot artifacts out.

    memwave <subcommand> [--config FILE] [--out DIR] [--seed U64] [--threads N]

Subcommands: spectrum, modes, solution, ingham, control, simulate,
verify-all.  Without --config the built-in flagship configuration is used;
a config file needs at least "params", "N", and "T".  Validation reports
every violated precondition at once.  All numbers are printed with 17
significant digits and every artifact carries the configuration hash, so
identical config + seed reproduces outputs byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np
import threadpoolctl

from memwave import verify
from memwave.core import Parameters
from memwave.fd import FDGrid, boundary_trace_fd, modal_fields, \
    simulate_controlled, simulate_homogeneous
from memwave.hum import TargetState, solve_controls, verify_control
from memwave.ingham import frame_ratio_experiment, standard_data_builder
from memwave.modes import ModeData, mode_coefficients
from memwave.series import boundary_trace, build_mode_set, eval_solution
from memwave.spectrum import quintic_residuals, string_spectrum

SCHEMA_VERSION = 1

SUBCOMMANDS = ("spectrum", "modes", "solution", "ingham", "control",
               "simulate", "verify-all")

_PARAM_KEYS = ("beta", "eta", "a", "b")
_TARGET_KEYS = ("alpha1", "rho1", "alpha2", "rho2")
_KNOWN_KEYS = {"params", "N", "T", "seed", "nx", "num_samples", "trials",
               "decay", "data", "target", "snapshot_times", "ratio_sweep",
               "out_dir"}

DEFAULT_CONFIG = {
    "params": {"beta": 0.3, "eta": 1.0, "a": 0.1, "b": 0.1},
    "N": 12,
    "T": 8.0,
    "seed": 20260819,
}


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) \
        and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate_config(cfg: dict) -> list[str]:
    """Every violated precondition, as one message per violation."""
    bad = []
    for key in sorted(set(cfg) - _KNOWN_KEYS):
        bad.append(f"{key}: unknown key")
    for key in ("params", "N", "T"):
        if key not in cfg:
            bad.append(f"{key}: missing")

    p = cfg.get("params")
    if p is not None:
        if not isinstance(p, dict):
            bad.append("params: must be an object with beta, eta, a, b")
        else:
            for k in _PARAM_KEYS:
                if k not in p:
                    bad.append(f"params.{k}: missing")
                elif not _is_num(p[k]):
                    bad.append(f"params.{k}: must be a finite number")
            for k in sorted(set(p) - set(_PARAM_KEYS)):
                bad.append(f"params.{k}: unknown key")
            if all(_is_num(p.get(k)) for k in _PARAM_KEYS):
                if not 0 < p["beta"] < p["eta"]:
                    bad.append("params: need 0 < beta < eta")
                if p["a"] == 0:
                    bad.append("params.a: must be nonzero")

    if "N" in cfg and not (_is_int(cfg["N"]) and cfg["N"] >= 1):
        bad.append("N: must be an integer >= 1")
    if "T" in cfg and not (_is_num(cfg["T"]) and cfg["T"] > 0):
        bad.append("T: must be a positive number")
    if "seed" in cfg and not (_is_int(cfg["seed"]) and cfg["seed"] >= 0):
        bad.append("seed: must be a nonnegative integer")
    if "nx" in cfg and not (_is_int(cfg["nx"]) and cfg["nx"] >= 16):
        bad.append("nx: must be an integer >= 16")
    if "num_samples" in cfg and not (_is_int(cfg["num_samples"])
                                     and cfg["num_samples"] >= 65
                                     and cfg["num_samples"] % 2 == 1):
        bad.append("num_samples: must be an odd integer >= 65")
    if "trials" in cfg and not (_is_int(cfg["trials"]) and cfg["trials"] >= 1):
        bad.append("trials: must be an integer >= 1")
    if "decay" in cfg and not (_is_num(cfg["decay"]) and cfg["decay"] >= 0):
        bad.append("decay: must be a nonnegative number")
    if "out_dir" in cfg and not (isinstance(cfg["out_dir"], str)
                                 and cfg["out_dir"]):
        bad.append("out_dir: must be a nonempty string")

    data = cfg.get("data")
    if data is not None:
        if not (isinstance(data, list) and data
                and all(isinstance(row, list) and len(row) == 4
                        and all(_is_num(v) for v in row) for row in data)):
            bad.append("data: must be a nonempty list of "
                       "[alpha1, rho1, alpha2, rho2] rows")

    target = cfg.get("target")
    if target is not None:
        if not isinstance(target, dict) or set(target) != set(_TARGET_KEYS):
            bad.append(f"target: must be an object with exactly {_TARGET_KEYS}")
        else:
            lens = set()
            for k in _TARGET_KEYS:
                v = target[k]
                if not (isinstance(v, list) and all(_is_num(x) for x in v)):
                    bad.append(f"target.{k}: must be a list of finite numbers")
                else:
                    lens.add(len(v))
            if len(lens) > 1:
                bad.append("target: coefficient lists must share one length")
            elif lens and _is_int(cfg.get("N")) and lens != {cfg["N"]}:
                bad.append("target: coefficient lists must have length N")

    times = cfg.get("snapshot_times")
    if times is not None:
        if not (isinstance(times, list) and times
                and all(_is_num(v) for v in times)):
            bad.append("snapshot_times: must be a nonempty list of numbers")
        elif any(b < a for a, b in zip(times, times[1:])):
            bad.append("snapshot_times: must be nondecreasing")
        elif _is_num(cfg.get("T")) and (times[0] < 0 or times[-1] > cfg["T"]):
            bad.append("snapshot_times: must lie within [0, T]")

    sweep = cfg.get("ratio_sweep")
    if sweep is not None:
        if not (isinstance(sweep, list) and sweep
                and all(_is_num(v) and v > 0 for v in sweep)
                and all(b > a for a, b in zip(sweep, sweep[1:]))):
            bad.append("ratio_sweep: must be a strictly increasing list of "
                       "positive numbers")
    return bad


def effective_config(cfg: dict) -> dict:
    """Config with every optional field resolved; input must be valid."""
    out = {k: cfg[k] for k in sorted(cfg)}
    N, T = out["N"], float(out["T"])
    out["T"] = T
    out.setdefault("seed", 20260819)
    out.setdefault("nx", 800)
    out.setdefault("num_samples", 4097)
    out.setdefault("trials", 50)
    out.setdefault("decay", 1.0)
    out.setdefault("data", [[1.0, 0.0, 0.0, 0.0]])
    out.setdefault("target", {
        "alpha1": [1.0] + [0.0] * (N - 1),
        "rho1": [0.0] * N, "alpha2": [0.0] * N, "rho2": [0.0] * N})
    out.setdefault("snapshot_times", [0.25 * k * T for k in range(5)])
    out.setdefault("ratio_sweep", [0.25 * T, 0.5 * T, 0.75 * T, T, 1.25 * T])
    out.setdefault("out_dir", "memwave-out")
    return out


def config_hash(cfg: dict) -> str:
    """Hash of the scientific content; the output location does not count."""
    canon = json.dumps({k: v for k, v in cfg.items() if k != "out_dir"},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _params(cfg: dict) -> Parameters:
    p = cfg["params"]
    return Parameters(beta=p["beta"], eta=p["eta"], a=p["a"], b=p["b"])


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


class _Emitter:
    """Serialized artifact writing with the config hash stamped on top."""

    def __init__(self, out_dir: Path, hash_: str):
        self.out_dir = out_dir
        self.hash = hash_
        self.written: list[Path] = []

    def _note(self, path: Path):
        self.written.append(path)
        print(f"wrote {path}")

    def csv(self, name: str, columns: list[str], rows):
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# config {self.hash}", ",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        self._note(path)

    def json(self, name: str, obj: dict):
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"schema_version": SCHEMA_VERSION, "config_hash": self.hash}
        payload.update(obj)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self._note(path)

    def plot(self, name: str, columns: str, rows):
        path = self.out_dir / "plots" / name
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# config {self.hash}", f"# columns: {columns}"]
        lines += [" ".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        self._note(path)


def run_spectrum(cfg: dict, em: _Emitter):
    params = _params(cfg)
    spectra = string_spectrum(params, cfg["N"])
    rows = []
    loci = []
    for ms in spectra:
        res = quintic_residuals(params, ms)
        rows.append((ms.n, ms.lam, ms.r, ms.omega.real, ms.omega.imag,
                     ms.zeta.real, ms.zeta.imag, res[0], res[1], res[2]))
        for root in (complex(ms.r), 1j * ms.omega, -1j * ms.omega.conjugate(),
                     1j * ms.zeta, -1j * ms.zeta.conjugate()):
            loci.append((root.real, root.imag, ms.n))
    em.csv("spectrum.csv",
           ["n", "lambda", "r", "re_omega", "im_omega", "re_zeta", "im_zeta",
            "residual_r", "residual_omega", "residual_zeta"], rows)
    em.plot("spectra_loci.dat", "re_root im_root mode", loci)


def run_modes(cfg: dict, em: _Emitter):
    params = _params(cfg)
    data = [ModeData(*row) for row in cfg["data"]]
    spectra = string_spectrum(params, len(data))
    rows = []
    for sp, d in zip(spectra, data):
        co = mode_coefficients(params, sp, d)
        rows.append((sp.n, co.R, co.C.real, co.C.imag, co.D.real, co.D.imag,
                     co.c.real, co.c.imag, co.d.real, co.d.imag, co.E, co.cond))
    em.csv("modes.csv",
           ["n", "R", "re_C", "im_C", "re_D", "im_D", "re_c", "im_c",
            "re_d", "im_d", "E", "vandermonde_condition"], rows)


def run_solution(cfg: dict, em: _Emitter):
    params = _params(cfg)
    T = cfg["T"]
    ms = build_mode_set(params, [ModeData(*row) for row in cfg["data"]])
    x = np.linspace(0.0, np.pi, cfg["nx"] + 2)
    snap_rows = []
    for t in cfg["snapshot_times"]:
        u1, u2 = eval_solution(ms, float(t), x)
        snap_rows += [(t, xi, v1, v2) for xi, v1, v2 in zip(x, u1, u2)]
    em.csv("solution_snapshots.csv", ["t", "x", "u1", "u2"], snap_rows)
    t_grid = np.linspace(0.0, T, cfg["num_samples"])
    z1, z2 = boundary_trace(ms, t_grid)
    em.csv("solution_trace.csv", ["t", "z1x", "z2x"],
           zip(t_grid, z1.values, z2.values))


def run_ingham(cfg: dict, em: _Emitter):
    params = _params(cfg)
    builder = standard_data_builder(cfg["N"], decay=cfg["decay"])
    report, ratios = frame_ratio_experiment(
        params, builder, T=cfg["T"], trials=cfg["trials"], seed=cfg["seed"],
        num_samples=cfg["num_samples"])
    em.json("ingham_report.json", {
        "T": report.T, "gamma": report.gamma, "alpha": report.alpha,
        "threshold_gamma4alpha": report.threshold_gamma4alpha,
        "threshold_gammaonly": report.threshold_gammaonly,
        "lower_ratio": report.lower_ratio, "upper_ratio": report.upper_ratio,
        "trials": report.trials, "seed": report.seed})
    em.csv("ingham_trials.csv", ["trial", "ratio"], enumerate(ratios))
    sweep_rows = []
    for T in cfg["ratio_sweep"]:
        rpt, _ = frame_ratio_experiment(
            params, builder, T=float(T), trials=cfg["trials"],
            seed=cfg["seed"], num_samples=cfg["num_samples"])
        sweep_rows.append((T, rpt.lower_ratio, rpt.upper_ratio))
    em.plot("ratio_vs_T.dat", "T lower_ratio upper_ratio", sweep_rows)


def run_control(cfg: dict, em: _Emitter):
    params = _params(cfg)
    T, N = cfg["T"], cfg["N"]
    tgt = cfg["target"]
    target = TargetState(*(np.array(tgt[k], dtype=float) for k in _TARGET_KEYS))
    controls, gram = solve_controls(params, target, T, N=N,
                                    num_samples=cfg["num_samples"])
    t_grid = controls.g1.grid
    em.csv("controls.csv", ["t", "g1", "g2"],
           zip(t_grid, controls.g1.values, controls.g2.values))
    grid = FDGrid.for_horizon(cfg["nx"], T)
    rep = verify_control(params, controls, target, T, grid)
    em.json("control_report.json", {
        "condition_estimate": gram.condition_estimate,
        "solver": gram.method,
        "errors": {k: rep[k] for k in
                   ("err_u1", "err_u2", "err_v1", "err_v2", "max_error")},
        "target_norm": rep["target_norm"]})
    em.plot("control_waveform.dat", "t g1 g2",
            zip(t_grid, controls.g1.values, controls.g2.values))
    hist = simulate_controlled(params, controls.g1, controls.g2, grid)
    t1, _, t2, _ = modal_fields(target.as_mode_data(), grid.x)
    em.plot("final_state.dat", "x u1 u1_target u2 u2_target",
            zip(grid.x, hist.u1[-1], t1, hist.u2[-1], t2))


def run_simulate(cfg: dict, em: _Emitter):
    params = _params(cfg)
    grid = FDGrid.for_horizon(cfg["nx"], cfg["T"])
    hist = simulate_homogeneous(params, [ModeData(*row) for row in cfg["data"]],
                                grid)
    snap_rows = []
    for t in cfg["snapshot_times"]:
        k = int(round(float(t) / grid.dt))
        tk = grid.t[k]
        snap_rows += [(tk, xi, v1, v2) for xi, v1, v2 in
                      zip(grid.x, hist.u1[k], hist.u2[k])]
    em.csv("simulate_snapshots.csv", ["t", "x", "u1", "u2"], snap_rows)
    z1, z2 = boundary_trace_fd(hist)
    em.csv("simulate_trace.csv", ["t", "z1x", "z2x"],
           zip(grid.t, z1.values, z2.values))


def run_verify_all(cfg: dict, em: _Emitter) -> bool:
    run_spectrum(cfg, em)
    run_modes(cfg, em)
    run_ingham(cfg, em)
    run_control(cfg, em)
    results = verify.run_all(_params(cfg))
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:26s} "
              f"{r.seconds:7.2f}s  {r.detail}")
    em.json("verify_summary.json", {
        "all_passed": all(r.passed for r in results),
        "criteria": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                     for r in results]})
    return all(r.passed for r in results)


_RUNNERS = {
    "spectrum": run_spectrum,
    "modes": run_modes,
    "solution": run_solution,
    "ingham": run_ingham,
    "control": run_control,
    "simulate": run_simulate,
}


def _error_json(kind: str, **fields) -> int:
    print(json.dumps({"error": kind, **fields}, sort_keys=True))
    return 2 if kind == "invalid configuration" else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="memwave",
        description="Spectral, observability, and control experiments for "
                    "the coupled memory-wave system on (0, pi).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None,
                        help="JSON experiment file (default: built-in flagship)")
        sp.add_argument("--out", type=Path, default=None,
                        help="output directory (default: config out_dir)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--threads", type=int, default=None,
                        help="cap the linear-algebra thread pools")
    args = parser.parse_args(argv)

    if args.config is None:
        raw = dict(DEFAULT_CONFIG)
    else:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            return _error_json("invalid configuration",
                               violations=[f"config file: {e}"])
        if not isinstance(raw, dict):
            return _error_json("invalid configuration",
                               violations=["config file: must hold a JSON object"])
    if args.seed is not None:
        raw["seed"] = args.seed

    violations = validate_config(raw)
    if violations:
        return _error_json("invalid configuration", violations=violations)
    cfg = effective_config(raw)
    if args.out is not None:
        cfg["out_dir"] = str(args.out)

    em = _Emitter(Path(cfg["out_dir"]), config_hash(cfg))
    limit = args.threads if args.threads and args.threads >= 1 else None
    try:
        with threadpoolctl.threadpool_limits(limits=limit):
            if args.command == "verify-all":
                ok = run_verify_all(cfg, em)
                return 0 if ok else 1
            _RUNNERS[args.command](cfg, em)
    except (ValueError, ZeroDivisionError, FloatingPointError,
            np.linalg.LinAlgError) as e:
        return _error_json("runtime failure", message=str(e))
    return 0


if __name__ == "__main__":
    sys.exit(main())
