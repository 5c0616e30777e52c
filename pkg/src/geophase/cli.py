"""Command-line front end.

Every command writes its data file(s) plus a ``<out>.manifest.json``
recording the command, resolved parameters, seed, package version and
SHA-256 checksums of the outputs.  Re-running with the same manifest
parameters reproduces byte-identical files.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, bell, cyclic, oracle
from . import io as gio
from .errors import CapacityError, InvalidInputError, InvalidInterferometerError
from .states import PureState, random_mixed, random_pure

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_CAPACITY = 0, 1, 2, 3
VERIFY_TOL = 1e-9

DEFAULTS = {
    "verify": {"max_n": 5, "trials": 20, "seed": 0, "rows": None, "out": "verify.json"},
    "scan": {
        "d": [1, 2, 3, 4, 5, 500],
        "theta_min": 0.0,
        "theta_max": math.pi / 2,
        "theta_steps": 201,
        "seed": 0,
        "out": "scan.csv",
    },
    "optimize": {
        "restarts": 200,
        "seed": 0,
        "dim": 3,
        "samples": 100_000,
        "out": "optimize.json",
    },
    "trajectories": {
        "theta": bell.THETA_OPT,
        "d": 3,
        "grid": 101,
        "seed": 0,
        "out": "trajectories.csv",
    },
    "distribution": {"experiment": None, "engine": "closed", "seed": 0, "out": "distribution.csv"},
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="geophase",
        description="Geometric-phase nonlocality in a fixed cyclic interferometer",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", dest="config_file", help="JSON file with parameter values")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")

    sp = sub.add_parser("verify", help="closed form vs permutation-sum cross-checks")
    common(sp)
    sp.add_argument("--max-n", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--rows", help="JSON interferometer rows to validate and check")

    sp = sub.add_parser("scan", help="CHSH value over latitude for several d")
    common(sp)
    sp.add_argument("--d", type=_int_list, help="comma-separated photons per party")
    sp.add_argument("--theta-min", type=float)
    sp.add_argument("--theta-max", type=float)
    sp.add_argument("--theta-steps", type=int)

    sp = sub.add_parser("optimize", help="four-photon CHSH optimization and random scan")
    common(sp)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--samples", type=int)

    sp = sub.add_parser("trajectories", help="export Bloch-sphere trajectories")
    common(sp)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--d", type=int)
    sp.add_argument("--grid", type=int, help="points on each continuous trajectory")

    sp = sub.add_parser("distribution", help="coincidence distribution of an experiment config")
    common(sp)
    sp.add_argument("--engine", choices=["closed", "oracle"])
    sp.add_argument("--experiment", help="experiment config JSON")
    return p


def _resolve(args: argparse.Namespace) -> dict:
    """Flags win over the config file, which wins over built-in defaults."""
    params = dict(DEFAULTS[args.command])
    if args.config_file:
        data = gio.load_json(args.config_file)
        if not isinstance(data, dict):
            raise InvalidInputError("config file must hold a JSON object")
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in params:
                raise InvalidInputError(f"unknown config key {key!r} for {args.command}")
            params[key] = val
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    return params


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(command: str, params: dict, outputs: list[Path]) -> Path:
    out = Path(params["out"])
    manifest = {
        "command": command,
        "parameters": params,
        "seed": params.get("seed"),
        "version": __version__,
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    return gio.write_text(out.with_name(out.name + ".manifest.json"), gio.dumps(manifest))


def _hom_check() -> float:
    """Two photons on a balanced beam splitter: identical and orthogonal inputs."""
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    e0, e1 = PureState([1, 0]), PureState([0, 1])
    same = oracle.output_probability(bs, [e0, e0], (0, 1))
    ortho = oracle.output_probability(bs, [e0, e1], (0, 1))
    return max(abs(same), abs(ortho - 0.5))


def cmd_verify(params: dict) -> int:
    max_n, trials, seed = int(params["max_n"]), int(params["trials"]), int(params["seed"])
    if max_n > oracle.MAX_PHOTONS:
        raise CapacityError(f"max-n {max_n} exceeds the oracle cap {oracle.MAX_PHOTONS}")
    if max_n < 2 or trials < 1:
        raise InvalidInputError("need max-n >= 2 and trials >= 1")
    report = {"tolerance": VERIFY_TOL, "per_n": {}, "ok": True}
    if params.get("rows"):
        try:
            rows = gio.rows_from_json(gio.load_json(params["rows"]))
        except InvalidInterferometerError as exc:
            print(f"rows: invalid interferometer: {exc}")
            report.update(ok=False, rows_error=str(exc))
            _finish_verify(params, report)
            return EXIT_FAIL
        rng = np.random.default_rng(seed)
        states = [random_pure(2, rng) for _ in range(rows.n_inputs)]
        total = math.fsum(oracle.full_distribution(rows, states).values())
        report["rows_total_probability"] = total
        print(f"rows: total probability {total:.15f}")
        if abs(total - 1) > 1e-8:
            report["ok"] = False

    hom = _hom_check()
    report["hom_max_deviation"] = hom
    print(f"HOM limits: max deviation {hom:.3e}")
    if hom > 1e-12:
        report["ok"] = False

    rng = np.random.default_rng(seed)
    for n in range(2, max_n + 1):
        worst = 0.0
        for trial in range(2 * trials):
            mixed = trial >= trials
            states = [random_mixed(2, rng) if mixed else random_pure(2, rng) for _ in range(n)]
            cfg = cyclic.CyclicConfig(n, tuple(rng.uniform(0, 2 * math.pi, n)))
            rows = cyclic.build_cyclic_rows(cfg)
            brute = oracle.full_distribution(rows, states, restrict_to_coincidence=True)
            closed = cyclic.coincidence_distribution(cfg, states)
            dev = max(abs(brute[pat.ports()] - p) for pat, p in closed.items())
            worst = max(worst, dev)
        mass_dev = abs(math.fsum(closed.values()) - cyclic.coincidence_probability_total(n))
        report["per_n"][str(n)] = {"max_deviation": worst, "mass_deviation": mass_dev}
        status = "ok" if worst < VERIFY_TOL else "FAIL"
        print(f"N={n}: worst deviation {worst:.3e} over {2 * trials} draws [{status}]")
        if worst >= VERIFY_TOL or mass_dev > 1e-10:
            report["ok"] = False
    _finish_verify(params, report)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def _finish_verify(params: dict, report: dict) -> None:
    out = gio.write_text(params["out"], gio.dumps(report))
    _write_manifest("verify", params, [out])


SCAN_COLUMNS = [
    "theta", "d",
    "re_v11", "re_v12", "re_v21", "re_v22",
    "phase_g11", "phase_g12", "phase_g21", "phase_g22",
    "i_chsh", "i_zeno",
]


def cmd_scan(params: dict) -> int:
    d_values = [int(d) for d in params["d"]]
    steps = int(params["theta_steps"])
    lo, hi = float(params["theta_min"]), float(params["theta_max"])
    if steps < 1 or not d_values or lo > hi:
        raise InvalidInputError("scan needs theta-steps >= 1, theta-min <= theta-max and some d")
    thetas = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    records = bell.chsh_scan(d_values, thetas)
    out = gio.write_text(params["out"], gio.records_csv(records, SCAN_COLUMNS))
    best = {}
    for rec in records:
        key = str(rec["d"])
        if key not in best or rec["i_chsh"] > best[key]["i_chsh"]:
            best[key] = {"i_chsh": rec["i_chsh"], "theta": rec["theta"]}
    sidecar = {
        "local_bound": 2.0,
        "quantum_bound": 2 * math.sqrt(2),
        "theta_max_violation": bell.THETA_OPT,
        "zeno_limit_at_theta_max_violation": bell.chsh_zeno_limit(bell.THETA_OPT),
        "max_i_chsh_by_d": best,
    }
    side = gio.write_text(Path(params["out"]).with_suffix(".reference.json"), gio.dumps(sidecar))
    for key, val in best.items():
        flag = " (violates CHSH)" if val["i_chsh"] > 2 else ""
        print(f"d={key}: max I = {val['i_chsh']:.6f} at theta = {val['theta']:.4f}{flag}")
    _write_manifest("scan", params, [out, side])
    return EXIT_OK


def cmd_optimize(params: dict) -> int:
    restarts, seed = int(params["restarts"]), int(params["seed"])
    dim, samples = int(params["dim"]), int(params["samples"])
    result = bell.optimize_chsh_d1(restarts, seed)
    scan_max = bell.random_state_scan(dim, samples, seed)
    ok = result.best_value <= 2 + 1e-6 and scan_max <= 2 + 1e-9
    report = {
        "best_value": result.best_value,
        "bloch_vectors": {k: gio.bloch_to_json(v) for k, v in result.vectors.items()},
        "restarts": restarts,
        "seed": seed,
        "random_scan": {"dim": dim, "samples": samples, "max_i_chsh": scan_max},
        "local_bound": 2.0,
        "within_local_bound": ok,
    }
    out = gio.write_text(params["out"], gio.dumps(report))
    print(f"optimized d=1 CHSH: {result.best_value:.12f} ({restarts} restarts)")
    print(f"random scan dim={dim}: max I = {scan_max:.6f} over {samples} draws")
    _write_manifest("optimize", params, [out])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_trajectories(params: dict) -> int:
    theta, d, grid = float(params["theta"]), int(params["d"]), int(params["grid"])
    bell.TrajectoryParams(theta, d)
    if grid < 2:
        raise InvalidInputError("grid needs at least 2 points")
    records = []
    ts = bell.sample_times(d)
    tgrid = np.linspace(0.0, math.pi, grid)
    for name in ("x1", "x2", "y1", "y2"):
        for kind, tvals in (("sampled", ts), ("grid", tgrid), ("midpoint", np.array([math.pi / 2]))):
            pts = bell.trajectory_points(name, theta, tvals)
            start = 1 if kind == "sampled" else 0
            for idx, (t, p) in enumerate(zip(tvals, pts), start=start):
                records.append({"curve": name, "kind": kind, "index": idx, "t": float(t),
                                "x": float(p[0]), "y": float(p[1]), "z": float(p[2])})
    w1, w2 = bell.anchors(theta)
    for name, p in (("w1", w1), ("w2", w2)):
        records.append({"curve": name, "kind": "anchor", "index": 0, "t": 0.0,
                        "x": float(p[0]), "y": float(p[1]), "z": float(p[2])})
    cols = ["curve", "kind", "index", "t", "x", "y", "z"]
    out = gio.write_text(params["out"], gio.records_csv(records, cols))
    print(f"wrote {len(records)} points to {out}")
    _write_manifest("trajectories", params, [out])
    return EXIT_OK


def cmd_distribution(params: dict) -> int:
    if not params.get("experiment"):
        raise InvalidInputError("distribution needs --experiment <config.json>")
    exp = gio.experiment_from_json(gio.load_json(params["experiment"]))
    if params["engine"] == "oracle":
        rows = cyclic.build_cyclic_rows(exp.config)
        dist = oracle.full_distribution(rows, exp.states, restrict_to_coincidence=True)
        text = gio.port_distribution_csv(dist)
        total = math.fsum(dist.values())
    else:
        dist = cyclic.coincidence_distribution(exp.config, exp.states)
        text = gio.distribution_csv(dist)
        total = math.fsum(dist.values())
        if exp.partition is not None and exp.n % 2 == 0:
            merged = cyclic.merged_outcome_distribution(exp.config, exp.states, exp.partition)
            corr = math.fsum(a * b * p for (a, b), p in merged.items())
            print(f"parity correlator <AB> = {corr:.12f}")
    out = gio.write_text(params["out"], text)
    print(f"coincidence mass {total:.15f} (N={exp.n})")
    _write_manifest("distribution", params, [out])
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "trajectories": cmd_trajectories,
    "distribution": cmd_distribution,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        params = _resolve(args)
        return COMMANDS[args.command](params)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvalidInterferometerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
