"""Command-line front end: metrics, sweep, experiment, mesh.

Every file-producing run writes a manifest sidecar <out>.manifest.json
recording the command, resolved parameters (base units), input file
hashes, tool version, and seed.  Outputs are deterministic functions of
the manifest, bit for bit, regardless of thread count.

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
4 I/O failure.  Diagnostics go to stderr as single lines.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from pseudoell import __version__
from pseudoell.chain import load_chain, reduced_arm_model
from pseudoell.ellipsoid import (
    ellipsoid_mesh,
    from_jacobian,
    metric_report,
    write_mesh_obj,
    write_polyline_csv,
)
from pseudoell.errors import NumericalError, ValidationError
from pseudoell.experiment import (
    NoiseModel,
    run_trials,
    standard_start_configs,
    write_summary_json,
    write_trials_csv,
)
from pseudoell.sensitivity import perturbation_sweep, write_sweep_csv

THREADS_ENV = "PSEUDOELL_NUM_THREADS"


def _warn(message: str) -> None:
    print(f"pseudoell: warning: {message}", file=sys.stderr)


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"{name} must be a comma-separated number list: {exc}")
    if not values:
        raise ValidationError(f"{name} is empty")
    return np.array(values)


def _parse_config(args) -> np.ndarray:
    q = _parse_vector(args.q, "--q")
    return np.radians(q) if args.deg else q


def _parse_direction(text: str, dim: int) -> np.ndarray:
    nu = _parse_vector(text, "--nu")
    if nu.shape != (dim,):
        raise ValidationError(
            f"--nu must have {dim} components for this chain, got {nu.shape[0]}"
        )
    if not np.all(np.isfinite(nu)):
        raise ValidationError("--nu has non-finite entries")
    norm = float(np.linalg.norm(nu))
    if norm == 0.0:
        raise ValidationError("--nu must be nonzero")
    if abs(norm - 1.0) > 1e-9:
        _warn(f"--nu normalized from norm {norm!r}")
    return nu / norm


def _load_json_input(path: str, name: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"{name} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{name} file is not valid JSON: {exc}")


def _load_upsilon(path: str | None):
    if path is None:
        return None
    data = _load_json_input(path, "weight-matrix")
    try:
        return np.array(data, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError("weight-matrix file must hold a numeric array of arrays")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(out_path: str, command: str, parameters: dict,
                    input_paths: list, seed: int | None,
                    outputs: list) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "parameters": parameters,
        "inputs": {str(p): _sha256(p) for p in input_paths},
        "outputs": [str(o) for o in outputs],
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if threads < 1:
        raise ValidationError(f"{THREADS_ENV} must be at least 1, got {threads}")
    return threads


def cmd_metrics(args) -> int:
    chain = load_chain(args.chain)
    q = _parse_config(args)
    nu = _parse_direction(args.nu, chain.task_dim)
    upsilon = _load_upsilon(args.upsilon)
    report = metric_report(from_jacobian(chain.jacobian(q), upsilon), nu)
    text = json.dumps(report, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    inputs = [args.chain] + ([args.upsilon] if args.upsilon else [])
    _write_manifest(args.out, "metrics", {
        "chain": args.chain,
        "q_rad": [float(x) for x in q],
        "nu": [float(x) for x in nu],
        "upsilon": args.upsilon,
    }, inputs, None, [args.out])
    return 0


def cmd_sweep(args) -> int:
    chain = load_chain(args.chain)
    q = _parse_config(args)
    upsilon = _load_upsilon(args.upsilon)
    if args.range_deg < 0.0 or not math.isfinite(args.range_deg):
        raise ValidationError(f"--range-deg must be non-negative, got {args.range_deg}")
    dir_samples = args.dir_samples
    if dir_samples is None:
        dir_samples = 720 if chain.task_dim == 2 else 1024
    grid = perturbation_sweep(
        chain, q, range_rad=math.radians(args.range_deg), grid_n=args.grid_n,
        dir_samples=dir_samples, weight=upsilon, threads=_threads_from_env())
    write_sweep_csv(grid, args.out)
    inputs = [args.chain] + ([args.upsilon] if args.upsilon else [])
    _write_manifest(args.out, "sweep", {
        "chain": args.chain,
        "q_rad": [float(x) for x in q],
        "range_rad": math.radians(args.range_deg),
        "grid_n": args.grid_n,
        "dir_samples": dir_samples,
        "upsilon": args.upsilon,
    }, inputs, None, [args.out])
    return 0


def _load_start_configs(source: str):
    if source == "standard":
        return None, []
    data = _load_json_input(source, "config-set")
    if not isinstance(data, list) or not data:
        raise ValidationError("config-set file must hold a non-empty JSON list")
    try:
        configs = [np.array(row, dtype=np.float64) for row in data]
    except (TypeError, ValueError):
        raise ValidationError("config-set entries must be numeric lists")
    return configs, [source]


def cmd_experiment(args) -> int:
    chain = reduced_arm_model(args.upper_arm_m, args.forearm_m)
    configs, input_paths = _load_start_configs(args.configs)
    if args.sigma_mm < 0.0 or not math.isfinite(args.sigma_mm):
        raise ValidationError(f"--sigma-mm must be non-negative, got {args.sigma_mm}")
    if args.displacement_cm <= 0.0 or not math.isfinite(args.displacement_cm):
        raise ValidationError(
            f"--displacement-cm must be positive, got {args.displacement_cm}"
        )
    noise = NoiseModel(sigma=args.sigma_mm / 1000.0, seed=args.seed)
    trials, summary = run_trials(
        chain, configs, noise, displacement=args.displacement_cm / 100.0,
        n_draws=args.draws, n_bootstrap=args.bootstrap)
    write_trials_csv(trials, args.out)
    summary_path = f"{args.out}.summary.json"
    write_summary_json(summary, summary_path)
    resolved_configs = configs if configs is not None else standard_start_configs()
    _write_manifest(args.out, "experiment", {
        "configs": args.configs,
        "configs_rad": [[float(x) for x in q] for q in resolved_configs],
        "sigma_m": args.sigma_mm / 1000.0,
        "draws": args.draws,
        "seed": args.seed,
        "displacement_m": args.displacement_cm / 100.0,
        "bootstrap": args.bootstrap,
        "upper_arm_m": args.upper_arm_m,
        "forearm_m": args.forearm_m,
    }, input_paths, args.seed, [args.out, summary_path])
    return 0


def cmd_mesh(args) -> int:
    chain = load_chain(args.chain)
    q = _parse_config(args)
    ell = from_jacobian(chain.jacobian(q))
    mesh = ellipsoid_mesh(ell, pseudo=args.pseudo, samples=args.samples)
    if chain.task_dim == 3:
        write_mesh_obj(mesh, args.out)
    else:
        write_polyline_csv(mesh, args.out)
    _write_manifest(args.out, "mesh", {
        "chain": args.chain,
        "q_rad": [float(x) for x in q],
        "pseudo": bool(args.pseudo),
        "samples": args.samples,
    }, [args.chain], None, [args.out])
    return 0


def _add_chain_config_options(parser, out_required: bool) -> None:
    parser.add_argument("--chain", required=True,
                        help="chain description JSON file")
    parser.add_argument("--q", required=True,
                        help="joint configuration, comma-separated")
    parser.add_argument("--deg", action="store_true",
                        help="interpret --q in degrees (default radians)")
    parser.add_argument("--out", required=out_required,
                        default=None, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudoell",
        description="Directional manipulability metrics for articulated chains",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics",
                       help="directional radius and pseudo radius at a pose")
    _add_chain_config_options(p, out_required=False)
    p.add_argument("--nu", required=True,
                   help="task-space direction, comma-separated (normalized)")
    p.add_argument("--upsilon", default=None,
                   help="joint-space weight matrix JSON file (array of arrays)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep",
                       help="worst-case metric deviation over joint-angle errors")
    _add_chain_config_options(p, out_required=True)
    p.add_argument("--range-deg", type=float, default=5.0,
                   help="half-range of the perturbation grid in degrees")
    p.add_argument("--grid-n", type=int, default=21,
                   help="grid points per axis (odd, >= 3)")
    p.add_argument("--dir-samples", type=int, default=None,
                   help="direction samples (default 720 planar, 1024 spatial)")
    p.add_argument("--upsilon", default=None,
                   help="joint-space weight matrix JSON file (array of arrays)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("experiment",
                       help="noisy-keypoint prediction study on the arm model")
    p.add_argument("--configs", default="standard",
                   help='"standard" or a JSON file with start configurations (rad)')
    p.add_argument("--sigma-mm", type=float, default=10.0,
                   help="keypoint noise standard deviation in millimeters")
    p.add_argument("--draws", type=int, default=1000,
                   help="noise draws per configuration and direction")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--displacement-cm", type=float, default=10.0,
                   help="task-space path length in centimeters")
    p.add_argument("--bootstrap", type=int, default=2000,
                   help="bootstrap resamples for confidence intervals")
    p.add_argument("--upper-arm-m", type=float, default=0.30,
                   help="upper-arm segment length in meters")
    p.add_argument("--forearm-m", type=float, default=0.28,
                   help="forearm segment length in meters")
    p.add_argument("--out", required=True,
                   help="trial CSV path; summary goes to <out>.summary.json")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("mesh",
                       help="sample the metric surface to OBJ (3-d) or CSV (2-d)")
    _add_chain_config_options(p, out_required=True)
    p.add_argument("--pseudo", action="store_true",
                   help="mesh the pseudo-radius surface instead of the ellipsoid")
    p.add_argument("--samples", type=int, default=64,
                   help="angular samples (>= 16)")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"pseudoell: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"pseudoell: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"pseudoell: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
