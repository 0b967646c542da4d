"""Command-line interface.

Every subcommand resolves its parameters, writes its outputs into one
directory, and drops a manifest.json recording the fully resolved
parameter set, the kernel backend, and a sha256 per output file.  The
``replay`` subcommand re-executes a manifest into a fresh directory and
verifies the outputs byte for byte.

Exit codes: 0 success, 2 domain error (bad inputs), 3 numerical failure
(divergent Fisher terms, poles), 1 replay mismatch.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import twinfock
from twinfock import _kernels as kernels
from twinfock import experiment as xp
from twinfock import fisher
from twinfock.evolution import hwp_interferometer  # noqa: F401  (public surface)
from twinfock.fock import build_basis
from twinfock.measurement import (
    coarse_measurement,
    noisy_optimal_measurement,
    outcome_probabilities,
    standard_measurement,
)
from twinfock.probes import mixed_probe, pure_probe

MEASUREMENTS = {
    "standard": standard_measurement,
    "coarse": coarse_measurement,
    "noisy-optimal": noisy_optimal_measurement,
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: Path, header: list, rows, comment: str | None = None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


# ------------------------------------------------------------------ runners
# Each runner takes fully resolved JSON-typed params plus an output
# directory and returns the list of files it wrote (relative names).


def run_qfi(params: dict, outdir: Path) -> list:
    n = params["n"]
    indist = params["indist"]
    noise = params["noise"]
    method = params["method"]
    basis = build_basis(n)
    results = {}
    if method in ("formula", "all"):
        results["formula"] = fisher.qfi_formula_mixed(n, indist, noise)
    if method in ("variance", "all"):
        pure = fisher.qfi_pure(pure_probe(basis, indist)).value
        results["variance"] = pure * fisher.mixture_reduction_factor(n, noise)
    if method in ("spectral", "all"):
        results["spectral"] = fisher.qfi_mixed(mixed_probe(basis, indist, noise)).value
    for name, value in results.items():
        print(f"{name:<9} {_fmt(value)}")
    spread = max(results.values()) - min(results.values())
    if len(results) > 1:
        print(f"max discrepancy {spread:.3e}")
    _write_json(
        outdir / "qfi.json",
        {"params": params, "results": results, "max_discrepancy": spread},
    )
    return ["qfi.json"]


def run_thresholds(params: dict, outdir: Path) -> list:
    t = fisher.thresholds(params["n"], params["noise"])
    print(f"i_min   {_fmt(t.i_min)}")
    print(f"eps_max {_fmt(t.eps_max)}")
    _write_json(
        outdir / "thresholds.json",
        {"params": params, "i_min": t.i_min, "eps_max": t.eps_max},
    )
    return ["thresholds.json"]


def run_probs(params: dict, outdir: Path) -> list:
    basis = build_basis(1)
    meas = MEASUREMENTS[params["measurement"]](basis)
    probe = pure_probe(basis, params["indist"])
    table = outcome_probabilities(probe, meas, params["phi"], params["noise"])
    rows = list(zip(table.labels, table.probabilities, table.derivatives))
    width = max(len(lab) for lab in table.labels)
    for lab, p, dp in rows:
        print(f"{lab:<{width}}  p={_fmt(float(p)):<18} dp={_fmt(float(dp))}")
    _write_csv(
        outdir / "probs.csv",
        ["outcome", "probability", "derivative"],
        [(lab, float(p), float(dp)) for lab, p, dp in rows],
        comment="outcome probabilities and d/dphi at "
        f"phi={_fmt(params['phi'])}, indist={_fmt(params['indist'])}, "
        f"noise={_fmt(params['noise'])}",
    )
    return ["probs.csv"]


def _sweep_formula(measurement: str, indist: float, noise: float, grid: np.ndarray):
    if measurement == "standard":
        if noise == 0.0:
            return np.full(grid.size, fisher.qfi_formula_pure(1, indist))
        return fisher.noisy_fi_values(indist, noise, grid)
    if measurement == "coarse" and noise == 0.0:
        return fisher.coarse_fi_values(indist, grid)
    if measurement == "noisy-optimal" and indist == 1.0:
        return fisher.mprime_fi_values(noise, grid)
    return np.full(grid.size, np.nan)


def run_fi_sweep(params: dict, outdir: Path) -> list:
    basis = build_basis(1)
    meas = MEASUREMENTS[params["measurement"]](basis)
    grid = np.linspace(
        params["phi_start"], params["phi_stop"], params["phi_points"], endpoint=False
    )
    rows = []
    for indist in params["indist"]:
        curve = fisher.fi_curve(
            pure_probe(basis, indist),
            meas,
            grid,
            noise=params["noise"],
            strategy="limit",
            on_divergent="nan",
        )
        formula = _sweep_formula(params["measurement"], indist, params["noise"], grid)
        for k in range(grid.size):
            value = curve.values[k]
            rows.append(
                (
                    indist,
                    float(grid[k]),
                    None if math.isnan(value) else float(value),
                    None if math.isnan(formula[k]) else float(formula[k]),
                    curve.statuses[k],
                )
            )
    _write_csv(
        outdir / "fi_sweep.csv",
        ["indistinguishability", "phi", "fi_numeric", "fi_formula", "status"],
        rows,
        comment="classical Fisher information vs phase; fi_formula filled when "
        f"a closed form exists; measurement={params['measurement']}, "
        f"noise={_fmt(params['noise'])}; status: ok|limit|dropped|divergent",
    )
    print(f"wrote {len(rows)} rows to {outdir / 'fi_sweep.csv'}")
    return ["fi_sweep.csv"]


def run_estimate_noise(params: dict, outdir: Path) -> list:
    est = xp.estimate_noise(params["target"])
    print(f"epsilon     {_fmt(est.epsilon)}")
    print(f"achieved_fi {_fmt(est.achieved_fi)}")
    print(f"iterations  {est.iterations}")
    _write_json(
        outdir / "estimate_noise.json",
        {
            "params": params,
            "epsilon": est.epsilon,
            "achieved_fi": est.achieved_fi,
            "iterations": est.iterations,
            "bracket": list(est.bracket),
        },
    )
    return ["estimate_noise.json"]


def run_experiment(params: dict, outdir: Path) -> list:
    config = xp.ExperimentConfig.from_dict(params["config"])
    replicas = params["replicas"]
    records = xp.simulate_counts(config)
    labels = xp.noisy_standard_curves(0.0, 0.0, np.array([0.0]))[0]
    _write_csv(
        outdir / "counts.csv",
        ["indistinguishability", "phi"] + list(labels),
        [
            (r.indistinguishability, r.phi, *[r.counts[lab] for lab in labels])
            for r in records
        ],
        comment="Poisson coincidence counts per outcome and setting, "
        f"mean_total_counts={_fmt(config.mean_total_counts)}, "
        f"noise={_fmt(config.noise)}, seed={config.seed}",
    )

    bundles = xp.fit_records(records, config)
    fit_rows = []
    for i in config.i_values:
        bundle = bundles[i]
        for lab, fit in bundle.fits.items():
            fit_rows.append(
                (
                    i,
                    lab,
                    "fitted",
                    fit.scale,
                    fit.offset,
                    fit.residual,
                    float(fit.covariance[0, 0]),
                    float(fit.covariance[1, 1]),
                    float(fit.covariance[0, 1]),
                    int(fit.scale_warning),
                )
            )
        for lab, level in bundle.background.items():
            fit_rows.append((i, lab, "background", None, level, None, None, None, None, 0))
    _write_csv(
        outdir / "fits.csv",
        [
            "indistinguishability",
            "outcome",
            "kind",
            "scale",
            "offset",
            "residual_ss",
            "scale_var",
            "offset_var",
            "scale_offset_cov",
            "scale_warning",
        ],
        fit_rows,
        comment="per-outcome linear fits rate ~ scale*theory + offset; "
        "background rows hold the mean rate of phase-insensitive outcomes",
    )

    curve_rows = []
    for i in config.i_values:
        curve = xp.fi_from_fit(bundles[i])
        for k in range(curve.phis.size):
            value = curve.values[k]
            curve_rows.append(
                (
                    i,
                    float(curve.phis[k]),
                    None if math.isnan(value) else float(value),
                    curve.statuses[k],
                )
            )
    _write_csv(
        outdir / "fi_curves.csv",
        ["indistinguishability", "phi", "fi_fitted", "status"],
        curve_rows,
        comment="Fisher information of the fitted outcome distributions",
    )

    rows = xp.fi_summary_table(config, replicas)
    _write_csv(
        outdir / "fi_summary.csv",
        [
            "indistinguishability",
            "fitted_max_fi",
            "fitted_max_phi",
            "error_bar",
            "noisy_formula_max",
            "qfi_mixed",
            "qfi_pure",
        ],
        [
            (
                row.indistinguishability,
                row.fitted_max_fi,
                row.fitted_max_phi,
                row.error_bar,
                row.noisy_formula_max,
                row.qfi_mixed,
                row.qfi_pure,
            )
            for row in rows
        ],
        comment=f"fitted-FI maxima with Monte-Carlo error bars ({replicas} replicas) "
        "against the closed-form references",
    )
    for row in rows:
        print(
            f"i={_fmt(row.indistinguishability):<6} "
            f"fitted_max={_fmt(row.fitted_max_fi):<16} "
            f"error_bar={_fmt(row.error_bar):<16} "
            f"formula_max={_fmt(row.noisy_formula_max)}"
        )
    return ["counts.csv", "fits.csv", "fi_curves.csv", "fi_summary.csv"]


RUNNERS = {
    "qfi": run_qfi,
    "thresholds": run_thresholds,
    "probs": run_probs,
    "fi-sweep": run_fi_sweep,
    "estimate-noise": run_estimate_noise,
    "experiment": run_experiment,
}


def _write_manifest(outdir: Path, command: str, params: dict, outputs: list, seed):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "version": twinfock.__version__,
        "kernel_backend": kernels.backend(),
        "outputs": [
            {
                "path": name,
                "sha256": _sha256(outdir / name),
                "bytes": (outdir / name).stat().st_size,
            }
            for name in outputs
        ],
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(outdir / "manifest.json", manifest)


def run_replay(manifest_path: Path, outdir: Path | None) -> int:
    manifest = json.loads(Path(manifest_path).read_text())
    command = manifest["command"]
    if command not in RUNNERS:
        raise ValueError(f"manifest names unknown command {command!r}")
    if outdir is None:
        outdir = Path(manifest_path).resolve().parent / "replay"
    outdir.mkdir(parents=True, exist_ok=True)
    RUNNERS[command](manifest["parameters"], outdir)
    mismatches = 0
    for entry in manifest["outputs"]:
        fresh = outdir / entry["path"]
        ok = fresh.is_file() and _sha256(fresh) == entry["sha256"]
        print(f"{entry['path']}: {'OK' if ok else 'MISMATCH'}")
        mismatches += 0 if ok else 1
    if mismatches:
        print(f"{mismatches} output(s) differ", file=sys.stderr)
        return 1
    print("replay matches the recorded outputs")
    return 0


# -------------------------------------------------------------------- parser

def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else float(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinfock",
        description="Phase-estimation precision of two-port interferometers "
        "fed with partially distinguishable photon pairs",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {twinfock.__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--outdir", help="output directory (default: "
                       "$TWINFOCK_OUTDIR/<command> or twinfock-runs/<command>)")

    p = sub.add_parser("qfi", help="quantum Fisher information of a probe")
    p.add_argument("--n", type=int, default=1, help="photon pairs")
    p.add_argument("--indist", type=float, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument(
        "--method",
        choices=["formula", "variance", "spectral", "all"],
        default="formula",
    )
    common(p)

    p = sub.add_parser("thresholds", help="indistinguishability/noise thresholds")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--noise", type=float, required=True)
    common(p)

    p = sub.add_parser("probs", help="outcome probabilities at one phase")
    p.add_argument("--indist", type=float, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--measurement", choices=sorted(MEASUREMENTS), default="standard")
    p.add_argument("--degrees", action="store_true", help="phi given in degrees")
    common(p)

    p = sub.add_parser("fi-sweep", help="Fisher information over a phase grid")
    p.add_argument("--indist", type=str, required=True,
                   help="comma-separated indistinguishability values")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--measurement", choices=sorted(MEASUREMENTS), default="standard")
    p.add_argument("--phi-start", type=float, default=0.0)
    p.add_argument("--phi-stop", type=float, default=math.pi)
    p.add_argument("--phi-points", type=int, default=200)
    p.add_argument("--degrees", action="store_true",
                   help="phi-start/phi-stop given in degrees")
    common(p)

    p = sub.add_parser("estimate-noise", help="invert the max-FI at zero "
                       "indistinguishability into a noise level")
    p.add_argument("--target", type=float, required=True)
    common(p)

    p = sub.add_parser("experiment", help="simulate and analyze a counting run")
    p.add_argument("--config", help="JSON or key=value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--noise", type=float, help="override the config noise")
    p.add_argument("--counts", type=float, help="override mean_total_counts")
    p.add_argument("--replicas", type=int, default=100)
    common(p)

    p = sub.add_parser("replay", help="re-run a manifest and verify outputs")
    p.add_argument("manifest")
    p.add_argument("--outdir")

    return parser


def _resolve_outdir(command: str, outdir_arg) -> Path:
    if outdir_arg:
        out = Path(outdir_arg)
    else:
        root = os.environ.get("TWINFOCK_OUTDIR") or "twinfock-runs"
        out = Path(root) / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _extract_params(args) -> tuple[dict, object]:
    """Resolve CLI args into the JSON-typed parameter dict recorded in the
    manifest (so replay needs no external files), plus the seed if any."""
    cmd = args.command
    if cmd == "qfi":
        return {
            "n": args.n,
            "indist": args.indist,
            "noise": args.noise,
            "method": args.method,
        }, None
    if cmd == "thresholds":
        return {"n": args.n, "noise": args.noise}, None
    if cmd == "probs":
        return {
            "indist": args.indist,
            "noise": args.noise,
            "phi": _angle(args.phi, args.degrees),
            "measurement": args.measurement,
        }, None
    if cmd == "fi-sweep":
        values = [float(v) for v in args.indist.split(",") if v.strip()]
        if not values:
            raise ValueError("no indistinguishability values given")
        if args.phi_points < 2:
            raise ValueError("need at least 2 phase points")
        return {
            "indist": values,
            "noise": args.noise,
            "measurement": args.measurement,
            "phi_start": _angle(args.phi_start, args.degrees),
            "phi_stop": _angle(args.phi_stop, args.degrees),
            "phi_points": args.phi_points,
        }, None
    if cmd == "estimate-noise":
        return {"target": args.target}, None
    if cmd == "experiment":
        if args.config:
            config = xp.ExperimentConfig.from_file(args.config)
        else:
            config = xp.ExperimentConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.noise is not None:
            overrides["noise"] = args.noise
        if args.counts is not None:
            overrides["mean_total_counts"] = args.counts
        if overrides:
            config = xp.scaled_config(config, **overrides)
        if args.replicas < 2:
            raise ValueError("need at least 2 replicas")
        return {"config": config.to_dict(), "replicas": args.replicas}, config.seed
    raise ValueError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return run_replay(Path(args.manifest), Path(args.outdir) if args.outdir else None)
        params, seed = _extract_params(args)
        outdir = _resolve_outdir(args.command, args.outdir)
        outputs = RUNNERS[args.command](params, outdir)
        _write_manifest(outdir, args.command, params, outputs, seed)
        return 0
    except (
        fisher.DivergentFisherTermError,
        fisher.DegeneratePhaseError,
        fisher.DenominatorUnderflowError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
