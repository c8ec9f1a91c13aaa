"""Command-line front end.

Units: wavelengths in nm, lengths in um, reflectivities and loss fractions
dimensionless in [0, 1]. Every command writing data also writes
``<output>.manifest.json`` next to it.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import efficiency_curve, ev_curve
from .config import (
    circuit_from_config,
    dispersion_from_config,
    experiment_from_config,
    read_config,
    snapshot,
    sweep_from_config,
)
from .counting import run_counting, summarize
from .coupler import design_at_gap, load_index_table, solve_gap_for_reflectivity, synthetic_index_table
from .spectrum import sweep_spectrum, visibility


def write_manifest(output: Path, command: str, config: dict, summary: dict | None = None) -> Path:
    path = output.with_name(output.name + ".manifest.json")
    manifest = {
        "command": command,
        "config": config,
        "outputs": [str(output)],
        "summary": summary or {},
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return path


def _open_out(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def cmd_ev_curve(args) -> None:
    grid = np.linspace(args.r_min, args.r_max, args.points)
    if grid.size and (grid.min() < 0 or grid.max() > 1):
        raise ValueError("R grid must lie within [0, 1]")
    with _open_out(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["R", "eta", "p_ifm", "p_abs"])
        for r, rep in ev_curve(grid):
            eta = rep.eta if rep.p_L + rep.p_abs > 0 else 0.0
            w.writerow([_fmt(r), _fmt(eta), _fmt(rep.p_ifm), _fmt(rep.p_abs)])
    write_manifest(args.output, "ev-curve", {"r_min": args.r_min, "r_max": args.r_max, "points": args.points})


def _parse_n_list(text: str) -> list[int]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part:
            a, b = (int(x) for x in part.split("-"))
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    bad = [n for n in out if n < 2]
    if bad:
        raise ValueError(f"N must be >= 2, got {bad}")
    return out


def cmd_zeno_curve(args) -> None:
    ns = _parse_n_list(args.n)
    with _open_out(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "p_L", "p_U", "p_abs", "p_loss", "eta"])
        for n, rep in efficiency_curve(ns, args.loss, args.loss_arms):
            w.writerow([n, *(_fmt(v) for v in (rep.p_L, rep.p_U, rep.p_abs, rep.p_loss, rep.eta))])
    write_manifest(args.output, "zeno-curve", {"n": ns, "loss_per_stage": args.loss, "loss_arms": args.loss_arms})


def cmd_spectrum(args) -> None:
    cp = read_config(args.config)
    circuit = circuit_from_config(cp, with_delays=True)
    sw = sweep_from_config(cp)
    result = sweep_spectrum(circuit, dispersion_from_config(cp), (sw.lambda_min_nm, sw.lambda_max_nm), sw.step_nm)
    with _open_out(args.output) as fh:
        result.write_csv(fh)
    write_manifest(args.output, "spectrum", snapshot(cp), {"rows": len(result), "visibility": visibility(result)})


def cmd_count(args) -> None:
    cp = read_config(args.config)
    cfg, a_sigma = experiment_from_config(cp, args.gates, args.seed)
    rec = run_counting(cfg, workers=args.workers)
    payload = summarize(rec, cfg, a_sigma).to_dict()
    text = json.dumps(payload)
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(text + "\n")
        write_manifest(args.output, "count", {**snapshot(cp), "gates": cfg.gates, "seed": cfg.rng_seed})
    print(text)


def cmd_design_coupler(args) -> None:
    table = load_index_table(args.table) if args.table else synthetic_index_table()
    gap = solve_gap_for_reflectivity(table, args.target_r, args.length_um, args.bend_um)
    design = design_at_gap(table, gap, args.length_um, args.bend_um)
    text = json.dumps(design.to_dict())
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(text + "\n")
        write_manifest(args.output, "design-coupler", {k: v for k, v in vars(args).items() if k != "func"})
    print(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zeno-ifm",
        description="Interaction-free measurement circuit simulator. "
        "Units: wavelength nm, length um, reflectivity/loss as fractions in [0, 1].",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ev-curve", help="two-stage efficiency vs first-coupler reflectivity (complementary couplers)")
    s.add_argument("--r-min", type=float, default=0.0, help="lowest R (fraction)")
    s.add_argument("--r-max", type=float, default=1.0, help="highest R (fraction)")
    s.add_argument("--points", type=int, default=101)
    s.add_argument("--output", type=Path, required=True, help="CSV path")
    s.set_defaults(func=cmd_ev_curve)

    s = sub.add_parser("zeno-curve", help="N-stage outcome probabilities and efficiency")
    s.add_argument("--n", default="2-64", help="comma list / ranges of coupler counts, e.g. '5,10,20' or '2-64'")
    s.add_argument("--loss", type=float, default=0.0, help="loss per stage (fraction)")
    s.add_argument("--loss-arms", choices=("both", "upper", "lower"), default="both")
    s.add_argument("--output", type=Path, required=True, help="CSV path")
    s.set_defaults(func=cmd_zeno_curve)

    s = sub.add_parser("spectrum", help="wavelength sweep (lambda in nm, delta_l in um)")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--output", type=Path, required=True, help="CSV path")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("count", help="Monte Carlo photon counting; prints a JSON record")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--gates", type=int, default=None, help="override [source] gates")
    s.add_argument("--seed", type=int, default=None, help="override [source] seed")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", type=Path, default=None, help="also write the JSON record here")
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("design-coupler", help="solve the coupler gap (nm) for a target reflectivity")
    s.add_argument("--table", type=Path, default=None, help="gap_nm,n_s,n_a CSV (default: bundled synthetic table)")
    s.add_argument("--target-r", type=float, required=True, help="target reflectivity (fraction)")
    s.add_argument("--length-um", type=float, default=20.0, help="straight coupler length (um)")
    s.add_argument("--bend-um", type=float, default=2.0, help="bend contribution to effective length (um)")
    s.add_argument("--output", type=Path, default=None)
    s.set_defaults(func=cmd_design_coupler)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
