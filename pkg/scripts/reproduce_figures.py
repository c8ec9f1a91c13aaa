"""Regenerate every figure dataset into an output directory.

    python scripts/reproduce_figures.py --out out/ [--gates 10000000]
"""

import argparse
from pathlib import Path

from zeno_ifm.cli import main as cli

RECIPES = Path(__file__).parents[1] / "recipes"


def run(*args):
    print("zeno-ifm", *args)
    if cli([str(a) for a in args]) != 0:
        raise SystemExit(f"command failed: {args}")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--gates", type=int, default=None, help="override gate count of the counting recipes")
    args = p.parse_args()
    out = args.out

    run("ev-curve", "--points", 1001, "--output", out / "ev_curve.csv")
    run("zeno-curve", "--n", "2-64", "--output", out / "zeno_curve_lossless.csv")
    run("zeno-curve", "--n", "2-64", "--loss", 0.074, "--output", out / "zeno_curve_loss074.csv")
    run("zeno-curve", "--n", "2-64", "--loss", 0.212, "--output", out / "zeno_curve_loss212.csv")

    for recipe in sorted(RECIPES.glob("*_spectrum*.ini")):
        run("spectrum", "--config", recipe, "--output", out / f"{recipe.stem}.csv")
    for recipe in sorted(RECIPES.glob("*_count*.ini")):
        extra = ["--gates", args.gates] if args.gates else []
        run("count", "--config", recipe, *extra, "--output", out / f"{recipe.stem}.json")

    run("design-coupler", "--target-r", 0.9938, "--length-um", 20, "--bend-um", 2, "--output", out / "coupler_n20.json")


if __name__ == "__main__":
    main()
