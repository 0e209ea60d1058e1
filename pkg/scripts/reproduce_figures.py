"""Regenerate every canned figure reproduction into an output directory.

    python3 scripts/reproduce_figures.py [--out figures]

Writes, per demo, a JSON report and a plain-text table, plus flat and
grouped heaviness-tree SVGs (both orientations), then prints a one-line
summary of the headline number of each figure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from thermocomp.cli import DEMOS, main as cli_main
from thermocomp.infomath import NAT
from thermocomp.statespace import MicrostateSpace, Partition
from thermocomp.treeviz import SvgOptions, build_tree, group_tree, render_svg


def _run(out: Path, name: str, fmt: str, suffix: str) -> Path:
    dest = out / f"{name}.{suffix}"
    code = cli_main(["demo", name, "--format", fmt, "-o", str(dest)])
    if code:
        raise SystemExit(f"demo {name} failed with exit code {code}")
    return dest


def headline(name: str, rep: dict) -> str:
    if name == "fig5c":
        return f"dS = {rep['delta_S']['nat']:.4f} nat"
    if name in ("fig4", "fig6"):
        led = rep["ledger"]["bit"]
        return f"counts {rep['realization']['counts']}, dH_comp {led['dH_comp']:+.4f} bit, dS_nc {led['dS_nc']:+.4f} bit"
    if "timeline" in rep:
        return f"delta S_total = {rep['timeline']['summary']['bit']['delta_S_total']:.4f} bit"
    r = rep["report"]["nat"]
    return f"S = {r['total_S']:.6f} = {r['computational_H']:.6f} + {r['noncomputational_S']:.6f} nat"


def trees(out: Path) -> None:
    space = MicrostateSpace(5)
    d = space.distribution(["1/12", "1/4", "1/9", "2/9", "1/3"])
    part = Partition(space, {"c1": [0, 1], "c2": [2, 3, 4]})
    flat = build_tree(d, NAT)
    grouped = group_tree(flat, part)
    for orientation in ("horizontal", "vertical"):
        for label, tree in (("flat", flat), ("grouped", grouped)):
            opts = SvgOptions(orientation=orientation, title=f"{label} heaviness tree")
            (out / f"tree_{label}_{orientation}.svg").write_text(render_svg(tree, opts))
    assert math.isclose(flat.total_area(), grouped.total_area(), abs_tol=1e-12)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures", type=Path)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in DEMOS:
        rep = json.loads(_run(args.out, name, "json", "json").read_text())
        _run(args.out, name, "table", "txt")
        print(f"{name:<9} {headline(name, rep)}")
    trees(args.out)
    print(f"outputs written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
