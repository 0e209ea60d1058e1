"""Recompute the frozen reference constants in tests/strategies.py at high precision.

The values are evaluated with mpmath straight from their defining sums, so
they do not share any code path with the package.  Run:

    python3 scripts/oracles.py [--digits 40] [--check]

``--check`` compares against the constants frozen in the test suite and
exits nonzero on a mismatch larger than 1e-15.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import mpmath as mp


def h(p) -> mp.mpf:
    p = mp.mpf(p)
    return mp.mpf(0) if p == 0 else -p * mp.log(p)


def oracles() -> dict[str, mp.mpf]:
    q = lambda a, b: mp.mpf(a) / b  # noqa: E731
    fig3 = [q(1, 12), q(1, 4), q(1, 9), q(2, 9), q(1, 3)]
    blocks = [fig3[:2], fig3[2:]]
    mass = [mp.fsum(b) for b in blocks]
    s = mp.fsum(h(p) for p in fig3)
    hc = mp.fsum(h(m) for m in mass)
    snc = mp.fsum(m * mp.fsum(h(p / m) for p in b) for m, b in zip(mass, blocks))

    before = [q(1, 5), q(3, 10), q(1, 2), 0]
    after = [q(1, 10), q(1, 4), q(2, 5), q(1, 4)]
    merged = [q(1, 2), q(1, 2)]

    cells = [[q(1, 8), q(1, 8)], [0, q(3, 4)]]
    px = [mp.fsum(r) for r in cells]
    py = [mp.fsum(c) for c in zip(*cells)]
    mi = mp.fsum(h(p) for p in px) + mp.fsum(h(p) for p in py) - mp.fsum(h(c) for r in cells for c in r)

    return {
        "FIG3_S": s,
        "FIG3_HC": hc,
        "FIG3_SNC": snc,
        "FIG3_K": mp.log(5) - s,
        "FIG5C_DS": mp.fsum(h(p) for p in after) - mp.fsum(h(p) for p in before),
        "MERGE_FIG5_DS": mp.fsum(h(p) for p in merged) - mp.fsum(h(p) for p in before),
        "MI_EIGHTHS": mi,
    }


def frozen() -> dict[str, float]:
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
    import strategies

    return {k: getattr(strategies, k) for k in oracles()}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=40)
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args(argv)
    mp.mp.dps = args.digits
    values = oracles()
    for name, v in values.items():
        print(f"{name:<14} {mp.nstr(v, args.digits - 2)}")
    if args.check:
        bad = {k: (float(values[k]), v) for k, v in frozen().items() if abs(float(values[k]) - v) > 1e-15}
        for k, (want, got) in bad.items():
            print(f"MISMATCH {k}: oracle {want!r}, frozen {got!r}")
        print("frozen constants agree" if not bad else f"{len(bad)} mismatches")
        return 1 if bad else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
