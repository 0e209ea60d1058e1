"""Command-line front end.

    thermocomp <command> [--unit nat|bit|both] [--format json|table|svg]
               [--scale N] <input.json | demo-name> [-o out]

Exit status: 0 on success, 1 on invalid input, 2 if an internal invariant
check fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema

from . import schemas
from .dynamics import apply_ensemble, shifted_pair_ensemble
from .errors import InvariantViolation, ValidationError
from .infomath import BIT, NAT, Distribution, LogUnit, entropy, information_capacity
from .realize import ERASE, CompOperation, classify, entropy_ledger, fig4_operation, induced_operation, microstate_budget, realize
from .scenarios import CANNED, Protocol, logical_kernel
from .statespace import MicrostateSpace, Partition, fundamental_theorem, lift
from .treeviz import SvgOptions, build_tree, group_tree, render_svg, render_table, tree_to_json

DEMOS = ("fig4", "fig5c", "fig6", "fig7", "fig8", "fig9", "fig10", "appendix")
DEMO_PROTOCOLS = {"fig7": "fig_corr1", "fig8": "fig_corr2", "fig9": "fig_mutinfo", "fig10": "fig_corr3"}

FIG3_PROBS = ("1/12", "1/4", "1/9", "2/9", "1/3")
FIG3_BLOCKS = {"c1": [0, 1], "c2": [2, 3, 4]}


class InputError(Exception):
    """Invalid input file, carrying enough context for a structured report."""

    def __init__(self, message: str, file: str | None = None, field: str | None = None, **extra):
        super().__init__(message)
        self.file = file
        self.field = field
        self.extra = extra

    def to_json(self) -> dict:
        out = {"error": "ValidationError", "message": str(self), "file": self.file, "field": self.field}
        out.update(self.extra)
        return out


def _units(choice: str) -> list[LogUnit]:
    return [NAT, BIT] if choice == "both" else [LogUnit.parse(choice)]


def _by_unit(units, fn: Callable[[LogUnit], Any]) -> dict:
    return {u.value: fn(u) for u in units}


def load_input(path: str, schema: dict) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read input: {exc.strerror}", file=path) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", file=path, line=exc.lineno, column=exc.colno) from None
    try:
        schemas.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(exc.message, file=path, field=schemas.json_path(exc)) from None
    return obj


# ---------------------------------------------------------------------------
# Report builders (shared by commands and demos)


def capacity_report(d: Distribution, units) -> dict:
    def cap(u):
        k, s, i = information_capacity(d, u)
        return {"K": k, "S": s, "I": i}

    return {"distribution": d.to_json(), "capacity": _by_unit(units, cap)}


def fundamental_report(d: Distribution, part: Partition, units) -> dict:
    rep = fundamental_theorem(d, part, NAT)
    full = rep.to_json()
    return {"lifted": lift(d, part).to_json(), "report": {u.value: full[u.value] for u in units}}


def realization_report(op: CompOperation, prior: Distribution | None, units, scale: int = 1, dump_perm: bool = False) -> dict:
    r = realize(op, scale)
    induced = induced_operation(r)
    budget = microstate_budget(op)
    cls = classify(op)
    out = {
        "operation": op.to_json(),
        "classification": {"deterministic": cls.deterministic, "reversible": cls.reversible},
        "budget": {"per_input_block": budget.per_input_block, "total": budget.total, "scale": scale},
        "realization": r.to_json(include_perm=dump_perm),
        "induced": induced.to_json(),
        "round_trip": induced == op,
    }
    if not out["round_trip"]:
        raise InvariantViolation("induced operation differs from the realized one")
    if prior is None:
        prior = Distribution.uniform(op.states_in)
    out["prior"] = prior.to_json()

    def led(u):
        dh, dnc, dtot = entropy_ledger(op, prior, u, scale)
        return {"dH_comp": dh, "dS_nc": dnc, "dS_total": dtot}

    out["ledger"] = _by_unit(units, led)
    return out


def simulation_report(protocol: Protocol, units) -> dict:
    timeline = protocol.run()
    kernel = logical_kernel(protocol.steps, protocol.registers, protocol.hot)
    cls = classify(kernel)
    return {
        "protocol": protocol.to_json(),
        "timeline": timeline.to_json(units),
        "logical_kernel": kernel.to_json(),
        "classification": {"deterministic": cls.deterministic, "reversible": cls.reversible},
    }


def ensemble_report(units) -> dict:
    d0, ens = shifted_pair_ensemble([Fraction(1, 5), Fraction(3, 10), Fraction(1, 2)])
    d1 = apply_ensemble(ens, d0)
    return {
        "initial": d0.to_json(),
        "ensemble": ens.to_json(),
        "final": d1.to_json(),
        "delta_S": _by_unit(units, lambda u: entropy(d1, u) - entropy(d0, u)),
    }


def _fig3() -> tuple[Distribution, Partition]:
    space = MicrostateSpace(5)
    return space.distribution(FIG3_PROBS), Partition(space, FIG3_BLOCKS)


# ---------------------------------------------------------------------------
# Text renderers


def _kv_table(title: str, rows: list[tuple[str, Any]]) -> str:
    width = max(len(k) for k, _ in rows)
    lines = [title]
    for k, v in rows:
        lines.append(f"  {k.ljust(width)}  {v:.6f}" if isinstance(v, float) else f"  {k.ljust(width)}  {v}")
    return "\n".join(lines) + "\n"


def _unit_rows(block: dict, units) -> list[tuple[str, Any]]:
    rows = []
    for u in units:
        for k, v in block[u.value].items():
            rows.append((f"{k} [{u.value}]", v))
    return rows


def _realization_table(rep: dict, units) -> str:
    counts = rep["realization"]["counts"]
    outs = rep["operation"]["out"]
    lines = [
        f"deterministic={rep['classification']['deterministic']} reversible={rep['classification']['reversible']}",
        f"microstates per input block M={rep['budget']['per_input_block'] * rep['budget']['scale']}, "
        f"total N={rep['realization']['space_size']}",
        "counts |Phi_i^j|:",
        "  in\\out  " + "  ".join(o.rjust(6) for o in outs),
    ]
    for ci, row in counts.items():
        lines.append("  " + ci.ljust(7) + "  " + "  ".join(str(row[o]).rjust(6) for o in outs))
    lines.append(f"round trip exact: {rep['round_trip']}")
    text = "\n".join(lines) + "\n"
    return text + _kv_table("entropy ledger", _unit_rows(rep["ledger"], units))


# ---------------------------------------------------------------------------
# Commands


def cmd_analyze(args, units) -> str | dict:
    obj = load_input(args.input, schemas.DISTRIBUTION)
    d = _build(args.input, Distribution.from_json, obj)
    rep = capacity_report(d, units)
    if args.format == "table":
        return _kv_table("information capacity", _unit_rows(rep["capacity"], units))
    return rep


def cmd_lift(args, units) -> str | dict:
    obj = load_input(args.input, schemas.LIFT_INPUT)
    d = _build(args.input, Distribution.from_json, obj["distribution"], "$.distribution")
    part = _build(args.input, lambda o: Partition.from_json(o, d.support), obj["partition"], "$.partition")
    rep = fundamental_report(d, part, units)
    if args.format == "table":
        return _kv_table("fundamental theorem", _unit_rows(rep["report"], units))
    return rep


def cmd_realize(args, units) -> str | dict:
    obj = load_input(args.input, schemas.REALIZE_INPUT)
    op_obj = obj.get("operation", obj)
    op = _build(args.input, CompOperation.from_json, op_obj, "$.operation" if "operation" in obj else "$")
    prior = _build(args.input, Distribution.from_json, obj["prior"], "$.prior") if "prior" in obj else None
    rep = realization_report(op, prior, units, args.scale, args.dump_perm)
    return _realization_table(rep, units) if args.format == "table" else rep


def cmd_simulate(args, units) -> str | dict:
    obj = load_input(args.input, schemas.PROTOCOL)
    protocol = _build(args.input, Protocol.from_json, obj)
    if args.format == "table":
        tl = protocol.run()
        return "".join(tl.render_table(u) for u in units)
    return _wrap_protocol_errors(args.input, lambda: simulation_report(protocol, units))


def cmd_tree(args, units) -> str | dict:
    obj = load_input(args.input, schemas.TREE_INPUT)
    dist_obj = obj.get("distribution", obj)
    d = _build(args.input, Distribution.from_json, dist_obj)
    part = obj.get("partition") if "distribution" in obj else None
    unit = units[0]
    tree = build_tree(d, unit)
    if part is not None:
        if "space_size" in part and "blocks" in part:
            part = _build(args.input, lambda o: Partition.from_json(o, d.support), part, "$.partition")
        tree = _build(args.input, lambda p: group_tree(tree, p), part, "$.partition")
    if args.format == "svg":
        return render_svg(tree, SvgOptions(orientation=args.orientation))
    if args.format == "table":
        return "".join(render_table(tree, u) for u in units)
    return tree_to_json(tree)


def cmd_demo(args, units) -> str | dict:
    name = args.input
    if name not in DEMOS:
        raise InputError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}", field="demo")
    if name == "fig4":
        rep = realization_report(fig4_operation(), None, units, args.scale, args.dump_perm)
        return _realization_table(rep, units) if args.format == "table" else {"demo": name, **rep}
    if name == "fig6":
        rep = realization_report(ERASE, Distribution.uniform(ERASE.states_in), units, args.scale, args.dump_perm)
        return _realization_table(rep, units) if args.format == "table" else {"demo": name, **rep}
    if name == "fig5c":
        rep = ensemble_report(units)
        if args.format == "table":
            rows = [("initial", " ".join(rep["initial"]["probs"])), ("final", " ".join(rep["final"]["probs"]))]
            rows += [(f"delta_S [{u}]", v) for u, v in rep["delta_S"].items()]
            return _kv_table("two equiprobable shifted bijections", rows)
        return {"demo": name, **rep}
    if name in DEMO_PROTOCOLS:
        protocol = CANNED[DEMO_PROTOCOLS[name]]()
        if args.format == "table":
            return "".join(protocol.run().render_table(u) for u in units)
        return {"demo": name, **simulation_report(protocol, units)}
    # appendix
    d, part = _fig3()
    unit = units[0]
    flat = build_tree(d, unit)
    grouped = group_tree(flat, part)
    if args.format == "svg":
        return render_svg(grouped, SvgOptions(title="grouped heaviness tree"))
    if args.format == "table":
        return render_table(flat) + "\n" + render_table(grouped)
    return {
        "demo": name,
        "distribution": d.to_json(),
        "partition": part.to_json(),
        **fundamental_report(d, part, units),
        "tree": tree_to_json(flat),
        "grouped": tree_to_json(grouped),
    }


def _build(path: str, fn, obj, prefix: str = "$"):
    try:
        return fn(obj)
    except ValidationError as exc:
        field = prefix + (f".{exc.field}" if exc.field else "")
        raise InputError(str(exc), file=path, field=field) from None


def _wrap_protocol_errors(path: str, fn):
    try:
        return fn()
    except ValidationError as exc:
        raise InputError(str(exc), file=path, field=f"$.{exc.field}" if exc.field else "$") from None


COMMANDS = {
    "analyze": (cmd_analyze, "distribution -> known information, entropy, capacity"),
    "lift": (cmd_lift, "distribution + partition -> fundamental theorem report"),
    "realize": (cmd_realize, "operation -> microstate realization summary"),
    "simulate": (cmd_simulate, "protocol -> entropy ledger timeline"),
    "tree": (cmd_tree, "distribution [+ partition] -> heaviness tree"),
    "demo": (cmd_demo, f"canned figure reproductions: {', '.join(DEMOS)}"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--unit", choices=("nat", "bit", "both"), default="both")
    common.add_argument("--format", choices=("json", "table", "svg"), default="json")
    common.add_argument("--scale", type=int, default=1, help="microstate inflation factor for realizations")
    common.add_argument("--dump-perm", action="store_true", help="include the full permutation in realize output")
    common.add_argument("--orientation", choices=("horizontal", "vertical"), default="horizontal")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="thermocomp", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("input", help="demo name" if name == "demo" else "input JSON file ('-' for stdin)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    units = _units(args.unit)
    if args.scale < 1:
        return _fail(InputError("--scale must be a positive integer", field="--scale"))
    if args.format == "svg" and args.command not in ("tree", "demo"):
        return _fail(InputError("--format svg applies only to tree and demo appendix", field="--format"))
    if args.format == "svg" and args.command == "demo" and args.input != "appendix":
        return _fail(InputError("--format svg applies only to demo appendix", field="--format"))
    handler = COMMANDS[args.command][0]
    try:
        result = handler(args, units)
    except InputError as exc:
        return _fail(exc)
    except ValidationError as exc:
        return _fail(InputError(str(exc), file=getattr(args, "input", None), field=exc.field))
    except InvariantViolation as exc:
        json.dump({"error": "InvariantViolation", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    text = result if isinstance(result, str) else json.dumps(result, indent=2, ensure_ascii=False) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _fail(exc: InputError) -> int:
    json.dump(exc.to_json(), sys.stderr)
    sys.stderr.write("\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
