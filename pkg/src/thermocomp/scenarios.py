"""Register-level protocol engine with a per-step entropy ledger.

A protocol runs over a register file of two-state registers, split into
computational bits and environment bits.  The global state is the exact
joint distribution over all register values.  After every step the engine
records subsystem entropies, pairwise mutual informations, independent
entropies and the computational / non-computational split of the total.

Thermalization has two channels:

* ``decorrelate`` (default): the environment subset keeps its own marginal
  but is made independent of everything else.  Total entropy rises by
  exactly the mutual information that was lost.
* ``uniform``: the environment subset is replaced by fresh uniform noise,
  independent of everything else.

Both agree whenever the environment marginal is already uniform, which is
the case in every canned protocol with an unbiased input.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import InvariantViolation, MergeStateError, NotEnvironment, UnknownRegister, ValidationError
from .infomath import (
    BIT,
    NAT,
    TOL,
    Distribution,
    JointDistribution,
    LogUnit,
    conditional_entropy,
    entropy,
    mutual_information,
    to_rational,
)
from .realize import CompOperation

THERMALIZE_MODES = ("decorrelate", "uniform")
STEP_OPS = ("input", "swap", "cnot", "thermalize", "merge", "unmerge")


@dataclass(frozen=True)
class RegisterFile:
    comp: tuple = ()
    env: tuple = ()

    def __post_init__(self):
        comp, env = tuple(self.comp), tuple(self.env)
        names = comp + env
        if not names:
            raise ValidationError("a register file needs at least one register", field="registers")
        if len(set(names)) != len(names):
            raise ValidationError(f"register labels must be unique: {list(names)}", field="registers")
        for n in names:
            if not isinstance(n, str) or not n:
                raise ValidationError(f"register label {n!r} must be a nonempty string", field="registers")
        object.__setattr__(self, "comp", comp)
        object.__setattr__(self, "env", env)

    @property
    def names(self) -> tuple:
        return self.comp + self.env

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownRegister(f"unknown register {name!r}", field="registers") from None

    def to_json(self) -> dict:
        return {"comp": list(self.comp), "env": list(self.env)}


def _all_tuples(n: int) -> list[tuple]:
    return list(itertools.product((0, 1), repeat=n))


@dataclass(frozen=True)
class GlobalState:
    registers: RegisterFile
    joint: Distribution
    merged: frozenset = frozenset()

    @classmethod
    def from_mapping(cls, registers: RegisterFile, probs: Mapping[tuple, Fraction], merged=frozenset()):
        support = _all_tuples(len(registers.names))
        return cls(registers, Distribution(tuple(support), tuple(probs.get(t, Fraction(0)) for t in support)), merged)

    @classmethod
    def initial(cls, registers: RegisterFile, hot: Iterable[str] = ()) -> "GlobalState":
        """All registers at 0, except ``hot`` ones which start uniform and independent."""
        hot_idx = {registers.index(h) for h in hot}
        weight = Fraction(1, 2 ** len(hot_idx))
        probs = {}
        for t in _all_tuples(len(registers.names)):
            if all(v == 0 for i, v in enumerate(t) if i not in hot_idx):
                probs[t] = weight
        return cls.from_mapping(registers, probs)

    def items(self):
        return ((t, p) for t, p in self.joint.items() if p)

    def is_computational(self, name: str) -> bool:
        return name in self.registers.comp and name not in self.merged

    @property
    def computational(self) -> tuple:
        return tuple(n for n in self.registers.names if self.is_computational(n))

    @property
    def noncomputational(self) -> tuple:
        return tuple(n for n in self.registers.names if not self.is_computational(n))

    def marginal(self, names: Sequence[str]) -> dict:
        idx = [self.registers.index(n) for n in names]
        out: dict = {}
        for t, p in self.items():
            key = tuple(t[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def pair_joint(self, xs: Sequence[str], ys: Sequence[str]) -> JointDistribution:
        """Joint of two register groups (empty groups act as a constant)."""
        xi = [self.registers.index(n) for n in xs]
        yi = [self.registers.index(n) for n in ys]
        rows = _all_tuples(len(xi))
        cols = _all_tuples(len(yi))
        r_at = {r: k for k, r in enumerate(rows)}
        c_at = {c: k for k, c in enumerate(cols)}
        grid = [[Fraction(0)] * len(cols) for _ in rows]
        for t, p in self.items():
            grid[r_at[tuple(t[i] for i in xi)]][c_at[tuple(t[i] for i in yi)]] += p
        return JointDistribution(tuple(rows), tuple(cols), grid)

    def entropy_of(self, names: Sequence[str], unit: LogUnit | str = NAT) -> float:
        m = self.marginal(names)
        return entropy(Distribution(tuple(m), tuple(m.values())), unit)

    def to_json(self) -> dict:
        return {
            "registers": list(self.registers.names),
            "merged": sorted(self.merged),
            "joint": {"".join(map(str, t)): str(p) for t, p in self.items()},
        }


# ---------------------------------------------------------------------------
# Steps


@dataclass(frozen=True)
class Step:
    op: str
    target: str | None = None
    control: str | None = None
    a: str | None = None
    b: str | None = None
    env: tuple = ()
    p: Fraction = Fraction(1, 2)
    mode: str = "decorrelate"
    label: str = ""

    def __post_init__(self):
        if self.op not in STEP_OPS:
            raise ValidationError(f"unknown step op {self.op!r}; expected one of {STEP_OPS}", field="op")
        object.__setattr__(self, "env", tuple(self.env))
        object.__setattr__(self, "p", to_rational(self.p, field="p"))
        if not 0 <= self.p <= 1:
            raise ValidationError(f"input bias {self.p} outside [0, 1]", field="p")
        if self.mode not in THERMALIZE_MODES:
            raise ValidationError(f"unknown thermalize mode {self.mode!r}", field="mode")
        needed = {
            "input": ("target",),
            "merge": ("target",),
            "unmerge": ("target",),
            "cnot": ("control", "target"),
            "swap": ("a", "b"),
            "thermalize": ("env",),
        }[self.op]
        for name in needed:
            if not getattr(self, name):
                raise ValidationError(f"{self.op} step needs {name!r}", field=name)
        if self.op == "swap" and self.a == self.b:
            raise ValidationError("swap needs two distinct registers", field="b")
        if self.op == "cnot" and self.control == self.target:
            raise ValidationError("cnot needs distinct control and target", field="target")
        if not self.label:
            object.__setattr__(self, "label", self.describe())

    @classmethod
    def input(cls, target: str, p: Any = Fraction(1, 2)) -> "Step":
        return cls("input", target=target, p=p)

    @classmethod
    def swap(cls, a: str, b: str) -> "Step":
        return cls("swap", a=a, b=b)

    @classmethod
    def cnot(cls, control: str, target: str) -> "Step":
        return cls("cnot", control=control, target=target)

    @classmethod
    def thermalize(cls, *env: str, mode: str = "decorrelate") -> "Step":
        return cls("thermalize", env=env, mode=mode)

    @classmethod
    def merge(cls, target: str) -> "Step":
        return cls("merge", target=target)

    @classmethod
    def unmerge(cls, target: str) -> "Step":
        return cls("unmerge", target=target)

    def describe(self) -> str:
        if self.op == "input":
            return f"input {self.target}" + ("" if self.p == Fraction(1, 2) else f" p={self.p}")
        if self.op == "swap":
            return f"swap {self.a},{self.b}"
        if self.op == "cnot":
            return f"cnot {self.control}->{self.target}"
        if self.op == "thermalize":
            return f"thermalize {','.join(self.env)}" + ("" if self.mode == "decorrelate" else f" ({self.mode})")
        return f"{self.op} {self.target}"

    def registers_used(self) -> tuple:
        return tuple(x for x in (self.target, self.control, self.a, self.b) if x) + self.env

    def to_json(self) -> dict:
        out: dict = {"op": self.op}
        if self.op in ("input", "merge", "unmerge"):
            out["target"] = self.target
        if self.op == "input":
            out["p"] = str(self.p)
        if self.op == "cnot":
            out.update(control=self.control, target=self.target)
        if self.op == "swap":
            out.update(a=self.a, b=self.b)
        if self.op == "thermalize":
            out.update(env=list(self.env), mode=self.mode)
        out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Step":
        if not isinstance(obj, Mapping) or "op" not in obj:
            raise ValidationError("step needs an 'op'", field="op")
        kw = {k: obj[k] for k in ("target", "control", "a", "b", "p", "mode", "label") if k in obj}
        if "env" in obj:
            env = obj["env"]
            kw["env"] = (env,) if isinstance(env, str) else tuple(env)
        return cls(obj["op"], **kw)


def step_input(state: GlobalState, target: str, p: Any = Fraction(1, 2)) -> GlobalState:
    """Bring in a fresh bit (P(1) = p) on ``target``, independent of everything else."""
    p = to_rational(p, field="p")
    ti = state.registers.index(target)
    others = [n for n in state.registers.names if n != target]
    rest = state.marginal(others)
    probs: dict = {}
    for key, q in rest.items():
        for v, pv in ((0, 1 - p), (1, p)):
            t = list(key)
            t.insert(ti, v)
            probs[tuple(t)] = q * pv
    return GlobalState.from_mapping(state.registers, probs, state.merged)


def _relabel(state: GlobalState, fn) -> GlobalState:
    probs: dict = {}
    for t, p in state.items():
        u = fn(t)
        probs[u] = probs.get(u, Fraction(0)) + p
    return GlobalState.from_mapping(state.registers, probs, state.merged)


def step_swap(state: GlobalState, a: str, b: str) -> GlobalState:
    ai, bi = state.registers.index(a), state.registers.index(b)
    if ai == bi:
        raise ValidationError("swap needs two distinct registers", field="b")

    def fn(t):
        u = list(t)
        u[ai], u[bi] = u[bi], u[ai]
        return tuple(u)

    return _relabel(state, fn)


def step_cnot(state: GlobalState, control: str, target: str) -> GlobalState:
    ci, ti = state.registers.index(control), state.registers.index(target)
    if ci == ti:
        raise ValidationError("cnot needs distinct control and target", field="target")

    def fn(t):
        u = list(t)
        u[ti] ^= u[ci]
        return tuple(u)

    return _relabel(state, fn)


def step_thermalize(state: GlobalState, env_subset: Sequence[str], mode: str = "decorrelate") -> GlobalState:
    """Make ``env_subset`` independent of the other registers.

    Only environment registers, or computational registers currently merged
    into the non-computational part, may be thermalized.
    """
    env_subset = tuple(env_subset)
    if not env_subset:
        raise ValidationError("thermalize needs at least one register", field="env")
    for name in env_subset:
        state.registers.index(name)
        if state.is_computational(name):
            raise NotEnvironment(f"register {name!r} is computational and cannot be thermalized", field="env")
    if mode not in THERMALIZE_MODES:
        raise ValidationError(f"unknown thermalize mode {mode!r}", field="mode")
    rest = [n for n in state.registers.names if n not in env_subset]
    rest_m = state.marginal(rest)
    if mode == "decorrelate":
        env_m = state.marginal(env_subset)
    else:
        env_m = {t: Fraction(1, 2 ** len(env_subset)) for t in _all_tuples(len(env_subset))}
    pos_rest = [state.registers.index(n) for n in rest]
    pos_env = [state.registers.index(n) for n in env_subset]
    probs: dict = {}
    for rk, rp in rest_m.items():
        for ek, ep in env_m.items():
            t = [0] * len(state.registers.names)
            for i, v in zip(pos_rest, rk):
                t[i] = v
            for i, v in zip(pos_env, ek):
                t[i] = v
            probs[tuple(t)] = rp * ep
    return GlobalState.from_mapping(state.registers, probs, state.merged)


def step_merge(state: GlobalState, target: str) -> GlobalState:
    """Reclassify ``target``'s information as non-computational."""
    state.registers.index(target)
    if target not in state.registers.comp:
        raise MergeStateError(f"only computational registers can be merged, {target!r} is environment", field="target")
    if target in state.merged:
        raise MergeStateError(f"register {target!r} is already merged", field="target")
    return replace(state, merged=state.merged | {target})


def step_unmerge(state: GlobalState, target: str) -> GlobalState:
    state.registers.index(target)
    if target not in state.merged:
        raise MergeStateError(f"register {target!r} is not merged", field="target")
    return replace(state, merged=state.merged - {target})


def apply_step(state: GlobalState, step: Step) -> GlobalState:
    if step.op == "input":
        return step_input(state, step.target, step.p)
    if step.op == "swap":
        return step_swap(state, step.a, step.b)
    if step.op == "cnot":
        return step_cnot(state, step.control, step.target)
    if step.op == "thermalize":
        return step_thermalize(state, step.env, step.mode)
    if step.op == "merge":
        return step_merge(state, step.target)
    return step_unmerge(state, step.target)


# ---------------------------------------------------------------------------
# Ledger and timeline


@dataclass(frozen=True)
class Ledger:
    """Entropy bookkeeping for one state, in nats."""

    H: dict
    H_comp: float
    S_nc: float
    S_total: float
    I: dict
    S_ind: dict
    I_rest: dict

    @classmethod
    def of(cls, state: GlobalState) -> "Ledger":
        names = state.registers.names
        total = entropy(state.joint, NAT)
        comp, nc = state.computational, state.noncomputational
        split = state.pair_joint(nc, comp)
        H = {n: state.entropy_of([n]) for n in names}
        I = {}
        for x, y in itertools.combinations(names, 2):
            I[f"{x};{y}"] = mutual_information(state.pair_joint([x], [y]))
        S_ind, I_rest = {}, {}
        for n in names:
            others = [m for m in names if m != n]
            j = state.pair_joint(others, [n])
            I_rest[n] = mutual_information(j)
            S_ind[n] = conditional_entropy(j, given="X", method="average")
        return cls(
            H=H,
            H_comp=state.entropy_of(comp) if comp else 0.0,
            S_nc=conditional_entropy(split, given="Y", method="average"),
            S_total=total,
            I=I,
            S_ind=S_ind,
            I_rest=I_rest,
        )

    def to_json(self, unit: LogUnit | str) -> dict:
        u = LogUnit.parse(unit)
        conv = u.from_nats
        return {
            "H": {k: conv(v) for k, v in self.H.items()},
            "H_comp": conv(self.H_comp),
            "S_nc": conv(self.S_nc),
            "S_total": conv(self.S_total),
            "I": {k: conv(v) for k, v in self.I.items()},
            "S_ind": {k: conv(v) for k, v in self.S_ind.items()},
            "I_rest": {k: conv(v) for k, v in self.I_rest.items()},
        }


@dataclass(frozen=True)
class TimelineEntry:
    index: int
    label: str
    state: GlobalState
    ledger: Ledger
    imported: float = 0.0


@dataclass(frozen=True)
class Timeline:
    """Ledger after every step; entry 0 is the initial state.

    Input steps exchange entropy with the outside world; their change in
    S_total is booked as ``imported``.  ``delta_S_total`` is the entropy
    produced inside the modelled universe: final minus initial S_total,
    less whatever was imported.
    """

    registers: RegisterFile
    entries: tuple

    @property
    def initial(self) -> TimelineEntry:
        return self.entries[0]

    @property
    def final(self) -> TimelineEntry:
        return self.entries[-1]

    @property
    def imported(self) -> float:
        return math.fsum(e.imported for e in self.entries)

    @property
    def delta_S_total(self) -> float:
        return self.final.ledger.S_total - self.initial.ledger.S_total - self.imported

    def to_json(self, units: Sequence[LogUnit | str] = (NAT, BIT)) -> dict:
        units = [LogUnit.parse(u) for u in units]
        steps = []
        for e in self.entries:
            item = {
                "index": e.index,
                "label": e.label,
                "merged": sorted(e.state.merged),
                "joint": e.state.to_json()["joint"],
            }
            for u in units:
                item[u.value] = e.ledger.to_json(u)
                item[u.value]["imported"] = u.from_nats(e.imported)
            steps.append(item)
        summary = {u.value: {"delta_S_total": u.from_nats(self.delta_S_total), "imported": u.from_nats(self.imported)} for u in units}
        return {"registers": self.registers.to_json(), "steps": steps, "summary": summary}

    def render_table(self, unit: LogUnit | str = BIT) -> str:
        u = LogUnit.parse(unit)
        names = self.registers.names
        pairs = list(self.initial.ledger.I)
        header = ["#", "step", "S_total", "H_comp", "S_nc"] + [f"H({n})" for n in names] + [f"I({p})" for p in pairs]
        rows = []
        for e in self.entries:
            lg = e.ledger
            vals = [lg.S_total, lg.H_comp, lg.S_nc] + [lg.H[n] for n in names] + [lg.I[p] for p in pairs]
            rows.append([str(e.index), e.label] + [f"{u.from_nats(v):.6f}" for v in vals])
        widths = [max(len(r[k]) for r in rows + [header]) for k in range(len(header))]
        fmt = lambda r: "  ".join(c.ljust(w) if k < 2 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths)))
        lines = [f"entropy ledger ({u.value}s)", fmt(header), "  ".join("-" * w for w in widths)]
        lines += [fmt(r) for r in rows]
        lines.append(f"entropy imported by inputs: {u.from_nats(self.imported):.6f}")
        lines.append(f"entropy produced (delta S_total): {u.from_nats(self.delta_S_total):.6f}")
        return "\n".join(lines) + "\n"


def validate_protocol(steps: Sequence[Step], registers: RegisterFile, hot: Iterable[str] = ()) -> None:
    for h in hot:
        registers.index(h)
    merged: set = set()
    for k, step in enumerate(steps):
        try:
            for name in step.registers_used():
                registers.index(name)
            if step.op == "merge":
                if step.target not in registers.comp:
                    raise MergeStateError(f"only computational registers can be merged, not {step.target!r}", field="target")
                if step.target in merged:
                    raise MergeStateError(f"register {step.target!r} is already merged", field="target")
                merged.add(step.target)
            elif step.op == "unmerge":
                if step.target not in merged:
                    raise MergeStateError(f"register {step.target!r} is not merged", field="target")
                merged.discard(step.target)
            elif step.op == "thermalize":
                for name in step.env:
                    if name in registers.comp and name not in merged:
                        raise NotEnvironment(f"register {name!r} is computational and cannot be thermalized", field="env")
        except ValidationError as exc:
            _tag(exc, k)
            raise


def _tag(exc: ValidationError, index: int) -> None:
    exc.step_index = index
    exc.args = (f"step {index}: {exc.args[0]}",) + exc.args[1:]
    exc.field = f"steps[{index}].{exc.field}" if exc.field else f"steps[{index}]"


def run(
    steps: Sequence[Step],
    registers: RegisterFile,
    hot: Iterable[str] = (),
    initial: GlobalState | None = None,
) -> Timeline:
    """Execute ``steps`` in order and return the ledger timeline.

    Raises the failing step's error (tagged with ``step_index``), or
    InvariantViolation if a closed step lowers S_total or breaks
    normalization.
    """
    steps = list(steps)
    hot = tuple(hot)
    validate_protocol(steps, registers, hot)
    state = initial if initial is not None else GlobalState.initial(registers, hot)
    entries = [TimelineEntry(0, "init", state, Ledger.of(state))]
    for k, step in enumerate(steps, start=1):
        try:
            nxt = apply_step(state, step)
        except ValidationError as exc:
            _tag(exc, k - 1)
            raise
        ledger = Ledger.of(nxt)
        change = ledger.S_total - entries[-1].ledger.S_total
        imported = change if step.op == "input" else 0.0
        if step.op != "input" and change < -TOL:
            raise InvariantViolation(f"step {k - 1} ({step.label}) lowered S_total by {-change:.3e}")
        entries.append(TimelineEntry(k, step.label, nxt, ledger, imported))
        state = nxt
    return Timeline(registers, tuple(entries))


# ---------------------------------------------------------------------------
# Logical analysis


def logical_kernel(
    steps: Sequence[Step],
    registers: RegisterFile,
    hot: Iterable[str] = (),
    start: int | None = None,
    deterministic_only: bool = False,
) -> CompOperation:
    """Transition kernel from register values at ``start`` to final values.

    Every register is copied onto a private witness bit at step ``start``
    (default: after the leading input steps); the final joint of witnesses
    and registers gives P(final | initial) for each initial configuration
    that has nonzero probability.  With ``deterministic_only`` the input
    and thermalize steps after ``start`` are skipped, giving the image
    under the protocol's deterministic steps alone.
    """
    steps = list(steps)
    if start is None:
        start = 0
        while start < len(steps) and steps[start].op == "input":
            start += 1
    names = registers.names
    witnesses = tuple(f"#{n}" for n in names)
    aug = RegisterFile(registers.comp + witnesses, registers.env)
    state = GlobalState.initial(aug, hot)
    for step in steps[:start]:
        state = apply_step(state, step)
    for n, w in zip(names, witnesses):
        state = step_cnot(state, n, w)
    for step in steps[start:]:
        if deterministic_only and step.op in ("input", "thermalize"):
            continue
        state = apply_step(state, step)

    j = state.pair_joint(witnesses, names)
    label = lambda t: "".join(map(str, t))
    states_out = tuple(label(c) for c in j.cols)
    rows = {}
    for r, row in zip(j.rows, j.cells):
        mass = sum(row, Fraction(0))
        if mass:
            rows[label(r)] = {label(c): x / mass for c, x in zip(j.cols, row) if x}
    return CompOperation(tuple(rows), states_out, rows)


# ---------------------------------------------------------------------------
# Protocols


@dataclass(frozen=True)
class Protocol:
    registers: RegisterFile
    steps: tuple
    hot: tuple = ()
    name: str = ""

    def run(self) -> Timeline:
        return run(self.steps, self.registers, self.hot)

    def to_json(self) -> dict:
        out = {"registers": self.registers.to_json(), "steps": [s.to_json() for s in self.steps]}
        if self.hot:
            out["hot"] = list(self.hot)
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Protocol":
        if not isinstance(obj, Mapping) or "registers" not in obj or "steps" not in obj:
            raise ValidationError("protocol JSON needs 'registers' and 'steps'", field="protocol")
        regs = obj["registers"]
        registers = RegisterFile(tuple(regs.get("comp", ())), tuple(regs.get("env", ())))
        steps = []
        for k, s in enumerate(obj["steps"]):
            try:
                steps.append(Step.from_json(s))
            except ValidationError as exc:
                _tag(exc, k)
                raise
        return cls(registers, tuple(steps), tuple(obj.get("hot", ())), obj.get("name", ""))


def fig_corr1() -> Protocol:
    """Reversible erasure of an isolated random bit through a cold environment bit."""
    return Protocol(
        RegisterFile(("B",), ("E",)),
        (Step.input("B"), Step.swap("B", "E"), Step.thermalize("E"), Step.swap("E", "B")),
        name="fig_corr1",
    )


def fig_corr2(p: Any = Fraction(1, 2)) -> Protocol:
    """Oblivious erasure of a computed (correlated) bit; input bias P(I=1) = p."""
    return Protocol(
        RegisterFile(("I", "R"), ("E",)),
        (
            Step.input("I", p),
            Step.cnot("I", "R"),
            Step.swap("R", "E"),
            Step.thermalize("E"),
            Step.swap("E", "R"),
        ),
        name="fig_corr2",
    )


def fig_corr3() -> Protocol:
    """Decomputation of the copied bit by a second CNOT; environment starts hot."""
    return Protocol(
        RegisterFile(("I", "R"), ("E",)),
        (Step.input("I"), Step.cnot("I", "R"), Step.cnot("I", "R")),
        hot=("E",),
        name="fig_corr3",
    )


def fig_mutinfo() -> Protocol:
    """Merge a perfectly correlated bit into the nc part, thermalize, un-merge."""
    return Protocol(
        RegisterFile(("X", "Y"), ()),
        (Step.input("X"), Step.cnot("X", "Y"), Step.merge("Y"), Step.thermalize("Y"), Step.unmerge("Y")),
        name="fig_mutinfo",
    )


CANNED = {
    "fig_corr1": fig_corr1,
    "fig_corr2": fig_corr2,
    "fig_corr3": fig_corr3,
    "fig_mutinfo": fig_mutinfo,
}
