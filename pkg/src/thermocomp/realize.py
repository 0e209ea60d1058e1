"""Computational operations and their bijective microphysical realizations.

An operation maps each input state to a distribution over output states.  To
carry it out with entropy-conserving dynamics, each input state is given
``M`` equiprobable microstates (``M`` = lcm of the row denominators, times a
scale factor) and exactly ``M * P_i(j)`` of them are routed into output state
``j``.  Pushing a uniform-within-block distribution back through the
resulting permutation reproduces the operation exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Mapping, NamedTuple, Sequence

from .dynamics import Permutation, apply
from .errors import DimensionMismatch, InvariantViolation, ValidationError
from .infomath import NAT, TOL, Distribution, LogUnit, entropy, format_rational
from .statespace import MicrostateSpace, Partition, fundamental_theorem, lift


@dataclass(frozen=True)
class CompOperation:
    """Stochastic map from ``states_in`` to distributions over ``states_out``.

    ``rows`` may be given as Distributions or as ``{out_label: prob}``
    mappings (missing outputs mean probability 0); they are normalized to
    Distributions over the full ``states_out`` tuple.
    """

    states_in: tuple
    states_out: tuple
    rows: Mapping[Hashable, Distribution]

    def __post_init__(self):
        states_in, states_out = tuple(self.states_in), tuple(self.states_out)
        if not states_in or not states_out:
            raise ValidationError("an operation needs at least one input and one output state", field="in")
        if len(set(states_in)) != len(states_in) or len(set(states_out)) != len(states_out):
            raise ValidationError("state labels must be unique", field="in")
        if set(self.rows) != set(states_in):
            extra = set(self.rows) - set(states_in)
            missing = set(states_in) - set(self.rows)
            raise DimensionMismatch(
                f"rows do not match input states (missing {sorted(map(str, missing))}, "
                f"unexpected {sorted(map(str, extra))})",
                field="rows",
            )
        rows = {}
        for c in states_in:
            row = self.rows[c]
            entries = row.as_dict() if isinstance(row, Distribution) else dict(row)
            unknown = set(entries) - set(states_out)
            if unknown:
                raise DimensionMismatch(
                    f"row {c!r} names unknown output states {sorted(map(str, unknown))}", field=f"rows.{c}"
                )
            try:
                rows[c] = Distribution(states_out, tuple(entries.get(o, 0) for o in states_out))
            except ValidationError as exc:
                raise type(exc)(f"row {c!r}: {exc}", field=f"rows.{c}") from None
        object.__setattr__(self, "states_in", states_in)
        object.__setattr__(self, "states_out", states_out)
        object.__setattr__(self, "rows", rows)

    def p(self, i: Hashable, j: Hashable) -> Fraction:
        return self.rows[i].prob(j)

    def to_json(self) -> dict:
        return {
            "in": list(self.states_in),
            "out": list(self.states_out),
            "rows": {
                str(i): {str(j): format_rational(p) for j, p in self.rows[i].items() if p} for i in self.states_in
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "CompOperation":
        if not isinstance(obj, Mapping) or not {"in", "out", "rows"} <= set(obj):
            raise ValidationError("operation JSON needs 'in', 'out' and 'rows'", field="operation")
        return cls(tuple(obj["in"]), tuple(obj["out"]), dict(obj["rows"]))


class OpClass(NamedTuple):
    deterministic: bool
    reversible: bool


class Budget(NamedTuple):
    per_input_block: int
    total: int


class EntropyLedger(NamedTuple):
    dH_comp: float
    dS_nc: float
    dS_total: float


@dataclass(frozen=True)
class Realization:
    space_size: int
    partition_in: Partition
    partition_out: Partition
    perm: Permutation
    counts: Mapping[tuple, int]

    def verify(self) -> None:
        """Raise InvariantViolation unless counts, blocks and permutation agree."""
        owner_out = self.partition_out.block_of()
        for ci, block in self.partition_in.blocks.items():
            routed: dict = {}
            for k in block:
                cj = owner_out[self.perm(k)]
                routed[cj] = routed.get(cj, 0) + 1
            for cj in self.partition_out.labels:
                if routed.get(cj, 0) != self.counts.get((ci, cj), 0):
                    raise InvariantViolation(f"block {ci!r} routes {routed.get(cj, 0)} microstates to {cj!r}")
            if sum(self.counts.get((ci, cj), 0) for cj in self.partition_out.labels) != len(block):
                raise InvariantViolation(f"counts out of {ci!r} do not add up to its size")
        for cj, block in self.partition_out.blocks.items():
            if sum(self.counts.get((ci, cj), 0) for ci in self.partition_in.labels) != len(block):
                raise InvariantViolation(f"counts into {cj!r} do not add up to its size")

    def to_json(self, include_perm: bool = False) -> dict:
        out = {
            "space_size": self.space_size,
            "partition_in": self.partition_in.to_json(),
            "partition_out": self.partition_out.to_json(),
            "counts": {
                str(ci): {str(cj): self.counts[(ci, cj)] for cj in self.partition_out.labels}
                for ci in self.partition_in.labels
            },
        }
        if include_perm:
            out["perm"] = self.perm.to_json()
        return out


def classify(op: CompOperation) -> OpClass:
    deterministic = all(len(row.nonzero()) == 1 for row in op.rows.values())
    reversible = True
    for j in op.states_out:
        feeders = sum(1 for i in op.states_in if op.p(i, j))
        if feeders > 1:
            reversible = False
            break
    return OpClass(deterministic, reversible)


def microstate_budget(op: CompOperation) -> Budget:
    """Smallest equal block size M making every ``M * P_i(j)`` an integer."""
    m = 1
    for row in op.rows.values():
        for p in row.probs:
            m = math.lcm(m, p.denominator)
    return Budget(m, m * len(op.states_in))


def realize(op: CompOperation, scale: int = 1) -> Realization:
    """Build partitions and a permutation carrying out ``op``.

    Input block ``i`` occupies microstates ``[i*M, (i+1)*M)``.  Output blocks
    are laid out contiguously in ``states_out`` order; inside each, slots are
    filled by input blocks in ``states_in`` order, lowest indices first.
    """
    if not isinstance(scale, int) or scale < 1:
        raise ValidationError(f"scale must be a positive integer, got {scale!r}", field="scale")
    m = microstate_budget(op).per_input_block * scale
    n = m * len(op.states_in)
    counts = {(ci, cj): int(op.p(ci, cj) * m) for ci in op.states_in for cj in op.states_out}
    out_sizes = [sum(counts[(ci, cj)] for ci in op.states_in) for cj in op.states_out]

    cursor = {}
    blocks_out = {}
    start = 0
    for cj, size in zip(op.states_out, out_sizes):
        cursor[cj] = start
        blocks_out[cj] = range(start, start + size)
        start += size

    mapping = [0] * n
    blocks_in = {}
    for idx, ci in enumerate(op.states_in):
        src = idx * m
        blocks_in[ci] = range(src, src + m)
        for cj in op.states_out:
            for _ in range(counts[(ci, cj)]):
                mapping[src] = cursor[cj]
                cursor[cj] += 1
                src += 1

    space = MicrostateSpace(n)
    r = Realization(n, Partition(space, blocks_in), Partition(space, blocks_out), Permutation(tuple(mapping)), counts)
    r.verify()
    return r


def induced_operation(r: Realization) -> CompOperation:
    """Recover the operation by pushing each block's uniform distribution through ``perm``."""
    space = r.partition_in.space
    rows = {}
    for ci, block in r.partition_in.blocks.items():
        size = len(block)
        if not size:
            raise ValidationError(f"input block {ci!r} is empty; its row is undefined", field="partition_in")
        d = space.distribution([Fraction(1, size) if k in block else Fraction(0) for k in range(space.size)])
        rows[ci] = lift(apply(r.perm, d), r.partition_out)
    return CompOperation(r.partition_in.labels, r.partition_out.labels, rows)


def final_distribution(op: CompOperation, prior: Distribution) -> Distribution:
    """P_F(j) = sum_i P_I(i) P_i(j)."""
    prior = _aligned_prior(op, prior)
    return Distribution(
        op.states_out,
        tuple(sum((p * op.p(i, j) for i, p in prior.items()), Fraction(0)) for j in op.states_out),
    )


def _aligned_prior(op: CompOperation, prior: Distribution) -> Distribution:
    if set(prior.support) != set(op.states_in) or len(prior) != len(op.states_in):
        raise DimensionMismatch("prior must be a distribution over exactly the operation's input states", field="prior")
    lookup = prior.as_dict()
    return Distribution(op.states_in, tuple(lookup[c] for c in op.states_in))


def entropy_ledger(
    op: CompOperation, prior: Distribution, unit: LogUnit | str = NAT, scale: int = 1
) -> EntropyLedger:
    """Entropy changes of the computational and non-computational parts.

    ``dH_comp`` comes from the operation and prior alone.  ``dS_nc`` and
    ``dS_total`` come from microstate bookkeeping on the realization, with
    microstates equiprobable inside each input block.
    """
    unit = LogUnit.parse(unit)
    prior = _aligned_prior(op, prior)
    final = final_distribution(op, prior)
    dH = entropy(final, unit) - entropy(prior, unit)

    r = realize(op, scale)
    m = r.space_size // len(op.states_in)
    space = r.partition_in.space
    owner = r.partition_in.block_of()
    before = space.distribution([prior.prob(owner[k]) / m for k in range(space.size)])
    after = apply(r.perm, before)

    if sorted(before.probs) != sorted(after.probs):
        raise InvariantViolation("realizing permutation changed the microstate probability multiset")
    if lift(after, r.partition_out) != final:
        raise InvariantViolation("microstate evolution disagrees with the operation's final distribution")

    rep0 = fundamental_theorem(before, r.partition_in, unit)
    rep1 = fundamental_theorem(after, r.partition_out, unit)
    dS_nc = rep1.noncomputational_S - rep0.noncomputational_S
    dS_total = rep1.total_S - rep0.total_S
    if abs(dS_total - (dH + dS_nc)) >= TOL:
        raise InvariantViolation(f"dS_total differs from dH_comp + dS_nc by {abs(dS_total - dH - dS_nc):.3e}")
    if classify(op).deterministic and abs(dS_nc + dH) >= TOL:
        raise InvariantViolation(f"deterministic op: dS_nc + dH_comp = {dS_nc + dH:.3e}")
    return EntropyLedger(dH, dS_nc, dS_total)


def compose_ops(first: CompOperation, second: CompOperation) -> CompOperation:
    """Run ``first`` then ``second`` (the composite ``second o first``)."""
    if set(first.states_out) != set(second.states_in) or len(first.states_out) != len(second.states_in):
        raise DimensionMismatch("first operation's outputs must be the second's inputs", field="states")
    rows = {
        i: {
            j: sum((first.p(i, k) * second.p(k, j) for k in first.states_out), Fraction(0))
            for j in second.states_out
        }
        for i in first.states_in
    }
    return CompOperation(first.states_in, second.states_out, rows)


def _op(states_in: Sequence, states_out: Sequence, rows: Mapping) -> CompOperation:
    return CompOperation(tuple(states_in), tuple(states_out), rows)


BITS = ("0", "1")
NOT = _op(BITS, BITS, {"0": {"1": 1}, "1": {"0": 1}})
IDENTITY = _op(BITS, BITS, {"0": {"0": 1}, "1": {"1": 1}})
ERASE = _op(BITS, ("0",), {"0": {"0": 1}, "1": {"0": 1}})
COIN_FLIP = _op(BITS, BITS, {c: {"0": Fraction(1, 2), "1": Fraction(1, 2)} for c in BITS})


def fig4_operation() -> CompOperation:
    """Two-state operation whose first row sends 11/24 of its mass to state 0."""
    return _op(BITS, BITS, {"0": {"0": Fraction(11, 24), "1": Fraction(13, 24)}, "1": {"0": Fraction(1, 8), "1": Fraction(7, 8)}})
