"""Microstate spaces, their partitions into computational states, and the
entropy decomposition S(Phi) = H(C) + S(Phi|C)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import InvariantViolation, SpaceMismatch, ValidationError
from .infomath import (
    NAT,
    TOL,
    Distribution,
    JointDistribution,
    LogUnit,
    conditional_entropy,
    entropy,
    mutual_information,
)

DUMMY_BLOCK = "c0"


@dataclass(frozen=True)
class MicrostateSpace:
    size: int
    labels: tuple = ()

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValidationError(f"space size must be a positive integer, got {self.size!r}", field="space_size")
        labels = tuple(self.labels) or tuple(f"phi{i + 1}" for i in range(self.size))
        if len(labels) != self.size:
            raise ValidationError(f"{len(labels)} labels for a space of size {self.size}", field="labels")
        if len(set(labels)) != len(labels):
            raise ValidationError("microstate labels must be distinct", field="labels")
        object.__setattr__(self, "labels", labels)

    def distribution(self, probs: Sequence[Any]) -> Distribution:
        return Distribution(self.labels, tuple(probs))

    def uniform(self) -> Distribution:
        return Distribution.uniform(self.labels)


@dataclass(frozen=True)
class Partition:
    """Disjoint labelled blocks of microstate indices.

    Microstates left uncovered by the caller's blocks are collected into an
    extra block labelled ``c0`` so that every microstate has exactly one
    computational state.  Empty blocks are allowed.
    """

    space: MicrostateSpace
    blocks: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[int] = set()
        blocks: dict[str, frozenset] = {}
        for label, members in self.blocks.items():
            members = frozenset(members)
            for i in members:
                if not isinstance(i, int) or not 0 <= i < self.space.size:
                    raise ValidationError(
                        f"block {label!r}: index {i!r} outside 0..{self.space.size - 1}", field=f"blocks.{label}"
                    )
            overlap = seen & members
            if overlap:
                raise ValidationError(
                    f"block {label!r} overlaps earlier blocks at {sorted(overlap)}", field=f"blocks.{label}"
                )
            seen |= members
            blocks[label] = members
        missing = frozenset(range(self.space.size)) - seen
        if missing:
            if DUMMY_BLOCK in blocks:
                raise ValidationError(
                    f"microstates {sorted(missing)} are uncovered and label {DUMMY_BLOCK!r} is taken",
                    field="blocks",
                )
            blocks[DUMMY_BLOCK] = missing
        object.__setattr__(self, "blocks", blocks)

    @property
    def labels(self) -> tuple:
        return tuple(self.blocks)

    def block_of(self) -> list:
        """Block label of each microstate index."""
        owner = [None] * self.space.size
        for label, members in self.blocks.items():
            for i in members:
                owner[i] = label
        return owner

    def to_json(self) -> dict:
        return {"space_size": self.space.size, "blocks": {k: sorted(v) for k, v in self.blocks.items()}}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any], labels: Iterable | None = None) -> "Partition":
        if not isinstance(obj, Mapping) or "space_size" not in obj or "blocks" not in obj:
            raise ValidationError("partition JSON needs 'space_size' and 'blocks'", field="partition")
        space = MicrostateSpace(obj["space_size"], tuple(labels or ()))
        return cls(space, {str(k): v for k, v in obj["blocks"].items()})

    @classmethod
    def singletons(cls, space: MicrostateSpace) -> "Partition":
        return cls(space, {lab: {i} for i, lab in enumerate(space.labels)})

    @classmethod
    def whole(cls, space: MicrostateSpace, label: str = "c1") -> "Partition":
        return cls(space, {label: range(space.size)})


def _indexed_probs(d: Distribution, part: Partition) -> list[Fraction]:
    space = part.space
    if len(d) != space.size:
        raise SpaceMismatch(f"distribution has {len(d)} outcomes, space has {space.size} microstates")
    if d.support == space.labels:
        return list(d.probs)
    if set(d.support) != set(space.labels):
        raise SpaceMismatch("distribution support does not match the microstate labels")
    lookup = d.as_dict()
    return [lookup[lab] for lab in space.labels]


def lift(d: Distribution, part: Partition) -> Distribution:
    """Probability of each computational state: the sum over its microstates."""
    probs = _indexed_probs(d, part)
    return Distribution(
        part.labels,
        tuple(sum((probs[i] for i in members), Fraction(0)) for members in part.blocks.values()),
    )


def joint_of(d: Distribution, part: Partition) -> JointDistribution:
    """Joint distribution over (microstate, computational state)."""
    probs = _indexed_probs(d, part)
    owner = part.block_of()
    cols = part.labels
    cells = [[probs[i] if owner[i] == c else Fraction(0) for c in cols] for i in range(part.space.size)]
    return JointDistribution(part.space.labels, cols, cells)


@dataclass(frozen=True)
class FundamentalReport:
    total_S: float
    computational_H: float
    noncomputational_S: float
    unit: LogUnit
    residual: float
    mutual_information: float

    def in_unit(self, unit: LogUnit | str) -> "FundamentalReport":
        unit = LogUnit.parse(unit)
        if unit is self.unit:
            return self
        scale = 1.0 / math.log(2) if unit is LogUnit.BIT else math.log(2)
        return FundamentalReport(
            self.total_S * scale,
            self.computational_H * scale,
            self.noncomputational_S * scale,
            unit,
            self.residual * scale,
            self.mutual_information * scale,
        )

    def to_json(self) -> dict:
        out: dict = {}
        for unit in (LogUnit.NAT, LogUnit.BIT):
            r = self.in_unit(unit)
            out[unit.value] = {
                "total_S": r.total_S,
                "computational_H": r.computational_H,
                "noncomputational_S": r.noncomputational_S,
                "mutual_information": r.mutual_information,
                "residual": r.residual,
            }
        return out


def fundamental_theorem(d: Distribution, part: Partition, unit: LogUnit | str = NAT) -> FundamentalReport:
    """Evaluate the three entropies of S(Phi) = H(C) + S(Phi|C) independently.

    The conditional term is computed as the probability-weighted average of
    the within-block entropies (not as a difference), so the residual is a
    real check.  Raises InvariantViolation if the decomposition or the
    identity H(C) = I(Phi;C) fails beyond 1e-12.
    """
    unit = LogUnit.parse(unit)
    total = entropy(d, unit)
    comp = entropy(lift(d, part), unit)
    j = joint_of(d, part)
    nc = conditional_entropy(j, given="Y", unit=unit, method="average")
    mi = mutual_information(j, unit)
    residual = abs(total - comp - nc)
    if residual >= TOL:
        raise InvariantViolation(f"S(Phi) - H(C) - S(Phi|C) = {residual:.3e}")
    if abs(comp - mi) >= TOL:
        raise InvariantViolation(f"H(C) - I(Phi;C) = {abs(comp - mi):.3e}")
    return FundamentalReport(total, comp, nc, unit, residual, mi)
