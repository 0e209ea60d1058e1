"""Exact-probability distributions and the information measures built on them.

Probabilities are ``fractions.Fraction`` throughout, so normalization and
marginalization are checked with ``==`` rather than a tolerance.  Entropies
and the other log-measures are floats, evaluated in nats or bits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Literal, Mapping, NamedTuple, Sequence

from .errors import DivergentSurprise, EmptySupport, InvalidProbability, ValidationError

Rational = Fraction
Axis = Literal["X", "Y"]

TOL = 1e-12


class LogUnit(enum.Enum):
    NAT = "nat"
    BIT = "bit"

    @classmethod
    def parse(cls, value: "LogUnit | str") -> "LogUnit":
        if isinstance(value, LogUnit):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown log unit {value!r}", field="unit") from None

    def from_nats(self, value: float) -> float:
        return value if self is LogUnit.NAT else value / math.log(2)


NAT = LogUnit.NAT
BIT = LogUnit.BIT


def to_rational(value: Any, field: str = "probability") -> Fraction:
    """Coerce ``value`` to an exact Fraction.

    Accepts ints, Fractions and strings such as ``"3/8"`` or ``"0.25"``.
    Floats are refused: a binary float almost never denotes the rational the
    caller had in mind.
    """
    if isinstance(value, bool):
        raise InvalidProbability(f"{field}: booleans are not numbers", field=field)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise InvalidProbability(
            f"{field}: floats are not accepted, write {value!r} as a rational string", field=field
        )
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InvalidProbability(f"{field}: cannot parse {value!r} as a rational", field=field) from None
    raise InvalidProbability(f"{field}: unsupported type {type(value).__name__}", field=field)


def format_rational(q: Fraction) -> str:
    return str(q)


def _check_unit_interval(p: Fraction, field: str = "probability") -> None:
    if p and (p < 0 or p > 1):
        raise InvalidProbability(f"{field} {p} lies outside [0, 1]", field=field)


def _log(p: Fraction, unit: LogUnit) -> float:
    # log(n) - log(d) stays accurate for huge numerators/denominators where
    # float(p) would underflow.
    lg = math.log2 if unit is LogUnit.BIT else math.log
    return lg(p.numerator) - lg(p.denominator)


# ---------------------------------------------------------------------------
# Distributions


@dataclass(frozen=True)
class Distribution:
    """A finite probability distribution with exact rational weights.

    ``support`` and ``probs`` are parallel tuples.  Zero-probability outcomes
    are allowed and contribute nothing to any measure.
    """

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(self.support)
        probs = tuple(to_rational(p, field=f"probs[{i}]") for i, p in enumerate(self.probs))
        if not support:
            raise EmptySupport("distribution has an empty support", field="support")
        if len(support) != len(probs):
            raise ValidationError(
                f"support has {len(support)} labels but {len(probs)} probabilities", field="probs"
            )
        if len(set(support)) != len(support):
            raise ValidationError("support labels must be unique", field="support")
        for i, p in enumerate(probs):
            _check_unit_interval(p, field=f"probs[{i}]")
        total = sum((p for p in probs if p), Fraction(0))
        if total != 1:
            raise InvalidProbability(f"probabilities sum to {total}, not 1", field="probs")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, mapping: Mapping[Hashable, Any]) -> "Distribution":
        return cls(tuple(mapping), tuple(mapping.values()))

    @classmethod
    def uniform(cls, labels: Iterable[Hashable] | int) -> "Distribution":
        if isinstance(labels, int):
            labels = range(labels)
        labels = tuple(labels)
        if not labels:
            raise EmptySupport("cannot build a uniform distribution on nothing")
        return cls(labels, (Fraction(1, len(labels)),) * len(labels))

    @classmethod
    def point_mass(cls, labels: Iterable[Hashable], at: Hashable) -> "Distribution":
        labels = tuple(labels)
        if at not in labels:
            raise ValidationError(f"point-mass label {at!r} not in support", field="support")
        return cls(labels, tuple(Fraction(int(lab == at)) for lab in labels))

    @classmethod
    def from_weights(cls, labels: Iterable[Hashable], weights: Sequence[int | Fraction]) -> "Distribution":
        """Normalize nonnegative rational weights into a distribution."""
        weights = [to_rational(w, field="weight") for w in weights]
        total = sum(weights, Fraction(0))
        if total <= 0 or any(w < 0 for w in weights):
            raise InvalidProbability("weights must be nonnegative with a positive sum")
        return cls(tuple(labels), tuple(w / total for w in weights))

    def __len__(self) -> int:
        return len(self.support)

    def prob(self, label: Hashable) -> Fraction:
        try:
            return self.probs[self.support.index(label)]
        except ValueError:
            raise ValidationError(f"label {label!r} not in support", field="support") from None

    def items(self):
        return zip(self.support, self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def nonzero(self) -> tuple:
        return tuple(p for p in self.probs if p)

    def to_json(self) -> dict:
        return {"support": list(self.support), "probs": [format_rational(p) for p in self.probs]}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Distribution":
        if not isinstance(obj, Mapping) or "support" not in obj or "probs" not in obj:
            raise ValidationError("distribution JSON needs 'support' and 'probs'", field="distribution")
        support = obj["support"]
        for i, lab in enumerate(support):
            if not isinstance(lab, (str, int)) or isinstance(lab, bool):
                raise ValidationError(f"support[{i}] must be a string or integer", field=f"support[{i}]")
        return cls(tuple(support), tuple(obj["probs"]))


@dataclass(frozen=True)
class JointDistribution:
    """Joint distribution of two variables: rows are values of X, columns of Y."""

    rows: tuple
    cols: tuple
    cells: tuple

    def __post_init__(self):
        rows, cols = tuple(self.rows), tuple(self.cols)
        cells = tuple(
            tuple(to_rational(c, field=f"cells[{i}][{k}]") for k, c in enumerate(row))
            for i, row in enumerate(self.cells)
        )
        if not rows or not cols:
            raise EmptySupport("joint distribution needs at least one row and one column")
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValidationError("row and column labels must be unique", field="labels")
        if len(cells) != len(rows) or any(len(r) != len(cols) for r in cells):
            raise ValidationError(f"cells must form a {len(rows)}x{len(cols)} matrix", field="cells")
        for i, row in enumerate(cells):
            for k, c in enumerate(row):
                _check_unit_interval(c, field=f"cells[{i}][{k}]")
        total = sum((c for row in cells for c in row if c), Fraction(0))
        if total != 1:
            raise InvalidProbability(f"joint cells sum to {total}, not 1", field="cells")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_matrix(cls, cells: Sequence[Sequence[Any]]) -> "JointDistribution":
        return cls(tuple(range(len(cells))), tuple(range(len(cells[0]))), cells)

    @classmethod
    def product(cls, dx: Distribution, dy: Distribution) -> "JointDistribution":
        return cls(dx.support, dy.support, tuple(tuple(px * py for py in dy.probs) for px in dx.probs))

    @classmethod
    def from_pairs(cls, d: Distribution) -> "JointDistribution":
        """Build a joint from a distribution whose labels are ``(x, y)`` pairs."""
        rows: dict = {}
        cols: dict = {}
        for lab in d.support:
            x, y = lab
            rows.setdefault(x, None)
            cols.setdefault(y, None)
        ri = {x: i for i, x in enumerate(rows)}
        ci = {y: k for k, y in enumerate(cols)}
        grid = [[Fraction(0)] * len(cols) for _ in rows]
        for (x, y), p in d.items():
            grid[ri[x]][ci[y]] += p
        return cls(tuple(rows), tuple(cols), grid)

    def flatten(self) -> Distribution:
        return Distribution(
            tuple((x, y) for x in self.rows for y in self.cols),
            tuple(c for row in self.cells for c in row),
        )

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.cols, self.rows, tuple(zip(*self.cells)))

    def to_json(self) -> dict:
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "cells": [[format_rational(c) for c in row] for row in self.cells],
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "JointDistribution":
        return cls(tuple(obj["rows"]), tuple(obj["cols"]), obj["cells"])


# ---------------------------------------------------------------------------
# Single-outcome measures


def surprise(p: Any, unit: LogUnit | str = NAT) -> float:
    """Return ``-log p``: how much is learned when an outcome of probability p occurs."""
    p = to_rational(p)
    unit = LogUnit.parse(unit)
    if p < 0 or p > 1:
        raise InvalidProbability(f"probability {p} lies outside [0, 1]")
    if p == 0:
        raise DivergentSurprise("surprise of an impossible outcome is infinite")
    return -_log(p, unit)


def heaviness(p: Any, unit: LogUnit | str = NAT) -> float:
    """Return ``-p log p``, one outcome's share of the entropy (0 at p = 0)."""
    p = to_rational(p)
    unit = LogUnit.parse(unit)
    _check_unit_interval(p)
    if p == 0:
        return 0.0
    return -float(p) * _log(p, unit)


# ---------------------------------------------------------------------------
# Distribution measures


def expected_value(d: Distribution, f: Callable[[Hashable], float] | Mapping[Hashable, float]) -> float:
    if isinstance(f, Mapping):
        table = f
        f = table.__getitem__
    return math.fsum(float(p) * f(v) for v, p in d.items() if p)


def entropy(d: Distribution, unit: LogUnit | str = NAT) -> float:
    unit = LogUnit.parse(unit)
    # probabilities were validated on construction
    return math.fsum(-float(p) * _log(p, unit) for p in d.probs if p)


def entropy_of_probs(probs: Iterable[Fraction], unit: LogUnit | str = NAT) -> float:
    unit = LogUnit.parse(unit)
    return math.fsum(heaviness(p, unit) for p in probs if p)


def max_entropy(n: int, unit: LogUnit | str = NAT) -> float:
    unit = LogUnit.parse(unit)
    if n < 1:
        raise EmptySupport(f"maximum entropy needs n >= 1, got {n}")
    return math.log2(n) if unit is BIT else math.log(n)


def known_information(d: Distribution, unit: LogUnit | str = NAT) -> float:
    """Maximum entropy over the support minus the actual entropy."""
    return max_entropy(len(d), unit) - entropy(d, unit)


def known_information_by_expectation(d: Distribution, unit: LogUnit | str = NAT) -> float:
    """Same quantity as ``known_information``, computed as ``E[log(n p)]``."""
    unit = LogUnit.parse(unit)
    n = len(d)
    return math.fsum(float(p) * _log(n * p, unit) for p in d.probs if p)


class Capacity(NamedTuple):
    known: float
    entropy: float
    capacity: float


def information_capacity(d: Distribution, unit: LogUnit | str = NAT) -> Capacity:
    """Split the total capacity log n into known information K and entropy S."""
    s = entropy(d, unit)
    cap = max_entropy(len(d), unit)
    return Capacity(cap - s, s, cap)


# ---------------------------------------------------------------------------
# Two-variable measures


def _check_axis(axis: str) -> str:
    if axis not in ("X", "Y"):
        raise ValidationError(f"axis must be 'X' or 'Y', got {axis!r}", field="axis")
    return axis


def marginal(j: JointDistribution, axis: Axis) -> Distribution:
    """Marginal distribution of the X (row) or Y (column) variable."""
    if _check_axis(axis) == "X":
        return Distribution(j.rows, tuple(sum((c for c in row if c), Fraction(0)) for row in j.cells))
    return Distribution(j.cols, tuple(sum((c for c in col if c), Fraction(0)) for col in zip(*j.cells)))


def joint_entropy(j: JointDistribution, unit: LogUnit | str = NAT) -> float:
    return entropy_of_probs((c for row in j.cells for c in row), unit)


def conditional_entropy(
    j: JointDistribution,
    given: Axis,
    unit: LogUnit | str = NAT,
    method: Literal["chain", "average"] = "chain",
) -> float:
    """Entropy of one variable conditioned on the other.

    ``given="Y"`` returns H(X|Y).  ``method="chain"`` evaluates
    H(X,Y) - H(Y); ``method="average"`` evaluates sum_y P(y) H(X | Y=y)
    directly from the conditional distributions.  The two agree to within
    float rounding and the test-suite holds them against each other.
    """
    unit = LogUnit.parse(unit)
    _check_axis(given)
    if method == "chain":
        return joint_entropy(j, unit) - entropy(marginal(j, given), unit)
    if method != "average":
        raise ValidationError(f"unknown method {method!r}", field="method")
    slices = zip(*j.cells) if given == "Y" else j.cells
    terms = []
    for sl in slices:
        mass = sum((c for c in sl if c), Fraction(0))
        if mass:
            terms.append(float(mass) * entropy_of_probs((c / mass for c in sl if c), unit))
    return math.fsum(terms)


def mutual_information(j: JointDistribution, unit: LogUnit | str = NAT) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y)."""
    unit = LogUnit.parse(unit)
    return entropy(marginal(j, "X"), unit) + entropy(marginal(j, "Y"), unit) - joint_entropy(j, unit)


def independent_entropy(
    j: JointDistribution,
    of: Axis,
    unit: LogUnit | str = NAT,
    method: Literal["mutual", "conditional"] = "mutual",
) -> float:
    """Entropy of one variable not accounted for by its correlation with the other.

    ``method="mutual"`` computes H(of) - I(X;Y); ``method="conditional"``
    computes H(of | other).  These are the same quantity.
    """
    unit = LogUnit.parse(unit)
    _check_axis(of)
    if method == "mutual":
        return entropy(marginal(j, of), unit) - mutual_information(j, unit)
    if method != "conditional":
        raise ValidationError(f"unknown method {method!r}", field="method")
    other = "Y" if of == "X" else "X"
    return conditional_entropy(j, given=other, unit=unit, method="average")


def binary_entropy(p: Any, unit: LogUnit | str = BIT) -> float:
    p = to_rational(p)
    return heaviness(p, unit) + heaviness(1 - p, unit)
