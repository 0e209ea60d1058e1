"""Heaviness trees: one branch per outcome, width = probability, length = surprise.

A branch's area is its heaviness, so the tree's total area is the entropy.
Grouping outcomes into blocks splits each branch into a shared trunk (length
``-log P(block)``) and a private stem (length ``-log p(outcome | block)``).
Lengths add, widths add, and the total area is unchanged: trunk area is
H(C) and stem area is S(Phi|C).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Literal, Mapping
from xml.sax.saxutils import escape, quoteattr

from .errors import InvariantViolation, PartitionMismatch, ZeroBranch
from .infomath import NAT, TOL, Distribution, LogUnit, surprise
from .statespace import Partition


@dataclass(frozen=True)
class Leaf:
    label: Hashable
    prob: Fraction
    depth: float

    @property
    def area(self) -> float:
        return float(self.prob) * self.depth


@dataclass(frozen=True)
class Stem:
    label: Hashable
    prob: Fraction
    cond_prob: Fraction
    length: float

    @property
    def area(self) -> float:
        return float(self.prob) * self.length


@dataclass(frozen=True)
class Trunk:
    label: Hashable
    prob: Fraction
    length: float
    stems: tuple

    @property
    def area(self) -> float:
        return float(self.prob) * self.length


@dataclass(frozen=True)
class HeavinessTree:
    leaves: tuple
    unit: LogUnit = NAT
    trunks: tuple | None = None
    omitted: tuple = ()

    @property
    def grouped(self) -> bool:
        return self.trunks is not None

    def leaf_area(self) -> float:
        return math.fsum(l.area for l in self.leaves)

    def trunk_area(self) -> float:
        return math.fsum(t.area for t in self.trunks or ())

    def stem_area(self) -> float:
        return math.fsum(s.area for t in self.trunks or () for s in t.stems)

    def total_area(self) -> float:
        if self.grouped:
            return math.fsum(segment_areas(self))
        return self.leaf_area()


def segment_areas(t: HeavinessTree) -> list[float]:
    if not t.grouped:
        return [l.area for l in t.leaves]
    return [tr.area for tr in t.trunks] + [s.area for tr in t.trunks for s in tr.stems]


def build_tree(d: Distribution, unit: LogUnit | str = NAT, zero: Literal["omit", "error"] = "omit") -> HeavinessTree:
    unit = LogUnit.parse(unit)
    leaves, omitted = [], []
    for label, p in d.items():
        if p == 0:
            if zero == "error":
                raise ZeroBranch(f"outcome {label!r} has probability 0 and no finite branch length")
            omitted.append(label)
            continue
        leaves.append(Leaf(label, p, surprise(p, unit)))
    return HeavinessTree(tuple(leaves), unit, None, tuple(omitted))


def group_tree(
    t: HeavinessTree,
    part: Mapping[Hashable, Iterable[Hashable]] | Partition,
    unit: LogUnit | str | None = None,
) -> HeavinessTree:
    """Merge the lower parts of the branches of each block into a trunk.

    ``part`` maps block labels to leaf labels.  A statespace ``Partition``
    is also accepted; its microstate indices are read as positions in the
    space's label list.
    """
    unit = LogUnit.parse(unit) if unit is not None else t.unit
    if isinstance(part, Partition):
        labels = part.space.labels
        part = {c: [labels[i] for i in sorted(members)] for c, members in part.blocks.items()}
    by_label = {l.label: l for l in t.leaves}
    known = set(by_label) | set(t.omitted)
    seen: set = set()
    for c, members in part.items():
        members = list(members)
        bad = [m for m in members if m not in known]
        if bad:
            raise PartitionMismatch(f"block {c!r} names unknown leaves {bad}", field=f"blocks.{c}")
        dup = seen & set(members)
        if dup:
            raise PartitionMismatch(f"block {c!r} repeats leaves {sorted(map(str, dup))}", field=f"blocks.{c}")
        seen |= set(members)
    if set(by_label) - seen:
        raise PartitionMismatch(f"leaves {sorted(map(str, set(by_label) - seen))} are not covered", field="blocks")

    leaves = tuple(Leaf(l.label, l.prob, surprise(l.prob, unit)) for l in t.leaves)
    by_label = {l.label: l for l in leaves}
    trunks = []
    for c, members in part.items():
        present = [by_label[m] for m in members if m in by_label]
        mass = sum((l.prob for l in present), Fraction(0))
        if not mass:
            continue
        stems = tuple(Stem(l.label, l.prob, l.prob / mass, surprise(l.prob / mass, unit)) for l in present)
        trunks.append(Trunk(c, mass, surprise(mass, unit), stems))
    grouped = HeavinessTree(leaves, unit, tuple(trunks), t.omitted)
    check_grouping(grouped)
    return grouped


def check_grouping(t: HeavinessTree) -> None:
    """Raise InvariantViolation unless depth, width and area are conserved."""
    depth = {l.label: l.depth for l in t.leaves}
    for tr in t.trunks or ():
        if sum((s.prob for s in tr.stems), Fraction(0)) != tr.prob:
            raise InvariantViolation(f"trunk {tr.label!r} width differs from its stems")
        for s in tr.stems:
            if abs(tr.length + s.length - depth[s.label]) >= TOL:
                raise InvariantViolation(f"leaf {s.label!r} changed depth under grouping")
    if t.grouped and abs(t.total_area() - t.leaf_area()) >= TOL:
        raise InvariantViolation("grouping changed the tree's total area")


# ---------------------------------------------------------------------------
# Rendering

COLORS = {"leaf": "#2ca02c", "trunk": "#1f77b4", "stem": "#d62728"}


@dataclass(frozen=True)
class SvgOptions:
    """Scale: ``length_scale`` px per log unit, ``width_scale`` px per unit probability."""

    length_scale: float = 200.0
    width_scale: float = 200.0
    orientation: Literal["horizontal", "vertical"] = "horizontal"
    margin: float = 20.0
    gap: float = 0.0
    title: str | None = None
    colors: Mapping[str, str] = field(default_factory=lambda: dict(COLORS))


def _num(x: float) -> str:
    s = f"{x:.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _segments(t: HeavinessTree):
    """Yield (kind, label, prob, offset_along_prob_axis, start_along_length, length)."""
    if not t.grouped:
        y = Fraction(0)
        for l in t.leaves:
            yield "leaf", l.label, l.prob, y, 0.0, l.depth
            y += l.prob
        return
    y = Fraction(0)
    for tr in t.trunks:
        yield "trunk", tr.label, tr.prob, y, 0.0, tr.length
        sy = y
        for s in tr.stems:
            yield "stem", s.label, s.prob, sy, tr.length, s.length
            sy += s.prob
        y += tr.prob


def render_svg(t: HeavinessTree, options: SvgOptions | None = None) -> str:
    """Deterministic SVG 1.1 drawing of the tree, one ``rect`` per segment.

    Every rect carries ``data-kind``, ``data-label``, ``data-prob`` (exact)
    and ``data-length`` so the geometry can be parsed back and checked.
    """
    o = options or SvgOptions()
    m = o.margin
    max_len = max((start + length for *_, start, length in _segments(t)), default=0.0)
    n_gaps = max(len(t.trunks or t.leaves) - 1, 0)
    span_p = o.width_scale + o.gap * n_gaps
    span_l = max_len * o.length_scale
    horizontal = o.orientation == "horizontal"
    width = 2 * m + (span_l if horizontal else span_p)
    height = 2 * m + (span_p if horizontal else span_l)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
    ]
    if o.title:
        lines.append(f"  <title>{escape(o.title)}</title>")
    lines.append(
        f'  <desc>heaviness tree, unit={t.unit.value}, grouped={str(t.grouped).lower()}, '
        f'area={_num(t.total_area())}</desc>'
    )
    group_idx = -1
    for kind, label, prob, off, start, length in _segments(t):
        if kind != "stem":
            group_idx += 1
        p_pos = m + float(off) * o.width_scale + o.gap * group_idx
        p_size = float(prob) * o.width_scale
        l_pos = start * o.length_scale
        l_size = length * o.length_scale
        if horizontal:
            x, y, w, h = m + l_pos, p_pos, l_size, p_size
        else:
            x, y, w, h = p_pos, height - m - l_pos - l_size, p_size, l_size
        lines.append(
            f'  <rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}" '
            f'fill="{o.colors[kind]}" stroke="#000000" stroke-width="0.5" '
            f'data-kind="{kind}" data-label={quoteattr(str(label))} data-prob="{prob}" '
            f'data-length="{_num(length)}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_table(t: HeavinessTree, unit: LogUnit | str | None = None) -> str:
    """Plain-ASCII table of probabilities, surprises and heavinesses."""
    unit = LogUnit.parse(unit) if unit is not None else t.unit
    if unit is not t.unit:
        t = _reunit(t, unit)
    header = ("label", "probability", "surprise", "heaviness")
    body: list = []

    def row(label, prob, length):
        body.append((str(label), str(prob), f"{length:.6f}", f"{float(prob) * length:.6f}"))

    def total(name, value):
        body.append((name, "", "", f"{value:.6f}"))

    if not t.grouped:
        for l in t.leaves:
            row(l.label, l.prob, l.depth)
        body.append(None)
        total("total S", t.leaf_area())
    else:
        body.append(("[trunks]", "P(c)", "", ""))
        for tr in t.trunks:
            row(tr.label, tr.prob, tr.length)
        total("subtotal H(C)", t.trunk_area())
        body.append(None)
        body.append(("[stems]", "p(phi|c)", "", ""))
        for tr in t.trunks:
            for s in tr.stems:
                body.append((f"{s.label} | {tr.label}", str(s.cond_prob), f"{s.length:.6f}", f"{s.area:.6f}"))
        total("subtotal S(Phi|C)", t.stem_area())
        body.append(None)
        total("total S", t.total_area())

    rows = [r for r in body if r is not None]
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(4)]
    fmt = lambda r: "  ".join(c.ljust(w) if k < 2 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths))).rstrip()
    rule = "  ".join("-" * w for w in widths)
    out = [f"heaviness tree ({unit.value}s)", fmt(header), rule]
    out += [rule if r is None else fmt(r) for r in body]
    return "\n".join(out) + "\n"


def _reunit(t: HeavinessTree, unit: LogUnit) -> HeavinessTree:
    base = HeavinessTree(tuple(Leaf(l.label, l.prob, surprise(l.prob, unit)) for l in t.leaves), unit, None, t.omitted)
    if not t.grouped:
        return base
    return group_tree(base, {tr.label: [s.label for s in tr.stems] for tr in t.trunks}, unit)


def tree_to_json(t: HeavinessTree) -> dict:
    out = {
        "unit": t.unit.value,
        "leaves": [{"label": l.label, "prob": str(l.prob), "depth": l.depth, "area": l.area} for l in t.leaves],
        "total_area": t.total_area(),
    }
    if t.grouped:
        out["trunks"] = [
            {
                "label": tr.label,
                "prob": str(tr.prob),
                "length": tr.length,
                "area": tr.area,
                "stems": [
                    {"label": s.label, "cond_prob": str(s.cond_prob), "length": s.length, "area": s.area}
                    for s in tr.stems
                ],
            }
            for tr in t.trunks
        ]
        out["trunk_area"] = t.trunk_area()
        out["stem_area"] = t.stem_area()
    return out
