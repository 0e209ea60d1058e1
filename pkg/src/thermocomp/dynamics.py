"""Bijective microstate dynamics and what happens to entropy under them.

A ``Permutation`` conserves entropy exactly.  A ``DynamicsEnsemble`` (a
weighted mixture of permutations, i.e. dynamics we are unsure of) can only
raise it.  A ``LossyMap`` that merges occupied states lowers it, which is why
real microphysics cannot be lossy.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import SizeMismatch, ValidationError
from .infomath import NAT, Distribution, LogUnit, entropy, to_rational


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``0..N-1``; microstate ``i`` moves to ``mapping[i]``."""

    mapping: tuple

    def __post_init__(self):
        mapping = tuple(self.mapping)
        if not mapping:
            raise ValidationError("a permutation needs at least one element", field="map")
        if any(not isinstance(x, int) or isinstance(x, bool) for x in mapping):
            raise ValidationError("permutation entries must be integers", field="map")
        if sorted(mapping) != list(range(len(mapping))):
            raise ValidationError(f"{list(mapping)} is not a permutation of 0..{len(mapping) - 1}", field="map")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def cycle_shift(cls, n: int, k: int = 1) -> "Permutation":
        return cls(tuple((i + k) % n for i in range(n)))

    @classmethod
    def random(cls, n: int, rng: random.Random | None = None) -> "Permutation":
        rng = rng or random.Random()
        m = list(range(n))
        rng.shuffle(m)
        return cls(tuple(m))

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for src, dst in enumerate(self.mapping):
            inv[dst] = src
        return Permutation(tuple(inv))

    def to_json(self) -> dict:
        return {"map": list(self.mapping)}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Permutation":
        if not isinstance(obj, Mapping) or "map" not in obj:
            raise ValidationError("permutation JSON needs 'map'", field="map")
        return cls(tuple(obj["map"]))


@dataclass(frozen=True)
class LossyMap:
    """Total map on ``0..N-1`` that may send several states to one target."""

    mapping: tuple

    def __post_init__(self):
        mapping = tuple(self.mapping)
        n = len(mapping)
        if not mapping or any(not isinstance(x, int) or not 0 <= x < n for x in mapping):
            raise ValidationError(f"lossy map entries must lie in 0..{n - 1}", field="map")
        object.__setattr__(self, "mapping", mapping)

    def __len__(self) -> int:
        return len(self.mapping)

    def is_injective(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)


@dataclass(frozen=True)
class DynamicsEnsemble:
    """Weighted alternatives for the true (unknown) bijective dynamics."""

    branches: tuple

    def __post_init__(self):
        branches = tuple((to_rational(w, field="w"), p) for w, p in self.branches)
        if not branches:
            raise ValidationError("ensemble needs at least one branch", field="branches")
        sizes = {len(p) for _, p in branches}
        if len(sizes) != 1:
            raise SizeMismatch(f"ensemble branches act on different sizes {sorted(sizes)}")
        if any(w < 0 for w, _ in branches):
            raise ValidationError("branch weights must be nonnegative", field="w")
        total = sum((w for w, _ in branches), Fraction(0))
        if total != 1:
            raise ValidationError(f"branch weights sum to {total}, not 1", field="w")
        object.__setattr__(self, "branches", branches)

    @property
    def size(self) -> int:
        return len(self.branches[0][1])

    def to_json(self) -> dict:
        return {"branches": [{"w": str(w), "map": list(p.mapping)} for w, p in self.branches]}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "DynamicsEnsemble":
        if not isinstance(obj, Mapping) or "branches" not in obj:
            raise ValidationError("ensemble JSON needs 'branches'", field="branches")
        return cls(tuple((b["w"], Permutation(tuple(b["map"]))) for b in obj["branches"]))


def _check_size(n: int, d: Distribution) -> None:
    if n != len(d):
        raise SizeMismatch(f"dynamics on {n} states applied to a distribution over {len(d)}")


def _push(mapping: Sequence[int], d: Distribution) -> list[Fraction]:
    out = [Fraction(0)] * len(d)
    for src, p in enumerate(d.probs):
        out[mapping[src]] += p
    return out


def apply(perm: Permutation, d: Distribution) -> Distribution:
    """Move each microstate's probability to its image (labels keep their positions)."""
    _check_size(len(perm), d)
    return Distribution(d.support, tuple(_push(perm.mapping, d)))


def compose(outer: Permutation, inner: Permutation) -> Permutation:
    """``outer`` after ``inner``: ``compose(f, g)(x) == f(g(x))``."""
    if len(outer) != len(inner):
        raise SizeMismatch(f"cannot compose permutations of sizes {len(outer)} and {len(inner)}")
    return Permutation(tuple(outer.mapping[i] for i in inner.mapping))


def compose_all(perms: Iterable[Permutation]) -> Permutation:
    """Compose a time-ordered sequence (first element applied first)."""
    perms = list(perms)
    result = perms[0]
    for p in perms[1:]:
        result = compose(p, result)
    return result


def apply_ensemble(e: DynamicsEnsemble, d: Distribution) -> Distribution:
    _check_size(e.size, d)
    out = [Fraction(0)] * len(d)
    for w, perm in e.branches:
        if not w:
            continue
        for k, p in enumerate(_push(perm.mapping, d)):
            out[k] += w * p
    return Distribution(d.support, tuple(out))


def apply_lossy(m: LossyMap, d: Distribution, unit: LogUnit | str = NAT) -> tuple[Distribution, float]:
    """Apply a possibly many-to-one map; returns the image and S_after - S_before."""
    _check_size(len(m), d)
    out = Distribution(d.support, tuple(_push(m.mapping, d)))
    return out, entropy(out, unit) - entropy(d, unit)


def shifted_pair_ensemble(probs: Sequence[Any]) -> tuple[Distribution, DynamicsEnsemble]:
    """The 'upper vs. lower target states' construction.

    ``n`` source states are embedded in ``n + 1`` target states.  With weight
    1/2 they land on targets ``0..n-1`` (identity) and with weight 1/2 on
    targets ``1..n`` (one-step cyclic shift; the empty extra state wraps to
    slot 0).  Returns the embedded initial distribution and the ensemble.
    """
    n = len(probs)
    d = Distribution(tuple(range(n + 1)), tuple(probs) + (Fraction(0),))
    half = Fraction(1, 2)
    ens = DynamicsEnsemble(((half, Permutation.identity(n + 1)), (half, Permutation.cycle_shift(n + 1))))
    return d, ens
