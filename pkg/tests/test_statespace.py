import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from strategies import FIG3_HC, FIG3_PROBS, FIG3_S, FIG3_SNC, partitioned
from thermocomp.errors import SpaceMismatch, ValidationError
from thermocomp.infomath import BIT, NAT, Distribution, entropy, marginal
from thermocomp.statespace import (
    DUMMY_BLOCK,
    MicrostateSpace,
    Partition,
    fundamental_theorem,
    joint_of,
    lift,
)

TOL = 1e-12
F = Fraction

space5 = MicrostateSpace(5)
fig3 = space5.distribution(FIG3_PROBS)
fig3_part = Partition(space5, {"c1": [0, 1], "c2": [2, 3, 4]})


def test_default_labels():
    assert space5.labels == ("phi1", "phi2", "phi3", "phi4", "phi5")


class TestPartition:
    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            Partition(space5, {"a": [0, 1], "b": [1, 2]})

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            Partition(space5, {"a": [5]})

    def test_dummy_block_collects_uncovered(self):
        p = Partition(space5, {"c1": [0, 1]})
        assert p.blocks[DUMMY_BLOCK] == frozenset({2, 3, 4})
        assert lift(fig3, p).as_dict() == {"c1": F(1, 3), DUMMY_BLOCK: F(2, 3)}

    def test_empty_block_allowed(self):
        p = Partition(space5, {"empty": [], "all": range(5)})
        assert lift(fig3, p).probs == (0, 1)

    def test_json_round_trip(self):
        obj = json.loads(json.dumps(fig3_part.to_json()))
        assert obj == {"space_size": 5, "blocks": {"c1": [0, 1], "c2": [2, 3, 4]}}
        assert Partition.from_json(obj) == fig3_part


class TestLift:
    def test_fig3(self):
        assert lift(fig3, fig3_part).probs == (F(1, 3), F(2, 3))

    def test_singletons_identity(self):
        assert lift(fig3, Partition.singletons(space5)).probs == fig3.probs

    def test_single_block(self):
        assert lift(fig3, Partition.whole(space5)).probs == (1,)

    def test_mismatch(self):
        with pytest.raises(SpaceMismatch):
            lift(Distribution.uniform(4), fig3_part)

    def test_label_order_independent(self):
        shuffled = Distribution(tuple(reversed(fig3.support)), tuple(reversed(fig3.probs)))
        assert lift(shuffled, fig3_part) == lift(fig3, fig3_part)

    @given(partitioned())
    def test_exact_total(self, dp):
        d, part = dp
        assert sum(lift(d, part).probs) == 1


class TestJoint:
    def test_fig3(self):
        j = joint_of(fig3, fig3_part)
        assert len(j.rows) == 5 and len(j.cols) == 2
        assert marginal(j, "Y").probs == (F(1, 3), F(2, 3))
        assert marginal(j, "X") == fig3

    def test_point_mass(self):
        d = space5.distribution([0, 0, 1, 0, 0])
        j = joint_of(d, fig3_part)
        assert [c for row in j.cells for c in row].count(1) == 1

    def test_uniform_equal_blocks(self):
        space = MicrostateSpace(6)
        p = Partition(space, {"a": [0, 1], "b": [2, 3], "c": [4, 5]})
        assert lift(space.uniform(), p) == Distribution.uniform(("a", "b", "c"))

    @given(partitioned())
    def test_marginals_reproduce_inputs(self, dp):
        d, part = dp
        j = joint_of(d, part)
        assert marginal(j, "X") == d
        assert marginal(j, "Y") == lift(d, part)


class TestFundamentalTheorem:
    def test_fig3(self):
        r = fundamental_theorem(fig3, fig3_part, NAT)
        assert r.total_S == pytest.approx(FIG3_S, abs=TOL)
        assert r.computational_H == pytest.approx(FIG3_HC, abs=TOL)
        assert r.noncomputational_S == pytest.approx(FIG3_SNC, abs=TOL)
        assert r.residual < TOL
        assert r.mutual_information == pytest.approx(FIG3_HC, abs=TOL)

    def test_singletons(self):
        r = fundamental_theorem(fig3, Partition.singletons(space5))
        assert r.computational_H == pytest.approx(r.total_S, abs=TOL)
        assert r.noncomputational_S == pytest.approx(0, abs=TOL)

    def test_single_block(self):
        r = fundamental_theorem(fig3, Partition.whole(space5))
        assert r.computational_H == 0
        assert r.noncomputational_S == pytest.approx(r.total_S, abs=TOL)

    def test_units(self):
        r = fundamental_theorem(fig3, fig3_part, BIT)
        assert r.total_S == pytest.approx(FIG3_S / math.log(2), abs=TOL)
        js = fundamental_theorem(fig3, fig3_part).to_json()
        assert js["bit"]["computational_H"] == pytest.approx(FIG3_HC / math.log(2), abs=TOL)

    @given(partitioned(max_size=24))
    def test_decomposition(self, dp):
        d, part = dp
        r = fundamental_theorem(d, part)
        assert r.residual < TOL
        assert abs(r.computational_H - r.mutual_information) < TOL

    @given(partitioned(max_size=16), st.data())
    def test_refinement_never_lowers_computational_entropy(self, dp, data):
        d, part = dp
        label = data.draw(st.sampled_from([k for k, v in part.blocks.items() if len(v) > 1] or [None]))
        if label is None:
            return
        members = sorted(part.blocks[label])
        cut = data.draw(st.integers(1, len(members) - 1))
        blocks = {k: v for k, v in part.blocks.items() if k != label}
        blocks[label + "a"] = members[:cut]
        blocks[label + "b"] = members[cut:]
        finer = Partition(part.space, blocks)
        assert entropy(lift(d, finer)) >= entropy(lift(d, part)) - TOL
