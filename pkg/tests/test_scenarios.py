import json
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from thermocomp.errors import InvariantViolation, MergeStateError, NotEnvironment, UnknownRegister, ValidationError
from thermocomp.infomath import BIT, binary_entropy, conditional_entropy, mutual_information
from thermocomp.scenarios import (
    CANNED,
    GlobalState,
    Ledger,
    Protocol,
    RegisterFile,
    Step,
    apply_step,
    fig_corr1,
    fig_corr2,
    fig_corr3,
    fig_mutinfo,
    logical_kernel,
    run,
    step_cnot,
    step_input,
    step_merge,
    step_swap,
    step_thermalize,
    step_unmerge,
)
from thermocomp.realize import classify

TOL = 1e-12
LN2 = math.log(2)
F = Fraction

BE = RegisterFile(("B",), ("E",))
IRE = RegisterFile(("I", "R"), ("E",))


def bits(state, names):
    return state.entropy_of(names, BIT)


def mi_bits(state, x, y):
    return mutual_information(state.pair_joint(x, y), BIT)


def S(state):
    return Ledger.of(state).S_total / LN2


class TestInput:
    def test_fresh_bit(self):
        s = step_input(GlobalState.initial(BE), "B")
        assert bits(s, ["B"]) == pytest.approx(1, abs=TOL)
        assert mi_bits(s, ["B"], ["E"]) == pytest.approx(0, abs=TOL)
        assert sorted(t for t, _ in s.items()) == [(0, 0), (1, 0)]

    def test_idempotent_on_marginals(self):
        s1 = step_input(GlobalState.initial(BE), "B")
        s2 = step_input(s1, "B")
        assert s1.joint == s2.joint

    def test_biased(self):
        s = step_input(GlobalState.initial(BE), "B", F(1, 4))
        assert s.marginal(["B"]) == {(0,): F(3, 4), (1,): F(1, 4)}

    def test_unknown(self):
        with pytest.raises(UnknownRegister):
            step_input(GlobalState.initial(BE), "Q")


class TestSwapCnot:
    def test_swap_moves_entropy(self):
        s = step_swap(step_input(GlobalState.initial(BE), "B"), "B", "E")
        assert bits(s, ["B"]) == pytest.approx(0, abs=TOL)
        assert bits(s, ["E"]) == pytest.approx(1, abs=TOL)

    def test_swap_self_inverse(self):
        s = step_input(GlobalState.initial(IRE), "I", F(1, 3))
        assert step_swap(step_swap(s, "I", "E"), "I", "E").joint == s.joint

    def test_swap_relabels_mutual_information(self):
        s = step_cnot(step_input(GlobalState.initial(IRE), "I"), "I", "R")
        t = step_swap(s, "R", "E")
        assert mi_bits(t, ["I"], ["E"]) == pytest.approx(mi_bits(s, ["I"], ["R"]), abs=TOL)
        assert mi_bits(t, ["I"], ["R"]) == pytest.approx(0, abs=TOL)

    def test_cnot_correlates(self):
        s = step_cnot(step_input(GlobalState.initial(IRE), "I"), "I", "R")
        assert dict(s.items()) == {(0, 0, 0): F(1, 2), (1, 1, 0): F(1, 2)}
        assert mi_bits(s, ["I"], ["R"]) == pytest.approx(1, abs=TOL)

    def test_cnot_twice_decomputes(self):
        s = step_cnot(step_input(GlobalState.initial(IRE), "I"), "I", "R")
        s2 = step_cnot(s, "I", "R")
        assert s2.marginal(["R"]) == {(0,): 1}

    def test_cnot_zero_control_noop(self):
        s = step_input(GlobalState.initial(IRE), "R")
        assert step_cnot(s, "I", "R").joint == s.joint

    def test_distinct(self):
        with pytest.raises(ValidationError):
            Step.swap("B", "B")
        with pytest.raises(ValidationError):
            step_cnot(GlobalState.initial(BE), "B", "B")


class TestThermalize:
    def test_uniform_uncorrelated_unchanged(self):
        s = GlobalState.initial(BE, hot=("E",))
        for mode in ("decorrelate", "uniform"):
            assert step_thermalize(s, ["E"], mode).joint == s.joint

    def test_correlated_env(self):
        s = step_swap(step_cnot(step_input(GlobalState.initial(IRE), "I"), "I", "R"), "R", "E")
        t = step_thermalize(s, ["E"])
        assert mi_bits(s, ["I"], ["E"]) == pytest.approx(1, abs=TOL)
        assert mi_bits(t, ["I"], ["E"]) == pytest.approx(0, abs=TOL)
        assert S(t) - S(s) == pytest.approx(1, abs=TOL)

    def test_cold_env_heats_in_uniform_mode(self):
        s = GlobalState.initial(BE)
        assert S(step_thermalize(s, ["E"], "uniform")) - S(s) == pytest.approx(1, abs=TOL)
        assert step_thermalize(s, ["E"]).joint == s.joint

    def test_rejects_computational(self):
        with pytest.raises(NotEnvironment):
            step_thermalize(GlobalState.initial(BE), ["B"])

    def test_merged_register_allowed(self):
        s = step_merge(GlobalState.initial(BE), "B")
        step_thermalize(s, ["B"])


class TestMerge:
    def correlated(self):
        regs = RegisterFile(("X", "Y"), ())
        return step_cnot(step_input(GlobalState.initial(regs), "X"), "X", "Y")

    def test_reclassifies(self):
        s = self.correlated()
        m = step_merge(s, "Y")
        assert m.computational == ("X",)
        assert Ledger.of(m).S_nc == pytest.approx(0, abs=TOL)
        assert Ledger.of(s).H_comp == pytest.approx(LN2, abs=TOL)

    def test_merge_unmerge_identity(self):
        s = self.correlated()
        back = step_unmerge(step_merge(s, "Y"), "Y")
        assert back == s
        assert Ledger.of(back) == Ledger.of(s)

    def test_correlated_loses_mutual_information(self):
        s = self.correlated()
        before = S(s)
        t = step_unmerge(step_thermalize(step_merge(s, "Y"), ["Y"]), "Y")
        assert S(t) - before == pytest.approx(mi_bits(s, ["X"], ["Y"]), abs=TOL)
        assert mi_bits(t, ["X"], ["Y"]) == pytest.approx(0, abs=TOL)

    def test_uncorrelated_uniform_free(self):
        regs = RegisterFile(("X", "Y"), ())
        s = step_input(step_input(GlobalState.initial(regs), "X"), "Y")
        t = step_unmerge(step_thermalize(step_merge(s, "Y"), ["Y"]), "Y")
        assert S(t) == pytest.approx(S(s), abs=TOL)

    def test_errors(self):
        s = self.correlated()
        with pytest.raises(MergeStateError):
            step_unmerge(s, "Y")
        with pytest.raises(MergeStateError):
            step_merge(step_merge(s, "Y"), "Y")
        with pytest.raises(MergeStateError):
            step_merge(GlobalState.initial(BE), "E")


class TestRun:
    def test_corr1(self):
        tl = fig_corr1().run()
        assert tl.delta_S_total == pytest.approx(0, abs=TOL)
        assert tl.entries[1].ledger.H["B"] / LN2 == pytest.approx(1, abs=TOL)
        assert tl.final.ledger.H["B"] / LN2 == pytest.approx(1, abs=TOL)

    def test_corr2(self):
        tl = fig_corr2().run()
        assert tl.entries[1].ledger.S_total / LN2 == pytest.approx(1, abs=TOL)
        assert tl.final.ledger.S_total / LN2 == pytest.approx(2, abs=TOL)
        assert tl.delta_S_total == pytest.approx(LN2, abs=TOL)

    @pytest.mark.parametrize("p", [F(1, 8), F(1, 4), F(1, 2), F(3, 4)])
    def test_corr2_bias(self, p):
        tl = fig_corr2(p).run()
        assert tl.delta_S_total / LN2 == pytest.approx(binary_entropy(p, BIT), abs=TOL)

    def test_corr3(self):
        tl = fig_corr3().run()
        assert tl.delta_S_total == pytest.approx(0, abs=TOL)
        assert tl.final.state.marginal(["R"]) == {(0,): 1}

    def test_mutinfo(self):
        tl = fig_mutinfo().run()
        assert tl.delta_S_total / LN2 == pytest.approx(1, abs=TOL)

    def test_error_carries_step_index(self):
        steps = [Step.input("B"), Step.swap("B", "E"), Step.thermalize("B")]
        with pytest.raises(NotEnvironment) as info:
            run(steps, BE)
        assert info.value.step_index == 2
        assert info.value.field.startswith("steps[2]")

    def test_unknown_register_in_protocol(self):
        with pytest.raises(UnknownRegister) as info:
            run([Step.input("B"), Step.cnot("B", "Z")], BE)
        assert info.value.step_index == 1

    def test_decreasing_total_detected(self, monkeypatch):
        import thermocomp.scenarios as sc

        # a step that secretly resets every register to 0 must trip the guard
        monkeypatch.setattr(sc, "apply_step", lambda state, step: GlobalState.initial(state.registers))
        with pytest.raises(InvariantViolation):
            run([Step.swap("B", "E")], BE, hot=("E",))

    def test_table(self):
        text = fig_corr2().run().render_table(BIT)
        assert "entropy produced (delta S_total): 1.000000" in text
        assert text.count("\n") == 3 + 6 + 2


class TestLogicalKernel:
    def test_corr1_irreversible_overall(self):
        p = fig_corr1()
        k = logical_kernel(p.steps, p.registers)
        assert not classify(k).deterministic
        assert not classify(k).reversible

    def test_corr1_deterministic_part_is_identity(self):
        p = fig_corr1()
        k = logical_kernel(p.steps, p.registers, deterministic_only=True)
        assert all(k.p(i, i) == 1 for i in k.states_in)

    def test_corr3_reversible(self):
        p = fig_corr3()
        k = logical_kernel(p.steps, p.registers, p.hot)
        assert classify(k) == (True, True)


# -- properties -------------------------------------------------------------

REG4 = RegisterFile(("A", "B"), ("E", "F"))
_names = REG4.names
_pairs = st.tuples(st.sampled_from(_names), st.sampled_from(_names)).filter(lambda ab: ab[0] != ab[1])
steps_st = st.one_of(
    st.builds(Step.input, st.sampled_from(_names), st.sampled_from([F(1, 2), F(1, 3), F(1, 5)])),
    _pairs.map(lambda ab: Step.swap(*ab)),
    _pairs.map(lambda ab: Step.cnot(*ab)),
)


@st.composite
def random_state(draw):
    seq = draw(st.lists(steps_st, max_size=6))
    s = GlobalState.initial(REG4)
    for step in seq:
        s = apply_step(s, step)
    return s


@settings(max_examples=60, deadline=None)
@given(random_state(), st.sampled_from(_names), st.sampled_from(_names))
def test_bijective_steps_conserve_multiset(s, a, b):
    if a == b:
        return
    for t in (step_swap(s, a, b), step_cnot(s, a, b)):
        assert Counter(p for _, p in t.items()) == Counter(p for _, p in s.items())
        assert sum(t.joint.probs) == 1


@settings(max_examples=60, deadline=None)
@given(random_state(), st.sampled_from([("E",), ("F",), ("E", "F")]))
def test_thermalize_adds_lost_mutual_information(s, env):
    rest = [n for n in _names if n not in env]
    lost = mi_bits(s, list(env), rest)
    t = step_thermalize(s, env)
    assert S(t) - S(s) == pytest.approx(lost, abs=1e-11)
    assert mi_bits(t, list(env), rest) == pytest.approx(0, abs=TOL)
    assert sum(t.joint.probs) == 1


@settings(max_examples=40, deadline=None)
@given(random_state())
def test_independent_entropy_identity(s):
    lg = Ledger.of(s)
    for n in _names:
        assert lg.S_ind[n] == pytest.approx(lg.H[n] - lg.I_rest[n], abs=TOL)
    for x in _names:
        for y in _names:
            if x == y:
                continue
            j = s.pair_joint([x], [y])
            assert conditional_entropy(j, given="X") == pytest.approx(lg.H[y] - mi_bits(s, [x], [y]) * LN2, abs=TOL)


class TestJson:
    @pytest.mark.parametrize("name", sorted(CANNED))
    def test_protocol_round_trip(self, name):
        p = CANNED[name]()
        again = Protocol.from_json(json.loads(json.dumps(p.to_json())))
        assert again == p
        assert again.run().delta_S_total == pytest.approx(p.run().delta_S_total, abs=TOL)

    def test_example_shape(self):
        obj = {
            "registers": {"comp": ["I", "R"], "env": ["E"]},
            "steps": [{"op": "input", "target": "I"}, {"op": "cnot", "control": "I", "target": "R"}],
        }
        tl = Protocol.from_json(obj).run()
        js = tl.to_json()
        assert js["steps"][-1]["joint"] == {"000": "1/2", "110": "1/2"}
        assert js["summary"]["bit"]["imported"] == pytest.approx(1, abs=TOL)

    def test_bad_step_tagged(self):
        with pytest.raises(ValidationError) as info:
            Protocol.from_json({"registers": {"comp": ["B"]}, "steps": [{"op": "input", "target": "B"}, {"op": "jump"}]})
        assert info.value.step_index == 1
