import math
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest
from hypothesis import given, settings

from strategies import FIG3_HC, FIG3_PROBS, FIG3_S, FIG3_SNC, distributions, partitioned
from thermocomp.errors import PartitionMismatch, ZeroBranch
from thermocomp.infomath import BIT, NAT, Distribution, entropy
from thermocomp.statespace import MicrostateSpace, Partition, fundamental_theorem
from thermocomp.treeviz import (
    COLORS,
    SvgOptions,
    build_tree,
    group_tree,
    render_svg,
    render_table,
    segment_areas,
    tree_to_json,
)

TOL = 1e-12
F = Fraction
SVG = "{http://www.w3.org/2000/svg}"

space5 = MicrostateSpace(5)
fig3 = space5.distribution(FIG3_PROBS)
fig3_blocks = {"c1": ["phi1", "phi2"], "c2": ["phi3", "phi4", "phi5"]}


def rects(svg):
    return ET.fromstring(svg.encode()).findall(f"{SVG}rect")


def drawn_area(svg, opts):
    return math.fsum(float(r.get("width")) * float(r.get("height")) for r in rects(svg)) / (
        opts.length_scale * opts.width_scale
    )


class TestBuild:
    def test_uniform_bits(self):
        t = build_tree(Distribution.uniform(2), BIT)
        assert [l.depth for l in t.leaves] == pytest.approx([1, 1], abs=TOL)
        assert t.total_area() == pytest.approx(1, abs=TOL)

    def test_fig3(self):
        t = build_tree(fig3, NAT)
        expected = [math.log(x) for x in (12, 4, 9, 4.5, 3)]
        assert [l.depth for l in t.leaves] == pytest.approx(expected, abs=TOL)
        assert t.total_area() == pytest.approx(FIG3_S, abs=TOL)

    def test_point_mass(self):
        t = build_tree(Distribution.point_mass("ab", "a"))
        assert len(t.leaves) == 1 and t.leaves[0].depth == 0 and t.total_area() == 0
        assert t.omitted == ("b",)

    def test_zero_error_flag(self):
        with pytest.raises(ZeroBranch):
            build_tree(Distribution.point_mass("ab", "a"), zero="error")

    @given(distributions())
    def test_area_is_entropy(self, d):
        assert abs(build_tree(d).total_area() - entropy(d)) < TOL


class TestGroup:
    def test_fig3(self):
        g = group_tree(build_tree(fig3), fig3_blocks)
        rep = fundamental_theorem(fig3, Partition(space5, {"c1": [0, 1], "c2": [2, 3, 4]}))
        assert g.trunk_area() == pytest.approx(rep.computational_H, abs=TOL)
        assert g.stem_area() == pytest.approx(rep.noncomputational_S, abs=TOL)
        assert g.trunk_area() == pytest.approx(FIG3_HC, abs=TOL)
        assert g.stem_area() == pytest.approx(FIG3_SNC, abs=TOL)
        assert g.total_area() == pytest.approx(FIG3_S, abs=TOL)
        assert [tr.prob for tr in g.trunks] == [F(1, 3), F(2, 3)]
        assert [s.cond_prob for s in g.trunks[1].stems] == [F(1, 6), F(1, 3), F(1, 2)]

    def test_accepts_partition(self):
        part = Partition(space5, {"c1": [0, 1], "c2": [2, 3, 4]})
        assert group_tree(build_tree(fig3), part) == group_tree(build_tree(fig3), fig3_blocks)

    def test_singletons(self):
        g = group_tree(build_tree(fig3), {l: [l] for l in space5.labels})
        assert all(s.length == 0 for tr in g.trunks for s in tr.stems)
        assert g.trunk_area() == pytest.approx(FIG3_S, abs=TOL)

    def test_one_block(self):
        g = group_tree(build_tree(fig3), {"all": list(space5.labels)})
        assert g.trunks[0].prob == 1 and g.trunks[0].length == 0
        assert g.stem_area() == pytest.approx(FIG3_S, abs=TOL)

    def test_unit_override(self):
        g = group_tree(build_tree(fig3), fig3_blocks, BIT)
        assert g.total_area() == pytest.approx(FIG3_S / math.log(2), abs=TOL)

    @pytest.mark.parametrize(
        "blocks",
        [
            {"c1": ["phi1", "phi2"]},
            {"c1": ["phi1", "phi2"], "c2": ["phi2", "phi3", "phi4", "phi5"]},
            {"c1": ["phi1", "phi9"], "c2": ["phi2", "phi3", "phi4", "phi5"]},
        ],
    )
    def test_mismatch(self, blocks):
        with pytest.raises(PartitionMismatch):
            group_tree(build_tree(fig3), blocks)

    @settings(max_examples=80)
    @given(partitioned(max_size=16))
    def test_conservation(self, dp):
        d, part = dp
        t = build_tree(d)
        g = group_tree(t, part)
        assert abs(g.total_area() - t.total_area()) < TOL
        depth = {l.label: l.depth for l in t.leaves}
        for tr in g.trunks:
            assert tr.prob == sum((s.prob for s in tr.stems), F(0))
            for s in tr.stems:
                assert abs(tr.length + s.length - depth[s.label]) < TOL


class TestSvg:
    def test_uniform_equal_rects(self):
        rs = rects(render_svg(build_tree(Distribution.uniform(2))))
        assert len(rs) == 2
        assert {(r.get("width"), r.get("height")) for r in rs} == {(rs[0].get("width"), rs[0].get("height"))}

    def test_well_formed_defaults(self):
        root = ET.fromstring(render_svg(build_tree(fig3)).encode())
        assert root.tag == f"{SVG}svg" and root.get("version") == "1.1"

    def test_deterministic(self):
        g = group_tree(build_tree(fig3), fig3_blocks)
        assert render_svg(g) == render_svg(group_tree(build_tree(fig3), fig3_blocks))

    @pytest.mark.parametrize("orientation", ["horizontal", "vertical"])
    def test_parse_back_area(self, orientation):
        opts = SvgOptions(orientation=orientation, length_scale=150, width_scale=300)
        t = build_tree(fig3)
        before = drawn_area(render_svg(t, opts), opts)
        after = drawn_area(render_svg(group_tree(t, fig3_blocks), opts), opts)
        assert before == pytest.approx(FIG3_S, abs=1e-8)
        assert after == pytest.approx(before, abs=1e-8)

    def test_colors_and_data(self):
        rs = rects(render_svg(group_tree(build_tree(fig3), fig3_blocks)))
        kinds = [r.get("data-kind") for r in rs]
        assert kinds == ["trunk", "stem", "stem", "trunk", "stem", "stem", "stem"]
        assert {r.get("fill") for r in rs if r.get("data-kind") == "trunk"} == {COLORS["trunk"]}
        assert rs[0].get("data-prob") == "1/3"

    def test_vertical_stems_sit_above_trunks(self):
        rs = rects(render_svg(group_tree(build_tree(fig3), fig3_blocks), SvgOptions(orientation="vertical")))
        trunk, stem = rs[0], rs[1]
        assert float(stem.get("y")) + float(stem.get("height")) == pytest.approx(float(trunk.get("y")), abs=1e-6)

    def test_title_escaped(self):
        svg = render_svg(build_tree(fig3), SvgOptions(title="a < b & c"))
        assert ET.fromstring(svg.encode()).find(f"{SVG}title").text == "a < b & c"

    @settings(max_examples=30)
    @given(partitioned(max_size=10))
    def test_parse_back_random(self, dp):
        d, part = dp
        opts = SvgOptions()
        g = group_tree(build_tree(d), part)
        assert drawn_area(render_svg(g, opts), opts) == pytest.approx(g.total_area(), abs=1e-7)
        assert math.fsum(segment_areas(g)) == pytest.approx(entropy(d), abs=TOL)


class TestTable:
    def test_ungrouped(self):
        text = render_table(build_tree(fig3), NAT)
        lines = text.splitlines()
        assert sum(1 for l in lines if l.startswith("phi")) == 5
        assert lines[-1].split()[-1] == f"{FIG3_S:.6f}"
        assert text.isascii()

    def test_grouped_subtotals(self):
        text = render_table(group_tree(build_tree(fig3), fig3_blocks))
        assert "subtotal H(C)" in text and f"{FIG3_HC:.6f}" in text
        assert f"{FIG3_SNC:.6f}" in text

    def test_point_mass(self):
        text = render_table(build_tree(Distribution.point_mass("ab", "a")))
        rows = [l for l in text.splitlines() if l.startswith(("a ", "b "))]
        assert len(rows) == 1
        assert text.splitlines()[-1].split()[-1] == "0.000000"

    def test_reunit(self):
        text = render_table(build_tree(Distribution.uniform(2)), BIT)
        assert "(bits)" in text and text.splitlines()[-1].endswith("1.000000")

    def test_json(self):
        js = tree_to_json(group_tree(build_tree(fig3), fig3_blocks))
        assert js["trunk_area"] == pytest.approx(FIG3_HC, abs=TOL)
        assert [s["cond_prob"] for s in js["trunks"][0]["stems"]] == ["1/4", "3/4"]
