"""SVG rendering: deterministic bytes, glyph counts, panel annotations, and
the heatmap parse-back oracle."""

import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from taxonet.consensus import build_consensus, threshold_sweep
from taxonet.errors import RenderError
from taxonet.network import BinaryNetwork
from taxonet.render import (
    fr_layout,
    render_hamming_heatmap,
    render_network_svg,
    render_threshold_panel,
)


def taxa_labels(p):
    return [f"t{k}" for k in range(p)]


def net_from_pairs(p, pairs, taxa=None):
    adj = np.zeros((p, p), dtype=np.int8)
    for i, j in pairs:
        adj[i, j] = adj[j, i] = 1
    return BinaryNetwork(adj=adj, taxa=taxa or taxa_labels(p))


def svg_elements(path, local_name):
    root = ET.parse(path).getroot()
    return [el for el in root.iter() if el.tag.endswith("}" + local_name)]


class TestLayout:
    def test_same_seed_same_embedding(self):
        adj = net_from_pairs(6, [(0, 1), (1, 2), (3, 4)]).adj
        assert np.array_equal(fr_layout(adj, seed=3), fr_layout(adj, seed=3))

    def test_different_seeds_differ(self):
        adj = net_from_pairs(6, [(0, 1), (1, 2)]).adj
        assert not np.array_equal(fr_layout(adj, seed=3), fr_layout(adj, seed=4))

    def test_positions_are_finite(self):
        adj = net_from_pairs(8, [(i, i + 1) for i in range(7)]).adj
        assert np.isfinite(fr_layout(adj, seed=0)).all()


class TestNetworkSvg:
    def test_fixed_seed_is_byte_identical(self, tmp_path):
        net = net_from_pairs(6, [(0, 1), (1, 2), (2, 3), (4, 5)])
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_network_svg(net, 7, a)
        render_network_svg(net, 7, b)
        assert a.read_bytes() == b.read_bytes()

    def test_no_edges_gives_caption_and_no_glyphs(self, tmp_path):
        path = tmp_path / "empty.svg"
        render_network_svg(net_from_pairs(5, []), 0, path)
        text = path.read_text()
        assert "no edges above threshold" in text
        assert len(svg_elements(path, "circle")) == 0
        assert len(svg_elements(path, "line")) == 0

    def test_triangle_has_three_glyphs_and_three_edges(self, tmp_path):
        path = tmp_path / "tri.svg"
        render_network_svg(net_from_pairs(3, [(0, 1), (1, 2), (0, 2)]), 1, path)
        assert len(svg_elements(path, "circle")) == 3
        assert len(svg_elements(path, "line")) == 3

    def test_isolated_taxa_are_omitted(self, tmp_path):
        path = tmp_path / "partial.svg"
        render_network_svg(net_from_pairs(6, [(0, 3)]), 2, path)
        assert len(svg_elements(path, "circle")) == 2
        labels = {el.text for el in svg_elements(path, "text")}
        assert "t0" in labels and "t3" in labels
        assert "t1" not in labels

    def test_output_is_well_formed_xml(self, tmp_path):
        path = tmp_path / "net.svg"
        render_network_svg(net_from_pairs(4, [(0, 1), (2, 3)]), 5, path)
        root = ET.parse(path).getroot()
        assert root.tag.endswith("}svg")


class TestThresholdPanel:
    def hand_consensus(self):
        nets = [
            net_from_pairs(4, [(0, 1), (1, 2)]),
            net_from_pairs(4, [(0, 1), (2, 3)]),
            net_from_pairs(4, [(0, 1)]),
        ]
        return build_consensus(nets, methods=["a", "b", "c"])

    def parse_annotation(self, path):
        title = svg_elements(path, "text")[0].text
        m = re.fullmatch(r"t=(\d+): (\d+) nodes, (\d+) edges", title)
        assert m is not None, title
        return tuple(int(g) for g in m.groups())

    def test_one_panel_per_threshold(self, tmp_path):
        cons = self.hand_consensus()
        paths, rows = render_threshold_panel(cons, tmp_path)
        assert len(paths) == cons.n_methods
        assert [r.t for r in rows] == [0, 1, 2]

    def test_annotations_match_the_sweep_table(self, tmp_path):
        cons = self.hand_consensus()
        paths, rows = render_threshold_panel(cons, tmp_path)
        for path, row in zip(paths, rows):
            assert self.parse_annotation(path) == (
                row.t,
                row.connected_node_count,
                row.edge_count,
            )
        assert rows == threshold_sweep(cons)

    def test_last_panel_annotation_equals_last_sweep_row(self, tmp_path):
        cons = self.hand_consensus()
        paths, rows = render_threshold_panel(cons, tmp_path)
        last = rows[-1]
        assert self.parse_annotation(paths[-1]) == (
            cons.n_methods - 1,
            last.connected_node_count,
            last.edge_count,
        )


class TestHammingHeatmap:
    def cell_texts(self, path):
        cells = [
            el
            for el in svg_elements(path, "text")
            if el.get("text-anchor") == "middle"
        ]
        return [el.text for el in cells]

    def test_zero_matrix_is_uniform_with_zero_labels(self, tmp_path):
        path = tmp_path / "zero.svg"
        render_hamming_heatmap(np.zeros((3, 3), dtype=int), ["a", "b", "c"], path)
        assert self.cell_texts(path) == ["0"] * 9
        fills = {el.get("fill") for el in svg_elements(path, "rect")}
        # background plus a single uniform cell color
        assert fills == {"#ffffff", "rgb(255,255,255)"}

    def test_two_by_two_off_diagonal_label(self, tmp_path):
        h = np.array([[0, 7], [7, 0]])
        path = tmp_path / "pair.svg"
        render_hamming_heatmap(h, ["m1", "m2"], path)
        assert self.cell_texts(path).count("7") == 2

    def test_cell_text_matches_matrix_entries(self, tmp_path):
        rng = np.random.default_rng(19)
        h = rng.integers(0, 30, size=(4, 4))
        h = np.triu(h, k=1)
        h = h + h.T
        path = tmp_path / "rand.svg"
        render_hamming_heatmap(h, taxa_labels(4), path)
        # cells are written row-major
        assert self.cell_texts(path) == [str(int(v)) for v in h.ravel()]

    def test_axis_labels_present_on_both_axes(self, tmp_path):
        path = tmp_path / "lab.svg"
        render_hamming_heatmap(np.zeros((2, 2), dtype=int), ["sparcc", "spring"], path)
        texts = [el.text for el in svg_elements(path, "text")]
        assert texts.count("sparcc") == 2
        assert texts.count("spring") == 2

    def test_asymmetric_matrix_rejected(self, tmp_path):
        h = np.array([[0, 1], [2, 0]])
        with pytest.raises(RenderError, match="symmetric"):
            render_hamming_heatmap(h, ["a", "b"], tmp_path / "x.svg")

    def test_nonzero_diagonal_rejected(self, tmp_path):
        h = np.array([[1, 0], [0, 0]])
        with pytest.raises(RenderError, match="diagonal"):
            render_hamming_heatmap(h, ["a", "b"], tmp_path / "x.svg")

    def test_label_count_mismatch_rejected(self, tmp_path):
        with pytest.raises(RenderError, match="label count"):
            render_hamming_heatmap(np.zeros((3, 3), dtype=int), ["a", "b"], tmp_path / "x.svg")

    def test_rendering_is_deterministic(self, tmp_path):
        h = np.array([[0, 3, 1], [3, 0, 2], [1, 2, 0]])
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_hamming_heatmap(h, ["x", "y", "z"], a)
        render_hamming_heatmap(h, ["x", "y", "z"], b)
        assert a.read_bytes() == b.read_bytes()
