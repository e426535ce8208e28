"""Representation export and power-iteration PCA tests."""

import numpy as np
import pytest

from skillgraph.export import export_embeddings, power_iteration_pca
from skillgraph.graph import parse_graph
from skillgraph.layers import LayerKind
from skillgraph.model import MultiTaskGnn
from skillgraph.toydata import generate_toy_dataset

from .test_training import toy_world


def untrained_model(g, table, hidden_dim=8):
    return MultiTaskGnn(
        node_ids=tuple(n.id for n in g.nodes),
        text_dim=table.dim,
        hidden_dim=hidden_dim,
        kind=LayerKind.SAGE_MEAN,
        rng=np.random.default_rng(5),
    )


class TestPowerIterationPca:
    def test_recovers_dominant_axis(self):
        rng = np.random.default_rng(0)
        x = np.zeros((200, 3))
        x[:, 0] = rng.normal(scale=10.0, size=200)
        x[:, 1] = rng.normal(scale=1.0, size=200)
        x[:, 2] = rng.normal(scale=0.1, size=200)
        comp, proj = power_iteration_pca(x, n_components=2)
        assert comp.shape == (2, 3)
        assert proj.shape == (200, 2)
        assert abs(comp[0, 0]) > 0.99
        assert abs(comp[1, 1]) > 0.99

    def test_components_orthonormal(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(50, 6))
        comp, _ = power_iteration_pca(x, n_components=2)
        np.testing.assert_allclose(comp @ comp.T, np.eye(2), atol=1e-8)

    def test_projection_variance_ordered(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(80, 5)) * np.array([3.0, 1.0, 0.5, 0.2, 0.1])
        _, proj = power_iteration_pca(x, n_components=2)
        assert proj[:, 0].var() >= proj[:, 1].var()

    def test_collinear_data_second_component_carries_nothing(self):
        # rank-1 input: everything lives on one line, so the second
        # projection column must be numerically zero variance
        rng = np.random.default_rng(3)
        direction = np.array([1.0, 2.0, -1.0])
        x = rng.normal(size=(40, 1)) * direction
        _, proj = power_iteration_pca(x, n_components=2)
        assert proj[:, 0].var() > 1.0
        assert proj[:, 1].var() == pytest.approx(0.0, abs=1e-12)

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 4))
        comp, _ = power_iteration_pca(x, n_components=2)
        for v in comp:
            anchor = int(np.argmax(np.abs(v)))
            assert v[anchor] > 0

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(25, 7))
        c1, p1 = power_iteration_pca(x)
        c2, p2 = power_iteration_pca(x)
        np.testing.assert_array_equal(c1, c2)
        np.testing.assert_array_equal(p1, p2)

    def test_projection_is_centered_times_components(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(20, 4))
        comp, proj = power_iteration_pca(x)
        centered = x - x.mean(axis=0)
        np.testing.assert_allclose(proj, centered @ comp.T, atol=1e-12)


class TestExportEmbeddings:
    def test_shape_and_header(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, pca = export_embeddings(model, g, table)
        emb_lines = emb.splitlines()
        pca_lines = pca.splitlines()
        n_examples = len(g.example_ids())
        assert emb_lines[0] == f"dim={table.dim + model.hidden_dim}"
        assert pca_lines[0] == "dim=2"
        assert len(emb_lines) == n_examples + 1
        assert len(pca_lines) == n_examples + 1

    def test_rows_follow_graph_order_with_label_columns(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, _ = export_embeddings(model, g, table)
        lines = emb.splitlines()[1:]
        ids = [line.split("\t")[0] for line in lines]
        assert tuple(ids) == g.example_ids()
        for line in lines:
            cols = line.split("\t")
            assert len(cols) == 5
            assert len(cols[1].split()) == table.dim + model.hidden_dim

    def test_labels_match_gold_and_missing_is_dash(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, _ = export_embeddings(model, g, table)
        by_id = {}
        for line in emb.splitlines()[1:]:
            cols = line.split("\t")
            by_id[cols[0]] = cols[2:]
        saw_dash = saw_named = False
        for nid in g.example_ids():
            labels = g.node(nid).labels
            cf_col, ic_col, skill_col = by_id[nid]
            if labels.cf is None:
                assert cf_col == "-" and ic_col == "-"
                saw_dash = True
            else:
                assert cf_col != "-"
                saw_named = True
        assert saw_dash and saw_named

    def test_floats_round_trip_bit_exact(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, _ = export_embeddings(model, g, table)
        emb2, _ = export_embeddings(model, g, table)
        assert emb == emb2
        first = emb.splitlines()[1].split("\t")[1]
        values = [float(tok) for tok in first.split()]
        rewritten = " ".join(repr(v) for v in values)
        assert rewritten == first

    def test_pca_rows_are_two_wide_and_share_labels(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, pca = export_embeddings(model, g, table)
        emb_labels = [l.split("\t")[2:] for l in emb.splitlines()[1:]]
        pca_cols = [l.split("\t") for l in pca.splitlines()[1:]]
        for cols, labels in zip(pca_cols, emb_labels):
            assert len(cols[1].split()) == 2
            assert cols[2:] == labels

    def test_taxonomy_nodes_not_exported(self):
        g, table = toy_world()
        model = untrained_model(g, table)
        emb, _ = export_embeddings(model, g, table)
        ids = {line.split("\t")[0] for line in emb.splitlines()[1:]}
        assert "root" not in ids
        assert not any(i in ids for i in ("cf_bond", "skill_validation"))
