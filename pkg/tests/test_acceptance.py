"""Acceptance gate: every shipping criterion of this package, one test
per criterion, each at its stated tolerance.

Run `pytest tests/test_acceptance.py -v` to get one pass/fail line per
criterion. The end-to-end criteria train real models on the bundled
corpus and take the better part of a minute; everything else is fast.
"""

import functools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from skillgraph import layers as L
from skillgraph import model as MD
from skillgraph import tensor as T
from skillgraph.baseline import baseline_cross_validate
from skillgraph.cli import EXIT_OK, main
from skillgraph.embeddings import EmbedderSpec, build_features
from skillgraph.export import export_embeddings, power_iteration_pca
from skillgraph.graph import parse_graph
from skillgraph.layers import Adjacency, LayerKind
from skillgraph.metrics import macro_f1, micro_f1, retrieval_at_k
from skillgraph.model import HEAD_WIDTH, TASKS
from skillgraph.splits import kfold, split_dataset
from skillgraph.toydata import generate_toy_dataset
from skillgraph.training import TrainConfig, cross_validate, train

from .oracles import accuracy_oracle, macro_f1_oracle, micro_f1_oracle
from .test_graph import make_doc, node
from .test_layers import _bfs_distances, gcn_oracle, random_graph
from .test_model import small_model

KINDS = (LayerKind.SAGE_MEAN, LayerKind.GCN, LayerKind.GAT)
BUNDLED = Path(__file__).resolve().parent.parent / "data" / "toy_graph.json"


@functools.lru_cache(maxsize=None)
def headline_run():
    """The full evaluation both end-to-end criteria read from: 3-fold CV
    of the graph model and the text baseline on the bundled corpus."""
    g = parse_graph(BUNDLED.read_bytes())
    cfg = TrainConfig(seed=1)
    started = time.monotonic()
    table = build_features(g, EmbedderSpec(dim=768, seed=0))
    gnn = cross_validate(g, table, cfg)
    base = baseline_cross_validate(g, cfg)
    elapsed = time.monotonic() - started
    return gnn, base, elapsed


def grad_check_graph():
    doc = make_doc(
        nodes=[
            node("cf", "common_factor", text="bond trust"),
            node("sk", "skill", text="reflective listening"),
            node("e1", "example", name="", text="it sounds hard",
                 labels={"cf": "bond", "skill": "reflective_listening"}),
            node("e2", "example", name="", text="what brings you",
                 labels={"skill": "open_ended_questions"}),
            node("e3", "example", name="", text="parking is closed",
                 labels={"cf": "neutral", "ic": "neutral", "skill": "neutral"}),
            node("e4", "example", name="", text="you did well",
                 labels={"ic": "ear"}),
        ],
        edges=[
            {"source": "e1", "target": "cf", "kind": "fosters"},
            {"source": "e1", "target": "sk", "kind": "demonstrates"},
            {"source": "sk", "target": "cf", "kind": "supports"},
        ],
    )
    return parse_graph(doc)


class TestGradientFidelity:
    def test_full_models_match_finite_differences_under_1e_3(self):
        # Every layer kind, full pipeline loss, generic parameter point
        # (zero init sits on the relu kink where one-sided differences
        # and the subgradient legitimately disagree). Budget: 30s.
        started = time.monotonic()
        g = grad_check_graph()
        table = build_features(g, EmbedderSpec(dim=8, seed=1))
        adj = Adjacency.from_graph(g)
        for kind in KINDS:
            model = small_model(g, text_dim=8, hidden_dim=4, kind=kind, dropout=0.0)
            labels = MD.label_arrays(g, model.node_ids)
            rows = np.ones(len(model.node_ids), dtype=bool)
            point_rng = np.random.default_rng(99)
            for p in model.parameters():
                p.data[:] = point_rng.normal(size=p.data.shape) * 0.3

            def f():
                reps = MD.node_representation(model, g, table, adj, training=False)
                return MD.multitask_loss(
                    MD.head_logits(model, reps), labels, rows, (1.0, 1.0, 1.0)
                )

            err = T.grad_check(f, model.parameters(), max_coords=200, seed=7)
            assert err < 1e-3, f"{kind.value}: max rel err {err}"
        assert time.monotonic() - started < 30.0

    def test_smooth_model_matches_finite_differences_under_1e_5(self):
        # No relu kinks: linear map + softmax cross-entropy is smooth, so
        # central differences agree to much tighter tolerance.
        rng = np.random.default_rng(3)
        x = T.Tensor(rng.normal(size=(6, 5)))
        w = T.Parameter(rng.normal(size=(5, 4)) * 0.5)
        b = T.Parameter(rng.normal(size=(1, 4)) * 0.1)
        targets = np.array([0, 1, 2, 3, 1, 2])
        mask = np.ones(6, dtype=bool)

        def f():
            return T.cross_entropy(T.linear(x, w, b), targets, mask)

        err = T.grad_check(f, [w, b], max_coords=200, seed=11)
        assert err < 1e-5, f"max rel err {err}"


class TestMessagePassingFidelity:
    def test_gcn_matches_dense_oracle_on_100_graphs(self):
        # independent naive dense implementation, tolerance 1e-10
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 9))
            adj, pairs = random_graph(rng, n)
            p = L.init_layer(LayerKind.GCN, 4, 3, np.random.default_rng(seed + 10_000))
            x = rng.normal(size=(n, 4))
            ours = T.relu(L.gcn_layer(T.Tensor(x), adj, p)).data
            reference = gcn_oracle(pairs, n, x, p.w.data, p.b.data)
            np.testing.assert_allclose(ours, reference, atol=1e-10, rtol=0)

    def test_isolated_node_sees_exactly_zero_neighbor_influence(self):
        # bitwise equality, not a tolerance: perturbing every other node
        # must not change an isolated node's output for any layer kind
        rng = np.random.default_rng(21)
        n = 6
        adj = L.Adjacency(n, [(0, 1), (1, 2), (3, 4)])  # node 5 isolated
        assert not adj.mean_norm[5].any()
        for kind in KINDS:
            p = L.init_layer(kind, 5, 3, np.random.default_rng(22))
            h = rng.normal(size=(n, 5))
            base = L.apply_layer(T.Tensor(h), adj, p).data[5]
            perturbed = h.copy()
            perturbed[:5] = rng.normal(size=(5, 5)) * 10
            after = L.apply_layer(T.Tensor(perturbed), adj, p).data[5]
            np.testing.assert_array_equal(base, after)

    def test_permutation_equivariance_50_graphs_per_kind(self):
        for kind in KINDS:
            for seed in range(50):
                rng = np.random.default_rng(seed)
                n = int(rng.integers(2, 8))
                adj, pairs = random_graph(rng, n)
                p = L.init_layer(kind, 4, 3, np.random.default_rng(seed + 1000))
                h = rng.normal(size=(n, 4))
                out = L.apply_layer(T.Tensor(h), adj, p).data
                perm = rng.permutation(n)
                inv = np.empty(n, dtype=int)
                inv[perm] = np.arange(n)
                pairs_p = [(int(inv[u]), int(inv[v])) for u, v in pairs]
                out_p = L.apply_layer(T.Tensor(h[perm]), L.Adjacency(n, pairs_p), p).data
                np.testing.assert_allclose(out_p, out[perm], atol=1e-12, rtol=0)

    def test_three_layer_locality_50_graphs_per_kind(self):
        # nodes beyond three hops can never move a node's representation
        for kind in KINDS:
            for seed in range(50):
                rng = np.random.default_rng(seed + 500)
                n = int(rng.integers(4, 9))
                adj, pairs = random_graph(rng, n, p=0.25)
                dist = _bfs_distances(n, pairs)
                far = [v for v in range(n) if dist[0][v] > 3]
                if not far:
                    continue
                stack = L.init_stack(
                    kind, 3, 3, np.random.default_rng(seed + 2000), n_layers=3, dropout=0.0
                )
                h = rng.normal(size=(n, 3))
                base = L.forward(stack, T.Tensor(h), adj, training=False).data
                perturbed = h.copy()
                for v in far:
                    perturbed[v] = rng.normal(size=3) * 7
                after = L.forward(stack, T.Tensor(perturbed), adj, training=False).data
                np.testing.assert_array_equal(base[0], after[0])


class TestMetricFidelity:
    def test_f1_matches_confusion_oracle_1000_sets(self):
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 30))
            n_classes = int(rng.integers(2, 6))
            preds = rng.integers(0, n_classes, size=n)
            golds = rng.integers(0, n_classes, size=n)
            mask = rng.random(n) < 0.8
            ours_micro = micro_f1(preds, golds, mask)
            ours_macro = macro_f1(preds, golds, mask, n_classes)
            ref_micro = micro_f1_oracle(preds, golds, mask, n_classes)
            ref_macro = macro_f1_oracle(preds, golds, mask, n_classes)
            if ref_micro is None:
                assert ours_micro is None and ours_macro is None
            else:
                assert abs(ours_micro - ref_micro) <= 1e-12
                assert abs(ours_macro - ref_macro) <= 1e-12

    def test_micro_f1_equals_accuracy_100_sets(self):
        # single-label tasks: every wrong prediction is one fp and one
        # fn, so micro F1 collapses to accuracy exactly
        for seed in range(100):
            rng = np.random.default_rng(seed + 40_000)
            n = int(rng.integers(1, 40))
            preds = rng.integers(0, 5, size=n)
            golds = rng.integers(0, 5, size=n)
            mask = rng.random(n) < 0.7
            ours = micro_f1(preds, golds, mask)
            ref = accuracy_oracle(preds, golds, mask)
            if ref is None:
                assert ours is None
            else:
                assert abs(ours - ref) <= 1e-12

    def test_recall_at_k_nondecreasing_in_k_100_sets(self):
        for seed in range(100):
            rng = np.random.default_rng(seed + 80_000)
            n = int(rng.integers(3, 12))
            reps = rng.normal(size=(n, 4))
            labels = rng.integers(0, 3, size=n)
            queries = np.arange(n)
            previous = -1.0
            for k in range(1, n):
                result = retrieval_at_k(reps, labels, queries, k)
                if result is None:
                    continue
                _, recall = result
                assert recall >= previous - 1e-15
                previous = recall


class TestEndToEnd:
    def test_micro_f1_at_least_090_on_every_task(self):
        gnn, _, _ = headline_run()
        for task in ("cf", "ic", "skill"):
            mean = gnn.aggregate["classification"][task]["micro_f1"]["mean"]
            assert mean >= 0.90, f"{task}: mean micro F1 {mean:.4f} < 0.90"

    def test_graph_model_beats_text_baseline_by_5_points_on_skill(self):
        gnn, base, _ = headline_run()
        g = gnn.aggregate["classification"]["skill"]["micro_f1"]["mean"]
        b = base.aggregate["classification"]["skill"]["micro_f1"]["mean"]
        assert g - b >= 0.05, f"skill gap {g - b:+.4f} < 0.05"

    def test_runtime_under_five_minutes(self):
        _, _, elapsed = headline_run()
        assert elapsed < 300.0, f"end-to-end evaluation took {elapsed:.0f}s"


class TestTrainingContract:
    def test_early_stopping_within_patience_and_restores_best(self):
        g = parse_graph(generate_toy_dataset(3, 24))
        table = build_features(g, EmbedderSpec(dim=32, seed=0))
        cfg = TrainConfig(
            max_epochs=300, patience=3, hidden_dim=8, dropout=0.0,
            learning_rate=5e-2, seed=0,
        )
        plan = split_dataset(g, cfg.test_fraction, cfg.seed)
        fold_train, fold_val = kfold(g, plan.train, cfg.k, cfg.seed)[0]
        model, hist = train(g, table, cfg, fold_train, fold_val)
        assert hist.stop_epoch <= hist.best_epoch + cfg.patience + 1
        assert hist.best_val_loss == min(hist.val_loss)

        # the returned parameters are the best snapshot: recomputing the
        # validation loss reproduces the recorded minimum bit for bit
        adj = Adjacency.from_graph(g)
        labels = MD.label_arrays(g, model.node_ids)
        val_mask = np.array([nid in set(fold_val) for nid in model.node_ids])
        reps = MD.node_representation(model, g, table, adj, training=False)
        recomputed = MD.multitask_loss(
            MD.head_logits(model, reps), labels, val_mask, cfg.loss_weights
        ).item()
        assert recomputed == hist.best_val_loss

    def test_cv_command_rerun_byte_identical(self, tmp_path):
        graph = tmp_path / "g.json"
        graph.write_bytes(generate_toy_dataset(2, 20))
        out = tmp_path / "cv"
        argv = [
            "cv", "--graph", str(graph), "--out-dir", str(out),
            "--embed-dim", "24", "--hidden-dim", "8",
            "--max-epochs", "8", "--patience", "3", "--dropout", "0.5",
        ]
        assert main(argv) == EXIT_OK
        first = {
            name: (out / name).read_bytes()
            for name in ("cv_report.json", "cv_report.txt", "config.json")
        }
        assert main(argv) == EXIT_OK
        for name, blob in first.items():
            assert (out / name).read_bytes() == blob, f"{name} changed across reruns"

    def test_masked_loss_matches_manual_decomposition(self):
        # library loss == sum of per-task weighted cross-entropies
        # recomputed here with plain numpy, to 1e-12; rows missing a
        # task's label contribute nothing to that task's term
        g = parse_graph(generate_toy_dataset(4, 18))
        node_ids = tuple(n.id for n in g.nodes)
        labels = MD.label_arrays(g, node_ids)
        rng = np.random.default_rng(8)
        logits = rng.normal(size=(len(node_ids), HEAD_WIDTH))
        row_mask = rng.random(len(node_ids)) < 0.7
        weights = (1.0, 0.5, 2.0)
        ours = MD.multitask_loss(T.Tensor(logits), labels, row_mask, weights).item()

        expected = 0.0
        for task, weight in zip(TASKS, weights):
            targets, present = labels[task.name]
            mask = present & row_mask
            if not mask.any():
                continue
            block = logits[:, task.offset : task.stop]
            shifted = block - block.max(axis=1, keepdims=True)
            log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
            rows = np.where(mask)[0]
            expected += weight * float(
                np.mean([-log_probs[r, targets[r]] for r in rows])
            )
        assert abs(ours - expected) <= 1e-12

        # dropping unlabeled rows changes nothing
        targets, present = labels["cf"]
        trimmed = MD.multitask_loss(
            T.Tensor(logits), labels, row_mask & present, (1.0, 0.0, 0.0)
        ).item()
        full = MD.multitask_loss(
            T.Tensor(logits), labels, row_mask, (1.0, 0.0, 0.0)
        ).item()
        assert abs(trimmed - full) <= 1e-12


class TestInterfaceContract:
    def test_probability_slices_sum_to_one(self):
        rng = np.random.default_rng(12)
        logits = rng.normal(size=(40, HEAD_WIDTH)) * 3
        probs = MD.slice_probabilities(logits)
        for task in TASKS:
            block = probs[task.name]
            assert block.shape == (40, len(task.classes))
            np.testing.assert_allclose(block.sum(axis=1), 1.0, atol=1e-9, rtol=0)
            assert (block >= 0).all()

    def test_head_dimensions_and_export_widths(self):
        g = parse_graph(generate_toy_dataset(6, 16))
        table = build_features(g, EmbedderSpec(dim=768, seed=0))
        model = small_model(g, text_dim=768, hidden_dim=64)
        assert model.head_w.shape == (768 + 64, HEAD_WIDTH)
        assert HEAD_WIDTH == 15
        assert [len(t.classes) for t in TASKS] == [4, 3, 8]

        emb, pca = export_embeddings(model, g, table)
        emb_rows = emb.splitlines()[1:]
        pca_rows = pca.splitlines()[1:]
        assert emb.splitlines()[0] == "dim=832"
        assert all(len(r.split("\t")[1].split()) == 832 for r in emb_rows)
        assert pca.splitlines()[0] == "dim=2"
        assert all(len(r.split("\t")[1].split()) == 2 for r in pca_rows)
