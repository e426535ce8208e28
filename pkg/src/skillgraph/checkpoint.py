"""Versioned model checkpoints as JSON text.

Values are serialized through Python's float repr, which round-trips
IEEE doubles exactly, so save -> load -> save is byte-identical. The
config and embedder spec ride along so a checkpoint alone is enough to
rebuild the model and classify new text.
"""

from __future__ import annotations

import json

import numpy as np

from .embeddings import EmbedderKind, EmbedderSpec
from .layers import LayerKind
from .model import MultiTaskGnn
from .training import TrainConfig, _config_dict

FORMAT_VERSION = 1


class CheckpointFormatError(ValueError):
    pass


def save_checkpoint(
    model: MultiTaskGnn, cfg: TrainConfig, spec: EmbedderSpec
) -> str:
    params = {
        name: {"shape": list(p.data.shape), "values": p.data.reshape(-1).tolist()}
        for name, p in model.parameter_items()
    }
    doc = {
        "format_version": FORMAT_VERSION,
        "config": _config_dict(cfg),
        "embedder": {"kind": spec.kind.value, "dim": spec.dim, "seed": spec.seed},
        "node_ids": list(model.node_ids),
        "text_dim": model.text_dim,
        "hidden_dim": model.hidden_dim,
        "params": params,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_checkpoint(data: bytes | str) -> tuple[MultiTaskGnn, TrainConfig, EmbedderSpec]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"malformed checkpoint: {exc}") from exc
    if not isinstance(doc, dict):
        raise CheckpointFormatError("checkpoint document must be an object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"unsupported checkpoint version {doc.get('format_version')!r}"
        )
    try:
        raw_cfg = doc["config"]
        cfg = TrainConfig(
            max_epochs=raw_cfg["max_epochs"],
            learning_rate=raw_cfg["learning_rate"],
            weight_decay=raw_cfg["weight_decay"],
            patience=raw_cfg["patience"],
            dropout=raw_cfg["dropout"],
            k=raw_cfg["k"],
            test_fraction=raw_cfg["test_fraction"],
            loss_weights=tuple(raw_cfg["loss_weights"]),
            layer_kind=LayerKind(raw_cfg["layer_kind"]),
            hidden_dim=raw_cfg["hidden_dim"],
            seed=raw_cfg["seed"],
        )
        emb = doc["embedder"]
        spec = EmbedderSpec(
            kind=EmbedderKind(emb["kind"]), dim=emb["dim"], seed=emb["seed"]
        )
        node_ids = tuple(doc["node_ids"])
        model = MultiTaskGnn(
            node_ids=node_ids,
            text_dim=doc["text_dim"],
            hidden_dim=doc["hidden_dim"],
            kind=cfg.layer_kind,
            rng=np.random.default_rng(0),
            dropout=cfg.dropout,
            loss_weights=cfg.loss_weights,
        )
        saved = doc["params"]
        for name, p in model.parameter_items():
            entry = saved[name]
            values = np.array(entry["values"], dtype=np.float64)
            p.data[:] = values.reshape(entry["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CheckpointFormatError):
            raise
        raise CheckpointFormatError(f"invalid checkpoint contents: {exc}") from exc
    return model, cfg, spec
