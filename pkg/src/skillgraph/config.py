"""Run configuration: one JSON document (plus flag overrides) that fixes
every knob of a training, cross-validation, or baseline run."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .embeddings import EmbedderKind, EmbedderSpec
from .layers import LayerKind
from .training import TrainConfig

DEFAULTS: dict[str, object] = {
    "graph": "data/toy_graph.json",
    "embeddings": None,  # path to an embedding file; null = built-in hashing
    "embed_dim": 768,
    "embed_seed": 0,
    "layer": "sage",
    "hidden_dim": 64,
    "max_epochs": 400,
    "learning_rate": 1e-3,
    "weight_decay": 1e-4,
    "patience": 50,
    "dropout": 0.5,
    "k": 3,
    "test_fraction": 0.2,
    "loss_weights": [1.0, 1.0, 1.0],
    "seed": 0,
    "out_dir": "runs/latest",
}


class RunConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    graph: str
    embeddings: str | None
    embed_dim: int
    embed_seed: int
    layer: str
    hidden_dim: int
    max_epochs: int
    learning_rate: float
    weight_decay: float
    patience: int
    dropout: float
    k: int
    test_fraction: float
    loss_weights: tuple[float, float, float]
    seed: int
    out_dir: str

    def train_config(self) -> TrainConfig:
        try:
            kind = LayerKind(self.layer)
        except ValueError:
            raise RunConfigError(f"unknown layer kind {self.layer!r}") from None
        try:
            return TrainConfig(
                max_epochs=self.max_epochs,
                learning_rate=self.learning_rate,
                weight_decay=self.weight_decay,
                patience=self.patience,
                dropout=self.dropout,
                k=self.k,
                test_fraction=self.test_fraction,
                loss_weights=self.loss_weights,
                layer_kind=kind,
                hidden_dim=self.hidden_dim,
                seed=self.seed,
            )
        except (TypeError, ValueError) as exc:
            raise RunConfigError(str(exc)) from None

    def embedder_spec(self) -> EmbedderSpec:
        kind = EmbedderKind.EXTERNAL if self.embeddings else EmbedderKind.HASHING
        return EmbedderSpec(kind=kind, dim=self.embed_dim, seed=self.embed_seed)

    def echo(self) -> dict:
        doc = {k: getattr(self, k) for k in DEFAULTS}
        doc["loss_weights"] = list(self.loss_weights)
        return doc


def load_run_config(
    path: str | Path | None, overrides: dict[str, object] | None = None
) -> RunConfig:
    """Defaults, then the file, then flag overrides; unknown keys are
    errors at both levels."""
    merged = dict(DEFAULTS)
    if path is not None:
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise FileNotFoundError(f"cannot read config {path}: {exc}") from exc
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RunConfigError(f"malformed config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise RunConfigError("config document must be an object")
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise RunConfigError(f"unknown config keys {sorted(unknown)}")
        merged.update(doc)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise RunConfigError(f"unknown config key {key!r}")
        if value is not None:
            merged[key] = value

    weights = merged["loss_weights"]
    if (
        not isinstance(weights, (list, tuple))
        or len(weights) != 3
        or not all(isinstance(w, (int, float)) for w in weights)
    ):
        raise RunConfigError("loss_weights must be three numbers")
    merged["loss_weights"] = tuple(float(w) for w in weights)
    try:
        cfg = RunConfig(**merged)  # type: ignore[arg-type]
    except TypeError as exc:
        raise RunConfigError(f"bad config value types: {exc}") from None
    cfg.train_config()  # surface invalid numerics now, not mid-run
    return cfg
