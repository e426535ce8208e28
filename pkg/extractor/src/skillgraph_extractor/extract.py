"""Graph-to-embedding extraction pipeline.

Reads the node list of a graph file, encodes each node's text, pools
the per-token hidden states, and writes the embedding file format the
training toolkit loads: a "dim=<d>" header, then one tab-separated row
per node in graph order with floats printed via repr so a reload is
bit-exact.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoders import Encoder, load_encoder
from .pooling import mean_pool

log = logging.getLogger(__name__)


class GraphReadError(ValueError):
    """Defect in the node section of a graph file."""


@dataclass(frozen=True)
class ExtractorConfig:
    model: str
    output: str
    max_length: int = 128
    batch_size: int = 32
    include_special_tokens: bool = True

    def __post_init__(self) -> None:
        if self.max_length < 1:
            raise ValueError("max_length must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


def read_graph_nodes(data: bytes | str) -> list[tuple[str, str]]:
    """(id, text) pairs in file order.

    Only the fields this tool consumes are checked; the full edge and
    label schema is the training toolkit's concern.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphReadError(f"malformed graph file: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise GraphReadError('graph document must be an object with a "nodes" list')
    nodes: list[tuple[str, str]] = []
    seen: set[str] = set()
    for i, node in enumerate(doc["nodes"]):
        if not isinstance(node, dict):
            raise GraphReadError(f"node #{i} is not an object")
        nid = node.get("id")
        if not isinstance(nid, str) or not nid:
            raise GraphReadError(f"node #{i} needs a non-empty string id")
        if nid in seen:
            raise GraphReadError(f"duplicate node id {nid!r}")
        seen.add(nid)
        text = node.get("text")
        if not isinstance(text, str):
            raise GraphReadError(f"node {nid!r} needs a string text field")
        nodes.append((nid, text))
    return nodes


def pool_nodes(
    nodes: list[tuple[str, str]], encoder: Encoder, cfg: ExtractorConfig
) -> np.ndarray:
    """One pooled row per node, rows aligned with the input order."""
    vectors = np.zeros((len(nodes), encoder.width))
    todo: list[tuple[int, str]] = []
    for i, (nid, text) in enumerate(nodes):
        # a node without text has no tokens to pool; its row is defined
        # as the zero vector rather than the encoding of nothing
        if text.strip():
            todo.append((i, text))
        else:
            log.warning("node %r has no text; writing the zero vector", nid)
    for start in range(0, len(todo), cfg.batch_size):
        batch = todo[start : start + cfg.batch_size]
        hidden, attention, special = encoder.encode_batch(
            [text for _, text in batch], cfg.max_length
        )
        pooled = mean_pool(
            hidden,
            attention,
            include_special_tokens=cfg.include_special_tokens,
            special_tokens_mask=special,
        )
        vectors[[i for i, _ in batch]] = pooled
    return vectors


def format_embedding_file(ids: list[str], vectors: np.ndarray) -> str:
    lines = [f"dim={vectors.shape[1]}"]
    for nid, row in zip(ids, vectors):
        lines.append(nid + "\t" + " ".join(repr(x) for x in row.tolist()))
    return "\n".join(lines) + "\n"


def extract(graph_path: str | Path, cfg: ExtractorConfig, encoder: Encoder | None = None) -> Path:
    """Run the pipeline and return the written file's path."""
    nodes = read_graph_nodes(Path(graph_path).read_bytes())
    if encoder is None:
        encoder = load_encoder(cfg.model)
    vectors = pool_nodes(nodes, encoder, cfg)
    text = format_embedding_file([nid for nid, _ in nodes], vectors)
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    return out
