"""Per-node text features: a deterministic signed hashing embedder and a
loader for externally computed embedding files.

The hashing path keeps the toolkit free of any model dependency; the
external path accepts vectors produced elsewhere (e.g., by a transformer
feature extractor) in a plain text format.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import HeteroGraph

_TOKEN = re.compile(r"[a-z0-9]+")


class EmbedderKind(str, Enum):
    HASHING = "hashing"
    EXTERNAL = "external"


@dataclass(frozen=True)
class EmbedderSpec:
    kind: EmbedderKind = EmbedderKind.HASHING
    dim: int = 768
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("embedding dim must be positive")


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    rows: dict[str, np.ndarray]

    def matrix(self, ids: tuple[str, ...] | list[str]) -> np.ndarray:
        """Rows stacked in the given id order."""
        return np.stack([self.rows[nid] for nid in ids])


class EmbeddingFormatError(ValueError):
    """Defect in an embedding file or its coverage of the graph."""


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs; shared with the TF-IDF baseline."""
    return _TOKEN.findall(text.lower())


def hash_embed(text: str, spec: EmbedderSpec) -> np.ndarray:
    """Signed feature hashing over unigrams and bigrams, L2-normalized.

    The digest's low bit picks the sign and the remaining bits the
    bucket, so the map is fixed by (seed, dim) alone. Token-free input
    yields the zero vector.
    """
    if spec.kind is not EmbedderKind.HASHING:
        raise ValueError("hash_embed requires a hashing spec")
    tokens = tokenize(text)
    grams = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    vec = np.zeros(spec.dim)
    for gram in grams:
        digest = hashlib.blake2b(
            f"{spec.seed}\x1f{gram}".encode("utf-8"), digest_size=8
        ).digest()
        h = int.from_bytes(digest, "little")
        sign = 1.0 if h & 1 else -1.0
        vec[(h >> 1) % spec.dim] += sign
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def write_embeddings(table: EmbeddingTable, ids: tuple[str, ...] | list[str]) -> str:
    """Serialize rows in the given order; floats printed with repr so a
    reload is bit-exact."""
    lines = [f"dim={table.dim}"]
    for nid in ids:
        lines.append(nid + "\t" + " ".join(repr(x) for x in table.rows[nid].tolist()))
    return "\n".join(lines) + "\n"


def load_embeddings(data: bytes | str, g: HeteroGraph) -> EmbeddingTable:
    """Parse an embedding file and check it covers exactly g's nodes."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()
    if not lines or not lines[0].startswith("dim="):
        raise EmbeddingFormatError('line 1 must be a "dim=<d>" header')
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise EmbeddingFormatError(f"bad dimension header {lines[0]!r}") from None
    if dim <= 0:
        raise EmbeddingFormatError("dimension must be positive")

    rows: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if "\t" not in line:
            raise EmbeddingFormatError(f"line {lineno}: missing id/value separator")
        nid, _, values = line.partition("\t")
        if nid not in g.index:
            raise EmbeddingFormatError(
                f"line {lineno}: id {nid!r} not present in the graph"
            )
        if nid in rows:
            raise EmbeddingFormatError(f"line {lineno}: duplicate id {nid!r}")
        try:
            vec = np.array([float(v) for v in values.split()])
        except ValueError:
            raise EmbeddingFormatError(
                f"line {lineno}: non-numeric value for id {nid!r}"
            ) from None
        if vec.size != dim:
            raise EmbeddingFormatError(
                f"line {lineno}: expected {dim} values, found {vec.size}"
            )
        rows[nid] = vec

    missing = [n.id for n in g.nodes if n.id not in rows]
    if missing:
        raise EmbeddingFormatError(f"graph ids missing from file: {missing}")
    return EmbeddingTable(dim=dim, rows=rows)


def build_features(
    g: HeteroGraph, spec: EmbedderSpec, file_data: bytes | str | None = None
) -> EmbeddingTable:
    """One row per node: hash each node's text, or delegate to the file."""
    if spec.kind is EmbedderKind.HASHING:
        rows = {n.id: hash_embed(n.text, spec) for n in g.nodes}
        return EmbeddingTable(dim=spec.dim, rows=rows)
    if file_data is None:
        raise EmbeddingFormatError("external embedder requires an embedding file")
    return load_embeddings(file_data, g)
