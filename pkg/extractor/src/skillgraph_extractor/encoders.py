"""Text encoders producing per-token hidden states.

Two implementations share one protocol: a deterministic offline stub for
tests and dry runs, and a wrapper around a pretrained transformer loaded
by name. Both return (last_hidden [n, t, width] float64, attention_mask
[n, t], special_tokens_mask [n, t]) with padding already applied.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np


class ModelLoadError(RuntimeError):
    """The named model could not be turned into a working encoder."""


class Encoder(Protocol):
    @property
    def width(self) -> int: ...

    def encode_batch(
        self, texts: list[str], max_length: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...


# padding rows are filled with this instead of zeros so that a pooling
# bug that lets them leak into the mean fails loudly, not by a hair
_PAD_SENTINEL = 1.0e6

_CLS = "[CLS]"
_SEP = "[SEP]"


class StubEncoder:
    """Deterministic hash-seeded encoder with a BERT-like sequence layout.

    Every distinct token string maps to one fixed hidden row regardless
    of position or batch neighbours, the sequence is wrapped in
    [CLS]/[SEP] delimiters and truncated to max_length, and batches are
    padded to their longest member.
    """

    def __init__(self, width: int = 768) -> None:
        if width <= 0:
            raise ValueError("encoder width must be positive")
        self._width = width
        self._rows: dict[str, np.ndarray] = {}

    @property
    def width(self) -> int:
        return self._width

    def _token_row(self, token: str) -> np.ndarray:
        row = self._rows.get(token)
        if row is None:
            seed = int.from_bytes(
                hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little"
            )
            row = np.random.default_rng(seed).standard_normal(self._width)
            self._rows[token] = row
        return row

    def encode_batch(
        self, texts: list[str], max_length: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sequences = []
        for text in texts:
            tokens = text.split()
            kept = tokens[: max(0, max_length - 2)]
            sequences.append(([_CLS] + kept + [_SEP])[:max_length])
        longest = max((len(s) for s in sequences), default=0)
        hidden = np.full((len(texts), longest, self._width), _PAD_SENTINEL)
        attention = np.zeros((len(texts), longest), dtype=np.int64)
        special = np.ones((len(texts), longest), dtype=np.int64)
        for i, seq in enumerate(sequences):
            for j, token in enumerate(seq):
                hidden[i, j] = self._token_row(token)
                attention[i, j] = 1
                special[i, j] = 1 if token in (_CLS, _SEP) else 0
        return hidden, attention, special


class TransformerEncoder:
    """Pretrained transformer wrapper.

    The model is put in evaluation mode once and driven without
    gradients, so repeated calls on the same inputs are deterministic.
    """

    def __init__(self, tokenizer, model) -> None:
        model.eval()
        self._tokenizer = tokenizer
        self._model = model
        self._width = int(model.config.hidden_size)

    @property
    def width(self) -> int:
        return self._width

    def encode_batch(
        self, texts: list[str], max_length: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        import torch

        encoded = self._tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=max_length,
            return_special_tokens_mask=True,
            return_tensors="pt",
        )
        with torch.no_grad():
            out = self._model(
                input_ids=encoded["input_ids"],
                attention_mask=encoded["attention_mask"],
            )
        hidden = out.last_hidden_state.detach().cpu().numpy().astype(np.float64)
        attention = encoded["attention_mask"].cpu().numpy()
        special = encoded["special_tokens_mask"].cpu().numpy()
        return hidden, attention, special


def load_encoder(name: str) -> Encoder:
    """Build an encoder from a model name.

    "stub" or "stub:<width>" selects the offline stub; anything else is
    fetched through the transformers auto classes and wrapped.
    """
    if name == "stub":
        return StubEncoder()
    if name.startswith("stub:"):
        try:
            return StubEncoder(int(name[5:]))
        except ValueError:
            raise ModelLoadError(f"bad stub width in {name!r}") from None
    try:
        from transformers import AutoModel, AutoTokenizer
    except ImportError:
        raise ModelLoadError(
            f"loading {name!r} needs the transformers and torch packages"
        ) from None
    try:
        tokenizer = AutoTokenizer.from_pretrained(name)
        model = AutoModel.from_pretrained(name)
    except Exception as exc:  # hub lookup, missing files, incompatible weights
        raise ModelLoadError(f"could not load model {name!r}: {exc}") from exc
    return TransformerEncoder(tokenizer, model)
