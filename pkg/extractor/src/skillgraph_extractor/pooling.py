"""Masked average pooling over per-token hidden states."""

from __future__ import annotations

import numpy as np


def mean_pool(
    last_hidden: np.ndarray,
    attention_mask: np.ndarray,
    *,
    include_special_tokens: bool = True,
    special_tokens_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Mean of each sequence's real-token rows.

    Padding positions (attention mask 0) never contribute, whatever the
    hidden values there hold. With include_special_tokens=False the
    delimiter rows are dropped from the mean as well. A sequence left
    with no contributing rows pools to the zero vector.
    """
    hidden = np.asarray(last_hidden, dtype=np.float64)
    mask = np.asarray(attention_mask, dtype=np.float64)
    if hidden.ndim != 3:
        raise ValueError(f"hidden states must be [batch, tokens, width], got {hidden.ndim}-d")
    if mask.shape != hidden.shape[:2]:
        raise ValueError(
            f"attention mask shape {mask.shape} does not match sequences {hidden.shape[:2]}"
        )
    if not include_special_tokens:
        if special_tokens_mask is None:
            raise ValueError("dropping special tokens requires their mask")
        special = np.asarray(special_tokens_mask, dtype=np.float64)
        if special.shape != mask.shape:
            raise ValueError(
                f"special-tokens mask shape {special.shape} does not match {mask.shape}"
            )
        mask = mask * (1.0 - special)

    counts = mask.sum(axis=1)
    summed = (hidden * mask[:, :, None]).sum(axis=1)
    pooled = np.zeros_like(summed)
    covered = counts > 0
    pooled[covered] = summed[covered] / counts[covered, None]
    return pooled
