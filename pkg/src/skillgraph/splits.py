"""Deterministic stratified train/test splitting and k-fold assignment.

Stratification key is the skill label (the task with the most classes);
examples lacking a skill annotation form their own stratum. All
randomness flows through one seeded generator so a seed fixes the plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import HeteroGraph, NodeKind


@dataclass(frozen=True)
class SplitPlan:
    train: tuple[str, ...]
    test: tuple[str, ...]
    folds: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = ()


def _strata(g: HeteroGraph, ids: list[str]) -> list[list[str]]:
    """Group ids by skill label; key None sorts last. Member order inside
    each stratum follows graph node order."""
    groups: dict[int, list[str]] = {}
    for nid in ids:
        labels = g.node(nid).labels
        key = -1 if labels is None or labels.skill is None else labels.skill
        groups.setdefault(key, []).append(nid)
    return [groups[k] for k in sorted(groups, key=lambda k: (k == -1, k))]


def split_dataset(g: HeteroGraph, test_fraction: float, seed: int) -> SplitPlan:
    """Stratified train/test split of the Example nodes.

    Quotas use largest-remainder rounding; any stratum with >= 2 members
    keeps at least one member on each side.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    ids = [n.id for n in g.nodes if n.kind is NodeKind.EXAMPLE]
    if not ids:
        raise ValueError("graph has no example nodes")
    total_test = int(math.floor(len(ids) * test_fraction + 0.5))
    total_test = min(max(total_test, 1), len(ids) - 1) if len(ids) > 1 else 0

    strata = _strata(g, ids)
    ideal = [len(s) * test_fraction for s in strata]
    lo = [1 if len(s) >= 2 else 0 for s in strata]
    hi = [len(s) - 1 if len(s) >= 2 else len(s) for s in strata]
    quota = [min(max(int(math.floor(q)), lo[i]), hi[i]) for i, q in enumerate(ideal)]

    def adjustable(direction: int) -> list[int]:
        if direction > 0:
            order = sorted(
                range(len(strata)), key=lambda i: (-(ideal[i] - quota[i]), i)
            )
            return [i for i in order if quota[i] < hi[i]]
        order = sorted(range(len(strata)), key=lambda i: (ideal[i] - quota[i], i))
        return [i for i in order if quota[i] > lo[i]]

    while sum(quota) != total_test:
        direction = 1 if sum(quota) < total_test else -1
        candidates = adjustable(direction)
        if not candidates:
            break  # constraints pin every stratum; accept the nearest total
        quota[candidates[0]] += direction

    rng = np.random.default_rng(seed)
    test: list[str] = []
    train: list[str] = []
    for members, q in zip(strata, quota):
        perm = rng.permutation(len(members))
        shuffled = [members[int(j)] for j in perm]
        test.extend(shuffled[:q])
        train.extend(shuffled[q:])
    order = {nid: i for i, nid in enumerate(ids)}
    return SplitPlan(
        train=tuple(sorted(train, key=order.__getitem__)),
        test=tuple(sorted(test, key=order.__getitem__)),
    )


def kfold(
    g: HeteroGraph, ids: tuple[str, ...] | list[str], k: int, seed: int
) -> tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]:
    """Stratified folds: (train part, validation part) pairs whose
    validation sets partition ids with sizes differing by at most one."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds the {len(ids)} available ids")
    rng = np.random.default_rng(seed)
    buckets: list[list[str]] = [[] for _ in range(k)]
    for members in _strata(g, list(ids)):
        perm = rng.permutation(len(members))
        for j in perm:
            # Always deal into a currently-smallest bucket: keeps global
            # sizes within 1 even when strata are tiny.
            target = min(range(k), key=lambda b: (len(buckets[b]), b))
            buckets[target].append(members[int(j)])
    order = {nid: i for i, nid in enumerate(ids)}
    folds = []
    for b in range(k):
        val = set(buckets[b])
        folds.append(
            (
                tuple(nid for nid in ids if nid not in val),
                tuple(sorted(buckets[b], key=order.__getitem__)),
            )
        )
    return tuple(folds)
