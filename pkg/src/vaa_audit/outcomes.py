"""Deciding whether a perturbed run changed the matching outcome.

Candidate-level change compares the tie-aware top sets of the original and
modified rankings; party-level change compares the party sets those top sets
represent.  Top-k stability is quantified with tied-rank Spearman
correlation between the two rankings, restricted to the original top-k.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .engine import MatchScore, TopSet

PARTY_MODE_SET = "set"
PARTY_MODE_CONTAINMENT = "containment"
PARTY_MODES = (PARTY_MODE_SET, PARTY_MODE_CONTAINMENT)


class OutcomeChange(Enum):
    UNCHANGED = "unchanged"
    DROPPED_FROM_TIE = "dropped_from_tie"
    ADDED_TO_TIE = "added_to_tie"
    REPLACED = "replaced"


@dataclass(frozen=True)
class OutcomeComparison:
    changed: bool
    classification: OutcomeChange


@dataclass(frozen=True)
class RankCorrelation:
    rho: float
    k: int
    degenerate: bool = False


def candidate_outcome_changed(original: TopSet, modified: TopSet) -> OutcomeComparison:
    """Classify the relationship between the two top sets.

    Agreement percentages are deliberately ignored; only membership counts.
    """
    orig, mod = original.ids, modified.ids
    if orig == mod:
        classification = OutcomeChange.UNCHANGED
    elif mod < orig:
        classification = OutcomeChange.DROPPED_FROM_TIE
    elif orig < mod:
        classification = OutcomeChange.ADDED_TO_TIE
    else:
        classification = OutcomeChange.REPLACED
    return OutcomeComparison(
        changed=classification is not OutcomeChange.UNCHANGED,
        classification=classification,
    )


def _party_set(top: TopSet, parties: Mapping[str, str]) -> frozenset[str]:
    try:
        return frozenset(parties[i] for i in top.ids)
    except KeyError as exc:
        raise ValueError(f"top set contains unknown respondent id: {exc.args[0]!r}") from exc


def party_outcome_changed(
    original: TopSet,
    modified: TopSet,
    parties: Mapping[str, str],
    mode: str = PARTY_MODE_SET,
) -> bool:
    """True when the parties represented in the top set changed.

    `mode` "set" flags any difference between the two party sets;
    "containment" flags only parties in the modified output that were absent
    from the original.
    """
    if mode not in PARTY_MODES:
        raise ValueError(f"unknown party comparison mode: {mode!r}")
    orig = _party_set(original, parties)
    mod = _party_set(modified, parties)
    if mode == PARTY_MODE_SET:
        return orig != mod
    return not mod <= orig


def average_ranks(keys: np.ndarray) -> np.ndarray:
    """Row-wise ranks 1..n of ascending `keys`, ties receiving average ranks."""
    keys = np.atleast_2d(np.asarray(keys))
    n = keys.shape[1]
    order = np.argsort(keys, axis=1, kind="stable")
    sorted_keys = np.take_along_axis(keys, order, axis=1)
    idx = np.arange(n)
    is_start = np.ones_like(sorted_keys, dtype=bool)
    is_start[:, 1:] = sorted_keys[:, 1:] != sorted_keys[:, :-1]
    is_end = np.ones_like(is_start)
    is_end[:, :-1] = is_start[:, 1:]
    run_start = np.maximum.accumulate(np.where(is_start, idx, 0), axis=1)
    run_end = np.minimum.accumulate(np.where(is_end, idx, n - 1)[:, ::-1], axis=1)[:, ::-1]
    rank_of_sorted = (run_start + run_end) / 2.0 + 1.0
    ranks = np.empty(keys.shape, dtype=np.float64)
    np.put_along_axis(ranks, order, rank_of_sorted, axis=1)
    return ranks


def rowwise_spearman(
    keys_a: np.ndarray, keys_b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Tied-rank Spearman correlation per row of two key matrices.

    Each row is ranked independently (average ranks for ties) and the
    Pearson correlation of the rank vectors is returned.  Rows where either
    rank vector has zero variance get rho 1.0 if the rank vectors are
    identical and 0.0 otherwise, with the degenerate flag set.
    """
    ranks_a = average_ranks(keys_a)
    ranks_b = average_ranks(keys_b)
    ca = ranks_a - ranks_a.mean(axis=1, keepdims=True)
    cb = ranks_b - ranks_b.mean(axis=1, keepdims=True)
    var_a = (ca * ca).sum(axis=1)
    var_b = (cb * cb).sum(axis=1)
    degenerate = (var_a == 0.0) | (var_b == 0.0)
    denom = np.sqrt(var_a * var_b)
    denom[degenerate] = 1.0  # placeholder; overwritten below
    rho = (ca * cb).sum(axis=1) / denom
    identical = (ranks_a == ranks_b).all(axis=1)
    rho[degenerate] = np.where(identical[degenerate], 1.0, 0.0)
    return rho, degenerate


def topk_rank_correlation(
    original: Sequence[MatchScore],
    modified: Sequence[MatchScore],
    k: int,
) -> RankCorrelation:
    """Spearman correlation of the original top-k across the two rankings.

    Membership is fixed by the original ranking's deterministic order; each
    member's rank position in either ranking is its tied-rank (average ranks
    for agreement ties).  Both rank vectors are re-ranked within the k-item
    subset before correlating, which keeps rho in [-1, 1] even when members
    sit far apart in the modified list.
    """
    n = len(original)
    if not 1 < k <= n:
        raise ValueError(f"k must satisfy 1 < k <= {n}, got {k}")
    orig_ids = [s.respondent_id for s in original]
    mod_agreement = {s.respondent_id: s.agreement_pct for s in modified}
    if len(modified) != n or set(orig_ids) != set(mod_agreement):
        raise ValueError("rankings do not cover the same roster")
    top_ids = orig_ids[:k]
    orig_keys = np.array([[-s.agreement_pct for s in original[:k]]], dtype=np.int64)
    mod_keys = np.array([[-mod_agreement[i] for i in top_ids]], dtype=np.int64)
    rho, degenerate = rowwise_spearman(orig_keys, mod_keys)
    return RankCorrelation(rho=float(rho[0]), k=k, degenerate=bool(degenerate[0]))
