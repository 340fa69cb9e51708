from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from vaa_audit.engine import MatchScore, TopSet
from vaa_audit.outcomes import (
    OutcomeChange,
    average_ranks,
    candidate_outcome_changed,
    party_outcome_changed,
    rowwise_spearman,
    topk_rank_correlation,
)


def _top(*ids: str, pct: int = 90) -> TopSet:
    return TopSet(ids=frozenset(ids), agreement_pct=pct)


def _ranking(pairs):
    return [MatchScore(respondent_id=i, total_weighted_distance=0,
                       disagreement_pct=100 - a, agreement_pct=a)
            for i, a in pairs]


def test_candidate_outcome_classification():
    assert candidate_outcome_changed(_top("a"), _top("a")).classification is OutcomeChange.UNCHANGED
    assert candidate_outcome_changed(_top("a", "b"), _top("a")).classification \
        is OutcomeChange.DROPPED_FROM_TIE
    assert candidate_outcome_changed(_top("a"), _top("a", "b")).classification \
        is OutcomeChange.ADDED_TO_TIE
    assert candidate_outcome_changed(_top("a"), _top("b")).classification \
        is OutcomeChange.REPLACED


def test_changed_flag_mirrors_classification():
    cases = [
        (_top("a"), _top("a")),
        (_top("a", "b"), _top("b")),
        (_top("a"), _top("a", "c")),
        (_top("a", "b"), _top("c", "d")),
    ]
    for orig, mod in cases:
        result = candidate_outcome_changed(orig, mod)
        assert result.changed == (result.classification is not OutcomeChange.UNCHANGED)


def test_classification_swaps_labels_under_argument_swap():
    orig, mod = _top("a", "b", "c"), _top("a", "b")
    fwd = candidate_outcome_changed(orig, mod)
    back = candidate_outcome_changed(mod, orig)
    assert fwd.classification is OutcomeChange.DROPPED_FROM_TIE
    assert back.classification is OutcomeChange.ADDED_TO_TIE
    assert fwd.changed and back.changed


def test_agreement_level_does_not_matter_for_outcome():
    assert not candidate_outcome_changed(_top("a", pct=95), _top("a", pct=40)).changed


def test_party_outcome_set_vs_containment():
    parties = {"a": "X", "b": "Y", "c": "X"}
    orig = _top("a", "b")
    mod = _top("a")
    # {X, Y} vs {X}: different sets, but the modified parties are contained
    assert party_outcome_changed(orig, mod, parties, mode="set") is True
    assert party_outcome_changed(orig, mod, parties, mode="containment") is False
    # replacement within the same party is never a party-level change
    assert party_outcome_changed(_top("a"), _top("c"), parties, mode="set") is False


def test_party_outcome_growth_is_a_set_change():
    parties = {"a": "X", "b": "Y"}
    assert party_outcome_changed(_top("a"), _top("a", "b"), parties, mode="set")
    # containment asks whether the new parties fit inside the old ones
    assert party_outcome_changed(_top("a"), _top("a", "b"), parties,
                                 mode="containment")


def test_party_outcome_rejects_unknown_ids_and_modes():
    parties = {"a": "X"}
    with pytest.raises(ValueError, match="unknown respondent"):
        party_outcome_changed(_top("a"), _top("z"), parties, mode="set")
    with pytest.raises(ValueError):
        party_outcome_changed(_top("a"), _top("a"), parties, mode="jaccard")


def test_average_ranks_matches_scipy_on_random_matrices():
    rng = np.random.default_rng(8)
    for _ in range(50):
        rows = int(rng.integers(1, 6))
        cols = int(rng.integers(2, 12))
        keys = rng.integers(0, 6, (rows, cols))
        ours = average_ranks(keys)
        for r in range(rows):
            expected = stats.rankdata(keys[r], method="average")
            assert np.allclose(ours[r], expected)


def test_rowwise_spearman_matches_scipy():
    rng = np.random.default_rng(21)
    for _ in range(60):
        cols = int(rng.integers(3, 15))
        a = rng.integers(0, 8, (1, cols))  # small range forces ties
        b = rng.integers(0, 8, (1, cols))
        rho, degenerate = rowwise_spearman(a, b)
        expected = stats.spearmanr(a[0], b[0]).statistic
        if np.isnan(expected):
            assert degenerate[0]
        else:
            assert not degenerate[0]
            assert abs(rho[0] - expected) < 1e-10


def test_rowwise_spearman_degenerate_rows():
    const = np.array([[5, 5, 5]])
    rho, degenerate = rowwise_spearman(const, const.copy())
    assert rho[0] == 1.0 and degenerate[0]
    varying = np.array([[1, 2, 3]])
    rho, degenerate = rowwise_spearman(const, varying)
    assert rho[0] == 0.0 and degenerate[0]


def test_rowwise_spearman_handles_many_rows_at_once():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 100, (40, 9))
    b = rng.integers(0, 100, (40, 9))
    rho, degenerate = rowwise_spearman(a, b)
    assert rho.shape == (40,) and degenerate.shape == (40,)
    for r in range(40):
        assert abs(rho[r] - stats.spearmanr(a[r], b[r]).statistic) < 1e-10


def test_topk_identical_rankings_give_rho_one():
    ranking = _ranking([("a", 90), ("b", 80), ("c", 70), ("d", 60)])
    for k in (2, 3, 4):
        result = topk_rank_correlation(ranking, ranking, k)
        assert result.rho == 1.0
        assert result.k == k
        assert not result.degenerate


def test_topk_self_correlation_is_one_even_with_ties():
    ranking = _ranking([("a", 90), ("b", 90), ("c", 70), ("d", 70)])
    assert topk_rank_correlation(ranking, ranking, 4).rho == 1.0


def test_topk_full_reversal_gives_minus_one():
    orig = _ranking([("a", 90), ("b", 80), ("c", 70)])
    flipped = _ranking([("a", 10), ("b", 20), ("c", 30)])
    result = topk_rank_correlation(orig, flipped, 3)
    assert result.rho == -1.0
    assert not result.degenerate


def test_topk_single_adjacent_swap():
    # original order a > b > c; modified order b > a > c
    orig = _ranking([("a", 90), ("b", 80), ("c", 70)])
    swapped = _ranking([("a", 80), ("b", 90), ("c", 70)])
    assert topk_rank_correlation(orig, swapped, 3).rho == pytest.approx(0.5)


def test_topk_membership_is_fixed_by_the_original_ranking():
    # "d" overtakes everyone in the modified ranking but is outside the
    # original top-2, so it cannot affect the correlation.
    orig = _ranking([("a", 90), ("b", 80), ("c", 70), ("d", 60)])
    mod = _ranking([("a", 85), ("b", 75), ("c", 70), ("d", 99)])
    assert topk_rank_correlation(orig, mod, 2).rho == 1.0


def test_topk_validates_k_and_roster_coverage():
    ranking = _ranking([("a", 90), ("b", 80), ("c", 70)])
    for k in (0, 1, 4):
        with pytest.raises(ValueError):
            topk_rank_correlation(ranking, ranking, k)
    other = _ranking([("a", 90), ("b", 80), ("z", 70)])
    with pytest.raises(ValueError, match="roster"):
        topk_rank_correlation(ranking, other, 2)
    with pytest.raises(ValueError):
        topk_rank_correlation(ranking, ranking[:2], 2)
