from __future__ import annotations

import numpy as np
import pytest

from vaa_audit.engine import (
    Importance,
    QuestionMask,
    UserResponse,
    WeightMatrix,
    max_weighted_distance,
)
from vaa_audit.perturb import (
    NotEnoughEligibleQuestions,
    OverallModification,
    QuestionDrop,
    RowModification,
    SingleModification,
    apply_weights,
    draw_drop_indices,
    eligible_drop_indices,
    sample_drop_mask,
    validate_weights,
)


def _marks(*levels: Importance) -> tuple[Importance, ...]:
    return tuple(levels)


def test_single_cell_bump_changes_one_entry(weights):
    bumped = apply_weights(weights, SingleModification(Importance.NOT_IMPORTANT, 2, 1))
    assert bumped.cell(Importance.NOT_IMPORTANT, 2) == 19
    diffs = [
        (level, d)
        for level in Importance
        for d in range(5)
        if bumped.cell(level, d) != weights.cell(level, d)
    ]
    assert diffs == [(Importance.NOT_IMPORTANT, 2)]


def test_row_bump_shifts_whole_row(weights):
    bumped = apply_weights(weights, RowModification(Importance.NEUTRAL, 1))
    assert bumped.rows[int(Importance.NEUTRAL)] == (7, 13, 19, 25, 31)
    assert bumped.rows[int(Importance.NOT_IMPORTANT)] == weights.rows[0]
    assert bumped.rows[int(Importance.IMPORTANT)] == weights.rows[2]


def test_overall_bump_raises_every_cell_and_the_maximum(weights):
    bumped = apply_weights(weights, OverallModification(1))
    assert bumped.max_cell() == 37
    assert max_weighted_distance(bumped, 20) == 740
    for level in Importance:
        for d in range(5):
            assert bumped.cell(level, d) == weights.cell(level, d) + 1


def test_overall_equals_fifteen_single_bumps(weights):
    delta = 2
    composed = weights
    for level in Importance:
        for d in range(5):
            composed = apply_weights(composed, SingleModification(level, d, delta))
    assert composed == apply_weights(weights, OverallModification(delta))


def test_apply_weights_leaves_input_untouched(weights):
    before = weights.rows
    apply_weights(weights, OverallModification(3))
    apply_weights(weights, SingleModification(Importance.IMPORTANT, 4, 2))
    assert weights.rows == before


def test_default_rows_stay_sorted_under_small_bumps(weights):
    # the production table is non-decreasing along each row; bumping any
    # single cell by up to 3 keeps it that way
    for level in Importance:
        for d in range(5):
            for delta in (1, 2, 3):
                rows = apply_weights(weights, SingleModification(level, d, delta)).rows
                for row in rows:
                    assert list(row) == sorted(row)


def test_non_positive_deltas_rejected():
    for bad in (0, -1):
        with pytest.raises(ValueError):
            SingleModification(Importance.NEUTRAL, 0, bad)
        with pytest.raises(ValueError):
            RowModification(Importance.NEUTRAL, bad)
        with pytest.raises(ValueError):
            OverallModification(bad)
    with pytest.raises(ValueError):
        SingleModification(Importance.NEUTRAL, 5, 1)
    with pytest.raises(ValueError):
        QuestionDrop(-1)


def test_keys_are_stable_identifiers():
    assert SingleModification(Importance.IMPORTANT, 4, 3).key() == "single:important:d4:delta3"
    assert SingleModification(Importance.NOT_IMPORTANT, 0, 1).key() == "single:not_important:d0:delta1"
    assert RowModification(Importance.NEUTRAL, 2).key() == "row:neutral:delta2"
    assert OverallModification(1).key() == "overall:delta1"
    assert QuestionDrop(2, Importance.IMPORTANT).key() == "drop:important:n2"
    assert QuestionDrop(1).key() == "drop:any:n1"
    assert QuestionDrop(0).key() == "drop:any:n0"


def test_question_drop_is_not_a_weight_perturbation(weights):
    with pytest.raises(TypeError):
        apply_weights(weights, QuestionDrop(1))
    with pytest.raises(TypeError):
        apply_weights(weights, "overall:delta1")  # type: ignore[arg-type]


def test_eligible_indices_follow_conditioning():
    marks = _marks(Importance.IMPORTANT, Importance.NEUTRAL, Importance.IMPORTANT,
                   Importance.NOT_IMPORTANT)
    assert eligible_drop_indices(marks, None).tolist() == [0, 1, 2, 3]
    assert eligible_drop_indices(marks, Importance.IMPORTANT).tolist() == [0, 2]
    assert eligible_drop_indices(marks, Importance.NEUTRAL).tolist() == [1]


def test_zero_count_drop_is_identity_and_reads_no_randomness():
    user = UserResponse((1, 2, 3), _marks(*[Importance.NEUTRAL] * 3))
    rng = np.random.default_rng(5)
    state = rng.bit_generator.state
    mask = sample_drop_mask(user, QuestionDrop(0), rng)
    assert mask.active_count == 3
    assert rng.bit_generator.state == state


def test_dropping_all_but_one_without_conditioning():
    user = UserResponse((1, 2, 3, 4), _marks(*[Importance.IMPORTANT] * 4))
    mask = sample_drop_mask(user, QuestionDrop(3), np.random.default_rng(0))
    assert mask.active_count == 1


def test_drop_count_must_leave_a_question():
    user = UserResponse((1, 2, 3), _marks(*[Importance.NEUTRAL] * 3))
    for count in (3, 4):
        with pytest.raises(ValueError):
            sample_drop_mask(user, QuestionDrop(count), np.random.default_rng(0))


def test_drawn_indices_stay_inside_the_eligible_pool():
    marks = _marks(Importance.IMPORTANT, Importance.NEUTRAL, Importance.IMPORTANT,
                   Importance.IMPORTANT, Importance.NOT_IMPORTANT)
    drop = QuestionDrop(2, Importance.IMPORTANT)
    for seed in range(50):
        drawn = draw_drop_indices(marks, drop, np.random.default_rng(seed))
        assert len(drawn) == 2
        assert len(set(drawn.tolist())) == 2
        assert set(drawn.tolist()) <= {0, 2, 3}


def test_drop_draw_is_reproducible():
    marks = _marks(*[Importance.NEUTRAL] * 10)
    drop = QuestionDrop(4, Importance.NEUTRAL)
    a = draw_drop_indices(marks, drop, np.random.default_rng(123))
    b = draw_drop_indices(marks, drop, np.random.default_rng(123))
    assert a.tolist() == b.tolist()


def test_too_few_eligible_questions_is_a_distinct_failure():
    user = UserResponse((1, 2, 3, 4), _marks(
        Importance.IMPORTANT, Importance.NEUTRAL, Importance.NEUTRAL, Importance.NEUTRAL))
    with pytest.raises(NotEnoughEligibleQuestions):
        sample_drop_mask(user, QuestionDrop(2, Importance.IMPORTANT),
                         np.random.default_rng(0))
    # ... and it is not just a ValueError for control flow: callers catch it
    assert issubclass(NotEnoughEligibleQuestions, Exception)
    assert not issubclass(NotEnoughEligibleQuestions, ValueError)


def test_masked_agreement_renormalizes_to_active_count(weights):
    from vaa_audit.engine import RespondentProfile, agreement

    user = UserResponse((3,) * 20, _marks(*[Importance.NEUTRAL] * 20))
    resp = RespondentProfile(id="r", name="R", party="p", answers=(5,) * 20)
    mask = QuestionMask.dropping(20, [0, 1])
    score = agreement(weights, user, resp, mask)
    assert score.total_weighted_distance == 18 * 18
    assert score.agreement_pct == 100 - (100 * 324 + 648 - 1) // 648


def test_validate_weights_accepts_matrix_and_raw_rows(weights):
    assert validate_weights(weights) == []
    assert validate_weights([[0, 1, 2, 3, 4], [0, 0, 0, 0, 0], [1, 1, 1, 1, 1]]) == []
    problems = validate_weights([[0, 0, 0, 0, 0]] * 3)
    assert problems
    assert validate_weights([[1, 2], [3, 4], [5, 6]])
