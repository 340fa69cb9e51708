"""Perturbations applied to the matching algorithm during an audit.

Four modification families: bump a single weight cell, bump one importance
row, bump every cell, or drop questions from the questionnaire.  Weight
perturbations are pure transformations of a :class:`WeightMatrix`; question
drops are sampled masks driven by a caller-owned random generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .engine import (
    DISTANCE_COUNT,
    Importance,
    QuestionMask,
    UserResponse,
    WeightMatrix,
    weight_violations,
)


class NotEnoughEligibleQuestions(Exception):
    """User marked fewer questions with the conditioning level than must drop."""


def _check_delta(delta: int) -> int:
    d = int(delta)
    if d < 1:
        raise ValueError(f"delta must be a positive integer, got {delta}")
    return d


@dataclass(frozen=True)
class SingleModification:
    """Add delta to exactly one weight cell."""

    importance: Importance
    distance: int
    delta: int

    kind = "single"

    def __post_init__(self) -> None:
        object.__setattr__(self, "importance", Importance(self.importance))
        if not 0 <= self.distance < DISTANCE_COUNT:
            raise ValueError(f"distance out of range 0..{DISTANCE_COUNT - 1}: {self.distance}")
        object.__setattr__(self, "delta", _check_delta(self.delta))

    def key(self) -> str:
        return f"single:{self.importance.label}:d{self.distance}:delta{self.delta}"


@dataclass(frozen=True)
class RowModification:
    """Add delta to all five cells of one importance row."""

    importance: Importance
    delta: int

    kind = "row"

    def __post_init__(self) -> None:
        object.__setattr__(self, "importance", Importance(self.importance))
        object.__setattr__(self, "delta", _check_delta(self.delta))

    def key(self) -> str:
        return f"row:{self.importance.label}:delta{self.delta}"


@dataclass(frozen=True)
class OverallModification:
    """Add delta to every cell of the weight matrix."""

    delta: int

    kind = "overall"

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", _check_delta(self.delta))

    def key(self) -> str:
        return f"overall:delta{self.delta}"


@dataclass(frozen=True)
class QuestionDrop:
    """Drop `count` questions, optionally only among those the user marked
    with `conditioning`; `count` 0 is the identity drop used by identity
    checks.  The upper bound (count < questionnaire length) is enforced where
    the questionnaire length is known."""

    count: int
    conditioning: Importance | None = None

    kind = "drop"

    def __post_init__(self) -> None:
        if int(self.count) < 0:
            raise ValueError(f"drop count must be >= 0, got {self.count}")
        object.__setattr__(self, "count", int(self.count))
        if self.conditioning is not None:
            object.__setattr__(self, "conditioning", Importance(self.conditioning))

    def key(self) -> str:
        scope = self.conditioning.label if self.conditioning is not None else "any"
        return f"drop:{scope}:n{self.count}"


WeightPerturbation = Union[SingleModification, RowModification, OverallModification]
Perturbation = Union[WeightPerturbation, QuestionDrop]


def apply_weights(weights: WeightMatrix, perturbation: WeightPerturbation) -> WeightMatrix:
    """Return a new matrix with the perturbation's cells bumped by delta."""
    if isinstance(perturbation, QuestionDrop):
        raise TypeError("question drops do not modify the weight matrix")
    rows = [list(row) for row in weights.rows]
    if isinstance(perturbation, SingleModification):
        rows[perturbation.importance][perturbation.distance] += perturbation.delta
    elif isinstance(perturbation, RowModification):
        rows[perturbation.importance] = [
            c + perturbation.delta for c in rows[perturbation.importance]
        ]
    elif isinstance(perturbation, OverallModification):
        rows = [[c + perturbation.delta for c in row] for row in rows]
    else:
        raise TypeError(f"not a weight perturbation: {perturbation!r}")
    return WeightMatrix(tuple(tuple(row) for row in rows))


def eligible_drop_indices(
    importances: Sequence[Importance], conditioning: Importance | None
) -> np.ndarray:
    """Question indices a drop may remove: all, or only those marked as given."""
    if conditioning is None:
        return np.arange(len(importances))
    marks = np.asarray([int(i) for i in importances])
    return np.flatnonzero(marks == int(conditioning))


def draw_drop_indices(
    importances: Sequence[Importance],
    drop: QuestionDrop,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample the dropped question indices for one user trial.

    Raises :class:`NotEnoughEligibleQuestions` when the user marked fewer
    than `count` questions with the conditioning level; the caller skips the
    trial.  Draws nothing from `rng` when count is 0.
    """
    m = len(importances)
    if drop.count >= m and drop.count > 0:
        raise ValueError(f"cannot drop {drop.count} of {m} questions")
    if drop.count == 0:
        return np.empty(0, dtype=np.int64)
    pool = eligible_drop_indices(importances, drop.conditioning)
    if len(pool) < drop.count:
        raise NotEnoughEligibleQuestions(
            f"user marked {len(pool)} questions as "
            f"{drop.conditioning.label if drop.conditioning else 'eligible'}, "
            f"cannot drop {drop.count}"
        )
    return rng.choice(pool, size=drop.count, replace=False)


def sample_drop_mask(
    user: UserResponse, drop: QuestionDrop, rng: np.random.Generator
) -> QuestionMask:
    """Mask with exactly `count` inactive questions drawn from the eligible pool."""
    dropped = draw_drop_indices(user.importances, drop, rng)
    return QuestionMask.dropping(user.question_count, (int(i) for i in dropped))


def validate_weights(weights: WeightMatrix | Sequence[Sequence[int]]) -> list[str]:
    """Violation report for a weight table; empty list means valid.

    Accepts either a constructed matrix (always valid) or raw row data, so
    ingestion can report every problem instead of failing on the first.
    """
    rows = weights.rows if isinstance(weights, WeightMatrix) else weights
    return weight_violations(rows)
