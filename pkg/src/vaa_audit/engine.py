"""Core matching engine of the audited voting advice application.

Implements the deployed scoring rule exactly: per-question Likert distances
are mapped through a 3x5 weight table (importance level x answer distance),
summed over the active questions, normalized against the maximum possible
weighted distance, and converted to an integer agreement percentage via an
exact integer ceiling.  All arithmetic is integer-exact; there is no
floating point anywhere in the scoring path.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

ANSWER_MIN = 1
ANSWER_MAX = 5
DISTANCE_COUNT = ANSWER_MAX - ANSWER_MIN + 1  # answer distances 0..4


class Importance(IntEnum):
    """Per-question importance marking selected by the user.

    The numeric values order the weight-table rows; they carry no other
    semantics.
    """

    NOT_IMPORTANT = 0
    NEUTRAL = 1
    IMPORTANT = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Importance":
        key = str(label).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "not_important": cls.NOT_IMPORTANT,
            "notimportant": cls.NOT_IMPORTANT,
            "neutral": cls.NEUTRAL,
            "important": cls.IMPORTANT,
            "0": cls.NOT_IMPORTANT,
            "1": cls.NEUTRAL,
            "2": cls.IMPORTANT,
        }
        if key not in aliases:
            raise ValueError(f"unknown importance level: {label!r}")
        return aliases[key]


# Weight table of the deployed matching algorithm (2022 configuration).
# Rows follow the Importance order; columns are answer distances 0..4.
DEFAULT_WEIGHT_ROWS: tuple[tuple[int, ...], ...] = (
    (12, 15, 18, 21, 24),  # not important
    (6, 12, 18, 24, 30),  # neutral
    (0, 9, 18, 27, 36),  # important
)


def weight_violations(rows: Sequence[Sequence[int]]) -> list[str]:
    """Check raw weight-table data, returning every violation found.

    An empty list means the data can back a valid :class:`WeightMatrix`.
    """
    violations: list[str] = []
    if len(rows) != len(Importance):
        violations.append(f"expected {len(Importance)} rows, got {len(rows)}")
        return violations
    for level in Importance:
        row = rows[level]
        if len(row) != DISTANCE_COUNT:
            violations.append(
                f"row {level.label}: expected {DISTANCE_COUNT} cells, got {len(row)}"
            )
            continue
        for distance, cell in enumerate(row):
            if not isinstance(cell, int) or isinstance(cell, bool):
                violations.append(
                    f"cell ({level.label}, d={distance}): not an integer: {cell!r}"
                )
            elif cell < 0:
                violations.append(
                    f"cell ({level.label}, d={distance}): negative weight {cell}"
                )
    if not violations and max(max(row) for row in rows) == 0:
        violations.append("all cells are zero; the maximum weight must be positive")
    return violations


@dataclass(frozen=True)
class WeightMatrix:
    """3x5 table of non-negative integer weights, indexed (importance, distance)."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(c) for c in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        violations = weight_violations(rows)
        if violations:
            raise ValueError("invalid weight matrix: " + "; ".join(violations))

    @classmethod
    def default(cls) -> "WeightMatrix":
        return cls(DEFAULT_WEIGHT_ROWS)

    def cell(self, importance: Importance, distance: int) -> int:
        if not 0 <= distance < DISTANCE_COUNT:
            raise ValueError(f"distance out of range 0..{DISTANCE_COUNT - 1}: {distance}")
        return self.rows[importance][distance]

    def max_cell(self) -> int:
        return max(max(row) for row in self.rows)

    def flat(self) -> tuple[int, ...]:
        """Row-major flattening (importance-major), 15 entries."""
        return tuple(cell for row in self.rows for cell in row)

    def as_dict(self) -> dict[str, list[int]]:
        return {level.label: list(self.rows[level]) for level in Importance}


def _check_answers(answers: Sequence[int], what: str) -> tuple[int, ...]:
    out = []
    for i, a in enumerate(answers):
        v = int(a)
        if not ANSWER_MIN <= v <= ANSWER_MAX:
            raise ValueError(
                f"{what}: answer {i + 1} out of range {ANSWER_MIN}..{ANSWER_MAX}: {a!r}"
            )
        out.append(v)
    if not out:
        raise ValueError(f"{what}: empty answer vector")
    return tuple(out)


@dataclass(frozen=True)
class UserResponse:
    """A voter's answers plus per-question importance markings."""

    answers: tuple[int, ...]
    importances: tuple[Importance, ...]

    def __post_init__(self) -> None:
        answers = _check_answers(self.answers, "user response")
        importances = tuple(Importance(i) for i in self.importances)
        if len(importances) != len(answers):
            raise ValueError(
                f"user response: {len(answers)} answers but "
                f"{len(importances)} importance markings"
            )
        object.__setattr__(self, "answers", answers)
        object.__setattr__(self, "importances", importances)

    @property
    def question_count(self) -> int:
        return len(self.answers)


@dataclass(frozen=True)
class RespondentProfile:
    """A candidate (or party, in party-level mode) with a full answer vector."""

    id: str
    name: str
    party: str
    answers: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(
            self, "answers", _check_answers(self.answers, f"respondent {self.id}")
        )

    @property
    def question_count(self) -> int:
        return len(self.answers)


@dataclass(frozen=True)
class QuestionMask:
    """Boolean activity vector over the questionnaire; at least one active."""

    active: tuple[bool, ...]

    def __post_init__(self) -> None:
        active = tuple(bool(a) for a in self.active)
        if not any(active):
            raise ValueError("question mask must keep at least one question active")
        object.__setattr__(self, "active", active)

    @classmethod
    def full(cls, question_count: int) -> "QuestionMask":
        return cls((True,) * question_count)

    @classmethod
    def dropping(cls, question_count: int, dropped: Iterable[int]) -> "QuestionMask":
        active = [True] * question_count
        for idx in dropped:
            if not 0 <= idx < question_count:
                raise ValueError(f"dropped index out of range: {idx}")
            active[idx] = False
        return cls(tuple(active))

    @property
    def active_count(self) -> int:
        return sum(self.active)

    def active_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.active) if a)


@dataclass(frozen=True)
class MatchScore:
    """Scoring result for one user x respondent pair."""

    respondent_id: str
    total_weighted_distance: int
    disagreement_pct: int
    agreement_pct: int


@dataclass(frozen=True)
class TopSet:
    """All respondents tied at the maximum agreement percentage."""

    ids: frozenset[str]
    agreement_pct: int

    def __post_init__(self) -> None:
        if not self.ids:
            raise ValueError("top set cannot be empty")
        object.__setattr__(self, "ids", frozenset(str(i) for i in self.ids))


def answer_distance(user_answer: int, respondent_answer: int) -> int:
    """Absolute Likert distance between two answers; symmetric, in 0..4."""
    u = int(user_answer)
    p = int(respondent_answer)
    for v in (u, p):
        if not ANSWER_MIN <= v <= ANSWER_MAX:
            raise ValueError(f"answer out of range {ANSWER_MIN}..{ANSWER_MAX}: {v}")
    return abs(u - p)


def lookup_weight(weights: WeightMatrix, distance: int, importance: Importance) -> int:
    """Weight-table cell for the given answer distance and importance level."""
    return weights.cell(Importance(importance), distance)


def _check_lengths(user: UserResponse, respondent: RespondentProfile,
                   mask: QuestionMask | None) -> None:
    m = user.question_count
    if respondent.question_count != m:
        raise ValueError(
            f"respondent {respondent.id} has {respondent.question_count} answers, "
            f"user has {m}"
        )
    if mask is not None and len(mask.active) != m:
        raise ValueError(f"mask length {len(mask.active)} does not match {m} questions")


def total_weighted_distance(
    weights: WeightMatrix,
    user: UserResponse,
    respondent: RespondentProfile,
    mask: QuestionMask | None = None,
) -> int:
    """Sum of weight-table lookups over the active questions."""
    _check_lengths(user, respondent, mask)
    active = mask.active if mask is not None else (True,) * user.question_count
    total = 0
    for u, p, level, on in zip(user.answers, respondent.answers, user.importances, active):
        if on:
            total += weights.rows[level][abs(u - p)]
    return total


def max_weighted_distance(weights: WeightMatrix, active_count: int) -> int:
    """Normalization denominator: global maximum cell times active questions.

    Recomputed from the actual weight matrix so that perturbed tables
    renormalize correctly.
    """
    if active_count < 1:
        raise ValueError(f"active question count must be >= 1, got {active_count}")
    return weights.max_cell() * active_count


def ceil_div(numerator: int, denominator: int) -> int:
    """Exact integer ceiling of numerator/denominator for non-negative inputs."""
    return (numerator + denominator - 1) // denominator


def agreement(
    weights: WeightMatrix,
    user: UserResponse,
    respondent: RespondentProfile,
    mask: QuestionMask | None = None,
) -> MatchScore:
    """Score one pair: disagreement = ceil(100 * total / max), agreement = 100 - it."""
    total = total_weighted_distance(weights, user, respondent, mask)
    active = mask.active_count if mask is not None else user.question_count
    max_wd = max_weighted_distance(weights, active)
    disagreement = ceil_div(100 * total, max_wd)
    return MatchScore(
        respondent_id=respondent.id,
        total_weighted_distance=total,
        disagreement_pct=disagreement,
        agreement_pct=100 - disagreement,
    )


def rank_all(
    weights: WeightMatrix,
    user: UserResponse,
    roster: Sequence[RespondentProfile],
    mask: QuestionMask | None = None,
) -> list[MatchScore]:
    """Score the full roster, descending by agreement, ties by ascending id."""
    if not roster:
        raise ValueError("roster is empty")
    ids = [r.id for r in roster]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate respondent ids in roster: {dupes}")
    scores = [agreement(weights, user, r, mask) for r in roster]
    scores.sort(key=lambda s: (-s.agreement_pct, s.respondent_id))
    return scores


def top_set(ranking: Sequence[MatchScore]) -> TopSet:
    """All respondents sharing the ranking's maximum agreement percentage."""
    if not ranking:
        raise ValueError("ranking is empty")
    best = ranking[0].agreement_pct
    members = frozenset(s.respondent_id for s in ranking if s.agreement_pct == best)
    return TopSet(ids=members, agreement_pct=best)
