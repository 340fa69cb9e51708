"""Batched Monte Carlo audit over weight and questionnaire perturbations.

Synthetic users answer and mark importance uniformly at random.  For every
perturbation cell, each batch of users is scored under the baseline and the
modified algorithm; candidate- and party-level outcome changes are counted
and aggregated to mean change rates with 95% confidence intervals across
batches.  Top-k stability cells aggregate tied-rank Spearman correlations
the same way.

Every batch is seeded from (base seed, perturbation key, batch index), so
any cell is reproducible in isolation and results do not depend on worker
count or scheduling.

The scoring kernel avoids per-question rescoring: each user x respondent
pair is reduced once to a 15-bin (importance, distance) count histogram and
every weight perturbation then costs one 15-term dot product.  Question
drops invalidate the histogram and fall back to subtracting the dropped
questions' weights.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import (
    ANSWER_MAX,
    ANSWER_MIN,
    DISTANCE_COUNT,
    Importance,
    RespondentProfile,
    UserResponse,
    WeightMatrix,
)
from .outcomes import PARTY_MODE_SET, PARTY_MODES, rowwise_spearman
from .perturb import (
    OverallModification,
    Perturbation,
    QuestionDrop,
    RowModification,
    SingleModification,
    apply_weights,
    draw_drop_indices,
)

Z_95 = 1.96
BIN_COUNT = len(Importance) * DISTANCE_COUNT  # 15

LEVEL_CANDIDATE = "candidate"
LEVEL_PARTY = "party"


@dataclass(frozen=True)
class AuditConfig:
    """Parameters of a full audit run."""

    batches: int = 100
    users_per_batch: int = 1000
    question_count: int = 20
    delta_sweep: tuple[int, ...] = (1, 2, 3)
    drop_sweep: tuple[int, ...] = (1, 2, 3, 4, 5)
    k_sweep: tuple[int, ...] = tuple(range(3, 16))
    topk_delta: int = 3
    base_seed: int = 0
    comparison_mode: str = PARTY_MODE_SET
    weights: WeightMatrix = field(default_factory=WeightMatrix.default)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta_sweep", tuple(int(d) for d in self.delta_sweep))
        object.__setattr__(self, "drop_sweep", tuple(int(n) for n in self.drop_sweep))
        object.__setattr__(self, "k_sweep", tuple(int(k) for k in self.k_sweep))
        if self.batches < 2:
            raise ValueError("confidence intervals need at least 2 batches")
        if self.users_per_batch < 1:
            raise ValueError("users_per_batch must be >= 1")
        if self.question_count < 1:
            raise ValueError("question_count must be >= 1")
        if not self.delta_sweep or any(d < 1 for d in self.delta_sweep):
            raise ValueError("delta_sweep must be non-empty positive integers")
        if any(not 0 <= n < self.question_count for n in self.drop_sweep):
            raise ValueError(
                f"drop_sweep entries must lie in 0..{self.question_count - 1}"
            )
        if any(k < 2 for k in self.k_sweep):
            raise ValueError("k_sweep entries must be > 1")
        if self.topk_delta < 1:
            raise ValueError("topk_delta must be >= 1")
        if self.comparison_mode not in PARTY_MODES:
            raise ValueError(f"unknown comparison mode: {self.comparison_mode!r}")

    def as_dict(self) -> dict:
        return {
            "batches": self.batches,
            "users_per_batch": self.users_per_batch,
            "question_count": self.question_count,
            "delta_sweep": list(self.delta_sweep),
            "drop_sweep": list(self.drop_sweep),
            "k_sweep": list(self.k_sweep),
            "topk_delta": self.topk_delta,
            "base_seed": self.base_seed,
            "comparison_mode": self.comparison_mode,
            "weights": self.weights.as_dict(),
        }


@dataclass(frozen=True)
class RosterSpec:
    """Synthetic roster: uniform answers by default, round-robin parties.

    When respondent_count equals party_count the roster is party-level and
    each profile's party is its own id.
    """

    respondent_count: int = 779
    party_count: int = 16
    question_count: int = 20
    seed: int = 0
    answer_distribution: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.party_count <= self.respondent_count:
            raise ValueError("need respondent_count >= party_count >= 1")
        if self.question_count < 1:
            raise ValueError("question_count must be >= 1")
        if self.answer_distribution is not None:
            dist = tuple(float(p) for p in self.answer_distribution)
            if len(dist) != ANSWER_MAX - ANSWER_MIN + 1:
                raise ValueError("answer_distribution needs one entry per answer 1..5")
            if any(p < 0 for p in dist) or sum(dist) <= 0:
                raise ValueError("answer_distribution must be non-negative, sum > 0")
            total = sum(dist)
            object.__setattr__(self, "answer_distribution", tuple(p / total for p in dist))


@dataclass(frozen=True)
class BatchResult:
    """Change counts for one batch at one level of one perturbation cell."""

    perturbation_key: str
    level: str
    batch_index: int
    trials: int
    changed: int
    skips: int

    @property
    def change_pct(self) -> float:
        return 100.0 * self.changed / self.trials


@dataclass(frozen=True)
class CiSummary:
    mean: float
    ci_low: float
    ci_high: float

    @property
    def half_width(self) -> float:
        return self.mean - self.ci_low


@dataclass(frozen=True)
class ChangeRateRow:
    """Aggregated change rate for one perturbation cell at one level."""

    kind: str
    importance: str | None
    distance: int | None
    delta: int | None
    n: int | None
    level: str
    mean_change_pct: float
    ci_low: float
    ci_high: float
    batches: int
    trials: int
    skips: int


@dataclass(frozen=True)
class TopKRow:
    """Aggregated top-k Spearman correlation for one perturbation cell."""

    kind: str
    importance: str | None
    distance: int | None
    delta: int | None
    k: int
    mean_rho: float
    ci_low: float
    ci_high: float
    batches: int
    trials: int
    degenerate: int


@dataclass(frozen=True)
class AuditReport:
    change_rates: tuple[ChangeRateRow, ...]
    topk: tuple[TopKRow, ...]
    provenance: dict


def derive_seed(base_seed: int, perturbation_key: str, batch_index: int) -> int:
    """Stable, platform-independent per-batch seed."""
    payload = f"{base_seed}|{perturbation_key}|{batch_index}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def _perturbation_key(perturbation: Perturbation | None) -> str:
    return "identity" if perturbation is None else perturbation.key()


def generate_users(
    rng: np.random.Generator, count: int, question_count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform answers (1..5) and importance marks (0..2) as uint8 matrices.

    Answers are drawn first, then marks; batch kernels rely on this order.
    """
    answers = rng.integers(
        ANSWER_MIN, ANSWER_MAX + 1, size=(count, question_count), dtype=np.uint8
    )
    marks = rng.integers(
        0, len(Importance), size=(count, question_count), dtype=np.uint8
    )
    return answers, marks


def generate_user(rng: np.random.Generator, question_count: int) -> UserResponse:
    """One synthetic user with uniform answers and importance marks."""
    answers, marks = generate_users(rng, 1, question_count)
    return UserResponse(
        answers=tuple(int(a) for a in answers[0]),
        importances=tuple(Importance(int(i)) for i in marks[0]),
    )


def generate_roster(spec: RosterSpec) -> list[RespondentProfile]:
    """Deterministic synthetic roster; ids are stable and sorted."""
    rng = np.random.default_rng(spec.seed)
    n = spec.respondent_count
    width = len(str(n))
    if spec.answer_distribution is None:
        answers = rng.integers(
            ANSWER_MIN, ANSWER_MAX + 1, size=(n, spec.question_count), dtype=np.uint8
        )
    else:
        answers = rng.choice(
            np.arange(ANSWER_MIN, ANSWER_MAX + 1),
            size=(n, spec.question_count),
            p=np.asarray(spec.answer_distribution),
        ).astype(np.uint8)
    party_level = spec.respondent_count == spec.party_count
    party_width = len(str(spec.party_count))
    roster = []
    for i in range(n):
        rid = f"c{i + 1:0{width}d}"
        party = rid if party_level else f"p{(i % spec.party_count) + 1:0{party_width}d}"
        roster.append(
            RespondentProfile(
                id=rid,
                name=f"Candidate {i + 1}",
                party=party,
                answers=tuple(int(a) for a in answers[i]),
            )
        )
    return roster


def distance_histogram(user: UserResponse, respondent: RespondentProfile) -> np.ndarray:
    """15-bin (importance, distance) count histogram for one pair.

    The dot product with WeightMatrix.flat() equals the naive per-question
    total weighted distance over the full questionnaire.
    """
    d = np.abs(np.asarray(user.answers) - np.asarray(respondent.answers))
    bins = np.asarray([int(i) for i in user.importances]) * DISTANCE_COUNT + d
    return np.bincount(bins, minlength=BIN_COUNT).astype(np.int64)


def histogram_total(histogram: np.ndarray, weights: WeightMatrix) -> int:
    """Total weighted distance from a precomputed pair histogram."""
    return int(histogram @ np.asarray(weights.flat(), dtype=np.int64))


@dataclass(frozen=True)
class _RosterArrays:
    """Roster reduced to kernel-ready arrays (rows in ascending-id order)."""

    answers: np.ndarray
    party_onehot: np.ndarray
    party_labels: tuple[str, ...]
    ids: tuple[str, ...]


def _roster_arrays(roster: Sequence[RespondentProfile], question_count: int) -> _RosterArrays:
    if not roster:
        raise ValueError("roster is empty")
    ordered = sorted(roster, key=lambda r: r.id)
    ids = tuple(r.id for r in ordered)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate respondent ids in roster")
    for r in ordered:
        if r.question_count != question_count:
            raise ValueError(
                f"respondent {r.id} has {r.question_count} answers, "
                f"config expects {question_count}"
            )
    answers = np.array([r.answers for r in ordered], dtype=np.uint8)
    party_labels = tuple(sorted({r.party for r in ordered}))
    party_index = {p: j for j, p in enumerate(party_labels)}
    onehot = np.zeros((len(ordered), len(party_labels)), dtype=np.int32)
    for i, r in enumerate(ordered):
        onehot[i, party_index[r.party]] = 1
    return _RosterArrays(answers=answers, party_onehot=onehot,
                         party_labels=party_labels, ids=ids)


def _bin_counts(bins: np.ndarray) -> np.ndarray:
    """Per-pair histogram over the 15 (importance, distance) bins."""
    n_pairs = bins.shape[0] * bins.shape[1]
    flat = bins.reshape(n_pairs, -1).astype(np.int32)
    offsets = (np.arange(n_pairs, dtype=np.int32) * BIN_COUNT)[:, None]
    counts = np.bincount((flat + offsets).ravel(), minlength=n_pairs * BIN_COUNT)
    return counts.reshape(n_pairs, BIN_COUNT).astype(np.int32)


def _agreements(totals: np.ndarray, max_wd: int) -> np.ndarray:
    """Vectorized exact-integer agreement percentages."""
    return 100 - (100 * totals.astype(np.int64) + max_wd - 1) // max_wd


@dataclass(frozen=True)
class _BatchStats:
    trials: int
    skips: int
    changed_candidate: int
    changed_party: int
    rho_means: tuple[float, ...]
    degenerate: tuple[int, ...]


def _run_batch(
    config: AuditConfig,
    arrays: _RosterArrays,
    perturbation: Perturbation | None,
    batch_index: int,
    ks: tuple[int, ...] = (),
) -> _BatchStats:
    m = config.question_count
    key = _perturbation_key(perturbation)
    rng = np.random.default_rng(derive_seed(config.base_seed, key, batch_index))
    answers, marks = generate_users(rng, config.users_per_batch, m)
    n_users = answers.shape[0]
    n_resp = arrays.answers.shape[0]

    dist = np.abs(
        answers[:, None, :].astype(np.int16) - arrays.answers[None, :, :].astype(np.int16)
    ).astype(np.uint8)
    bins = marks[:, None, :] * np.uint8(DISTANCE_COUNT) + dist
    counts = _bin_counts(bins)

    w0 = np.asarray(config.weights.flat(), dtype=np.int64)
    totals0 = counts @ w0
    max0 = config.weights.max_cell() * m
    include = np.ones(n_users, dtype=bool)

    if perturbation is None:
        totals1, max1 = totals0, max0
    elif isinstance(perturbation, QuestionDrop):
        if not 0 <= perturbation.count < m:
            raise ValueError(f"cannot drop {perturbation.count} of {m} questions")
        totals1 = totals0.reshape(n_users, n_resp).copy()
        if perturbation.count > 0:
            drawn = np.zeros((n_users, perturbation.count), dtype=np.int64)
            for u in range(n_users):
                pool = (
                    np.arange(m)
                    if perturbation.conditioning is None
                    else np.flatnonzero(marks[u] == int(perturbation.conditioning))
                )
                if len(pool) < perturbation.count:
                    include[u] = False
                    continue
                drawn[u] = rng.choice(pool, size=perturbation.count, replace=False)
            dropped_bins = np.take_along_axis(bins, drawn[:, None, :], axis=2)
            totals1 -= w0[dropped_bins].sum(axis=2)
        totals1 = totals1.reshape(-1)
        max1 = config.weights.max_cell() * (m - perturbation.count)
    else:
        modified = apply_weights(config.weights, perturbation)
        totals1 = counts @ np.asarray(modified.flat(), dtype=np.int64)
        max1 = modified.max_cell() * m

    trials = int(include.sum())
    if trials == 0:
        raise ValueError(f"batch {batch_index} of {key}: no eligible users")

    agree0 = _agreements(totals0, max0).reshape(n_users, n_resp)
    agree1 = _agreements(totals1, max1).reshape(n_users, n_resp)

    member0 = agree0 == agree0.max(axis=1, keepdims=True)
    member1 = agree1 == agree1.max(axis=1, keepdims=True)
    cand_changed = (member0 != member1).any(axis=1)

    presence0 = (member0.astype(np.int32) @ arrays.party_onehot) > 0
    presence1 = (member1.astype(np.int32) @ arrays.party_onehot) > 0
    if config.comparison_mode == PARTY_MODE_SET:
        party_changed = (presence0 != presence1).any(axis=1)
    else:
        party_changed = (presence1 & ~presence0).any(axis=1)

    rho_means: list[float] = []
    degenerate: list[int] = []
    if ks:
        order0 = np.argsort(-agree0, axis=1, kind="stable")
        top_idx = order0[:, : max(ks)]
        keys0 = -np.take_along_axis(agree0, top_idx, axis=1)
        keys1 = -np.take_along_axis(agree1, top_idx, axis=1)
        for k in ks:
            rho, degen = rowwise_spearman(keys0[:, :k], keys1[:, :k])
            rho_means.append(float(rho[include].mean()))
            degenerate.append(int(degen[include].sum()))

    return _BatchStats(
        trials=trials,
        skips=n_users - trials,
        changed_candidate=int(cand_changed[include].sum()),
        changed_party=int(party_changed[include].sum()),
        rho_means=tuple(rho_means),
        degenerate=tuple(degenerate),
    )


def _check_drop_cell(config: AuditConfig, perturbation: Perturbation | None) -> None:
    if isinstance(perturbation, QuestionDrop):
        if not 0 <= perturbation.count < config.question_count:
            raise ValueError(
                f"cannot drop {perturbation.count} of {config.question_count} questions"
            )


def run_cell(
    config: AuditConfig,
    roster: Sequence[RespondentProfile],
    perturbation: Perturbation | None,
) -> list[BatchResult]:
    """All batches of one perturbation cell, candidate and party level.

    `perturbation` None compares the baseline against itself (identity).
    """
    _check_drop_cell(config, perturbation)
    arrays = _roster_arrays(roster, config.question_count)
    key = _perturbation_key(perturbation)
    results: list[BatchResult] = []
    for b in range(config.batches):
        stats = _run_batch(config, arrays, perturbation, b)
        results.append(
            BatchResult(key, LEVEL_CANDIDATE, b, stats.trials, stats.changed_candidate, stats.skips)
        )
        results.append(
            BatchResult(key, LEVEL_PARTY, b, stats.trials, stats.changed_party, stats.skips)
        )
    return results


def run_topk_cell(
    config: AuditConfig,
    roster: Sequence[RespondentProfile],
    perturbation: Perturbation | None,
    k: int,
) -> list[float]:
    """Per-batch mean top-k Spearman correlation for one perturbation cell."""
    _check_drop_cell(config, perturbation)
    arrays = _roster_arrays(roster, config.question_count)
    if not 1 < k <= arrays.answers.shape[0]:
        raise ValueError(f"k must satisfy 1 < k <= {arrays.answers.shape[0]}, got {k}")
    return [
        _run_batch(config, arrays, perturbation, b, ks=(k,)).rho_means[0]
        for b in range(config.batches)
    ]


def aggregate(values: Sequence[float]) -> CiSummary:
    """Mean and 95% normal-approximation CI across per-batch values."""
    vals = np.asarray([float(v) for v in values], dtype=np.float64)
    if vals.size < 2:
        raise ValueError("confidence intervals need at least 2 batches")
    mean = float(vals.mean())
    half = Z_95 * float(vals.std(ddof=1)) / math.sqrt(vals.size)
    return CiSummary(mean=mean, ci_low=mean - half, ci_high=mean + half)


def build_perturbations(config: AuditConfig) -> list[Perturbation]:
    """The audit's change-rate sweep in canonical report order."""
    cells: list[Perturbation] = []
    for level in Importance:
        for distance in range(DISTANCE_COUNT):
            for delta in config.delta_sweep:
                cells.append(SingleModification(level, distance, delta))
    for level in Importance:
        for delta in config.delta_sweep:
            cells.append(RowModification(level, delta))
    for delta in config.delta_sweep:
        cells.append(OverallModification(delta))
    for level in Importance:
        for n in config.drop_sweep:
            cells.append(QuestionDrop(n, level))
    return cells


def build_topk_perturbations(config: AuditConfig) -> list[SingleModification]:
    """Single-cell modifications swept by the top-k analysis."""
    return [
        SingleModification(level, distance, config.topk_delta)
        for level in Importance
        for distance in range(DISTANCE_COUNT)
    ]


def _coordinates(perturbation: Perturbation) -> dict:
    importance = getattr(perturbation, "importance", None)
    conditioning = getattr(perturbation, "conditioning", None)
    label = None
    if importance is not None:
        label = importance.label
    elif isinstance(perturbation, QuestionDrop):
        label = conditioning.label if conditioning is not None else "any"
    return {
        "kind": perturbation.kind,
        "importance": label,
        "distance": getattr(perturbation, "distance", None),
        "delta": getattr(perturbation, "delta", None),
        "n": perturbation.count if isinstance(perturbation, QuestionDrop) else None,
    }


def _cell_job(payload: tuple) -> list[_BatchStats]:
    config, arrays, perturbation, ks = payload
    return [
        _run_batch(config, arrays, perturbation, b, ks) for b in range(config.batches)
    ]


def run_audit(
    config: AuditConfig,
    roster: Sequence[RespondentProfile],
    workers: int = 1,
) -> AuditReport:
    """Execute the full sweep and aggregate it into an AuditReport.

    Cells are independent; `workers` > 1 distributes them over processes.
    The report is identical for any worker count.
    """
    from .io import config_digest, roster_digest  # local import keeps loading acyclic

    arrays = _roster_arrays(roster, config.question_count)
    n_resp = arrays.answers.shape[0]
    if config.k_sweep and max(config.k_sweep) > n_resp:
        raise ValueError(
            f"k_sweep maximum {max(config.k_sweep)} exceeds roster size {n_resp}"
        )

    change_cells = build_perturbations(config)
    topk_cells = build_topk_perturbations(config)
    jobs = [(config, arrays, cell, ()) for cell in change_cells]
    jobs += [(config, arrays, cell, tuple(config.k_sweep)) for cell in topk_cells]

    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_cell_job, jobs))
    else:
        outputs = [_cell_job(job) for job in jobs]

    change_rows: list[ChangeRateRow] = []
    for cell, stats in zip(change_cells, outputs[: len(change_cells)]):
        coords = _coordinates(cell)
        trials = sum(s.trials for s in stats)
        skips = sum(s.skips for s in stats)
        for level, counts in (
            (LEVEL_CANDIDATE, [s.changed_candidate for s in stats]),
            (LEVEL_PARTY, [s.changed_party for s in stats]),
        ):
            rates = [100.0 * c / s.trials for c, s in zip(counts, stats)]
            ci = aggregate(rates)
            change_rows.append(
                ChangeRateRow(
                    level=level,
                    mean_change_pct=ci.mean,
                    ci_low=ci.ci_low,
                    ci_high=ci.ci_high,
                    batches=config.batches,
                    trials=trials,
                    skips=skips,
                    **coords,
                )
            )

    topk_rows: list[TopKRow] = []
    for cell, stats in zip(topk_cells, outputs[len(change_cells):]):
        coords = _coordinates(cell)
        coords.pop("n")
        trials = sum(s.trials for s in stats)
        for j, k in enumerate(config.k_sweep):
            ci = aggregate([s.rho_means[j] for s in stats])
            topk_rows.append(
                TopKRow(
                    k=k,
                    mean_rho=ci.mean,
                    ci_low=ci.ci_low,
                    ci_high=ci.ci_high,
                    batches=config.batches,
                    trials=trials,
                    degenerate=sum(s.degenerate[j] for s in stats),
                    **coords,
                )
            )

    provenance = {
        "config": config.as_dict(),
        "config_digest": config_digest(config),
        "base_seed": config.base_seed,
        "comparison_mode": config.comparison_mode,
        "weights": config.weights.as_dict(),
        "roster_digest": roster_digest(roster),
        "roster_size": n_resp,
        "party_count": len(arrays.party_labels),
        "synthetic_users": "uniform answers 1..5, uniform importance marks",
        "note": (
            "rates on synthetic rosters and synthetic users are qualitative "
            "robustness measurements, not estimates for any real electorate"
        ),
    }
    return AuditReport(
        change_rates=tuple(change_rows),
        topk=tuple(topk_rows),
        provenance=provenance,
    )
