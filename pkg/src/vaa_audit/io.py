"""Roster, weights, and report serialization.

Report exports are deterministic: fixed column order, fixed row order (as
produced by the audit), floats printed with six decimals in CSV, and JSON
with sorted keys.  Files are written to a temp path and moved into place so
readers never observe partial output.
"""

from __future__ import annotations

import csv
import hashlib
import io as _stdio
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .engine import ANSWER_MAX, ANSWER_MIN, Importance, RespondentProfile, WeightMatrix
from .simulate import AuditReport, ChangeRateRow, TopKRow

CHANGE_COLUMNS = (
    "kind", "importance", "distance", "delta", "n",
    "level", "mean_change_pct", "ci_low", "ci_high",
    "batches", "trials", "skips",
)
TOPK_COLUMNS = (
    "kind", "importance", "distance", "delta", "k",
    "mean_rho", "ci_low", "ci_high", "batches", "trials", "degenerate",
)
WEIGHT_ROW_KEYS = tuple(level.label for level in Importance)


class RosterFormatError(ValueError):
    """Raised when a roster file cannot be parsed under strict loading."""


class WeightsFormatError(ValueError):
    """Raised when a weights file is malformed or violates the weight rules."""


@dataclass(frozen=True)
class RowIssue:
    """A problem found on one line of a roster file (1-based, header is 1)."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class RosterLoadResult:
    profiles: tuple[RespondentProfile, ...]
    issues: tuple[RowIssue, ...]


def _roster_header(question_count: int) -> list[str]:
    return ["id", "name", "party"] + [f"a{i + 1}" for i in range(question_count)]


def load_roster(
    path: str | os.PathLike,
    question_count: int = 20,
    strict: bool = True,
) -> RosterLoadResult:
    """Read a roster CSV (columns id,name,party,a1..am).

    Strict mode raises RosterFormatError listing every line-numbered issue.
    Otherwise malformed rows are skipped and reported in the result.
    """
    expected = _roster_header(question_count)
    issues: list[RowIssue] = []
    profiles: list[RespondentProfile] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise RosterFormatError(f"{path}: empty file")
        if [h.strip() for h in header] != expected:
            raise RosterFormatError(
                f"{path}: header must be {','.join(expected)}"
            )
        for line, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(expected):
                issues.append(RowIssue(line, f"expected {len(expected)} fields, got {len(row)}"))
                continue
            rid, name, party = (f.strip() for f in row[:3])
            if not rid:
                issues.append(RowIssue(line, "empty id"))
                continue
            if rid in seen:
                issues.append(RowIssue(line, f"duplicate id {rid!r}"))
                continue
            if not party:
                issues.append(RowIssue(line, f"empty party for id {rid!r}"))
                continue
            answers: list[int] = []
            bad = False
            for col, field in zip(expected[3:], row[3:]):
                try:
                    value = int(field.strip())
                except ValueError:
                    issues.append(RowIssue(line, f"{col}: not an integer: {field.strip()!r}"))
                    bad = True
                    continue
                if not ANSWER_MIN <= value <= ANSWER_MAX:
                    issues.append(
                        RowIssue(line, f"{col}: answer {value} outside {ANSWER_MIN}..{ANSWER_MAX}")
                    )
                    bad = True
                    continue
                answers.append(value)
            if bad:
                continue
            seen.add(rid)
            profiles.append(
                RespondentProfile(id=rid, name=name, party=party, answers=tuple(answers))
            )
    if strict and issues:
        detail = "; ".join(str(i) for i in issues[:20])
        more = "" if len(issues) <= 20 else f" (+{len(issues) - 20} more)"
        raise RosterFormatError(f"{path}: {detail}{more}")
    return RosterLoadResult(profiles=tuple(profiles), issues=tuple(issues))


def write_roster(path: str | os.PathLike, roster: Sequence[RespondentProfile]) -> None:
    if not roster:
        raise ValueError("refusing to write an empty roster")
    question_count = roster[0].question_count
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_roster_header(question_count))
    for r in roster:
        if r.question_count != question_count:
            raise ValueError(f"respondent {r.id}: inconsistent answer count")
        writer.writerow([r.id, r.name, r.party, *r.answers])
    _atomic_write(path, buf.getvalue())


def load_weights(path: str | os.PathLike) -> WeightMatrix:
    """Read a weight table from JSON with one five-entry row per level."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightsFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise WeightsFormatError(f"{path}: top level must be an object")
    missing = [k for k in WEIGHT_ROW_KEYS if k not in data]
    if missing:
        raise WeightsFormatError(f"{path}: missing rows: {', '.join(missing)}")
    extra = [k for k in data if k not in WEIGHT_ROW_KEYS]
    if extra:
        raise WeightsFormatError(f"{path}: unknown keys: {', '.join(sorted(extra))}")
    rows = []
    for key in WEIGHT_ROW_KEYS:
        row = data[key]
        if not isinstance(row, list) or len(row) != 5 or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in row
        ):
            raise WeightsFormatError(f"{path}: row {key!r} must be a list of 5 integers")
        rows.append(tuple(row))
    try:
        return WeightMatrix(rows=tuple(rows))
    except ValueError as exc:
        raise WeightsFormatError(f"{path}: {exc}") from exc


def weights_to_json(weights: WeightMatrix) -> str:
    return json.dumps(weights.as_dict(), indent=2) + "\n"


def write_weights(path: str | os.PathLike, weights: WeightMatrix) -> None:
    _atomic_write(path, weights_to_json(weights))


def roster_digest(roster: Sequence[RespondentProfile]) -> str:
    """Order-independent sha256 over the canonical roster serialization."""
    h = hashlib.sha256()
    for r in sorted(roster, key=lambda r: r.id):
        line = "|".join([r.id, r.name, r.party, ",".join(str(a) for a in r.answers)])
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def config_digest(config) -> str:
    payload = json.dumps(config.as_dict(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _change_csv(rows: Sequence[ChangeRateRow]) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CHANGE_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, col)) for col in CHANGE_COLUMNS])
    return buf.getvalue()


def _topk_csv(rows: Sequence[TopKRow]) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TOPK_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, col)) for col in TOPK_COLUMNS])
    return buf.getvalue()


def report_to_json(report: AuditReport) -> str:
    payload = {
        "provenance": report.provenance,
        "change_rates": [row.__dict__ for row in report.change_rates],
        "topk": [row.__dict__ for row in report.topk],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def export_report(
    report: AuditReport, out_dir: str | os.PathLike, stem: str = "audit"
) -> dict[str, Path]:
    """Write {stem}.csv, {stem}_topk.csv, and {stem}.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "change_rates": out / f"{stem}.csv",
        "topk": out / f"{stem}_topk.csv",
        "json": out / f"{stem}.json",
    }
    _atomic_write(paths["change_rates"], _change_csv(report.change_rates))
    _atomic_write(paths["topk"], _topk_csv(report.topk))
    _atomic_write(paths["json"], report_to_json(report))
    return paths


def load_report(path: str | os.PathLike) -> AuditReport:
    """Reconstruct an AuditReport from its JSON export."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    change = tuple(ChangeRateRow(**row) for row in data["change_rates"])
    topk = tuple(TopKRow(**row) for row in data["topk"])
    return AuditReport(change_rates=change, topk=topk, provenance=data["provenance"])


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink(missing_ok=True)
