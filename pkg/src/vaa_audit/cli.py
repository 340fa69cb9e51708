"""Command-line interface.

Subcommands:
  match    score a user against a roster and print the ranking
  audit    run the perturbation sweep and write report files and figures
  synth    generate a synthetic roster CSV
  impact   translate outcome-change rates into national vote counts

Exit codes: 0 on success, 1 on usage errors, 2 on validation or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import impact as impact_mod
from . import io as io_mod
from .engine import Importance, UserResponse, WeightMatrix, rank_all, top_set
from .outcomes import PARTY_MODES
from .simulate import AuditConfig, RosterSpec, generate_roster, run_audit

CONFIG_ENV_VAR = "VAA_AUDIT_CONFIG"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for runtime."""

    def error(self, message: str):  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_int_list(text: str) -> list[int]:
    """Accept '1,2,3' or an inclusive range 'a..b'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _parse_importance(token: str) -> Importance:
    token = token.strip().lower().replace("-", "_").replace(" ", "_")
    if token in {"0", "1", "2"}:
        return Importance(int(token))
    return Importance.from_label(token)


def _parse_user(answers_text: str, importance_text: str | None, m: int) -> UserResponse:
    answers = tuple(int(part) for part in answers_text.split(","))
    if len(answers) != m:
        raise ValueError(f"expected {m} answers, got {len(answers)}")
    if importance_text is None:
        marks = tuple([Importance.NEUTRAL] * m)
    else:
        marks = tuple(_parse_importance(part) for part in importance_text.split(","))
        if len(marks) != m:
            raise ValueError(f"expected {m} importance marks, got {len(marks)}")
    return UserResponse(answers=answers, importances=marks)


def _parse_rate(text: str) -> tuple[float, float]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return float(lo), float(hi)
    value = float(text)
    return value, value


def _load_weights_arg(path: str | None) -> WeightMatrix | None:
    return io_mod.load_weights(path) if path else None


def _audit_config_defaults(path: str | None) -> dict:
    """Config file values (flag --config wins over $VAA_AUDIT_CONFIG)."""
    source = path or os.environ.get(CONFIG_ENV_VAR)
    if not source:
        return {}
    with open(source, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{source}: config must be a JSON object")
    return data


# ---------------------------------------------------------------- match


def cmd_match(args: argparse.Namespace) -> int:
    result = io_mod.load_roster(args.roster, question_count=args.questions)
    roster = list(result.profiles)
    if not roster:
        raise ValueError(f"{args.roster}: no usable rows")
    weights = _load_weights_arg(args.weights) or WeightMatrix.default()
    user = _parse_user(args.answers, args.importance, args.questions)
    ranking = rank_all(weights, user, roster)
    best = top_set(ranking)
    by_id = {r.id: r for r in roster}

    shown = ranking if args.top is None else ranking[: max(args.top, len(best.ids))]
    rows = []
    for position, score in enumerate(shown, start=1):
        profile = by_id[score.respondent_id]
        rows.append({
            "rank": position,
            "id": profile.id,
            "name": profile.name,
            "party": profile.party,
            "agreement_pct": score.agreement_pct,
            "disagreement_pct": score.disagreement_pct,
            "total_weighted_distance": score.total_weighted_distance,
        })

    if args.format == "json":
        payload = {
            "top_set": {"ids": sorted(best.ids), "agreement_pct": best.agreement_pct},
            "ranking": rows,
        }
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    else:
        tie = ", ".join(sorted(best.ids))
        print(f"Best match{'es' if len(best.ids) > 1 else ''} "
              f"({best.agreement_pct}% agreement): {tie}")
        print(f"{'rank':>4}  {'agree':>5}  {'id':<10} {'party':<12} name")
        for row in rows:
            print(f"{row['rank']:>4}  {row['agreement_pct']:>4}%  "
                  f"{row['id']:<10} {row['party']:<12} {row['name']}")
    return 0


# ---------------------------------------------------------------- audit


def _resolve_seed(text: str) -> int:
    if text.strip().lower() == "random":
        seed = int.from_bytes(os.urandom(4), "little")
        print(f"drawn seed: {seed}", file=sys.stderr)
        return seed
    return int(text)


def cmd_audit(args: argparse.Namespace) -> int:
    defaults = _audit_config_defaults(args.config)
    if args.election_2022:
        conflicts = [
            name for name, value in (
                ("--questions", args.questions),
                ("--weights", args.weights),
                ("--roster", args.roster),
            ) if value is not None
        ]
        if args.synthetic != "779:16":
            conflicts.append("--synthetic")
        if conflicts:
            raise ValueError(
                f"--election-2022 conflicts with {', '.join(conflicts)}"
            )
        args.questions = 20
        defaults.pop("question_count", None)
        defaults.pop("weights", None)

    def pick(flag_value, key, fallback):
        if flag_value is not None:
            return flag_value
        return defaults.get(key, fallback)

    weights = _load_weights_arg(args.weights)
    if weights is None and "weights" in defaults:
        rows = tuple(tuple(defaults["weights"][lvl.label]) for lvl in Importance)
        weights = WeightMatrix(rows=rows)
    config = AuditConfig(
        batches=pick(args.batches, "batches", 100),
        users_per_batch=pick(args.users, "users_per_batch", 1000),
        question_count=pick(args.questions, "question_count", 20),
        delta_sweep=tuple(pick(args.deltas, "delta_sweep", (1, 2, 3))),
        drop_sweep=tuple(pick(args.drops, "drop_sweep", (1, 2, 3, 4, 5))),
        k_sweep=tuple(pick(args.k_sweep, "k_sweep", tuple(range(3, 16)))),
        topk_delta=pick(args.topk_delta, "topk_delta", 3),
        base_seed=_resolve_seed(args.seed),
        comparison_mode=pick(args.party_mode, "comparison_mode", "set"),
        weights=weights or WeightMatrix.default(),
    )

    if args.roster:
        roster = list(io_mod.load_roster(args.roster, config.question_count).profiles)
    else:
        r, p = (int(x) for x in args.synthetic.split(":", 1))
        roster = generate_roster(RosterSpec(
            respondent_count=r, party_count=p,
            question_count=config.question_count, seed=args.roster_seed,
        ))

    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    report = run_audit(config, roster, workers=workers)
    paths = io_mod.export_report(report, args.out, stem=args.stem)
    if not args.no_figures:
        from .plots import render_report_figures

        figures = render_report_figures(report, args.out, stem=args.stem)
        paths.update((f"figure_{name}", path) for name, path in figures.items())

    worst = max(
        (r for r in report.change_rates if r.level == "candidate"),
        key=lambda r: r.mean_change_pct,
    )
    print(f"{len(report.change_rates)} change-rate rows, {len(report.topk)} top-k rows "
          f"({config.batches} batches x {config.users_per_batch} users per cell)")
    print(f"largest candidate-level change: {worst.mean_change_pct:.2f}% "
          f"[{worst.ci_low:.2f}, {worst.ci_high:.2f}] at {_describe(worst)}")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _describe(row) -> str:
    parts = [row.kind]
    if row.importance is not None:
        parts.append(row.importance)
    if row.distance is not None:
        parts.append(f"d={row.distance}")
    if row.delta is not None:
        parts.append(f"delta={row.delta}")
    if row.n is not None:
        parts.append(f"n={row.n}")
    return " ".join(parts)


# ---------------------------------------------------------------- synth


def cmd_synth(args: argparse.Namespace) -> int:
    dist = None
    if args.answer_dist:
        dist = tuple(float(p) for p in args.answer_dist.split(","))
    spec = RosterSpec(
        respondent_count=args.respondents,
        party_count=args.parties,
        question_count=args.questions,
        seed=args.seed,
        answer_distribution=dist,
    )
    roster = generate_roster(spec)
    io_mod.write_roster(args.out, roster)
    print(f"wrote {args.out} ({len(roster)} respondents, "
          f"{len({r.party for r in roster})} parties)")
    return 0


# ---------------------------------------------------------------- impact


def cmd_impact(args: argparse.Namespace) -> int:
    overrides = {
        "eligible_voters": args.eligible,
        "turnout": args.turnout,
        "vaa_usage": args.vaa_usage,
        "follow_rate": args.follow_rate,
    }
    given = {k: v for k, v in overrides.items() if v is not None}
    if args.election_2022 and given:
        raise ValueError("--election-2022 conflicts with explicit electorate overrides")
    if args.mandate_votes:
        lo, hi = (int(x) for x in args.mandate_votes.split(":", 1))
        given["votes_per_mandate_low"] = lo
        given["votes_per_mandate_high"] = hi
    params = impact_mod.ElectorateParameters(**given)

    estimates = [impact_mod.estimate_impact(params, lo, hi) for lo, hi in args.rate]
    if args.format == "json":
        print(json.dumps([e.__dict__ for e in estimates], indent=2))
        return 0
    if args.format == "csv":
        fields = list(estimates[0].__dict__)
        writer = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(e.__dict__ for e in estimates)
        return 0
    print(f"eligible voters: {params.eligible_voters:,}  turnout: {params.turnout:.2%}")
    print(f"votes cast: {impact_mod.cast_votes(params):,}")
    print(f"affected pool (VAA users following advice): {impact_mod.affected_pool(params):,}")
    for est in estimates:
        if est.rate_low_pct == est.rate_high_pct:
            rate = f"{est.rate_low_pct:g}%"
            votes = f"{est.votes_affected_low:,}"
            share = f"{est.share_of_cast_low:.2f}%"
        else:
            rate = f"{est.rate_low_pct:g}%..{est.rate_high_pct:g}%"
            votes = f"{est.votes_affected_low:,}..{est.votes_affected_high:,}"
            share = f"{est.share_of_cast_low:.2f}%..{est.share_of_cast_high:.2f}%"
        print(f"rate {rate}: {votes} votes ({share} of cast), "
              f"~{est.mandates_low}..{est.mandates_high} mandates")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="vaa-audit",
                     description="Weighted-distance VAA matching and robustness audit.")
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    m = sub.add_parser("match", parents=[], help="rank a roster against one user",
                       description="Score every respondent and print the ranking; "
                                   "all best-agreement ties are always shown.")
    m.add_argument("--roster", required=True, help="roster CSV (id,name,party,a1..aM)")
    m.add_argument("--answers", required=True,
                   help="comma-separated user answers, each 1..5")
    m.add_argument("--importance",
                   help="comma-separated marks (not_important|neutral|important or 0|1|2); "
                        "defaults to neutral everywhere")
    m.add_argument("--questions", type=int, default=20, help="question count (default 20)")
    m.add_argument("--weights", help="weight table JSON (default: built-in table)")
    m.add_argument("-k", "--top", type=int, default=None,
                   help="show only the first K rows (default: the full ranking; "
                        "rank-1 ties are always shown in full)")
    m.add_argument("--format", choices=("text", "csv", "json"), default="text")
    m.set_defaults(func=cmd_match)

    a = sub.add_parser("audit", help="run the perturbation audit",
                       description="Sweep weight bumps and question drops, writing "
                                   "change-rate CSV/JSON reports plus figures. "
                                   f"Option defaults may come from --config or ${CONFIG_ENV_VAR}.")
    a.add_argument("--seed", required=True,
                   help="base seed (integer), or 'random' to draw one and print it")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--stem", default="audit", help="output file stem (default 'audit')")
    a.add_argument("--roster", help="roster CSV; omit to use a synthetic roster")
    a.add_argument("--synthetic", default="779:16", metavar="R:P",
                   help="synthetic roster size respondents:parties (default 779:16)")
    a.add_argument("--roster-seed", type=int, default=0,
                   help="seed for the synthetic roster (default 0)")
    a.add_argument("--batches", type=int, help="batches per cell (default 100)")
    a.add_argument("--batch-size", "--users", dest="users", type=int,
                   help="users per batch (default 1000)")
    a.add_argument("--questions", type=int, help="questionnaire length (default 20)")
    a.add_argument("--deltas", type=_parse_int_list, metavar="LIST",
                   help="weight bump sizes, e.g. 1,2,3 (default)")
    a.add_argument("--drops", type=_parse_int_list, metavar="LIST",
                   help="question-drop counts, e.g. 1..5 (default)")
    a.add_argument("--k-sweep", type=_parse_int_list, metavar="LIST",
                   help="top-k sizes, e.g. 3..15 (default)")
    a.add_argument("--topk-delta", type=int, help="bump size for the top-k sweep (default 3)")
    a.add_argument("--weights", help="baseline weight table JSON")
    a.add_argument("--party-mode", choices=tuple(PARTY_MODES),
                   help="party change test: 'set' equality (default) or 'containment'")
    a.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: all cores; results identical "
                        "for any value)")
    a.add_argument("--config", help=f"JSON config file (also read from ${CONFIG_ENV_VAR})")
    a.add_argument("--election-2022", action="store_true",
                   help="pin the 2022 setup: 20 questions, the production weight "
                        "table, and a 779:16 synthetic roster (rejects conflicting "
                        "overrides)")
    a.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("synth", help="write a synthetic roster CSV")
    s.add_argument("--out", required=True, help="output CSV path")
    s.add_argument("--respondents", type=int, default=779,
                   help="roster size (default 779, the 2022 candidate count)")
    s.add_argument("--parties", type=int, default=16,
                   help="party count (default 16; equal to --respondents for party-level)")
    s.add_argument("--questions", type=int, default=20, help="question count (default 20)")
    s.add_argument("--seed", type=int, default=0, help="roster seed (default 0)")
    s.add_argument("--answer-dist", metavar="P1,..,P5",
                   help="answer distribution over 1..5 (default uniform)")
    s.set_defaults(func=cmd_synth)

    i = sub.add_parser("impact", help="turn change rates into national vote counts",
                       description="Defaults describe the 2022 Danish general election: "
                                   "4,269,048 eligible voters and 84.16% turnout "
                                   "(Statistics Denmark), 62% VAA usage and 45% advice "
                                   "following (election-study surveys), 17k-20k votes "
                                   "per mandate.")
    i.add_argument("--rate", type=_parse_rate, action="append", required=True,
                   metavar="PCT[:PCT]", help="outcome-change rate in percent, or a low:high range "
                                             "(repeatable)")
    i.add_argument("--election-2022", action="store_true",
                   help="use the 2022 election defaults (rejects explicit overrides)")
    i.add_argument("--eligible", type=int, help="eligible voters")
    i.add_argument("--turnout", type=float, help="turnout fraction 0..1")
    i.add_argument("--vaa-usage", type=float, help="VAA usage fraction 0..1")
    i.add_argument("--follow-rate", type=float, help="advice-following fraction 0..1")
    i.add_argument("--mandate-votes", metavar="LOW:HIGH",
                   help="votes per mandate bracket (default 17000:20000)")
    i.add_argument("--format", choices=("text", "csv", "json"), default="text")
    i.set_defaults(func=cmd_impact)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"vaa-audit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
