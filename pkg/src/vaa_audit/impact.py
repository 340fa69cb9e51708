"""Back-of-envelope electoral impact of a given outcome-change rate.

Converts an audit change rate into affected voters, vote shares, and an
approximate parliamentary-mandate range, using published 2022 Danish
general-election figures as defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

# Statistics Denmark, 2022 general election.
DEFAULT_ELIGIBLE_VOTERS = 4_269_048
DEFAULT_TURNOUT = 0.8416
# Danish national election study survey, 2022: VAA usage among voters and the
# share of users who followed the advice.
DEFAULT_VAA_USAGE = 0.62
DEFAULT_FOLLOW_RATE = 0.45
# A Danish parliamentary seat typically corresponds to 17k-20k votes.
DEFAULT_VOTES_PER_MANDATE_LOW = 17_000
DEFAULT_VOTES_PER_MANDATE_HIGH = 20_000


@dataclass(frozen=True)
class ElectorateParameters:
    eligible_voters: int = DEFAULT_ELIGIBLE_VOTERS
    turnout: float = DEFAULT_TURNOUT
    vaa_usage: float = DEFAULT_VAA_USAGE
    follow_rate: float = DEFAULT_FOLLOW_RATE
    votes_per_mandate_low: int = DEFAULT_VOTES_PER_MANDATE_LOW
    votes_per_mandate_high: int = DEFAULT_VOTES_PER_MANDATE_HIGH

    def __post_init__(self) -> None:
        if self.eligible_voters <= 0:
            raise ValueError("eligible_voters must be positive")
        for name in ("turnout", "vaa_usage", "follow_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0 < self.votes_per_mandate_low <= self.votes_per_mandate_high:
            raise ValueError(
                "votes-per-mandate bounds must satisfy 0 < low <= high, got "
                f"{self.votes_per_mandate_low}..{self.votes_per_mandate_high}"
            )


@dataclass(frozen=True)
class ImpactEstimate:
    """Affected votes/mandates for a change-rate interval [rate_low, rate_high]."""

    rate_low_pct: float
    rate_high_pct: float
    cast_votes: int
    affected_pool: int
    votes_affected_low: int
    votes_affected_high: int
    share_of_cast_low: float
    share_of_cast_high: float
    mandates_low: int
    mandates_high: int


def cast_votes(params: ElectorateParameters) -> int:
    """Votes actually cast: eligible voters times turnout."""
    return round(params.eligible_voters * params.turnout)


def affected_pool(params: ElectorateParameters) -> int:
    """Voters whose vote could follow the tool's advice."""
    return round(
        params.eligible_voters * params.turnout * params.vaa_usage * params.follow_rate
    )


def votes_affected(params: ElectorateParameters, change_rate_pct: float) -> tuple[int, float]:
    """Affected votes for a change rate, and their share of cast votes in percent."""
    if not 0.0 <= change_rate_pct <= 100.0:
        raise ValueError(f"change rate must lie in [0, 100], got {change_rate_pct}")
    votes = round(affected_pool(params) * change_rate_pct / 100.0)
    share = 100.0 * votes / cast_votes(params)
    return votes, share


def mandate_range(params: ElectorateParameters, votes: int) -> tuple[int, int]:
    """Approximate mandates the votes amount to, as a (low, high) integer range."""
    if votes < 0:
        raise ValueError(f"votes must be >= 0, got {votes}")
    return (
        votes // params.votes_per_mandate_high,
        votes // params.votes_per_mandate_low,
    )


def estimate_impact(
    params: ElectorateParameters,
    rate_low_pct: float,
    rate_high_pct: float | None = None,
) -> ImpactEstimate:
    """Full estimate for a change-rate interval (a single rate when high is omitted)."""
    if rate_high_pct is None:
        rate_high_pct = rate_low_pct
    if rate_high_pct < rate_low_pct:
        raise ValueError(
            f"rate interval reversed: {rate_low_pct} > {rate_high_pct}"
        )
    votes_low, share_low = votes_affected(params, rate_low_pct)
    votes_high, share_high = votes_affected(params, rate_high_pct)
    return ImpactEstimate(
        rate_low_pct=rate_low_pct,
        rate_high_pct=rate_high_pct,
        cast_votes=cast_votes(params),
        affected_pool=affected_pool(params),
        votes_affected_low=votes_low,
        votes_affected_high=votes_high,
        share_of_cast_low=share_low,
        share_of_cast_high=share_high,
        mandates_low=mandate_range(params, votes_low)[0],
        mandates_high=mandate_range(params, votes_high)[1],
    )
