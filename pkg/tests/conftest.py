from __future__ import annotations

import pytest

from vaa_audit.engine import RespondentProfile, WeightMatrix


@pytest.fixture
def weights() -> WeightMatrix:
    return WeightMatrix.default()


@pytest.fixture
def tiny_roster() -> list[RespondentProfile]:
    """Four m=4 profiles across three parties, handy for tie scenarios."""
    return [
        RespondentProfile(id="c1", name="Ann", party="red", answers=(1, 2, 3, 4)),
        RespondentProfile(id="c2", name="Ben", party="blue", answers=(1, 2, 3, 5)),
        RespondentProfile(id="c3", name="Cat", party="red", answers=(5, 4, 3, 2)),
        RespondentProfile(id="c4", name="Dan", party="green", answers=(3, 3, 3, 3)),
    ]
