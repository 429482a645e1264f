from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noiseforge.apportion import (
    largest_remainder,
    proportional_shares,
    round_half_up,
    to_fraction,
)
from oracles import oracle_largest_remainder, oracle_round_half_up


@pytest.mark.parametrize("value,expected", [
    (Fraction(1, 2), 1),
    (Fraction(3, 2), 2),
    (Fraction(12, 5), 2),
    (Fraction(0), 0),
    (Fraction(7), 7),
    (Fraction(4999, 10), 500),
])
def test_round_half_up(value, expected):
    assert round_half_up(value) == expected
    assert oracle_round_half_up(value) == expected


def test_to_fraction_is_exact_for_floats():
    f = to_fraction(0.1)
    assert float(f) == 0.1
    assert f != Fraction(1, 10)  # binary expansion, not decimal


def test_largest_remainder_exact_shares():
    shares = proportional_shares([1, 1, 1], 4)
    assert largest_remainder(shares, 4, ties="low") == [2, 1, 1]
    assert largest_remainder(shares, 4, ties="high") == [1, 1, 2]


def test_largest_remainder_requires_exact_total():
    with pytest.raises(ValueError, match="sum"):
        largest_remainder([Fraction(1, 2), Fraction(1, 2)], 2)
    with pytest.raises(ValueError, match="nonnegative"):
        largest_remainder([Fraction(-1), Fraction(3)], 2)


def test_tie_direction_matters_for_flat_shares():
    # five equal shares of 7/5: remainders all 2/5, two leftover units
    shares = proportional_shares([1] * 5, 7)
    assert largest_remainder(shares, 7, ties="low") == [2, 2, 1, 1, 1]
    assert largest_remainder(shares, 7, ties="high") == [1, 1, 1, 2, 2]


def test_proportional_shares_sum_exactly():
    shares = proportional_shares([3, 1, 1], 10)
    assert sum(shares) == 10
    assert shares[0] == Fraction(6)


@settings(max_examples=200, deadline=None)
@given(
    weights=st.lists(st.integers(0, 50), min_size=1, max_size=12).filter(lambda w: sum(w) > 0),
    total=st.integers(0, 200),
    ties=st.sampled_from(["low", "high"]),
)
def test_matches_independent_oracle(weights, total, ties):
    shares = proportional_shares(weights, total)
    got = largest_remainder(shares, total, ties=ties)
    assert got == oracle_largest_remainder(shares, total, ties=ties)
    assert sum(got) == total
    for g, s in zip(got, shares):
        assert s.__floor__() <= g <= s.__ceil__()


@settings(max_examples=200, deadline=None)
@given(
    floats=st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=8).filter(
        lambda w: sum(w) > 0
    ),
    total=st.integers(0, 100),
)
def test_float_weights_are_handled_exactly(floats, total):
    shares = proportional_shares(floats, total)
    assert sum(shares) == total
    got = largest_remainder(shares, total)
    assert sum(got) == total
