"""Exact integer apportionment (largest-remainder rounding).

All shares are handled as ``Fraction`` so ties and totals are exact: two
float shares that print identically never race on rounding error. The
fractional-part order decides who receives the leftover units; equal
remainders fall back to position, and callers choose which end wins
(budget allocation prefers low indices, interval widths prefer the wide
end so the monotone width rule survives rounding).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion
    return Fraction(float(x)) if hasattr(x, "dtype") else Fraction(x)


def round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)).__floor__())


def largest_remainder(shares: Sequence, total: int, *, ties: str = "low") -> list[int]:
    """Allocate ``total`` integer units proportionally to ``shares``.

    ``shares`` must be nonnegative and sum exactly to ``total`` (as
    Fractions). Each result is floor(share) or ceil(share); the surplus
    after flooring goes to the largest fractional parts. ``ties`` picks the
    winner among equal remainders: "low" favors the lowest index, "high"
    the highest.
    """
    if ties not in ("low", "high"):
        raise ValueError(f"ties must be 'low' or 'high', got {ties!r}")
    fr = [to_fraction(s) for s in shares]
    if any(s < 0 for s in fr):
        raise ValueError("shares must be nonnegative")
    if sum(fr) != total:
        raise ValueError(f"shares sum to {float(sum(fr))}, expected {total}")
    base = [int(s) for s in fr]  # floor for nonnegative values
    out = list(base)
    surplus = total - sum(base)
    if surplus:
        remainders = [s - b for s, b in zip(fr, base)]
        tie_key = (lambda i: i) if ties == "low" else (lambda i: -i)
        order = sorted(range(len(fr)), key=lambda i: (-remainders[i], tie_key(i)))
        for i in order[:surplus]:
            out[i] += 1
    return out


def proportional_shares(weights: Iterable, total: int) -> list[Fraction]:
    """Exact shares total * w_i / sum(w), for feeding largest_remainder."""
    fw = [to_fraction(w) for w in weights]
    s = sum(fw)
    if s <= 0:
        raise ValueError("weights must have a positive sum")
    return [total * w / s for w in fw]
