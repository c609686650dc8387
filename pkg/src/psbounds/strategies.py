"""Deterministic response functions for uncharacterised parties.

Outcome labels are ``1..d`` for conclusive events and ``0`` for a no-click.
Settings are indexed ``0..m-1``. Enumeration order is lexicographic in the
outcome tuple and is part of the contract: solver variable indices depend
on it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

NO_CLICK = 0
DEFAULT_CAP = 10**6


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    outcomes: tuple[int, ...]
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need at least two conclusive outcomes")
        for a in self.outcomes:
            if not 0 <= a <= self.d:
                raise ValueError(f"outcome {a} outside alphabet 0..{self.d}")

    @property
    def m(self) -> int:
        return len(self.outcomes)

    def respond(self, x: int) -> int:
        if not 0 <= x < self.m:
            raise IndexError(f"setting {x} out of range for m={self.m}")
        return self.outcomes[x]

    def indicator(self, a: int, x: int) -> int:
        return int(self.respond(x) == a)

    def no_click_count(self) -> int:
        return sum(1 for a in self.outcomes if a == NO_CLICK)


@dataclass(frozen=True)
class ProductStrategy:
    alice: DeterministicStrategy
    bob: DeterministicStrategy

    def __post_init__(self):
        if self.alice.d != self.bob.d:
            raise ValueError("product strategy components must share d")

    def indicator(self, a: int, b: int, x: int, y: int) -> int:
        return self.alice.indicator(a, x) * self.bob.indicator(b, y)


def respond(s: DeterministicStrategy, x: int) -> int:
    return s.respond(x)


def no_click_count(s: DeterministicStrategy) -> int:
    return s.no_click_count()


def count(m: int, d: int, include_no_click: bool) -> int:
    return (d + 1 if include_no_click else d) ** m


def enumerate_strategies(
    m: int, d: int, include_no_click: bool = False, cap: int = DEFAULT_CAP
) -> list[DeterministicStrategy]:
    if m < 1 or d < 2:
        raise ValueError(f"need m >= 1 and d >= 2, got m={m}, d={d}")
    n = count(m, d, include_no_click)
    if n > cap:
        raise EnumerationCapError(f"{n} strategies exceeds cap {cap}")
    alphabet = range(0 if include_no_click else 1, d + 1)
    return [DeterministicStrategy(t, d) for t in itertools.product(alphabet, repeat=m)]


def enumerate_products(
    m: int, d: int, include_no_click: bool = False, cap: int = DEFAULT_CAP
) -> list[ProductStrategy]:
    single = count(m, d, include_no_click)
    if single * single > cap:
        raise EnumerationCapError(f"{single * single} product strategies exceeds cap {cap}")
    ss = enumerate_strategies(m, d, include_no_click, cap)
    return [ProductStrategy(sa, sb) for sa in ss for sb in ss]
