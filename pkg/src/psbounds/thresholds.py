"""Bisection for critical efficiencies."""
from __future__ import annotations

from typing import Callable

CROSSING_TOL = 1e-7


def bisect_violation(violated: Callable[[float], bool], lo: float, hi: float, tol: float = 1e-4) -> float:
    """Boundary of a monotone predicate that is false at ``lo`` and true at ``hi``.

    Returns ``hi`` if the predicate fails everywhere and ``lo`` if it holds everywhere.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if not violated(hi):
        return hi
    if violated(lo):
        return lo
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def bisect_crossing(
    bound: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-4,
    margin: float = CROSSING_TOL,
) -> float:
    """Smallest efficiency at which a fixed ``target`` exceeds a non-increasing ``bound``."""
    return bisect_violation(lambda e: target > bound(e) + margin, lo, hi, tol)
