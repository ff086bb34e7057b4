"""Counting lower bounds on the codeword count, checked at finite alphabet sizes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .model import InputError, ProblemInstance


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    t_lower: Fraction
    fiber_cap: int
    applicable: bool

    @property
    def t_lower_ceil(self) -> int:
        return ceil(self.t_lower)

    def row(self) -> dict:
        return {
            "bound": self.bound_name,
            "applicable": self.applicable,
            "fiber_cap": self.fiber_cap,
            "t_lower": str(self.t_lower),
            "t_lower_ceil": self.t_lower_ceil,
        }


def _not_applicable(name: str, inst: ProblemInstance, k: int) -> BoundReport:
    return BoundReport(name, Fraction(1), k ** inst.m, False)


def generic_bound(inst: ProblemInstance, k: int) -> BoundReport:
    """Every slice fixes one new message, so a fiber holds at most k^(m-1) realisations."""
    return BoundReport("generic", Fraction(k), k ** (inst.m - 1), True)


def singleton_bound(inst: ProblemInstance, k: int) -> BoundReport:
    """Fiber cap (m+1)k^(m-2) for the instance where receiver i knows only message i (m >= 3)."""
    m = inst.m
    singles = {frozenset([i]) for i in range(m)}
    if m < 3 or set(inst.receivers) != singles:
        return _not_applicable("singleton", inst, k)
    return BoundReport("singleton", Fraction(k * k, m + 1), (m + 1) * k ** (m - 2), True)


def chain_anchor(inst: ProblemInstance) -> int | None:
    """Index j with {j} and every {j, i} among the receivers, for m = 3; else None."""
    if inst.m != 3:
        return None
    recv = set(inst.receivers)
    for j in range(3):
        if frozenset([j]) in recv and all(frozenset([j, i]) in recv for i in range(3) if i != j):
            return j
    return None


def chained_decoding_bound(inst: ProblemInstance, k: int) -> BoundReport:
    """At most one realisation per value of the anchor message can share a codeword.

    Receiver {j} decodes some x_i, after which receiver {j, i} pins the last
    message, so the fiber cap is k and t >= k^(m-1).
    """
    if chain_anchor(inst) is None:
        return _not_applicable("chained", inst, k)
    return BoundReport("chained", Fraction(k ** (inst.m - 1)), k, True)


def all_bounds(inst: ProblemInstance, k: int) -> list[BoundReport]:
    return [generic_bound(inst, k), singleton_bound(inst, k), chained_decoding_bound(inst, k)]


def best_fiber_cap(inst: ProblemInstance, k: int) -> int:
    return min(b.fiber_cap for b in all_bounds(inst, k) if b.applicable)


def best_t_lower(inst: ProblemInstance, k: int) -> int:
    return max(b.t_lower_ceil for b in all_bounds(inst, k) if b.applicable)


def check_fibers_against_bound(hg, report: BoundReport) -> bool:
    """True iff no maximal edge of ``hg`` exceeds the report's fiber cap."""
    if not report.applicable:
        raise InputError(f"bound {report.bound_name!r} does not apply to this instance")
    return all(e.bit_count() <= report.fiber_cap for e in hg.edges)


__all__ = [
    "BoundReport",
    "all_bounds",
    "best_fiber_cap",
    "best_t_lower",
    "chained_decoding_bound",
    "check_fibers_against_bound",
    "generic_bound",
    "singleton_bound",
]
