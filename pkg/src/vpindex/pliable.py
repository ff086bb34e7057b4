"""Fixed-choice (pliable) codes: every receiver always decodes the same message index."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import prod

from .bounds import best_t_lower
from .cover import DEFAULT_EDGE_CAP, solve
from .decodability import is_valid_fiber
from .model import CapacityError, InputError, ProblemInstance, VPCodebook, rate_of

log = logging.getLogger(__name__)

DEFAULT_CHOICE_CAP = 10_000

ChoiceAssignment = dict  # frozenset[int] receiver -> 0-based decoded index


def pliable_valid_fiber(members, inst: ProblemInstance, k: int, choice: ChoiceAssignment) -> bool:
    return is_valid_fiber(members, inst, k, choice)


def choice_assignments(inst: ProblemInstance):
    """All choice assignments, lexicographic over receivers in canonical order."""
    options = [inst.complement(h) for h in inst.receivers]
    for picks in itertools.product(*options):
        yield dict(zip(inst.receivers, picks))


def parse_choice(text: str, inst: ProblemInstance) -> ChoiceAssignment:
    """Parse ``"1:2,2:1,3:1"``; multi-index receivers use ``+`` (``"1+2:3"``), the empty one ``":1"``."""
    choice = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        lhs, sep, rhs = part.partition(":")
        if not sep:
            raise InputError(f"choice entry {part!r} must look like H:i")
        try:
            h = frozenset(int(x) - 1 for x in lhs.split("+") if x.strip())
            i = int(rhs) - 1
        except ValueError as exc:
            raise InputError(f"choice entry {part!r} is not numeric") from exc
        if h not in inst.receivers:
            raise InputError(f"choice names unknown receiver {sorted(j + 1 for j in h)}")
        if i in h or not 0 <= i < inst.m:
            raise InputError(f"receiver {sorted(j + 1 for j in h)} cannot decode message {i + 1}")
        choice[h] = i
    missing = [h for h in inst.receivers if h not in choice]
    if missing:
        raise InputError(f"choice misses receiver {sorted(j + 1 for j in missing[0])}")
    return choice


def format_choice(choice: ChoiceAssignment, inst: ProblemInstance) -> str:
    return ",".join(f"{'+'.join(str(j + 1) for j in sorted(h))}:{choice[h] + 1}" for h in inst.receivers)


@dataclass
class PliableResult:
    t: int
    choice: ChoiceAssignment
    codebook: VPCodebook
    certified: bool

    @property
    def rate(self) -> float:
        return rate_of(self.t, self.codebook.k)


def _solve_choice(inst, k, choice, edge_cap, time_limit):
    res = solve(inst, k, edge_cap=edge_cap, time_limit=time_limit, choice=choice)
    return res.codebook, res.certified


def pliable_for_choice(
    inst: ProblemInstance, k: int, choice: ChoiceAssignment, edge_cap=DEFAULT_EDGE_CAP, time_limit=None
) -> PliableResult:
    cb, certified = _solve_choice(inst, k, choice, edge_cap, time_limit)
    return PliableResult(cb.t, choice, cb, certified)


def pliable_min_t(
    inst: ProblemInstance,
    k: int,
    choice_cap: int = DEFAULT_CHOICE_CAP,
    edge_cap: int | None = DEFAULT_EDGE_CAP,
    time_limit: float | None = None,
    workers: int = 1,
) -> PliableResult:
    """Smallest codeword count over all choice assignments.

    Sequential runs stop at the first assignment meeting the instance's
    lower bound; parallel runs solve every assignment. Both report the first
    minimising assignment in enumeration order.
    """
    count = prod(len(inst.complement(h)) for h in inst.receivers)
    if count > choice_cap:
        raise CapacityError(
            f"{count} choice assignments exceed the cap of {choice_cap}; pass a single --choice instead"
        )
    floor = best_t_lower(inst, k)
    choices = list(choice_assignments(inst))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_solve_choice, inst, k, c, edge_cap, time_limit) for c in choices]
            results = [f.result() for f in futures]
    else:
        results = []
        for c in choices:
            results.append(_solve_choice(inst, k, c, edge_cap, time_limit))
            if results[-1][0].t <= floor:
                break
    best = min(range(len(results)), key=lambda j: (results[j][0].t, j))
    cb, _ = results[best]
    certified = all(ok for _, ok in results)
    log.debug("pliable minimum t=%d over %d assignments", cb.t, len(results))
    return PliableResult(cb.t, choices[best], cb, certified)


__all__ = [
    "ChoiceAssignment",
    "PliableResult",
    "choice_assignments",
    "format_choice",
    "parse_choice",
    "pliable_for_choice",
    "pliable_min_t",
    "pliable_valid_fiber",
]
