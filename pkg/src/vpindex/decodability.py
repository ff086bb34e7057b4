"""Decodability of a set of realisations sharing one codeword.

A set of realisations is a valid fiber when, for every receiver ``H`` and
every side-information value ``x_H`` seen in the set, some message outside
``H`` takes a single value on all members agreeing on ``x_H``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .model import (
    CodebookStructureError,
    InputError,
    ProblemInstance,
    VPCodebook,
    canonical_index,
    realisation,
)


@dataclass(frozen=True)
class SliceWitness:
    receiver: frozenset[int]
    side_info: tuple[int, ...]
    index: int
    value: int


class FiberViolation(Exception):
    """A slice with no decodable message; carries the offending receiver and side information."""

    def __init__(self, receiver, side_info, reason="no constant coordinate", codeword=None):
        self.receiver = frozenset(receiver)
        self.side_info = tuple(side_info)
        self.reason = reason
        self.codeword = codeword
        super().__init__(f"receiver {sorted(i + 1 for i in self.receiver)} at side information {list(self.side_info)}: {reason}")

    def to_json(self) -> dict:
        doc = {"receiver": sorted(i + 1 for i in self.receiver), "side_info": list(self.side_info), "reason": self.reason}
        if self.codeword is not None:
            doc = {"codeword": self.codeword, **doc}
        return doc


class Geometry:
    """Digits and per-receiver slice keys for every vertex of [0:k-1]^m."""

    def __init__(self, inst: ProblemInstance, k: int):
        self.inst = inst
        self.k = k
        self.m = inst.m
        self.n = k ** inst.m
        self.digits = [realisation(i, k, inst.m) for i in range(self.n)]
        self.sorted_receivers = [tuple(sorted(h)) for h in inst.receivers]
        self.keys = []
        for idx in self.sorted_receivers:
            self.keys.append([tuple(d[j] for j in idx) for d in self.digits])
        full = (1 << inst.m) - 1
        self.free = [full & ~sum(1 << j for j in h) for h in inst.receivers]

    def index(self, r) -> int:
        if isinstance(r, int):
            if not 0 <= r < self.n:
                raise InputError(f"vertex {r} outside [0:{self.n - 1}]")
            return r
        return canonical_index(r, self.k, self.m)


@lru_cache(maxsize=64)
def geometry(inst: ProblemInstance, k: int) -> Geometry:
    return Geometry(inst, k)


def forced_masks(inst: ProblemInstance, choice: Mapping[frozenset[int], int] | None) -> list[int] | None:
    """Per-receiver candidate masks restricting each receiver to one decoded index."""
    if choice is None:
        return None
    masks = []
    for h in inst.receivers:
        i = choice[h]
        if i in h or not 0 <= i < inst.m:
            raise InputError(f"choice {i + 1} for receiver {sorted(j + 1 for j in h)} is not a new message")
        masks.append(1 << i)
    return masks


class FiberState:
    """Incremental validity bookkeeping for a growing fiber.

    Each slice keeps a reference member and the bitmask of message indices
    still constant across the slice. ``push``/``pop`` support backtracking.
    """

    def __init__(self, geo: Geometry, initial: list[int] | None = None):
        self.geo = geo
        self.initial = initial if initial is not None else geo.free
        self.slices: list[dict] = [{} for _ in geo.inst.receivers]
        self.members: list[int] = []
        self._undo: list[list] = []

    def _narrow(self, ref: int, v: int, mask: int) -> int:
        dr, dv = self.geo.digits[ref], self.geo.digits[v]
        bits = mask
        while bits:
            low = bits & -bits
            j = low.bit_length() - 1
            if dr[j] != dv[j]:
                mask &= ~low
            bits ^= low
        return mask

    def can_add(self, v: int) -> bool:
        keys = self.geo.keys
        for h, table in enumerate(self.slices):
            entry = table.get(keys[h][v])
            if entry is not None and not self._narrow(entry[0], v, entry[1]):
                return False
        return True

    def push(self, v: int) -> bool:
        """Add ``v``; on failure the state is left unchanged and False is returned."""
        keys = self.geo.keys
        changes = []
        for h, table in enumerate(self.slices):
            key = keys[h][v]
            entry = table.get(key)
            if entry is None:
                changes.append((h, key, None, (v, self.initial[h])))
            else:
                mask = self._narrow(entry[0], v, entry[1])
                if not mask:
                    return False
                changes.append((h, key, entry, (entry[0], mask)))
        for h, key, _, new in changes:
            self.slices[h][key] = new
        self.members.append(v)
        self._undo.append(changes)
        return True

    def pop(self) -> int:
        for h, key, old, _ in self._undo.pop():
            if old is None:
                del self.slices[h][key]
            else:
                self.slices[h][key] = old
        return self.members.pop()

    def first_violation(self, v: int):
        """Receiver position and slice key where adding ``v`` fails, or None."""
        keys = self.geo.keys
        for h, table in enumerate(self.slices):
            key = keys[h][v]
            entry = table.get(key)
            if entry is not None and not self._narrow(entry[0], v, entry[1]):
                return h, key
        return None

    def witnesses(self) -> dict[tuple[frozenset[int], tuple[int, ...]], SliceWitness]:
        out = {}
        for h, (recv, table) in enumerate(zip(self.geo.inst.receivers, self.slices)):
            for key in sorted(table):
                ref, mask = table[key]
                i = (mask & -mask).bit_length() - 1
                out[(recv, key)] = SliceWitness(recv, key, i, self.geo.digits[ref][i])
        return out


def fiber_state(members: Iterable, inst: ProblemInstance, k: int, choice=None) -> FiberState:
    """Build the state for ``members``; raises FiberViolation if they cannot share a codeword."""
    geo = geometry(inst, k)
    state = FiberState(geo, forced_masks(inst, choice))
    seen = set()
    for r in members:
        v = geo.index(r)
        if v in seen:
            continue
        seen.add(v)
        if not state.push(v):
            h, key = state.first_violation(v)
            raise FiberViolation(inst.receivers[h], key)
    return state


def is_valid_fiber(members: Iterable, inst: ProblemInstance, k: int, choice=None) -> bool:
    """True iff every receiver can decode some new message on every slice of ``members``.

    ``members`` may hold dense indices or realisation tuples. With ``choice``
    (receiver -> index), each receiver is held to that one index.
    """
    try:
        fiber_state(members, inst, k, choice)
    except FiberViolation:
        return False
    return True


def slice_witnesses(members: Iterable, inst: ProblemInstance, k: int, choice=None):
    """One (index, value) witness per (receiver, side information) slice.

    The smallest qualifying index is chosen. Raises FiberViolation naming a
    failing slice when the set is not a valid fiber.
    """
    return fiber_state(members, inst, k, choice).witnesses()


def is_maximal_fiber(members: Iterable, inst: ProblemInstance, k: int, choice=None) -> bool:
    members = list(members)
    try:
        state = fiber_state(members, inst, k, choice)
    except FiberViolation as exc:
        raise InputError(f"not a valid fiber: {exc}") from exc
    inside = set(state.members)
    return not any(state.can_add(v) for v in range(state.geo.n) if v not in inside)


def codebook_from_assignment(
    inst: ProblemInstance, k: int, assignment: Sequence[int], choice=None
) -> VPCodebook:
    """Wrap an encoder map into a codebook, deriving decoders from slice witnesses.

    Codeword ids are compacted in increasing order so that every id has a
    nonempty fiber; ids may be any sortable labels.
    """
    renumber = {c: i for i, c in enumerate(sorted(set(assignment)))}
    dense = [renumber[c] for c in assignment]
    t = len(renumber)
    fibers: list[list[int]] = [[] for _ in range(t)]
    for idx, c in enumerate(dense):
        fibers[c].append(idx)
    decoders: dict = {h: {} for h in inst.receivers}
    for c, members in enumerate(fibers):
        try:
            wit = slice_witnesses(members, inst, k, choice)
        except FiberViolation as exc:
            exc.codeword = c
            raise
        for (h, si), w in wit.items():
            decoders[h][(c, si)] = (w.index, w.value)
    return VPCodebook(inst, k, t, dense, decoders)


@dataclass
class Verification:
    ok: bool
    failure: dict | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_codebook(cb: VPCodebook, inst: ProblemInstance | None = None, k: int | None = None) -> Verification:
    """Check every fiber and every decoder entry of ``cb`` against ``inst``.

    Returns a falsy Verification carrying the first failing slice. Raises
    CodebookStructureError when the encoder map is not total.
    """
    inst = cb.instance if inst is None else inst
    k = cb.k if k is None else k
    cb.check_structure()
    if k != cb.k:
        return Verification(False, {"reason": f"codebook alphabet {cb.k} differs from {k}"})
    if inst.m != cb.m:
        return Verification(False, {"reason": f"codebook has m={cb.m}, instance has m={inst.m}"})
    geo = geometry(inst, k)
    for c, members in enumerate(cb.fibers()):
        for h, recv in enumerate(inst.receivers):
            table = cb.decoders.get(recv, {})
            slices: dict[tuple, list[int]] = {}
            for v in members:
                slices.setdefault(geo.keys[h][v], []).append(v)
            for key in sorted(slices):
                group = slices[key]
                ref = geo.digits[group[0]]
                const = geo.free[h]
                for v in group[1:]:
                    d = geo.digits[v]
                    const &= sum(1 << j for j in range(inst.m) if d[j] == ref[j])
                if not const:
                    return Verification(False, FiberViolation(recv, key, codeword=c).to_json())
                entry = table.get((c, key))
                reason = None
                if entry is None:
                    reason = "missing decoder entry"
                else:
                    i, val = entry
                    if not 0 <= i < inst.m or i in recv:
                        reason = "decoded index is not a new message"
                    elif any(geo.digits[v][i] != val for v in group):
                        reason = "decoded value does not match"
                if reason:
                    return Verification(False, FiberViolation(recv, key, reason, codeword=c).to_json())
    return Verification(True)


__all__ = [
    "CodebookStructureError",
    "FiberState",
    "FiberViolation",
    "SliceWitness",
    "Verification",
    "codebook_from_assignment",
    "fiber_state",
    "geometry",
    "is_maximal_fiber",
    "is_valid_fiber",
    "slice_witnesses",
    "verify_codebook",
]
