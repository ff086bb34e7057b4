"""Problem instances, realisation indexing, codebooks and their JSON formats.

Message indices are 0-based everywhere inside the package and 1-based in
every JSON document and CLI argument.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

# Dense bitsets over [0:k-1]^m are only built below this many vertices.
MAX_EXACT_VERTICES = 2 ** 24


class InputError(ValueError):
    """Raised for malformed or inconsistent instance/codebook input."""


class CapacityError(RuntimeError):
    """Raised when an instance is too large for the requested exact computation."""


class CodebookStructureError(ValueError):
    """Raised when a codebook is not a total, well-formed map."""


def _canonical_receivers(receivers: Iterable[Iterable[int]]) -> tuple[frozenset[int], ...]:
    return tuple(sorted((frozenset(h) for h in receivers), key=lambda h: (len(h), sorted(h))))


@dataclass(frozen=True)
class ProblemInstance:
    """An index coding instance: ``m`` messages and the receivers' side information.

    ``receivers`` holds 0-based index sets in canonical order (by size, then
    lexicographically).
    """

    m: int
    receivers: tuple[frozenset[int], ...]

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise InputError(f"m must be a positive integer, got {self.m!r}")
        if not self.receivers:
            raise InputError("instance needs at least one receiver")
        full = frozenset(range(self.m))
        seen = set()
        for h in self.receivers:
            if not h <= full:
                raise InputError(f"receiver {sorted(i + 1 for i in h)} has indices outside [1:{self.m}]")
            if h == full:
                raise InputError("no receiver has side information H = [1:m]")
            if h in seen:
                raise InputError(f"duplicate receiver {sorted(i + 1 for i in h)}")
            seen.add(h)
        object.__setattr__(self, "receivers", _canonical_receivers(self.receivers))

    @classmethod
    def from_one_based(cls, m: int, receivers: Iterable[Iterable[int]]) -> "ProblemInstance":
        rs = []
        for h in receivers:
            h = list(h)
            if any(not isinstance(i, int) or i < 1 or i > m for i in h):
                raise InputError(f"receiver {h} has indices outside [1:{m}]")
            rs.append(frozenset(i - 1 for i in h))
        return cls(m, tuple(rs))

    @property
    def n(self) -> int:
        return len(self.receivers)

    def receivers_one_based(self) -> list[list[int]]:
        return [sorted(i + 1 for i in h) for h in self.receivers]

    def complement(self, h: frozenset[int]) -> list[int]:
        return [i for i in range(self.m) if i not in h]

    def to_json(self, k: int | None = None) -> dict:
        doc = {"m": self.m}
        if k is not None:
            doc["k"] = k
        doc["receivers"] = self.receivers_one_based()
        return doc


def check_alphabet(k) -> int:
    if isinstance(k, bool) or not isinstance(k, int) or k < 2:
        raise InputError(f"alphabet size k must be an integer >= 2, got {k!r}")
    return k


def vertex_count(m: int, k: int) -> int:
    return k ** m


def check_size(m: int, k: int) -> int:
    n = k ** m
    if n > MAX_EXACT_VERTICES:
        raise CapacityError(f"k^m = {k}^{m} exceeds the exact-solving limit of 2^24 realisations")
    return n


def canonical_index(r: Sequence[int], k: int, m: int) -> int:
    """Lexicographic rank of ``r`` in [0:k-1]^m, first message most significant."""
    if len(r) != m:
        raise InputError(f"realisation {tuple(r)} does not have length {m}")
    idx = 0
    for x in r:
        if not 0 <= x < k:
            raise InputError(f"realisation {tuple(r)} has an entry outside [0:{k - 1}]")
        idx = idx * k + x
    return idx


def realisation(idx: int, k: int, m: int) -> tuple[int, ...]:
    if not 0 <= idx < k ** m:
        raise InputError(f"index {idx} outside [0:{k ** m - 1}]")
    out = [0] * m
    for j in range(m - 1, -1, -1):
        idx, out[j] = divmod(idx, k)
    return tuple(out)


def all_realisations(k: int, m: int) -> list[tuple[int, ...]]:
    return [realisation(i, k, m) for i in range(k ** m)]


def rate_of(t: int, k: int) -> float:
    """Broadcast rate log(t)/log(k) of a code with ``t`` codewords."""
    if t < 1:
        raise InputError(f"t must be >= 1, got {t}")
    check_alphabet(k)
    if t == k:
        return 1.0
    return math.log(t) / math.log(k)


def parse_instance(text: str) -> tuple[ProblemInstance, int]:
    """Parse an instance JSON document into ``(instance, k)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed instance JSON: {exc}") from exc
    return instance_from_json(doc)


def instance_from_json(doc) -> tuple[ProblemInstance, int]:
    if not isinstance(doc, dict) or not {"m", "k", "receivers"} <= doc.keys():
        raise InputError('instance JSON must be an object with keys "m", "k", "receivers"')
    m, k, receivers = doc["m"], doc["k"], doc["receivers"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise InputError(f"m must be a positive integer, got {m!r}")
    check_alphabet(k)
    if not isinstance(receivers, list) or not all(isinstance(h, list) for h in receivers):
        raise InputError("receivers must be a list of index arrays")
    return ProblemInstance.from_one_based(m, receivers), k


def load_instance(path) -> tuple[ProblemInstance, int]:
    with open(path) as fh:
        return parse_instance(fh.read())


@dataclass
class VPCodebook:
    """A total encoder ``assignment[realisation index] -> codeword`` plus decoder tables.

    ``decoders[h][(c, side_info)] = (i, v)`` says receiver ``h`` decodes
    message ``i`` (0-based) with value ``v`` after seeing codeword ``c`` and
    side information ``side_info`` (values of ``sorted(h)``).
    """

    instance: ProblemInstance
    k: int
    t: int
    assignment: list[int]
    decoders: dict[frozenset[int], dict[tuple[int, tuple[int, ...]], tuple[int, int]]] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.instance.m

    @property
    def rate(self) -> float:
        return rate_of(self.t, self.k)

    def fibers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.t)]
        for idx, c in enumerate(self.assignment):
            out[c].append(idx)
        return out

    def encode(self, r: Sequence[int]) -> int:
        return self.assignment[canonical_index(r, self.k, self.m)]

    def decode(self, h: frozenset[int], c: int, side_info: Sequence[int]) -> tuple[int, int]:
        return self.decoders[h][(c, tuple(side_info))]

    def check_structure(self) -> None:
        n = self.k ** self.m
        if len(self.assignment) != n:
            raise CodebookStructureError(f"assignment covers {len(self.assignment)} of {n} realisations")
        used = [False] * self.t
        for c in self.assignment:
            if not 0 <= c < self.t:
                raise CodebookStructureError(f"codeword id {c} outside [0:{self.t - 1}]")
            used[c] = True
        if not all(used):
            raise CodebookStructureError(f"codeword {used.index(False)} has an empty fiber")

    def to_json(self) -> dict:
        k, m = self.k, self.m
        codewords = [
            {"id": c, "realisations": [list(realisation(i, k, m)) for i in members]}
            for c, members in enumerate(self.fibers())
        ]
        decoders = []
        for h in self.instance.receivers:
            table = self.decoders.get(h, {})
            entries = [
                {"codeword": c, "side_info": list(si), "index": i + 1, "value": v}
                for (c, si), (i, v) in sorted(table.items())
            ]
            decoders.append({"receiver": sorted(j + 1 for j in h), "entries": entries})
        return {"m": m, "k": k, "t": self.t, "codewords": codewords, "decoders": decoders}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, doc, instance: ProblemInstance | None = None) -> "VPCodebook":
        """Rebuild a codebook; without ``instance`` the receivers come from the decoder list."""
        try:
            m, k, t = doc["m"], doc["k"], doc["t"]
            check_alphabet(k)
            if instance is None:
                instance = ProblemInstance.from_one_based(m, [d["receiver"] for d in doc["decoders"]])
            elif instance.m != m:
                raise InputError(f"codebook has m={m} but instance has m={instance.m}")
            n = k ** m
            assignment = [-1] * n
            for cw in doc["codewords"]:
                c = cw["id"]
                for r in cw["realisations"]:
                    idx = canonical_index(r, k, m)
                    if assignment[idx] != -1:
                        raise CodebookStructureError(f"realisation {tuple(r)} assigned twice")
                    assignment[idx] = c
            if -1 in assignment:
                missing = realisation(assignment.index(-1), k, m)
                raise CodebookStructureError(f"realisation {missing} is not assigned to any codeword")
            decoders = {}
            for d in doc["decoders"]:
                h = frozenset(i - 1 for i in d["receiver"])
                decoders[h] = {
                    (e["codeword"], tuple(e["side_info"])): (e["index"] - 1, e["value"])
                    for e in d["entries"]
                }
        except (KeyError, TypeError) as exc:
            raise InputError(f"codebook JSON does not match the schema: {exc!r}") from exc
        return cls(instance, k, t, assignment, decoders)

    @classmethod
    def loads(cls, text: str, instance: ProblemInstance | None = None) -> "VPCodebook":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed codebook JSON: {exc}") from exc
        return cls.from_json(doc, instance)
