"""Scalar linear encoders over prime fields GF(q)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .decodability import codebook_from_assignment
from .model import InputError, ProblemInstance, VPCodebook, all_realisations


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, int(q ** 0.5) + 1))


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if isinstance(self.q, bool) or not isinstance(self.q, int) or not is_prime(self.q):
            raise InputError(f"field size must be prime, got {self.q!r}")


def _field(q) -> int:
    return q.q if isinstance(q, PrimeField) else PrimeField(q).q


@dataclass(frozen=True)
class LinearEncoder:
    """T x m encoding matrix; the codeword of ``x`` is ``E x`` over GF(q)."""

    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(a) for a in row) for row in self.matrix)
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise InputError("encoding matrix must be a nonempty rectangular array")
        if len(rows) > len(rows[0]):
            raise InputError(f"encoding matrix has {len(rows)} rows but only {len(rows[0])} columns")
        object.__setattr__(self, "matrix", rows)

    @property
    def T(self) -> int:
        return len(self.matrix)

    @property
    def m(self) -> int:
        return len(self.matrix[0])

    def check(self, q: int) -> None:
        if any(not 0 <= a < q for row in self.matrix for a in row):
            raise InputError(f"matrix entries must lie in [0:{q - 1}]")


def parse_matrix(text: str) -> LinearEncoder:
    """Parse ``"1,1,0;0,1,1"`` (rows separated by ``;``)."""
    try:
        rows = [[int(a) for a in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse matrix {text!r}") from exc
    return LinearEncoder(tuple(map(tuple, rows)))


def rref(rows: Sequence[Sequence[int]], q: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over GF(q) with zero rows dropped, plus pivot columns."""
    work = [[a % q for a in row] for row in rows]
    ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][col]), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = pow(work[r][col], -1, q)
        work[r] = [a * inv % q for a in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col]:
                f = work[i][col]
                work[i] = [(a - f * b) % q for a, b in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def linear_encode(enc: LinearEncoder, x: Sequence[int], q, k: int | None = None) -> tuple[int, ...]:
    q = _field(q)
    if k is not None and k != q:
        raise InputError(f"message alphabet {k} does not match field size {q}")
    if len(x) != enc.m:
        raise InputError(f"message vector has length {len(x)}, expected {enc.m}")
    return tuple(sum(a * b for a, b in zip(row, x)) % q for row in enc.matrix)


def decodable_indices(enc: LinearEncoder, h, q) -> set[int]:
    """Messages outside ``h`` that receiver ``h`` solves uniquely from ``E x`` and ``x_h``.

    Known messages only shift the right-hand side, so ``x_j`` is determined
    iff the unit vector on ``j`` lies in the row space of the columns outside
    ``h``. In reduced echelon form that means some row equals that unit vector.
    """
    q = _field(q)
    cols = [j for j in range(enc.m) if j not in h]
    if not cols:
        return set()
    sub = [[row[j] for j in cols] for row in enc.matrix]
    reduced, pivots = rref(sub, q)
    out = set()
    for row, p in zip(reduced, pivots):
        if sum(1 for a in row if a) == 1:
            out.add(cols[p])
    return out


def is_vp_linear(enc: LinearEncoder, inst: ProblemInstance, q) -> tuple[bool, dict]:
    """Whether every receiver decodes something; returns the smallest decodable index per receiver."""
    q = _field(q)
    if enc.m != inst.m:
        raise InputError(f"matrix has {enc.m} columns but the instance has {inst.m} messages")
    choice = {}
    for h in inst.receivers:
        idx = decodable_indices(enc, h, q)
        if idx:
            choice[h] = min(idx)
    return len(choice) == inst.n, choice


def echelon_forms(T: int, m: int, q: int) -> Iterator[LinearEncoder]:
    """Every rank-T reduced echelon T x m matrix, sparsest first, then by pivots and entries."""
    found = []
    for pivots in itertools.combinations(range(m), T):
        slots = [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, m) if c not in pivots]
        for values in itertools.product(range(q), repeat=len(slots)):
            rows = [[0] * m for _ in range(T)]
            for r, p in enumerate(pivots):
                rows[r][p] = 1
            for (r, c), a in zip(slots, values):
                rows[r][c] = a
            weight = T + sum(1 for a in values if a)
            found.append((weight, pivots, values, rows))
    found.sort(key=lambda item: item[:3])
    for *_, rows in found:
        yield LinearEncoder(tuple(map(tuple, rows)))


@dataclass
class LinearSearchResult:
    T: int
    encoder: LinearEncoder
    choice: dict


def linear_min_T(inst: ProblemInstance, q, T_max: int | None = None) -> LinearSearchResult | None:
    """Shortest linear encoder decodable by every receiver, or None up to ``T_max``.

    Decodability depends only on the row space, so one reduced echelon
    representative per row space is tried.
    """
    q = _field(q)
    T_max = inst.m if T_max is None else min(T_max, inst.m)
    for T in range(1, T_max + 1):
        for enc in echelon_forms(T, inst.m, q):
            ok, choice = is_vp_linear(enc, inst, q)
            if ok:
                return LinearSearchResult(T, enc, choice)
    return None


def linear_to_codebook(enc: LinearEncoder, inst: ProblemInstance, q) -> VPCodebook:
    """Codebook of ``E x`` with decoders fixed to each receiver's smallest decodable index."""
    q = _field(q)
    enc.check(q)
    ok, choice = is_vp_linear(enc, inst, q)
    if not ok:
        stuck = next(h for h in inst.receivers if h not in choice)
        raise InputError(f"receiver {sorted(j + 1 for j in stuck)} cannot decode any new message")
    assignment = [linear_encode(enc, x, q) for x in all_realisations(q, inst.m)]
    return codebook_from_assignment(inst, q, assignment, choice)


__all__ = [
    "LinearEncoder",
    "LinearSearchResult",
    "PrimeField",
    "decodable_indices",
    "echelon_forms",
    "is_prime",
    "is_vp_linear",
    "linear_encode",
    "linear_min_T",
    "linear_to_codebook",
    "parse_matrix",
    "rref",
]
