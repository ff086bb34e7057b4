"""Building codes for larger alphabets from a code for a smaller one.

A message over [0:k*f-1] is split as ``value = f * coarse + fine`` with the
coarse part in [0:k-1] and the fine part in GF(f). The coarse parts go
through the given code; the fine parts go through an MDS code that lets a
receiver holding any ``p`` fine parts recover all of them, so it can finish
whichever message the coarse decoder picked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .linear import is_prime, rref
from .model import InputError, ProblemInstance, VPCodebook, canonical_index, realisation

DEFAULT_FIELD_CAP = 257


def xor_chain_encode(bits: Sequence[int]) -> tuple[int, ...]:
    """Adjacent-pair parities ``(y1^y2, y2^y3, ..., y_{m-1}^y_m)``."""
    if len(bits) < 2:
        raise InputError("the parity chain needs at least two bits")
    return tuple(a ^ b for a, b in zip(bits, bits[1:]))


def xor_chain_decode(parities: Sequence[int], known_index: int, known_bit: int) -> tuple[int, ...]:
    """Recover every bit from the chain parities and one known bit."""
    m = len(parities) + 1
    bits = [0] * m
    bits[known_index] = known_bit
    for j in range(known_index + 1, m):
        bits[j] = bits[j - 1] ^ parities[j - 1]
    for j in range(known_index - 1, -1, -1):
        bits[j] = bits[j + 1] ^ parities[j]
    return tuple(bits)


@dataclass(frozen=True)
class MdsSpec:
    """An (m, m-p) MDS map ``y -> A y`` over GF(field_size).

    Any ``p`` coordinates of ``y`` together with ``A y`` determine ``y``.
    ``A`` is the difference chain for p = 1, the all-ones row for
    p = m - 1, and a Vandermonde matrix otherwise.
    """

    m: int
    p: int
    field_size: int

    @property
    def matrix(self) -> list[list[int]]:
        m, p, f = self.m, self.p, self.field_size
        if p == 1:
            return [[1 if c == r else (f - 1) % f if c == r + 1 else 0 for c in range(m)] for r in range(m - 1)]
        if p == m - 1:
            return [[1] * m]
        return [[pow(c, r, f) for c in range(m)] for r in range(m - p)]

    def is_mds(self) -> bool:
        a = self.matrix
        rows = self.m - self.p
        for cols in itertools.combinations(range(self.m), rows):
            _, piv = rref([[row[c] for c in cols] for row in a], self.field_size)
            if len(piv) < rows:
                return False
        return True

    def encode(self, y: Sequence[int]) -> tuple[int, ...]:
        f = self.field_size
        return tuple(sum(a * b for a, b in zip(row, y)) % f for row in self.matrix)

    def decode(self, c: Sequence[int], known: dict[int, int]) -> tuple[int, ...]:
        """Solve for all of ``y`` from the transmitted symbols and the first ``p`` known entries."""
        f = self.field_size
        use = sorted(known)[: self.p]
        if len(use) < self.p:
            raise InputError(f"need {self.p} known symbols, got {len(use)}")
        unknown = [j for j in range(self.m) if j not in use]
        aug = []
        for row, cv in zip(self.matrix, c):
            rhs = (cv - sum(row[j] * known[j] for j in use)) % f
            aug.append([row[j] for j in unknown] + [rhs])
        reduced, _ = rref(aug, f)
        y = [0] * self.m
        for j in use:
            y[j] = known[j]
        for pos, j in enumerate(unknown):
            y[j] = reduced[pos][-1]
        return tuple(y)


def choose_field(m: int, p: int, field_size: int | None = None, cap: int = DEFAULT_FIELD_CAP) -> MdsSpec:
    """Smallest prime from max(2, m-1) on whose construction is MDS (an upper bound on the true minimum)."""
    if not 1 <= p <= m - 1:
        raise InputError(f"p must lie in [1:{m - 1}], got {p}")
    if field_size is not None:
        if not is_prime(field_size):
            raise InputError(f"field size {field_size} is not prime")
        spec = MdsSpec(m, p, field_size)
        if not spec.is_mds():
            raise InputError(f"no ({m},{m - p}) MDS construction over GF({field_size})")
        return spec
    for f in range(max(2, m - 1), cap + 1):
        if is_prime(f):
            spec = MdsSpec(m, p, f)
            if spec.is_mds():
                return spec
    raise InputError(f"no admissible field of size <= {cap} for an ({m},{m - p}) MDS code")


def _compact(inst, k, ids, decoders) -> VPCodebook:
    renumber = {c: i for i, c in enumerate(sorted(set(ids)))}
    tables = {h: {(renumber[c], si): e for (c, si), e in table.items()} for h, table in decoders.items()}
    return VPCodebook(inst, k, len(renumber), [renumber[c] for c in ids], tables)


def concat_general(
    cb: VPCodebook, inst: ProblemInstance | None = None, p: int = 1, field_size: int | None = None
) -> VPCodebook:
    """Code for alphabet ``k * f`` with ``t * f^(m-p)`` codewords.

    Requires every receiver to know at least ``p`` messages. The decoded
    index comes from the coarse code; its fine part is read off the solved
    MDS layer, so both parts belong to the same message.
    """
    inst = cb.instance if inst is None else inst
    m, k = inst.m, cb.k
    for h in inst.receivers:
        if len(h) < p:
            raise InputError(f"receiver {sorted(j + 1 for j in h)} knows fewer than p={p} messages")
    mds = choose_field(m, p, field_size)
    f = mds.field_size
    big = k * f
    width = f ** (m - p)
    keys = [tuple(sorted(h)) for h in inst.receivers]
    ids = []
    decoders: dict = {h: {} for h in inst.receivers}
    for idx in range(big ** m):
        x = realisation(idx, big, m)
        coarse = tuple(v // f for v in x)
        fine = tuple(v % f for v in x)
        c1 = cb.assignment[canonical_index(coarse, k, m)]
        sym = mds.encode(fine)
        cid = c1 * width + canonical_index(sym, f, m - p)
        ids.append(cid)
        for h, key in zip(inst.receivers, keys):
            side = tuple(x[j] for j in key)
            if (cid, side) in decoders[h]:
                continue
            i, v = cb.decoders[h][(c1, tuple(coarse[j] for j in key))]
            y = mds.decode(sym, {j: fine[j] for j in key})
            decoders[h][(cid, side)] = (i, v * f + y[i])
    return _compact(inst, big, ids, decoders)


def concat_double(cb: VPCodebook, inst: ProblemInstance | None = None) -> VPCodebook:
    """Double the alphabet using the binary parity chain; ``t`` grows by ``2^(m-1)``."""
    inst = cb.instance if inst is None else inst
    for h in inst.receivers:
        if not h:
            raise InputError("receiver [] has no side information; doubling needs |H| >= 1 for every receiver")
    return concat_general(cb, inst, p=1, field_size=2)


def pliable_choice(cb: VPCodebook) -> dict:
    """The constant decoded index of every receiver; raises if some receiver's index varies."""
    choice = {}
    for h in cb.instance.receivers:
        indices = {i for i, _ in cb.decoders.get(h, {}).values()}
        if len(indices) != 1:
            raise InputError(f"receiver {sorted(j + 1 for j in h)} decodes varying indices {sorted(i + 1 for i in indices)}")
        choice[h] = indices.pop()
    return choice


def pliable_power(cb: VPCodebook, ell: int) -> VPCodebook:
    """Run ``ell`` copies of a fixed-choice code on the base-k digits of each message.

    Works because every copy decodes the same index for a given receiver;
    the rate is unchanged.
    """
    if ell < 1:
        raise InputError(f"ell must be a positive integer, got {ell}")
    choice = pliable_choice(cb)
    inst, k, m, t = cb.instance, cb.k, cb.m, cb.t
    big = k ** ell
    keys = [tuple(sorted(h)) for h in inst.receivers]
    ids = []
    decoders: dict = {h: {} for h in inst.receivers}
    for idx in range(big ** m):
        x = realisation(idx, big, m)
        layers = [tuple((v // k ** (ell - 1 - s)) % k for v in x) for s in range(ell)]
        cws = [cb.assignment[canonical_index(layer, k, m)] for layer in layers]
        cid = 0
        for c in cws:
            cid = cid * t + c
        ids.append(cid)
        for h, key in zip(inst.receivers, keys):
            side = tuple(x[j] for j in key)
            if (cid, side) in decoders[h]:
                continue
            value = 0
            for layer, c in zip(layers, cws):
                _, v = cb.decoders[h][(c, tuple(layer[j] for j in key))]
                value = value * k + v
            decoders[h][(cid, side)] = (choice[h], value)
    return _compact(inst, big, ids, decoders)


__all__ = [
    "MdsSpec",
    "choose_field",
    "concat_double",
    "concat_general",
    "pliable_choice",
    "pliable_power",
    "xor_chain_decode",
    "xor_chain_encode",
]
