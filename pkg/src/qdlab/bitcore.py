"""Bit-vector genotypes, standard bit mutation and seeded randomness.

Genotypes pack their bits into a single Python ``int`` (bit ``i`` of the
integer is position ``i`` of the string), so popcount, XOR and Hamming
distance are single big-int operations.
"""

from __future__ import annotations

import math
from functools import partial
from itertools import chain
from typing import Iterable, Sequence

import numpy as np

_BUFFER = 4096


class RandomSource:
    """Deterministic random stream addressed by ``(seed, stream)``.

    Backed by the counter-based Philox generator. Uniform doubles are drawn
    from numpy in blocks and served through a C-level iterator, because
    per-call numpy overhead would otherwise dominate the engines' loops.
    ``random`` is a plain callable attribute for the same reason.
    """

    __slots__ = ("seed", "stream", "_gen", "random")

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if stream < 0:
            raise ValueError(f"stream must be >= 0, got {stream}")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        gen = np.random.Generator(np.random.Philox(ss))
        self._gen = gen
        blocks = iter(lambda: gen.random(_BUFFER).tolist(), None)
        #: uniform double in [0, 1)
        self.random = partial(next, chain.from_iterable(blocks))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream})"

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)

    def getrandbits(self, n: int) -> int:
        """n uniform random bits packed into an int."""
        nwords = (n + 63) // 64
        words = self._gen.integers(0, 2**64, size=nwords, dtype=np.uint64, endpoint=False)
        value = int.from_bytes(words.astype("<u8").tobytes(), "little")
        return value & ((1 << n) - 1)


class Genotype:
    """Bit string of length ``n`` with a cached one-count.

    Treated as a value: nothing in the package mutates a genotype after
    construction (attribute writes are not blocked, to keep creation cheap).
    """

    __slots__ = ("bits", "n", "ones")

    def __init__(self, bits: int, n: int, ones: int | None = None):
        if n < 1:
            raise ValueError(f"invalid dimension n={n}")
        if bits < 0 or bits >> n:
            raise ValueError(f"bits do not fit in length {n}")
        self.bits = bits
        self.n = n
        self.ones = bits.bit_count() if ones is None else ones

    @classmethod
    def _trusted(cls, bits: int, n: int, ones: int) -> "Genotype":
        # Skips validation; for kernels that already know the popcount.
        g = object.__new__(cls)
        g.bits = bits
        g.n = n
        g.ones = ones
        return g

    @classmethod
    def zeros(cls, n: int) -> "Genotype":
        return cls(0, n)

    @classmethod
    def full(cls, n: int) -> "Genotype":
        return cls((1 << n) - 1, n)

    @classmethod
    def from_string(cls, s: str) -> "Genotype":
        """Parse ``"0110"``; the first character is position 0."""
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(int(s[::-1], 2), len(s))

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> "Genotype":
        vals = [int(v) for v in values]
        bits = 0
        for i, v in enumerate(vals):
            if v not in (0, 1):
                raise ValueError(f"bit {i} is {v}, expected 0 or 1")
            bits |= v << i
        return cls(bits, len(vals))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.bits >> (i % self.n)) & 1

    def positions(self) -> list[int]:
        """Indices of the 1-bits in increasing order."""
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return out

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.n)]

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")[::-1]

    def __repr__(self) -> str:
        return f"Genotype('{self}')"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Genotype):
            return NotImplemented
        return self.n == other.n and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.n, self.bits))


def new_uniform(n: int, rng: RandomSource) -> Genotype:
    """Uniformly random genotype of length n."""
    if n < 1:
        raise ValueError(f"invalid dimension n={n}")
    return Genotype(rng.getrandbits(n), n)


def flip_mask(n: int, p_m: float, rng: RandomSource) -> int:
    """Mask with each of n bits set independently with probability p_m.

    Positions are generated by geometric gap skipping, so the cost is
    proportional to the number of flips rather than to n.
    """
    log_q = math.log1p(-p_m)
    rand = rng.random
    log = math.log
    mask = 0
    pos = -1
    while True:
        # 1 - u lies in (0, 1], keeping log finite
        pos += 1 + int(log(1.0 - rand()) / log_q)
        if pos >= n:
            return mask
        mask |= 1 << pos


def check_rate(p_m: float) -> None:
    if not 0.0 < p_m < 1.0:
        raise ValueError(f"mutation probability must lie in (0, 1), got {p_m}")


def mutate(parent: Genotype, p_m: float, rng: RandomSource) -> Genotype:
    """Standard bit mutation: flip every bit independently with probability p_m."""
    check_rate(p_m)
    child = parent.bits ^ flip_mask(parent.n, p_m, rng)
    return Genotype._trusted(child, parent.n, child.bit_count())


def hamming(a: Genotype, b: Genotype) -> int:
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    return (a.bits ^ b.bits).bit_count()


def popcount(bits: int) -> int:
    return bits.bit_count()


def weights_of(bits: int, weights: Sequence[float]) -> float:
    """Sum of ``weights[i]`` over the set bits of ``bits``."""
    total = 0
    while bits:
        low = bits & -bits
        total += weights[low.bit_length() - 1]
        bits ^= low
    return total
