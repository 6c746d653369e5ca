"""Prime-field arithmetic with instrumented operation counting.

Every elementary field operation performed on behalf of one logical party
is tallied in that party's counter: additions/subtractions under ``adds``,
multiplications under ``muls``, inversions under ``invs`` and random
element generation under ``rand_draws``.  Cost weights (how expensive one
operation of each kind is on real hardware) are applied at report time,
never baked into the counts.

A PrimeField owns one counter and is confined to one party; elements are
immutable values and may be copied freely between parties.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ParameterError

#: Largest allowed modulus width.  Products of two residues then fit in
#: 124 bits, so downstream consumers may use fixed 128-bit intermediates;
#: residues serialize as single u64 words on the wire.
MAX_MODULUS_BITS = 62

# Deterministic Miller-Rabin witness set, exact for n < 3.3 * 10**24
# (covers every 62-bit modulus).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    c = n + 1
    if c <= 2:
        return 2
    if c % 2 == 0:
        c += 1
    while not is_prime(c):
        c += 2
    return c


@dataclass(frozen=True)
class OpCounts:
    """Immutable snapshot of an operation counter."""

    adds: int = 0
    muls: int = 0
    invs: int = 0
    rand_draws: int = 0

    @property
    def arithmetic(self) -> int:
        """Arithmetic work only (excludes random generation)."""
        return self.adds + self.muls + self.invs

    @property
    def total(self) -> int:
        return self.adds + self.muls + self.invs + self.rand_draws

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(
            self.adds + other.adds,
            self.muls + other.muls,
            self.invs + other.invs,
            self.rand_draws + other.rand_draws,
        )

    def __sub__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(
            self.adds - other.adds,
            self.muls - other.muls,
            self.invs - other.invs,
            self.rand_draws - other.rand_draws,
        )


class OpCounter:
    """Mutable per-party operation tally.

    Counts only grow during a session; reset() is meant for reuse between
    sessions, not within one.
    """

    __slots__ = ("adds", "muls", "invs", "rand_draws")

    def __init__(self) -> None:
        self.adds = 0
        self.muls = 0
        self.invs = 0
        self.rand_draws = 0

    def tally(self, adds: int = 0, muls: int = 0, invs: int = 0, rand_draws: int = 0) -> None:
        self.adds += adds
        self.muls += muls
        self.invs += invs
        self.rand_draws += rand_draws

    def counts(self) -> OpCounts:
        return OpCounts(self.adds, self.muls, self.invs, self.rand_draws)

    def reset(self) -> None:
        self.adds = self.muls = self.invs = self.rand_draws = 0

    def __repr__(self) -> str:
        return (
            f"OpCounter(adds={self.adds}, muls={self.muls}, "
            f"invs={self.invs}, rand_draws={self.rand_draws})"
        )


class SeededSource:
    """Deterministic word-oriented randomness source.

    Yields fixed-width words from a seeded Mersenne Twister; the field's
    rejection sampler draws from these words.  Same seed, same sequence.
    """

    __slots__ = ("word_bits", "_rng")

    def __init__(self, seed: int, word_bits: int = 64) -> None:
        if word_bits < 1:
            raise ParameterError("word_bits must be positive")
        self.word_bits = word_bits
        self._rng = random.Random(seed)

    def next_word(self) -> int:
        return self._rng.getrandbits(self.word_bits)

    def spawn(self, label: int) -> "SeededSource":
        """Independent child stream (used to give phases their own streams)."""
        return SeededSource(self._rng.getrandbits(64) ^ label, self.word_bits)


class FieldElem:
    """Element of a prime field, stored as the canonical residue in [0, p).

    Arithmetic routes through the owning field so the party's counter sees
    every operation.
    """

    __slots__ = ("residue", "field")

    def __init__(self, residue: int, field: "PrimeField") -> None:
        self.residue = residue
        self.field = field

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field is not self.field:
                raise ParameterError("elements belong to different field contexts")
            return other
        if isinstance(other, int):
            return self.field.elem(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.field.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.field.sub(self, other)

    def __mul__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.field.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else self.field.mul(self, self.field.inv(other))

    def __neg__(self):
        return self.field.neg(self)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.field.p == other.field.p and self.residue == other.residue
        if isinstance(other, int):
            return self.residue == other % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.residue))

    def __int__(self) -> int:
        return self.residue

    def __repr__(self) -> str:
        return f"FieldElem({self.residue} mod {self.field.p})"


class PrimeField:
    """The field of integers modulo a prime p, p < 2**62, with a counter."""

    __slots__ = ("p", "counter")

    def __init__(self, p: int) -> None:
        if not isinstance(p, int) or p < 2:
            raise ParameterError(f"modulus must be an integer >= 2, got {p!r}")
        if p.bit_length() > MAX_MODULUS_BITS:
            raise ParameterError(
                f"modulus needs {p.bit_length()} bits, cap is {MAX_MODULUS_BITS}"
            )
        if not is_prime(p):
            raise ParameterError(f"modulus {p} is not prime")
        self.p = p
        self.counter = OpCounter()

    def elem(self, value: int) -> FieldElem:
        return FieldElem(value % self.p, self)

    def zero(self) -> FieldElem:
        return FieldElem(0, self)

    def one(self) -> FieldElem:
        return FieldElem(1 % self.p, self)

    def _check(self, *elems: FieldElem) -> None:
        for e in elems:
            if e.field is not self:
                raise ParameterError("element belongs to a different field context")

    # Counted elementary operations.  Subtraction and negation tally as
    # additions; division is an inversion followed by a multiplication.

    def add(self, a: FieldElem, b: FieldElem) -> FieldElem:
        self._check(a, b)
        self.counter.adds += 1
        return FieldElem((a.residue + b.residue) % self.p, self)

    def sub(self, a: FieldElem, b: FieldElem) -> FieldElem:
        self._check(a, b)
        self.counter.adds += 1
        return FieldElem((a.residue - b.residue) % self.p, self)

    def mul(self, a: FieldElem, b: FieldElem) -> FieldElem:
        self._check(a, b)
        self.counter.muls += 1
        return FieldElem(a.residue * b.residue % self.p, self)

    def neg(self, a: FieldElem) -> FieldElem:
        self._check(a)
        self.counter.adds += 1
        return FieldElem(-a.residue % self.p, self)

    def inv(self, a: FieldElem) -> FieldElem:
        self._check(a)
        return FieldElem(self.inv_residue(a.residue), self)

    def inv_residue(self, a: int) -> int:
        """Counted inverse on a raw residue."""
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no inverse")
        self.counter.invs += 1
        return pow(a, self.p - 2, self.p)

    def op(self, a: FieldElem, b: FieldElem, kind: str) -> FieldElem:
        """Dispatch by name; kind is one of add, sub, mul."""
        try:
            return {"add": self.add, "sub": self.sub, "mul": self.mul}[kind](a, b)
        except KeyError:
            raise ParameterError(f"unknown operation kind {kind!r}") from None

    def pow(self, a: FieldElem, e: int) -> FieldElem:
        """Left-to-right square-and-multiply; every multiply is counted."""
        self._check(a)
        return FieldElem(self.pow_residue(a.residue, e), self)

    def pow_residue(self, a: int, e: int) -> int:
        if e < 0:
            raise ParameterError("negative exponent")
        if e == 0:
            return 1 % self.p
        p = self.p
        acc = a % p
        muls = 0
        for bit in bin(e)[3:]:
            acc = acc * acc % p
            muls += 1
            if bit == "1":
                acc = acc * a % p
                muls += 1
        self.counter.muls += muls
        return acc

    def sample_residue(self, rng: SeededSource) -> int:
        """Uniform draw in [0, p) by rejection from fixed-width words.

        Words >= the largest multiple of p below 2**word_bits are thrown
        away, so every residue keeps exactly the same number of accepted
        preimages.  Counts as one random generation regardless of how many
        words were rejected.
        """
        span = 1 << rng.word_bits
        if span < self.p:
            raise ParameterError("randomness word size too small for modulus")
        limit = span - span % self.p
        w = rng.next_word()
        while w >= limit:
            w = rng.next_word()
        self.counter.rand_draws += 1
        return w % self.p

    def sample(self, rng: SeededSource) -> FieldElem:
        return FieldElem(self.sample_residue(rng), self)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other is self

    def __hash__(self) -> int:
        return id(self)

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"
