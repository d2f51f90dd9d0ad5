"""Modular arithmetic and small dense linear algebra over Z_p.

Field elements are plain Python ints kept in canonical form ``0 <= v < p``;
a :class:`PrimeContext` carries the modulus alongside them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NotInvertible, NotPrime, SingularMatrix
from .rng import RandomSource, SplitMix64

MR_ROUNDS = 64

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
    157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233,
    239, 241, 251,
)


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """Return ``base**exponent mod modulus`` in ``[0, modulus-1]``."""
    if modulus < 2:
        raise ValueError("modulus must be >= 2")
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    # builtin pow is square-and-multiply on arbitrary-precision ints
    return pow(base, exponent, modulus)


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b)``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def mod_inverse(a: int, modulus: int) -> int:
    """Inverse of ``a`` modulo ``modulus``.

    Raises:
        NotInvertible: if ``gcd(a, modulus) != 1``.
    """
    if modulus < 1:
        raise ValueError("modulus must be positive")
    g, s, _ = egcd(a % modulus, modulus)
    if g != 1:
        raise NotInvertible(f"{a} has no inverse modulo {modulus} (gcd {g})")
    return s % modulus


def is_probable_prime(n: int, rounds: int = MR_ROUNDS, rng: RandomSource | None = None) -> bool:
    """Trial division by small primes followed by Miller-Rabin.

    Bases are drawn from ``rng``; with no source given a fixed-seed SplitMix64
    is used so the answer is reproducible.
    """
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    if n < _SMALL_PRIMES[-1] ** 2:
        return True
    if rng is None:
        rng = SplitMix64(n)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randint(2, n - 2)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: RandomSource) -> int:
    """Uniform-ish probable prime with exactly ``bits`` bits."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    lo, hi = 1 << (bits - 1), (1 << bits) - 1
    while True:
        c = rng.randint(lo, hi) | 1
        if c <= hi and is_probable_prime(c, rng=rng):
            return c


@dataclass(frozen=True)
class PrimeContext:
    p: int

    def __post_init__(self) -> None:
        if self.p < 3 or not is_probable_prime(self.p):
            raise NotPrime(f"{self.p} is not an odd prime")

    @property
    def bit_length(self) -> int:
        return self.p.bit_length()

    def reduce(self, v: int) -> int:
        return v % self.p

    def inv(self, v: int) -> int:
        return mod_inverse(v, self.p)


def rand_element(ctx: PrimeContext, lo: int, rng: RandomSource) -> int:
    """Uniform element of ``[lo, p-1]``."""
    if not 0 <= lo <= ctx.p - 1:
        raise ValueError(f"lo={lo} outside [0, {ctx.p - 1}]")
    return rng.randint(lo, ctx.p - 1)


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix over Z_p."""

    rows: int
    cols: int
    entries: tuple[int, ...]
    ctx: PrimeContext

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length must equal rows * cols")
        if any(not 0 <= e < self.ctx.p for e in self.entries):
            object.__setattr__(self, "entries", tuple(e % self.ctx.p for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ctx: PrimeContext) -> FieldMatrix:
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), ncols, tuple(v % ctx.p for r in rows for v in r), ctx)

    @classmethod
    def identity(cls, size: int, ctx: PrimeContext) -> FieldMatrix:
        return cls.from_rows([[int(i == j) for j in range(size)] for i in range(size)], ctx)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def select_rows(self, indices: Sequence[int]) -> FieldMatrix:
        return FieldMatrix.from_rows([self.row(i) for i in indices], self.ctx)

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        p = self.ctx.p
        out = []
        for i in range(self.rows):
            r = self.row(i)
            out.append([sum(r[t] * other[t, j] for t in range(self.cols)) % p
                        for j in range(other.cols)])
        return FieldMatrix.from_rows(out, self.ctx)

    def apply(self, vec: Sequence[int]) -> list[int]:
        """Matrix-vector product mod p."""
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch")
        p = self.ctx.p
        return [sum(a * b for a, b in zip(self.row(i), vec)) % p for i in range(self.rows)]


def mat_inverse(m: FieldMatrix) -> FieldMatrix:
    """Gauss-Jordan inverse of a square matrix over Z_p.

    Raises:
        SingularMatrix: if the determinant is 0 mod p.
    """
    if m.rows != m.cols:
        raise ValueError("matrix must be square")
    size, p = m.rows, m.ctx.p
    aug = [list(m.row(i)) + [int(i == j) for j in range(size)] for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col]), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular mod p")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = mod_inverse(aug[col][col], p)
        aug[col] = [v * inv % p for v in aug[col]]
        for r in range(size):
            f = aug[r][col]
            if r != col and f:
                aug[r] = [(a - f * b) % p for a, b in zip(aug[r], aug[col])]
    return FieldMatrix.from_rows([row[size:] for row in aug], m.ctx)
