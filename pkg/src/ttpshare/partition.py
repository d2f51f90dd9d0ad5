"""Polynomial-root threshold sharing over Z_p.

A secret ``d`` is written as the product of ``k`` nonzero roots
``r_1 * ... * r_k = d (mod p)``. The ordered root vector is then expanded to
``n`` shares by a Vandermonde matrix, ``c_i = sum_j r_j * x_i**(j-1)``. Any
``k`` shares give an invertible ``k x k`` system that returns the roots in
their original order, and the secret is their product.

Byte strings are carried as a sequence of blocks, each shared independently
with the same evaluation points, so one share holds one value per block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DuplicateEvaluationPoint,
    InvalidEvaluationPoint,
    MalformedBlock,
    ModulusTooSmall,
    ShareFormatError,
    WrongShareCount,
    ZeroSecret,
)
from .field import FieldMatrix, PrimeContext, mat_inverse, mod_inverse, rand_element
from .rng import RandomSource


@dataclass(frozen=True)
class RootTuple:
    roots: tuple[int, ...]
    ctx: PrimeContext

    @property
    def k(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class Partition:
    """One share: evaluation point ``x`` and one value ``c`` per data block."""

    index: int
    x: int
    c: tuple[int, ...]


@dataclass(frozen=True)
class ShareSet:
    partitions: tuple[Partition, ...]
    k: int
    n: int
    ctx: PrimeContext

    def __post_init__(self) -> None:
        if self.k < 2 or self.n < self.k or self.n > self.ctx.p - 1:
            raise ValueError(f"invalid (k, n) = ({self.k}, {self.n}) for p = {self.ctx.p}")
        if len(self.partitions) != self.n:
            raise ValueError("partition count must equal n")
        _check_points([s.x for s in self.partitions], self.ctx)

    def __getitem__(self, index: int) -> Partition:
        """Partition by 1-based share index."""
        return self.partitions[index - 1]


@dataclass(frozen=True)
class MonicPolynomial:
    """Monic polynomial; ``coefficients`` runs a_{k-1} .. a_0, leading 1 implied."""

    coefficients: tuple[int, ...]
    ctx: PrimeContext

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    @property
    def constant(self) -> int:
        return self.coefficients[-1] if self.coefficients else 1

    def __call__(self, x: int) -> int:
        acc = 1
        for a in self.coefficients:
            acc = (acc * x + a) % self.ctx.p
        return acc

    def __str__(self) -> str:
        terms = [f"x^{self.degree}"]
        for power, a in zip(range(self.degree - 1, -1, -1), self.coefficients):
            if a:
                terms.append(f"{a}" + ("" if power == 0 else "x" if power == 1 else f"x^{power}"))
        return " + ".join(terms)


def _check_points(xs: Sequence[int], ctx: PrimeContext) -> None:
    for x in xs:
        if not 1 <= x <= ctx.p - 1:
            raise InvalidEvaluationPoint(f"evaluation point {x} outside [1, {ctx.p - 1}]")
    if len(set(xs)) != len(xs):
        raise DuplicateEvaluationPoint(f"evaluation points not distinct: {list(xs)}")


def default_points(n: int) -> list[int]:
    return list(range(1, n + 1))


def generate_roots(d: int, k: int, ctx: PrimeContext, rng: RandomSource) -> RootTuple:
    """Draw ``k - 1`` uniform nonzero roots and solve for the last one.

    Raises:
        ZeroSecret: ``d`` is 0 mod p, which no product of nonzero roots hits.
    """
    p = ctx.p
    d %= p
    if d == 0:
        raise ZeroSecret("secret must be nonzero mod p")
    if not 2 <= k <= p - 1:
        raise ValueError(f"k must lie in [2, {p - 1}]")
    roots = [rand_element(ctx, 1, rng) for _ in range(k - 1)]
    prod = 1
    for r in roots:
        prod = prod * r % p
    roots.append(d * mod_inverse(prod, p) % p)
    return RootTuple(tuple(roots), ctx)


def poly_from_roots(roots: RootTuple) -> MonicPolynomial:
    """Expand prod(x - r_i) mod p."""
    p = roots.ctx.p
    # coeffs[j] is the coefficient of x^j, highest last
    coeffs = [1]
    for r in roots.roots:
        nxt = [0] * (len(coeffs) + 1)
        for j, a in enumerate(coeffs):
            nxt[j + 1] = (nxt[j + 1] + a) % p
            nxt[j] = (nxt[j] - r * a) % p
        coeffs = nxt
    return MonicPolynomial(tuple(reversed(coeffs[:-1])), roots.ctx)


def vandermonde(xs: Sequence[int], k: int, ctx: PrimeContext) -> FieldMatrix:
    """Rows ``(1, x, x^2, ..., x^(k-1))`` for each evaluation point."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_points(xs, ctx)
    p = ctx.p
    return FieldMatrix.from_rows([[pow(x, j, p) for j in range(k)] for x in xs], ctx)


def expand_shares(roots: RootTuple, xs: Sequence[int] | None = None, n: int | None = None) -> ShareSet:
    """Expand a single root tuple to ``n`` single-block shares."""
    return expand_blocks([roots], xs, n)


def expand_blocks(blocks: Sequence[RootTuple], xs: Sequence[int] | None = None,
                  n: int | None = None) -> ShareSet:
    if not blocks:
        raise ValueError("need at least one block")
    ctx, k = blocks[0].ctx, blocks[0].k
    if any(b.ctx != ctx or b.k != k for b in blocks):
        raise ValueError("all blocks must share p and k")
    if xs is None:
        if n is None:
            raise ValueError("give xs or n")
        xs = default_points(n)
    xs = list(xs)
    if len(xs) < k:
        raise ValueError(f"need at least k={k} evaluation points")
    a = vandermonde(xs, k, ctx)
    columns = [a.apply(b.roots) for b in blocks]
    parts = tuple(
        Partition(i + 1, x, tuple(col[i] for col in columns)) for i, x in enumerate(xs)
    )
    return ShareSet(parts, k, len(xs), ctx)


def split_secret(d: int, k: int, n: int, ctx: PrimeContext, rng: RandomSource,
                 xs: Sequence[int] | None = None) -> ShareSet:
    return split_blocks([d], k, n, ctx, rng, xs)


def split_blocks(blocks: Sequence[int], k: int, n: int, ctx: PrimeContext, rng: RandomSource,
                 xs: Sequence[int] | None = None) -> ShareSet:
    """Split each block independently; roots are drawn block by block."""
    if not k <= n <= ctx.p - 1:
        raise ValueError(f"need k <= n <= p - 1, got k={k}, n={n}")
    roots = [generate_roots(d, k, ctx, rng) for d in blocks]
    return expand_blocks(roots, xs if xs is not None else default_points(n))


def _solve_matrix(shares: Sequence[Partition], k: int, ctx: PrimeContext) -> FieldMatrix:
    if len(shares) != k:
        raise WrongShareCount(f"need exactly {k} shares, got {len(shares)}")
    return mat_inverse(vandermonde([s.x for s in shares], k, ctx))


def reconstruct_roots(shares: Sequence[Partition], k: int, ctx: PrimeContext,
                      block: int = 0) -> RootTuple:
    """Solve ``B r = c`` for the ordered roots of one block."""
    b_inv = _solve_matrix(shares, k, ctx)
    return RootTuple(tuple(b_inv.apply([s.c[block] for s in shares])), ctx)


def recover_secret(roots: RootTuple) -> int:
    prod = 1
    for r in roots.roots:
        prod = prod * r % roots.ctx.p
    return prod


def reconstruct_blocks(shares: Sequence[Partition], k: int, ctx: PrimeContext) -> tuple[int, ...]:
    """Recover every block of the secret from exactly ``k`` shares."""
    b_inv = _solve_matrix(shares, k, ctx)
    nblocks = len(shares[0].c)
    if any(len(s.c) != nblocks for s in shares):
        raise ValueError("shares disagree on block count")
    out = []
    for j in range(nblocks):
        out.append(recover_secret(RootTuple(tuple(b_inv.apply([s.c[j] for s in shares])), ctx)))
    return tuple(out)


# -- byte blocks --------------------------------------------------------------

def block_size(ctx: PrimeContext) -> int:
    """Largest ``m`` with ``256**m < p - 1``."""
    m = 0
    while 256 ** (m + 1) < ctx.p - 1:
        m += 1
    return m


def encode_blocks(data: bytes, ctx: PrimeContext) -> list[int]:
    """Map bytes to nonzero field elements.

    Full ``m``-byte big-endian blocks map to ``v + 1``. A short final block of
    ``L`` bytes is stored as ``(1 << 8L | v) + 1`` and followed by the marker
    element ``256**m + 1``; the leading 1 bit records ``L``.
    """
    m = block_size(ctx)
    if m == 0:
        raise ModulusTooSmall(f"p = {ctx.p} leaves no room for a one-byte block")
    out = []
    full = len(data) - len(data) % m
    for i in range(0, full, m):
        out.append(int.from_bytes(data[i:i + m], "big") + 1)
    tail = data[full:]
    if tail:
        out.append(((1 << (8 * len(tail))) | int.from_bytes(tail, "big")) + 1)
        out.append(256 ** m + 1)
    return out


def decode_blocks(elements: Sequence[int], ctx: PrimeContext) -> bytes:
    m = block_size(ctx)
    if m == 0:
        raise ModulusTooSmall(f"p = {ctx.p} leaves no room for a one-byte block")
    limit = 256 ** m
    vals = [e - 1 for e in elements]
    tail = b""
    if vals and vals[-1] == limit:
        if len(vals) < 2:
            raise MalformedBlock("padding marker without a tail block")
        v = vals[-2]
        length = (v.bit_length() - 1) // 8
        if not 1 <= length < m or v >> (8 * length) != 1:
            raise MalformedBlock("inconsistent tail padding")
        tail = (v ^ (1 << (8 * length))).to_bytes(length, "big")
        vals = vals[:-2]
    out = bytearray()
    for v in vals:
        if not 0 <= v < limit:
            raise MalformedBlock(f"block value {v + 1} does not fit {m} bytes")
        out += v.to_bytes(m, "big")
    return bytes(out) + tail


# -- share files --------------------------------------------------------------

SHARE_HEADER = "SHARE v1"
_SHARE_KEYS = ("p", "k", "n", "index", "x", "c")


@dataclass(frozen=True)
class ShareFile:
    p: int
    k: int
    n: int
    partition: Partition


def format_share(partition: Partition, ctx: PrimeContext, k: int, n: int) -> str:
    return "\n".join([
        SHARE_HEADER,
        f"p={ctx.p}",
        f"k={k}",
        f"n={n}",
        f"index={partition.index}",
        f"x={partition.x}",
        "c=" + ",".join(str(v) for v in partition.c),
    ]) + "\n"


def _decimal(text: str, key: str) -> int:
    if not text.isdigit():
        raise ShareFormatError(f"{key} is not a decimal integer: {text!r}")
    return int(text)


def parse_share(text: str) -> ShareFile:
    if not text.endswith("\n"):
        raise ShareFormatError("missing trailing newline")
    lines = text[:-1].split("\n")
    if len(lines) != 1 + len(_SHARE_KEYS) or lines[0] != SHARE_HEADER:
        raise ShareFormatError("expected 'SHARE v1' followed by exactly p, k, n, index, x, c")
    fields = {}
    for line, key in zip(lines[1:], _SHARE_KEYS):
        got, sep, value = line.partition("=")
        if not sep or got != key:
            raise ShareFormatError(f"expected key {key!r}, got {line!r}")
        fields[key] = value
    cs = tuple(_decimal(v, "c") for v in fields["c"].split(","))
    sf = ShareFile(
        p=_decimal(fields["p"], "p"),
        k=_decimal(fields["k"], "k"),
        n=_decimal(fields["n"], "n"),
        partition=Partition(_decimal(fields["index"], "index"), _decimal(fields["x"], "x"), cs),
    )
    if not 1 <= sf.partition.x < sf.p or any(c >= sf.p for c in cs):
        raise ShareFormatError("share values out of range for p")
    return sf


def share_files(shares: ShareSet) -> Iterable[tuple[str, str]]:
    """Yield ``(filename, contents)`` for every share."""
    for part in shares.partitions:
        yield f"share_{part.index}.txt", format_share(part, shares.ctx, shares.k, shares.n)
