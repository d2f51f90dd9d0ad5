"""Share distribution through two trusted third parties.

For each share the dealer draws a share key ``k1`` and a wrap key ``k2``.
TTP1 receives the encrypted share ``c + k1`` together with ``k2`` in clear;
TTP2 receives the encrypted share key ``k1 + k2``. Each TTP forwards what it
holds to the recipient, who first unwraps ``k1`` and then the share. Neither
TTP alone holds enough to learn anything about ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import IndexMismatch, LengthMismatch, TamperDetected, UnknownRecipient
from .field import PrimeContext, rand_element
from .partition import Partition, ShareSet, split_blocks
from .piggy import PiggyKeypair, transfer_payload
from .rng import RandomSource
from .transcript import Bus, Message, MessageLog, Value

DEALER, TTP1, TTP2 = "DEALER", "TTP1", "TTP2"


def recipient_name(i: int) -> str:
    return f"R{i}"


class Cipher(Protocol):
    name: str

    def encrypt(self, m: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]: ...

    def decrypt(self, c: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]: ...


def _check_lengths(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"length {len(a)} vs key length {len(b)}")


def otp_encrypt(m: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]:
    _check_lengths(m, key)
    return tuple((a + b) % p for a, b in zip(m, key))


def otp_decrypt(c: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]:
    _check_lengths(c, key)
    return tuple((a - b) % p for a, b in zip(c, key))


class AdditivePad:
    """One-time pad by elementwise addition mod p."""

    name = "otp-add"

    def encrypt(self, m: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]:
        return otp_encrypt(m, key, p)

    def decrypt(self, c: Sequence[int], key: Sequence[int], p: int) -> tuple[int, ...]:
        return otp_decrypt(c, key, p)


ADDITIVE_PAD = AdditivePad()


@dataclass(frozen=True)
class Package1:
    recipient_index: int
    x: int
    enc_share: tuple[int, ...]
    wrap_key: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_lengths(self.enc_share, self.wrap_key)


@dataclass(frozen=True)
class Package2:
    recipient_index: int
    enc_share_key: tuple[int, ...]


@dataclass(frozen=True)
class Delivery1:
    recipient_index: int
    x: int
    enc_share: tuple[int, ...]
    wrap_key: tuple[int, ...]


@dataclass(frozen=True)
class Delivery2:
    recipient_index: int
    enc_share_key: tuple[int, ...]


def _tup(v: Value) -> tuple[int, ...]:
    return v if isinstance(v, tuple) else (v,)


def _pkg1_fields(pkg: Package1 | Delivery1) -> list[tuple[str, Value]]:
    return [("i", pkg.recipient_index), ("x", pkg.x), ("enc", pkg.enc_share), ("wrap", pkg.wrap_key)]


def _pkg2_fields(pkg: Package2 | Delivery2) -> list[tuple[str, Value]]:
    return [("i", pkg.recipient_index), ("enckey", pkg.enc_share_key)]


def _pkg1_from(msg: Message) -> Package1:
    f = msg.as_dict()
    return Package1(f["i"], f["x"], _tup(f["enc"]), _tup(f["wrap"]))


def _pkg2_from(msg: Message) -> Package2:
    f = msg.as_dict()
    return Package2(f["i"], _tup(f["enckey"]))


def dealer_prepare(shares: ShareSet, rng: RandomSource,
                   cipher: Cipher = ADDITIVE_PAD) -> list[tuple[Package1, Package2]]:
    """Wrap every share for the two TTPs.

    Keys are drawn per share, share key first, and are not kept anywhere
    once the packages exist.
    """
    ctx = shares.ctx
    out = []
    for part in shares.partitions:
        k1 = tuple(rand_element(ctx, 0, rng) for _ in part.c)
        k2 = tuple(rand_element(ctx, 0, rng) for _ in part.c)
        out.append((
            Package1(part.index, part.x, cipher.encrypt(part.c, k1, ctx.p), k2),
            Package2(part.index, cipher.encrypt(k1, k2, ctx.p)),
        ))
    return out


def _check_recipient(i: int, n_recipients: int) -> None:
    if not 1 <= i <= n_recipients:
        raise UnknownRecipient(f"no recipient {i} among 1..{n_recipients}")


def ttp1_forward(pkg: Package1, n_recipients: int, bus: Bus | None = None) -> Delivery1:
    _check_recipient(pkg.recipient_index, n_recipients)
    d = Delivery1(pkg.recipient_index, pkg.x, pkg.enc_share, pkg.wrap_key)
    if bus is None:
        return d
    msg = bus.send(TTP1, recipient_name(d.recipient_index), "DELIVER1", _pkg1_fields(d))
    p = _pkg1_from(msg)
    return Delivery1(p.recipient_index, p.x, p.enc_share, p.wrap_key)


def ttp2_forward(pkg: Package2, n_recipients: int, bus: Bus | None = None) -> Delivery2:
    _check_recipient(pkg.recipient_index, n_recipients)
    d = Delivery2(pkg.recipient_index, pkg.enc_share_key)
    if bus is None:
        return d
    msg = bus.send(TTP2, recipient_name(d.recipient_index), "DELIVER2", _pkg2_fields(d))
    p = _pkg2_from(msg)
    return Delivery2(p.recipient_index, p.enc_share_key)


def recipient_decrypt(d1: Delivery1, d2: Delivery2, ctx: PrimeContext,
                      cipher: Cipher = ADDITIVE_PAD) -> Partition:
    if d1.recipient_index != d2.recipient_index:
        raise IndexMismatch(f"deliveries for {d1.recipient_index} and {d2.recipient_index}")
    k1 = cipher.decrypt(d2.enc_share_key, d1.wrap_key, ctx.p)
    return Partition(d1.recipient_index, d1.x, cipher.decrypt(d1.enc_share, k1, ctx.p))


# -- piggy bank transport -------------------------------------------------------

def _flatten1(pkg: Package1) -> list[int]:
    return [pkg.recipient_index, pkg.x, *pkg.enc_share, *pkg.wrap_key]


def _flatten2(pkg: Package2) -> list[int]:
    return [pkg.recipient_index, *pkg.enc_share_key]


def _carry(values: list[int], ttp: str, key: PiggyKeypair, ctx: PrimeContext, n: int,
           rng: RandomSource, bus: Bus) -> list[int]:
    # +1 keeps every payload element inside [1, pb_n - 1]
    got, _ = transfer_payload([v + 1 for v in values], key, rng, bus=bus, sender=DEALER, receiver=ttp)
    out = [v - 1 for v in got]
    if not 1 <= out[0] <= n or any(not 0 <= v < ctx.p for v in out[1:]):
        raise TamperDetected(len(values) - 1, "package fields out of range")
    return out


def _send_pkg1(pkg: Package1, transport: str, ctx: PrimeContext, n: int, rng: RandomSource,
               bus: Bus, key: PiggyKeypair | None) -> Package1:
    if transport == "direct":
        return _pkg1_from(bus.send(DEALER, TTP1, "SHARE_PKG1", _pkg1_fields(pkg)))
    vals = _carry(_flatten1(pkg), TTP1, key, ctx, n, rng, bus)
    blocks = (len(vals) - 2) // 2
    got = Package1(vals[0], vals[1], tuple(vals[2:2 + blocks]), tuple(vals[2 + blocks:]))
    bus.note(TTP1, DEALER, "SHARE_PKG1", _pkg1_fields(got))
    return got


def _send_pkg2(pkg: Package2, transport: str, ctx: PrimeContext, n: int, rng: RandomSource,
               bus: Bus, key: PiggyKeypair | None) -> Package2:
    if transport == "direct":
        return _pkg2_from(bus.send(DEALER, TTP2, "SHARE_PKG2", _pkg2_fields(pkg)))
    vals = _carry(_flatten2(pkg), TTP2, key, ctx, n, rng, bus)
    got = Package2(vals[0], tuple(vals[1:]))
    bus.note(TTP2, DEALER, "SHARE_PKG2", _pkg2_fields(got))
    return got


TRANSPORTS = ("direct", "piggy")


def run_distribution(
    secret_blocks: Sequence[int],
    k: int,
    n: int,
    ctx: PrimeContext,
    rng: RandomSource,
    transport: str = "direct",
    *,
    bus: Bus | None = None,
    ttp1_key: PiggyKeypair | None = None,
    ttp2_key: PiggyKeypair | None = None,
    cipher: Cipher = ADDITIVE_PAD,
) -> tuple[dict[int, Partition], MessageLog]:
    """Split the secret and run the two-TTP protocol for every recipient.

    With ``transport="piggy"`` the dealer-to-TTP legs are carried by piggy
    bank rounds under each TTP's keypair (``ttp2_key`` defaults to
    ``ttp1_key``).

    Raises:
        TamperDetected: from the piggy bank transport.
    """
    if transport not in TRANSPORTS:
        raise ValueError(f"unknown transport {transport!r}")
    if transport == "piggy":
        if ttp1_key is None:
            raise ValueError("piggy transport needs a TTP keypair")
        ttp2_key = ttp2_key or ttp1_key
        if min(ttp1_key.n, ttp2_key.n) <= ctx.p:
            raise ValueError("piggy bank modulus must exceed p")
    bus = bus if bus is not None else Bus()
    shares = split_blocks(secret_blocks, k, n, ctx, rng)
    packages = dealer_prepare(shares, rng, cipher)
    received: dict[int, Partition] = {}
    for pkg1, pkg2 in packages:
        at_ttp1 = _send_pkg1(pkg1, transport, ctx, n, rng, bus, ttp1_key)
        at_ttp2 = _send_pkg2(pkg2, transport, ctx, n, rng, bus, ttp2_key)
        d1 = ttp1_forward(at_ttp1, n, bus)
        d2 = ttp2_forward(at_ttp2, n, bus)
        part = recipient_decrypt(d1, d2, ctx, cipher)
        received[part.index] = part
    return received, bus.log
