"""Classical piggy bank exchange between a TTP and a user.

The TTP publishes a sealed challenge ``f(R) = R^e mod n``. The user answers
with two messages, ``m1 = S*f(R) + K mod n`` and ``m2 = S^e mod n``. Only the
TTP knows the factors of ``n``, so only it can open ``m2`` to get ``S`` and then
peel ``K`` off ``m1``.

When used as a transport, each round carries one payload element as ``S``
and uses ``K = tag(S)``; the TTP recomputes the tag after recovery, which
catches any change to ``m1`` and almost any change to ``m2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd
from typing import Callable, Sequence

from .errors import BadExponent, NotPrime, TamperDetected
from .field import is_probable_prime, mod_inverse, mod_pow, random_prime
from .rng import RandomSource
from .transcript import Bus, MessageLog

log = logging.getLogger(__name__)

WEAK_MODULUS_BITS = 64

TagFunction = Callable[[int, int], int]


@dataclass(frozen=True)
class PiggyKeypair:
    n: int
    e: int
    d_secret: int
    phi: int
    p_factor: int
    q_factor: int

    @property
    def public(self) -> tuple[int, int]:
        return self.n, self.e


@dataclass(frozen=True)
class Challenge:
    r: int
    f_r: int


@dataclass(frozen=True)
class Response:
    m1: int
    m2: int


def keygen(p_factor: int, q_factor: int, e: int) -> PiggyKeypair:
    if p_factor == q_factor:
        raise ValueError("factors must be distinct")
    for f in (p_factor, q_factor):
        if not is_probable_prime(f):
            raise NotPrime(f"{f} is not prime")
    if e < 3:
        raise BadExponent("public exponent must be >= 3")
    phi = (p_factor - 1) * (q_factor - 1)
    if gcd(e, phi) != 1:
        raise BadExponent(f"gcd({e}, {phi}) != 1")
    n = p_factor * q_factor
    if n.bit_length() < WEAK_MODULUS_BITS:
        log.warning("piggy bank modulus n=%d is only %d bits", n, n.bit_length())
    return PiggyKeypair(n, e, mod_inverse(e, phi), phi, p_factor, q_factor)


def generate_keypair(bits: int, rng: RandomSource, e: int = 65537) -> PiggyKeypair:
    """Keypair whose two prime factors each have ``bits`` bits."""
    while True:
        p = random_prime(bits, rng)
        q = random_prime(bits, rng)
        if p != q and gcd(e, (p - 1) * (q - 1)) == 1:
            return keygen(p, q, e)


def ttp_challenge(key: PiggyKeypair, rng: RandomSource) -> Challenge:
    r = rng.randint(2, key.n - 1)
    return Challenge(r, mod_pow(r, key.e, key.n))


def user_respond(f_r: int, s: int, k: int, public: tuple[int, int]) -> Response:
    n, e = public
    return Response((s * f_r + k) % n, mod_pow(s, e, n))


def ttp_recover(resp: Response, chal: Challenge, key: PiggyKeypair) -> tuple[int, int]:
    # n is squarefree, so the power map inverts for every s, coprime or not
    s = mod_pow(resp.m2, key.d_secret, key.n)
    return s, (resp.m1 - s * chal.f_r) % key.n


def tag(s: int, n: int) -> int:
    """Reference tag h(S) = S^2 + 1 mod n."""
    return (s * s + 1) % n


def transfer_payload(
    elements: Sequence[int],
    key: PiggyKeypair,
    rng: RandomSource,
    *,
    bus: Bus | None = None,
    sender: str = "USER",
    receiver: str = "TTP",
    tag_fn: TagFunction = tag,
) -> tuple[list[int], MessageLog]:
    """Carry ``elements`` from ``sender`` to the TTP ``receiver``, one round each.

    Raises:
        TamperDetected: a recovered ``K`` does not match the tag of the
            recovered ``S``.
    """
    bus = bus if bus is not None else Bus()
    n = key.n
    received = []
    for rnd, s in enumerate(elements):
        if not 1 <= s <= n - 1:
            raise ValueError(f"payload element {s} outside [1, {n - 1}]")
        chal = ttp_challenge(key, rng)
        got = bus.send(receiver, sender, "PB_CHALLENGE", [("round", rnd), ("f_r", chal.f_r)])
        f_r_seen = got.get("f_r") % n
        resp = user_respond(f_r_seen, s, tag_fn(s, n), key.public)
        m1 = bus.send(sender, receiver, "PB_RESP1", [("round", rnd), ("m1", resp.m1)]).get("m1")
        m2 = bus.send(sender, receiver, "PB_RESP2", [("round", rnd), ("m2", resp.m2)]).get("m2")
        s_rec, k_rec = ttp_recover(Response(m1 % n, m2 % n), chal, key)
        if k_rec != tag_fn(s_rec, n):
            raise TamperDetected(rnd, "recovered K does not match tag(S)")
        received.append(s_rec)
    return received, bus.log
