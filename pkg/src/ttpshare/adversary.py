"""Adversary scenarios over the two-TTP distribution protocol.

A scenario runs the full protocol on a :class:`~ttpshare.transcript.Bus`
with one configured adversary, keeps what the adversary saw, and asks an
exhaustive oracle which secrets are still consistent with that view.

The oracle in :func:`brute_force_candidates` deliberately shares no code
with the protocol: it enumerates key values and root tuples and checks the
observed equations forward, so a decryption bug cannot vouch for itself.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .dual_ttp import DEALER, TTP1, TTP2, recipient_name, run_distribution
from .errors import ConfigError, EnumerationTooLarge, TamperDetected, TTPShareError
from .field import PrimeContext, mod_inverse, mod_pow
from .partition import Partition, reconstruct_blocks
from .piggy import PiggyKeypair, keygen
from .rng import SplitMix64
from .transcript import Bus, Message, MessageLog

ENUMERATION_P_LIMIT = 1 << 20
ENUMERATION_WORK_LIMIT = 20_000_000
# adversary randomness is a separate stream so it never shifts protocol draws
ADVERSARY_SEED_SALT = 0x5DEECE66D

PIGGY_FIELDS = ("f_r", "m1", "m2")


class AdversaryKind(enum.Enum):
    NONE = "none"
    COMPROMISED_TTP1 = "compromised_ttp1"
    COMPROMISED_TTP2 = "compromised_ttp2"
    EAVESDROP = "eavesdrop"
    MIM = "mim"


@dataclass(frozen=True)
class AdversaryModel:
    kind: AdversaryKind = AdversaryKind.NONE
    link: tuple[str, str] | None = None
    rule: str | None = None

    def __str__(self) -> str:
        if self.kind in (AdversaryKind.EAVESDROP, AdversaryKind.MIM):
            text = f"{self.kind.value}:{self.link[0].lower()}-{self.link[1].lower()}"
            return text + (f":{self.rule}" if self.rule else "")
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> AdversaryModel:
        """Parse ``none``, ``compromised_ttp1``, ``eavesdrop:<link>`` or ``mim:<link>:<rule>``."""
        parts = text.strip().split(":")
        try:
            kind = AdversaryKind(parts[0])
        except ValueError:
            raise ConfigError(f"unknown adversary {parts[0]!r}") from None
        if kind in (AdversaryKind.EAVESDROP, AdversaryKind.MIM):
            want = 3 if kind is AdversaryKind.MIM else 2
            if len(parts) != want:
                raise ConfigError(f"adversary {text!r} needs {want - 1} ':'-separated arguments")
            ends = parts[1].upper().split("-")
            if len(ends) != 2:
                raise ConfigError(f"bad link {parts[1]!r}")
            rule = parts[2] if kind is AdversaryKind.MIM else None
            if rule is not None:
                _parse_rule(rule)
            return cls(kind, (ends[0], ends[1]), rule)
        if len(parts) != 1:
            raise ConfigError(f"adversary {parts[0]!r} takes no arguments")
        return cls(kind)

    def check_topology(self, n: int) -> None:
        if self.link is None:
            return
        allowed = {frozenset((DEALER, TTP1)), frozenset((DEALER, TTP2))}
        for i in range(1, n + 1):
            allowed |= {frozenset((TTP1, recipient_name(i))), frozenset((TTP2, recipient_name(i)))}
        if frozenset(self.link) not in allowed:
            raise ConfigError(f"link {self.link} is not part of the protocol topology")

    def observes(self, msg: Message) -> bool:
        if self.kind is AdversaryKind.COMPROMISED_TTP1:
            return TTP1 in (msg.sender, msg.receiver)
        if self.kind is AdversaryKind.COMPROMISED_TTP2:
            return TTP2 in (msg.sender, msg.receiver)
        if self.link is not None:
            return msg.wire and {msg.sender, msg.receiver} == set(self.link)
        return False


def _parse_rule(rule: str) -> tuple[str, str, int]:
    """``<field>+<delta>`` or ``<field>=random``."""
    if rule.endswith("=random"):
        return rule[:-len("=random")], "random", 0
    name, sep, delta = rule.partition("+")
    if not sep or not delta.lstrip("-").isdigit() or int(delta) == 0:
        raise ConfigError(f"bad mutation rule {rule!r}")
    return name, "add", int(delta)


class Mutator:
    """Rewrites one field of every matching message on a link."""

    def __init__(self, model: AdversaryModel, p: int, pb_n: int, rng: SplitMix64):
        self.model = model
        self.field, self.op, self.delta = _parse_rule(model.rule)
        self.modulus = pb_n if self.field in PIGGY_FIELDS else p
        self.rng = rng
        self.count = 0

    def __call__(self, msg: Message) -> Message:
        if not self.model.observes(msg) or self.field not in msg.as_dict():
            return msg
        fields = []
        for key, value in msg.fields:
            if key == self.field:
                if isinstance(value, tuple):
                    value = (self._mutate(value[0]),) + value[1:]
                else:
                    value = self._mutate(value)
            fields.append((key, value))
        self.count += 1
        return replace(msg, fields=tuple(fields))

    def _mutate(self, v: int) -> int:
        m = self.modulus
        if self.op == "add":
            return (v + self.delta) % m
        w = self.rng.randint(0, m - 2)
        return w + 1 if w >= v % m else w


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    p: int = 19
    k: int = 2
    n: int = 3
    secret: tuple[int, ...] = (12,)
    seed: int = 42
    adversary: AdversaryModel = AdversaryModel()
    transport: str = "direct"
    pb_n: int = 85
    pb_e: int = 5
    pb_key: PiggyKeypair | None = field(default=None, compare=False)

    def keypair(self) -> PiggyKeypair:
        if self.pb_key is not None:
            return self.pb_key
        p_f, q_f = factor_semiprime(self.pb_n)
        return keygen(p_f, q_f, self.pb_e)

    def render(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in [
            ("p", self.p), ("k", self.k), ("n", self.n),
            ("secret", ",".join(map(str, self.secret))), ("seed", self.seed),
            ("adversary", self.adversary), ("transport", self.transport),
            ("pb_n", self.pb_n), ("pb_e", self.pb_e),
        ])


_INT_KEYS = ("p", "k", "n", "seed", "pb_n", "pb_e")


def parse_config(text: str) -> ScenarioConfig:
    """Parse a line-oriented ``key=value`` scenario file; ``#`` starts a comment."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key == "secret":
                values[key] = tuple(int(v) for v in value.split(","))
            elif key == "adversary":
                values[key] = AdversaryModel.parse(value)
            elif key == "transport":
                if value not in ("direct", "piggy"):
                    raise ConfigError(f"unknown transport {value!r}")
                values[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return ScenarioConfig(**values)


def factor_semiprime(n: int) -> tuple[int, int]:
    """Trial-division factoring for desk-scale moduli."""
    if n >= 1 << 40:
        raise ConfigError("pb_n too large to factor here; supply the keypair directly")
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f, n // f
        f += 1
    raise ConfigError(f"pb_n={n} is prime")


# -- brute-force oracle -----------------------------------------------------

_PKG1_KINDS = ("SHARE_PKG1", "DELIVER1")
_PKG2_KINDS = ("SHARE_PKG2", "DELIVER2")


def partition_view(partitions: Iterable[Partition], holder: str = "EVE") -> list[Message]:
    """Present leaked partitions as view messages for the oracle."""
    return [
        Message(0, recipient_name(part.index), holder, "PARTITION",
                (("i", part.index), ("x", part.x), ("c", part.c)), wire=False)
        for part in partitions
    ]


def _pick(value, block: int) -> int:
    return value[block] if isinstance(value, tuple) else value


def _observations(view: Sequence[Message], block: int) -> dict[int, dict[str, int]]:
    obs: dict[int, dict[str, int]] = {}
    for msg in view:
        f = msg.as_dict()
        if msg.kind in _PKG1_KINDS:
            keys = {"x": "x", "enc": "enc", "wrap": "wrap"}
        elif msg.kind in _PKG2_KINDS:
            keys = {"enckey": "enckey"}
        elif msg.kind == "PARTITION":
            keys = {"x": "x", "c": "c"}
        else:
            # piggy bank traffic is computationally sealed; carries no usable equation here
            continue
        rec = obs.setdefault(f["i"], {})
        for src, dst in keys.items():
            rec[dst] = f[src] if src == "x" else _pick(f[src], block)
    return obs


def _allowed_shares(o: dict[str, int], p: int) -> set[int] | None:
    """Share values some key assignment reconciles with the observations."""
    if "c" in o:
        return {o["c"]}
    if not {"enc", "wrap", "enckey"} & o.keys():
        return None
    allowed = set()
    k2_range = [o["wrap"]] if "wrap" in o else range(p)
    for k2 in k2_range:
        for k1 in range(p):
            if "enckey" in o and (k1 + k2) % p != o["enckey"]:
                continue
            for c in range(p):
                if "enc" in o and (c + k1) % p != o["enc"]:
                    continue
                allowed.add(c)
    return allowed


def brute_force_candidates(view: Sequence[Message], config: ScenarioConfig, block: int = 0) -> set[int]:
    """Every secret block value consistent with ``view``.

    Enumerates all share-key and wrap-key values for each observed recipient,
    then every nonzero root tuple, keeping products whose share values survive.

    Raises:
        EnumerationTooLarge: for p above 2**20 or an infeasible search.
    """
    p, k = config.p, config.k
    if p > ENUMERATION_P_LIMIT:
        raise EnumerationTooLarge(f"p={p} exceeds the enumeration guard")
    obs = _observations(view, block)
    work = (p - 1) ** k + len(obs) * p ** 3
    if work > ENUMERATION_WORK_LIMIT:
        raise EnumerationTooLarge(f"about {work} steps needed")
    constraints = []
    for i, o in sorted(obs.items()):
        allowed = _allowed_shares(o, p)
        if allowed is not None:
            constraints.append((o.get("x", i), allowed))
    out = set()
    for roots in itertools.product(range(1, p), repeat=k):
        ok = True
        for x, allowed in constraints:
            c, xp = 0, 1
            for r in roots:
                c += r * xp
                xp = xp * x % p
            if c % p not in allowed:
                ok = False
                break
        if ok:
            d = 1
            for r in roots:
                d = d * r % p
            out.add(d)
    return out


def factor_attack(view: Sequence[Message], p_factor: int, q_factor: int, e: int) -> list[int]:
    """Open every observed ``m2`` given the factors of the piggy bank modulus."""
    n = p_factor * q_factor
    d = mod_inverse(e, (p_factor - 1) * (q_factor - 1))
    return [mod_pow(m.get("m2"), d, n) for m in view if m.kind == "PB_RESP2"]


# -- scenarios ----------------------------------------------------------------

@dataclass
class ScenarioReport:
    config: ScenarioConfig
    delivered: tuple[bool, ...]
    reconstructed_secret: tuple[int, ...] | None
    adversary_view: list[Message]
    candidate_sets: list[set[int]]
    tamper_detected: bool
    transcript: MessageLog
    error: str | None = None

    @property
    def candidate_secrets(self) -> set[int]:
        """Candidates for the first block."""
        return self.candidate_sets[0]

    @property
    def candidate_count(self) -> int:
        total = 1
        for s in self.candidate_sets:
            total *= len(s)
        return total

    @property
    def contains_true(self) -> bool:
        return all(d in s for d, s in zip(self.config.secret, self.candidate_sets))

    def render(self) -> str:
        rec = ",".join(map(str, self.reconstructed_secret)) if self.reconstructed_secret else "none"
        lines = [
            "REPORT",
            f"adversary={self.config.adversary}",
            "delivered=" + ",".join(str(int(b)) for b in self.delivered),
            f"reconstructed={rec}",
            f"candidates={self.candidate_count}",
            f"contains_true={int(self.contains_true)}",
            f"tamper={int(self.tamper_detected)}",
        ]
        if self.error:
            lines.append(f"error={self.error}")
        return self.transcript.render() + "\n".join(lines) + "\n"


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    ctx = PrimeContext(config.p)
    adversary = config.adversary
    adversary.check_topology(config.n)
    rng = SplitMix64(config.seed)
    mutate = None
    if adversary.kind is AdversaryKind.MIM:
        mutate = Mutator(adversary, config.p, config.pb_n if config.pb_key is None else config.pb_key.n,
                         SplitMix64(config.seed ^ ADVERSARY_SEED_SALT))
    bus = Bus(adversary.observes, mutate)
    key = config.keypair() if config.transport == "piggy" else None

    received: dict[int, Partition] = {}
    tamper, error = False, None
    try:
        received, _ = run_distribution(config.secret, config.k, config.n, ctx, rng,
                                       config.transport, bus=bus, ttp1_key=key)
    except TamperDetected as exc:
        tamper, error = True, str(exc)
    except TTPShareError as exc:
        error = f"{type(exc).__name__}: {exc}"

    delivered = tuple(i in received for i in range(1, config.n + 1))
    reconstructed = None
    holders = [received[i] for i in sorted(received)][:config.k]
    if len(holders) == config.k:
        try:
            reconstructed = reconstruct_blocks(holders, config.k, ctx)
        except TTPShareError as exc:
            error = error or f"{type(exc).__name__}: {exc}"
    candidates = [brute_force_candidates(bus.view, config, b) for b in range(len(config.secret))]
    return ScenarioReport(config, delivered, reconstructed, list(bus.view), candidates,
                          tamper, bus.log, error)


BUILTIN_SCENARIOS = ("honest", "compromised_ttp1", "compromised_ttp2", "mim_piggy", "device_access")


def builtin_config(name: str, seed: int) -> ScenarioConfig:
    """Builtins pin p=19, (2,3), secret 12 and piggy modulus 85."""
    base = ScenarioConfig(seed=seed)
    if name in ("honest", "device_access"):
        return base
    if name == "compromised_ttp1":
        return replace(base, adversary=AdversaryModel(AdversaryKind.COMPROMISED_TTP1))
    if name == "compromised_ttp2":
        return replace(base, adversary=AdversaryModel(AdversaryKind.COMPROMISED_TTP2))
    if name == "mim_piggy":
        return replace(base, transport="piggy",
                       adversary=AdversaryModel(AdversaryKind.MIM, (DEALER, TTP1), "m1+1"))
    raise ConfigError(f"unknown scenario {name!r}")


# -- device access application -------------------------------------------------

class Role(enum.Enum):
    LAW_ENFORCEMENT = "law_enforcement"
    JUDICIARY = "judiciary"
    VENDOR = "vendor"


@dataclass(frozen=True)
class CustodyRole:
    name: Role
    holds: Partition | None = None


@dataclass(frozen=True)
class Refusal:
    have: int
    need: int
    total: int
    missing: tuple[Role, ...] = ()

    def __str__(self) -> str:
        names = ", ".join(r.value for r in self.missing)
        text = f"access refused: need {self.need} of {self.total} shares, have {self.have}"
        return text + (f" (absent: {names})" if names else "")


def setup_custody(secret: Sequence[int], ctx: PrimeContext, seed: int,
                  transport: str = "direct", key: PiggyKeypair | None = None,
                  ) -> tuple[list[CustodyRole], MessageLog]:
    """Distribute a (2,3) split to the three authorities through both TTPs."""
    received, log = run_distribution(secret, 2, len(Role), ctx, SplitMix64(seed),
                                     transport, ttp1_key=key)
    return [CustodyRole(role, received[i]) for i, role in enumerate(Role, 1)], log


def device_access(holders: Sequence[CustodyRole], ctx: PrimeContext,
                  k: int = 2) -> tuple[int, ...] | Refusal:
    """Reconstruct the device secret if at least ``k`` authorities pool shares."""
    present = [h for h in holders if h.holds is not None]
    if len(present) < k:
        have = {h.name for h in present}
        return Refusal(len(present), k, len(Role), tuple(r for r in Role if r not in have))
    return reconstruct_blocks([h.holds for h in present[:k]], k, ctx)
