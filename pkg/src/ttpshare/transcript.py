"""Message logs and the in-memory bus that protocol parties talk over.

Transcript lines have the form::

    MSG <seq> <sender> <receiver> <kind> <key>=<decimal>[ <key>=<decimal>...]

where a value may also be a comma-separated list of decimals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Union

Value = Union[int, tuple[int, ...]]


@dataclass(frozen=True)
class Message:
    seq: int
    sender: str
    receiver: str
    kind: str
    fields: tuple[tuple[str, Value], ...]
    # False for knowledge a party gains locally (e.g. a package recovered from
    # piggy bank rounds); such records are invisible to link observers.
    wire: bool = True

    def get(self, key: str) -> Value:
        for k, v in self.fields:
            if k == key:
                return v
        raise KeyError(key)

    def as_dict(self) -> dict[str, Value]:
        return dict(self.fields)

    def render(self) -> str:
        parts = [f"MSG {self.seq} {self.sender} {self.receiver} {self.kind}"]
        for k, v in self.fields:
            text = ",".join(str(x) for x in v) if isinstance(v, tuple) else str(v)
            parts.append(f"{k}={text}")
        return " ".join(parts)

    @classmethod
    def parse(cls, line: str) -> Message:
        tokens = line.split()
        if len(tokens) < 5 or tokens[0] != "MSG":
            raise ValueError(f"not a MSG line: {line!r}")
        fields = []
        for tok in tokens[5:]:
            key, _, text = tok.partition("=")
            if "," in text:
                fields.append((key, tuple(int(x) for x in text.split(","))))
            else:
                fields.append((key, int(text)))
        return cls(int(tokens[1]), tokens[2], tokens[3], tokens[4], tuple(fields))


@dataclass
class MessageLog:
    messages: list[Message] = field(default_factory=list)

    def __iter__(self) -> Iterator[Message]:
        return iter(self.messages)

    def __len__(self) -> int:
        return len(self.messages)

    def of_kind(self, kind: str) -> list[Message]:
        return [m for m in self.messages if m.kind == kind]

    def render(self) -> str:
        return "".join(m.render() + "\n" for m in self.messages)

    @classmethod
    def parse(cls, text: str) -> MessageLog:
        return cls([Message.parse(line) for line in text.splitlines() if line.startswith("MSG ")])


Observer = Callable[[Message], bool]
Mutator = Callable[[Message], Message]


class Bus:
    """Delivers messages between named parties and records them.

    An optional adversary supplies ``observes`` (which messages it sees) and
    ``mutate`` (how it rewrites wire messages it sits in front of). The
    adversary's view holds messages as sent; the log holds them as delivered.
    """

    def __init__(self, observes: Observer | None = None, mutate: Mutator | None = None):
        self.log = MessageLog()
        self.view: list[Message] = []
        self._observes = observes
        self._mutate = mutate

    def _next_seq(self) -> int:
        return len(self.log) + 1

    def send(self, sender: str, receiver: str, kind: str,
             fields: Iterable[tuple[str, Value]]) -> Message:
        """Put a message on the wire and return it as the receiver gets it."""
        msg = Message(self._next_seq(), sender, receiver, kind, tuple(fields))
        self._observe(msg)
        if self._mutate is not None:
            msg = self._mutate(msg)
        self.log.messages.append(msg)
        return msg

    def note(self, party: str, counterpart: str, kind: str,
             fields: Iterable[tuple[str, Value]]) -> Message:
        """Record off-wire knowledge held by ``party`` (received from ``counterpart``)."""
        msg = Message(self._next_seq(), counterpart, party, kind, tuple(fields), wire=False)
        self._observe(msg)
        self.log.messages.append(msg)
        return msg

    def _observe(self, msg: Message) -> None:
        if self._observes is not None and self._observes(msg):
            self.view.append(msg)
