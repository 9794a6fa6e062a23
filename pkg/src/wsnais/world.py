"""Simulated network state: nodes, credentials, energy and the tick clock.

The world is a plain container advanced one tick at a time by
:func:`step_world`.  Packet delivery is modelled at the event level: a packet
sent to a node lands in its inbox and the node's scripted :class:`Behavior`
decides, a fixed number of ticks later, whether to drop it or forward it.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

ID_BITS = 18
FRAME_BITS = ID_BITS + 1
ID_MAX = 1 << ID_BITS


class Role(str, enum.Enum):
    FRIEND = "friend"
    UNKNOWN = "unknown"
    HOSTILE = "hostile"
    DECOY = "decoy"
    BASE_STATION = "base_station"
    DATABASE = "database"


class PacketKind(str, enum.Enum):
    REAL = "real"
    HONEYPOT = "honeypot"


class BehaviorMode(str, enum.Enum):
    DROP = "drop"
    FORWARD = "forward"


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")

    def distance(self, other: Position) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Credential:
    """19-bit identity frame (18 id bits + even parity) plus a side CRC-8."""

    id_bits: int
    parity_bit: int
    crc8: int

    def frame(self) -> int:
        """The 19-bit parity frame, id bits high and the parity bit last."""
        return (self.id_bits << 1) | self.parity_bit

    @classmethod
    def from_frame(cls, frame: int, crc8: int) -> Credential:
        return cls(id_bits=frame >> 1, parity_bit=frame & 1, crc8=crc8)


@dataclass(frozen=True)
class Packet:
    src: int
    dst: int
    kind: PacketKind = PacketKind.REAL
    honeypot_tag: str | None = None
    size: int = 32

    def __post_init__(self):
        if self.kind is PacketKind.HONEYPOT and self.honeypot_tag is None:
            raise ValueError("honeypot packets must carry a tag")
        if self.kind is PacketKind.REAL and self.honeypot_tag is not None:
            raise ValueError("real packets carry no honeypot tag")
        if self.size <= 0:
            raise ValueError("packet size must be positive")


@dataclass(frozen=True)
class Behavior:
    """What a node does with packets it receives.

    ``delay`` ticks after receipt the packet is either dropped or forwarded
    to ``dst``.
    """

    mode: BehaviorMode = BehaviorMode.DROP
    dst: int | None = None
    delay: int = 1

    def __post_init__(self):
        if self.delay < 1:
            raise ValueError("behavior delay must be at least one tick")
        if self.mode is BehaviorMode.FORWARD and self.dst is None:
            raise ValueError("forwarding behavior needs a destination")


@dataclass
class Node:
    id: int
    role: Role
    position: Position
    energy: float
    credential: Credential
    trajectory: tuple[Position, ...] | None = None
    behavior: Behavior = Behavior()
    shadowed_id: int | None = None

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError(f"node {self.id}: negative energy {self.energy}")
        if self.role is Role.DECOY and self.shadowed_id is None:
            raise ValueError(f"decoy node {self.id} needs a shadowed_id")

    @property
    def mobile(self) -> bool:
        return bool(self.trajectory)


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str
    node_id: int | None = None
    data: dict[str, Any] = field(default_factory=dict, compare=True, hash=False)


@dataclass
class _InFlight:
    packet: Packet
    received: int


@dataclass
class WorldState:
    """Whole-network state, owned by one caller at a time.

    ``registry`` holds the id_bits of every node the network considers its
    own; admission checks credentials against it.
    """

    nodes: dict[int, Node]
    rng_seed: int = 0
    tick: int = 0
    registry: frozenset[int] = frozenset()
    event_log: list[Event] = field(default_factory=list)
    inbox: dict[int, list[_InFlight]] = field(default_factory=dict)
    rng: np.random.Generator = field(init=False, repr=False, compare=False)
    _tag_counter: int = field(default=0, repr=False)

    def __post_init__(self):
        for key, node in self.nodes.items():
            if key != node.id:
                raise ValueError(f"node keyed {key} has id {node.id}")
        self.rng = np.random.default_rng(self.rng_seed)

    def log(self, kind: str, node_id: int | None = None, **data: Any) -> Event:
        event = Event(self.tick, kind, node_id, data)
        self.event_log.append(event)
        return event

    def ids(self, *roles: Role) -> list[int]:
        """Node ids (ascending), optionally restricted to some roles."""
        return sorted(i for i, n in self.nodes.items() if not roles or n.role in roles)

    def next_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def new_tag(self, prefix: str = "hp") -> str:
        self._tag_counter += 1
        return f"{prefix}-{self._tag_counter:06d}"

    def send(self, packet: Packet) -> None:
        """Deliver ``packet`` to its destination's inbox at the current tick."""
        if packet.dst not in self.nodes:
            raise KeyError(f"unknown destination node {packet.dst}")
        self.inbox.setdefault(packet.dst, []).append(_InFlight(packet, self.tick))
        self.log("send", packet.src, dst=packet.dst, packet_kind=packet.kind.value,
                 tag=packet.honeypot_tag)

    def snapshot(self) -> tuple:
        """Hashable summary used for replay comparisons."""
        nodes = tuple(
            (n.id, n.role.value, n.position.as_tuple(), n.energy, n.credential,
             n.shadowed_id)
            for n in (self.nodes[i] for i in sorted(self.nodes))
        )
        return (self.tick, nodes, tuple(self.event_log))


def _parity(value: int) -> int:
    return bin(value).count("1") & 1


def crc8_atm(data: bytes) -> int:
    """CRC-8/ATM: polynomial 0x07, init 0x00, no reflection, no final xor."""
    crc = 0
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = ((crc << 1) ^ 0x07) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
    return crc


def make_credential(id_bits: int) -> Credential:
    if not 0 <= id_bits < ID_MAX:
        raise ValueError(f"id_bits must be in [0, 2**{ID_BITS}), got {id_bits}")
    return Credential(id_bits, _parity(id_bits), crc8_atm(id_bits.to_bytes(3, "big")))


def verify_credential(c: Credential, crc_mode: bool = False) -> bool:
    if not (0 <= c.id_bits < ID_MAX and c.parity_bit in (0, 1)):
        return False
    if c.parity_bit != _parity(c.id_bits):
        return False
    if crc_mode:
        return c.crc8 == crc8_atm(c.id_bits.to_bytes(3, "big"))
    return True


def drain_energy(node: Node, amount: float) -> Node:
    if amount < 0:
        raise ValueError(f"drain amount must be non-negative, got {amount}")
    return dataclasses.replace(node, energy=max(0.0, node.energy - amount))


def position_at(node: Node, tick: int) -> Position:
    """Where a node should be at ``tick``; trajectories hold their last point."""
    if not node.trajectory:
        return node.position
    return node.trajectory[min(tick, len(node.trajectory) - 1)]


def step_world(state: WorldState) -> WorldState:
    """Advance the clock one tick, move mobile nodes and run packet scripts.

    The state is updated in place and returned.
    """
    state.tick += 1
    for nid in sorted(state.nodes):
        node = state.nodes[nid]
        if node.mobile:
            node.position = position_at(node, state.tick)
    for nid in sorted(state.inbox):
        _process_inbox(state, nid)
    state.log("tick")
    return state


def _process_inbox(state: WorldState, nid: int) -> None:
    node = state.nodes.get(nid)
    pending = state.inbox[nid]
    if node is None:
        pending.clear()
        return
    due: list[_InFlight] = []
    keep: list[_InFlight] = []
    for item in pending:
        (due if item.received + node.behavior.delay <= state.tick else keep).append(item)
    if not due:
        return
    state.inbox[nid] = keep
    for item in due:
        pkt = item.packet
        if node.behavior.mode is BehaviorMode.DROP or node.energy <= 0:
            state.log("drop", nid, src=pkt.src, tag=pkt.honeypot_tag)
            continue
        dst = node.behavior.dst
        state.log("forward", nid, dst=dst, tag=pkt.honeypot_tag, packet_kind=pkt.kind.value)
        if dst in state.nodes:
            state.inbox.setdefault(dst, []).append(
                _InFlight(dataclasses.replace(pkt, src=nid, dst=dst), state.tick))


def centroid(positions: Iterable[Position]) -> Position:
    pts = list(positions)
    if not pts:
        return Position(0.5, 0.5)
    return Position(sum(p.x for p in pts) / len(pts), sum(p.y for p in pts) / len(pts))


def nodes_within(state: WorldState, center: Position, radius: float,
                 roles: Sequence[Role] = ()) -> list[int]:
    return [i for i in state.ids(*roles) if state.nodes[i].position.distance(center) <= radius]
