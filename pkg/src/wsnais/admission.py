"""Newcomer admission: credential check, then a honeypot probe.

A newcomer that passes the identity check is sent uniquely tagged fake
packets.  If, within the observation window, it forwards any of them to a
node outside the approved database set it is hostile; otherwise it is
admitted as a friend.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .world import Node, Packet, PacketKind, Role, WorldState, step_world, verify_credential


class Verdict(str, enum.Enum):
    REJECTED = "Rejected"
    FRIEND = "Friend"
    HOSTILE = "Hostile"


@dataclass(frozen=True)
class ProbePolicy:
    probe_packet_count: int = 3
    observation_window: int = 10
    database_node_ids: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.probe_packet_count < 1:
            raise ValueError("probe_packet_count must be positive")
        if self.observation_window < 1:
            raise ValueError("observation_window must be at least one tick")


@dataclass
class AdmissionVerdict:
    node_id: int
    verdict: Verdict
    evidence: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict is Verdict.HOSTILE and not any("exfiltrat" in o for _, o in self.evidence):
            raise ValueError("a hostile verdict needs an exfiltration observation")
        if self.verdict is Verdict.REJECTED and not any(
                o == "credential-failure" for _, o in self.evidence):
            raise ValueError("a rejection needs a credential failure")


def scan_candidates(state: WorldState, radius: float) -> list[int]:
    """Unknown nodes within ``radius`` of any friend or base station."""
    if radius <= 0:
        raise ValueError("scan radius must be positive")
    anchors = [state.nodes[i].position for i in state.ids(Role.FRIEND, Role.BASE_STATION)]
    return [i for i in state.ids(Role.UNKNOWN)
            if any(state.nodes[i].position.distance(a) <= radius for a in anchors)]


def check_identity(node: Node, crc_mode: bool, registry: frozenset[int] | set[int]) -> bool:
    return verify_credential(node.credential, crc_mode) and node.credential.id_bits in registry


class Probe:
    """A running honeypot probe of one node.

    Call :meth:`observe` after the world advances; the probe reads only log
    entries it has not seen before.  Once ``closes_at`` is reached the
    verdict is final.
    """

    def __init__(self, state: WorldState, target: int, policy: ProbePolicy,
                 sender: int | None = None):
        if target not in state.nodes:
            raise KeyError(f"unknown target node {target}")
        self.target = target
        self.policy = policy
        self.started = state.tick
        self.closes_at = state.tick + policy.observation_window
        self.tags: set[str] = set()
        self.evidence: list[tuple[int, str]] = []
        self.exfiltrated = False
        src = sender if sender is not None else _default_sender(state, target)
        self._cursor = len(state.event_log)
        for _ in range(policy.probe_packet_count):
            tag = state.new_tag()
            self.tags.add(tag)
            state.send(Packet(src, target, PacketKind.HONEYPOT, tag))
        state.log("honeypot", target, count=policy.probe_packet_count, src=src)

    def observe(self, state: WorldState) -> None:
        log = state.event_log
        for event in log[self._cursor:]:
            if event.tick > self.closes_at:
                break
            if event.kind != "forward" or event.node_id != self.target:
                continue
            if event.data.get("tag") not in self.tags:
                continue
            dst = event.data.get("dst")
            if dst in self.policy.database_node_ids:
                self.evidence.append((event.tick, f"forward-to-database:{dst}"))
            else:
                self.exfiltrated = True
                self.evidence.append((event.tick, f"exfiltration:{dst}"))
        self._cursor = len(log)

    def done(self, state: WorldState) -> bool:
        return state.tick >= self.closes_at

    @property
    def verdict(self) -> Verdict:
        return Verdict.HOSTILE if self.exfiltrated else Verdict.FRIEND


def _default_sender(state: WorldState, target: int) -> int:
    anchors = state.ids(Role.BASE_STATION) or state.ids(Role.FRIEND)
    if not anchors:
        return target
    pos = state.nodes[target].position
    return min(anchors, key=lambda i: (state.nodes[i].position.distance(pos), i))


def run_probe(state: WorldState, target: int, policy: ProbePolicy) -> Probe:
    probe = Probe(state, target, policy)
    while not probe.done(state):
        step_world(state)
        probe.observe(state)
    return probe


def probe_with_honeypot(state: WorldState, target: int, policy: ProbePolicy) -> Verdict:
    return run_probe(state, target, policy).verdict


def filter_node(state: WorldState, target: int, policy: ProbePolicy,
                crc_mode: bool = False) -> AdmissionVerdict:
    node = state.nodes[target]
    if not check_identity(node, crc_mode, state.registry):
        state.log("verdict", target, verdict=Verdict.REJECTED.value)
        return AdmissionVerdict(target, Verdict.REJECTED, [(state.tick, "credential-failure")])
    probe = run_probe(state, target, policy)
    state.log("verdict", target, verdict=probe.verdict.value)
    return AdmissionVerdict(target, probe.verdict, probe.evidence)
