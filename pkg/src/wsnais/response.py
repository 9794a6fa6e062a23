"""Confronting a hostile node: recall a team, drain its energy, optionally shadow it.

The friend whose detector binds the hostile's behaviour signature most
strongly heads the team; every friend within the recall radius joins, and
each member floods the target with fake packets until its energy is gone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .ais import AffinityConfig, Bitstring, Detector, affinity
from .world import Node, Role, WorldState, drain_energy, step_world


class Mode(str, enum.Enum):
    SENSING = "Sensing"
    RECOGNITION = "Recognition"
    RESPONSE = "Response"


class ModeEvent(str, enum.Enum):
    ANOMALY_DETECTED = "AnomalyDetected"
    PLAN_DECIDED = "PlanDecided"
    TARGET_NEUTRALIZED = "TargetNeutralized"
    TIMEOUT = "Timeout"


class AgentRole(str, enum.Enum):
    SUPERVISOR = "Supervisor"
    CONNECTOR = "Connector"
    DECIDER = "Decider"
    HELPER = "Helper"
    DESTROYER = "Destroyer"
    PROTECTIVE = "Protective"


class NoDetectorError(RuntimeError):
    """No friendly detector is available to lead a confrontation."""


class NotNeutralizedError(RuntimeError):
    pass


_TRANSITIONS = {
    (Mode.SENSING, ModeEvent.ANOMALY_DETECTED): Mode.RECOGNITION,
    (Mode.RECOGNITION, ModeEvent.PLAN_DECIDED): Mode.RESPONSE,
    (Mode.RESPONSE, ModeEvent.TARGET_NEUTRALIZED): Mode.SENSING,
    (Mode.RECOGNITION, ModeEvent.TIMEOUT): Mode.SENSING,
}


def transition_mode(mode: Mode, event: ModeEvent) -> Mode:
    return _TRANSITIONS.get((mode, event), mode)


@dataclass(frozen=True)
class DrainConfig:
    drain_per_packet: float = 2.0
    packets_per_member_per_tick: int = 1
    recall_radius: float = 0.2
    neutralized_floor: float = 0.0
    sender_cost: float = 0.0

    def __post_init__(self):
        if self.drain_per_packet <= 0:
            raise ValueError("drain_per_packet must be positive")
        if self.packets_per_member_per_tick < 1:
            raise ValueError("packets_per_member_per_tick must be positive")
        if self.recall_radius <= 0:
            raise ValueError("recall_radius must be positive")
        if self.neutralized_floor < 0 or self.sender_cost < 0:
            raise ValueError("neutralized_floor and sender_cost must be non-negative")


@dataclass
class Team:
    head: int
    members: frozenset[int]
    target: int
    formed_at: int
    affinities: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.head not in self.members:
            raise ValueError("team head must be a member")
        if self.target in self.members:
            raise ValueError("target cannot be a team member")

    def ranked(self) -> list[int]:
        """Members by descending affinity, lowest id first on ties."""
        return sorted(self.members, key=lambda i: (-self.affinities.get(i, 0.0), i))


@dataclass
class NeutralizationReport:
    target: int
    head: int
    members: tuple[int, ...]
    initial_energy: float
    ticks_to_neutralize: int
    packets_sent: int
    energy_drained: float
    started: int
    finished: int
    energy_history: list[float] = field(default_factory=list)


_ROLE_ORDER = list(Role)


def behavior_signature(state: WorldState, node_id: int, length: int,
                       since: int | None = None) -> Bitstring:
    """Bit vector of destination classes the node forwarded packets to.

    The first six bits flag destination roles; the remaining bits bucket
    destination ids modulo ``length - 6``.  Unused bits stay zero.
    """
    value = 0
    buckets = length - len(_ROLE_ORDER)
    for event in state.event_log:
        if event.kind != "forward" or event.node_id != node_id:
            continue
        if since is not None and event.tick < since:
            continue
        dst = event.data.get("dst")
        bits = []
        if dst in state.nodes:
            bits.append(_ROLE_ORDER.index(state.nodes[dst].role) % length)
        if buckets > 0 and isinstance(dst, int):
            bits.append(len(_ROLE_ORDER) + dst % buckets)
        for b in bits:
            value |= 1 << (length - 1 - b)
    return Bitstring(value, length)


def local_scan(state: WorldState, target: int, detectors: Mapping[int, Detector],
               affinity_config: AffinityConfig,
               signature: Bitstring | None = None) -> list[tuple[int, float]]:
    """Rank friends by their detector's affinity to the target's signature."""
    if target not in state.nodes:
        raise KeyError(f"unknown target node {target}")
    if signature is None:
        signature = behavior_signature(state, target, affinity_config.length)
    scores = [(i, affinity(detectors[i].pattern, signature, affinity_config))
              for i in state.ids(Role.FRIEND) if i in detectors]
    return sorted(scores, key=lambda p: (-p[1], p[0]))


def form_team(ranking: Sequence[tuple[int, float]], state: WorldState, recall_radius: float,
              target: int) -> Team:
    if not ranking:
        raise NoDetectorError(f"no detector available against node {target}")
    head = ranking[0][0]
    where = state.nodes[target].position
    members = {head}
    for i in state.ids(Role.FRIEND):
        if i != target and state.nodes[i].position.distance(where) <= recall_radius:
            members.add(i)
    for i in sorted(members - {head}):
        state.log("recall", i, head=head, target=target)
    scores = dict(ranking)
    return Team(head, frozenset(members), target, state.tick,
                {i: scores.get(i, 0.0) for i in members})


def drain_attack_tick(state: WorldState, team: Team, config: DrainConfig) -> WorldState:
    target = state.nodes[team.target]
    if target.energy <= config.neutralized_floor:
        raise ValueError(f"node {team.target} is already neutralized")
    amount = len(team.members) * config.packets_per_member_per_tick * config.drain_per_packet
    return _drain_to(state, team, config, drain_energy(target, amount).energy)


def _drain_to(state: WorldState, team: Team, config: DrainConfig, energy: float) -> WorldState:
    """One flood tick: members pay their sending cost, the target ends at ``energy``."""
    rate = config.packets_per_member_per_tick
    if config.sender_cost:
        for i in sorted(team.members):
            state.nodes[i] = drain_energy(state.nodes[i], rate * config.sender_cost)
    state.nodes[team.target] = replace(state.nodes[team.target], energy=max(0.0, energy))
    state.log("drain", team.target, packets=len(team.members) * rate,
              energy=state.nodes[team.target].energy)
    return state


def closed_form_ticks(initial_energy: float, members: int, rate: int, drain: float,
                      floor: float = 0.0) -> int:
    """ceil((E0 - floor) / (k r c)), evaluated exactly on the given floats."""
    if initial_energy <= floor:
        return 0
    excess = Fraction(initial_energy) - Fraction(floor)
    return math.ceil(excess / (members * rate * Fraction(drain)))


def run_confrontation(state: WorldState, target: int, detectors: Mapping[int, Detector],
                      affinity_config: AffinityConfig, drain_config: DrainConfig,
                      signature: Bitstring | None = None,
                      advance_world: bool = True) -> tuple[WorldState, NeutralizationReport]:
    """Drain ``target`` until neutralized; each drain tick advances the world.

    The energy after t ticks is ``E0 - t * k * r * c`` evaluated in exact
    rational arithmetic, so the tick count equals :func:`closed_form_ticks`
    with no rounding drift.
    """
    ranking = local_scan(state, target, detectors, affinity_config, signature)
    team = form_team(ranking, state, drain_config.recall_radius, target)
    e0 = state.nodes[target].energy
    started = state.tick
    ticks = packets = 0
    history = [e0]
    per_tick = len(team.members) * drain_config.packets_per_member_per_tick
    amount = per_tick * Fraction(drain_config.drain_per_packet)
    floor = Fraction(drain_config.neutralized_floor)
    remaining = Fraction(e0)
    while remaining > floor:
        ticks += 1
        remaining = Fraction(e0) - ticks * amount
        _drain_to(state, team, drain_config, float(remaining))
        packets += per_tick
        history.append(state.nodes[target].energy)
        if advance_world:
            step_world(state)
    state.log("neutralized", target, ticks=ticks, energy=state.nodes[target].energy)
    report = NeutralizationReport(target, team.head, tuple(sorted(team.members)), e0, ticks,
                                  packets, e0 - state.nodes[target].energy, started, state.tick,
                                  history)
    return state, report


def counter_attack(state: WorldState, neutralized: int, enabled: bool = True,
                   floor: float = 0.0) -> WorldState:
    """Spawn a decoy that takes over the neutralized node's identity."""
    if not enabled:
        return state
    victim = state.nodes[neutralized]
    if victim.energy > floor:
        raise NotNeutralizedError(f"node {neutralized} still has energy {victim.energy}")
    decoy = Node(state.next_id(), Role.DECOY, victim.position, 100.0, victim.credential,
                 shadowed_id=neutralized)
    state.nodes[decoy.id] = decoy
    state.log("decoy", decoy.id, shadowed_id=neutralized)
    return state


def assign_roles(team: Team, state: WorldState,
                 adjacency_radius: float = 0.1) -> dict[int, AgentRole]:
    """Head supervises, the runner-up decides, the rest act.

    Members within ``adjacency_radius`` of a database node protect it.  When
    two or more non-protective members remain, the one nearest a base
    station becomes the connector; the others alternate destroyer/helper
    down the ranking.
    """
    ranked = team.ranked()
    ranked.remove(team.head)
    roles = {team.head: AgentRole.SUPERVISOR}
    if ranked:
        roles[ranked.pop(0)] = AgentRole.DECIDER
    databases = [state.nodes[i].position for i in state.ids(Role.DATABASE)]
    rest = []
    for i in ranked:
        pos = state.nodes[i].position
        if any(pos.distance(db) <= adjacency_radius for db in databases):
            roles[i] = AgentRole.PROTECTIVE
        else:
            rest.append(i)
    bases = [state.nodes[i].position for i in state.ids(Role.BASE_STATION)]
    if bases and len(rest) >= 2:
        def to_base(i: int) -> tuple[float, int]:
            return (min(state.nodes[i].position.distance(b) for b in bases), i)
        connector = min(rest, key=to_base)
        roles[connector] = AgentRole.CONNECTOR
        rest.remove(connector)
    for n, i in enumerate(rest):
        roles[i] = AgentRole.DESTROYER if n % 2 == 0 else AgentRole.HELPER
    return roles
