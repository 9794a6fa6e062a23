"""Scenario files: TOML documents validated against ``scenario.schema.json``.

Loading reports every violation at once, each prefixed with the path of the
offending field (``nodes[3].behavior.dst``).  Parameter blocks are checked
against the same invariants the library types enforce.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .admission import ProbePolicy
from .ais import AffinityConfig, ClonalParams, Scheme
from .response import DrainConfig
from .tracking import TrackingConfig
from .world import (Behavior, BehaviorMode, Credential, Node, Position, Role, WorldState,
                    make_credential, verify_credential)


class ScenarioError(ValueError):
    """Validation failure; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid scenario:\n  " + "\n  ".join(violations))


class ScenarioParseError(ValueError):
    pass


@dataclass(frozen=True)
class TrackingBlock:
    config: TrackingConfig = TrackingConfig()
    step_sigma: float = 0.03
    sensing_radius: float = 0.3
    motion_window: int = 5
    motion_tolerance: float = 0.0


@dataclass(frozen=True)
class AdmissionBlock:
    scan_radius: float = 0.15
    probe_packet_count: int = 3
    observation_window: int = 10
    crc_mode: bool = False
    reprobe_interval: int = 50


@dataclass(frozen=True)
class AisBlock:
    affinity: AffinityConfig = AffinityConfig()
    detector_count: int = 64
    max_attempts: int = 10_000
    maturation_generations: int = 30


@dataclass(frozen=True)
class ResponseBlock:
    drain: DrainConfig = DrainConfig()
    adjacency_radius: float = 0.1
    counter_attack: bool = False


@dataclass
class ScenarioConfig:
    seed: int
    nodes: list[Node]
    registry: frozenset[int]
    max_ticks: int = 100
    area: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    tracking: TrackingBlock = TrackingBlock()
    admission: AdmissionBlock = AdmissionBlock()
    ais: AisBlock = AisBlock()
    response: ResponseBlock = ResponseBlock()
    optimizer: ClonalParams = ClonalParams()
    source: dict[str, Any] = field(default_factory=dict, repr=False)

    def database_ids(self) -> frozenset[int]:
        return frozenset(n.id for n in self.nodes if n.role is Role.DATABASE)

    def probe_policy(self) -> ProbePolicy:
        return ProbePolicy(self.admission.probe_packet_count, self.admission.observation_window,
                           self.database_ids())

    def build_world(self) -> WorldState:
        nodes = {}
        for n in self.nodes:
            nodes[n.id] = Node(n.id, n.role, n.position, n.energy, n.credential, n.trajectory,
                               n.behavior, n.shadowed_id)
        return WorldState(nodes, rng_seed=self.seed, registry=self.registry)

    def newcomers(self) -> list[int]:
        return sorted(n.id for n in self.nodes if n.role is Role.UNKNOWN)

    def is_nonself(self, node_id: int) -> bool:
        """Ground truth: bad credential, unregistered, or scripted to exfiltrate."""
        node = next(n for n in self.nodes if n.id == node_id)
        if not verify_credential(node.credential, self.admission.crc_mode):
            return True
        if node.credential.id_bits not in self.registry:
            return True
        b = node.behavior
        return b.mode is BehaviorMode.FORWARD and b.dst not in self.database_ids()


def schema() -> dict:
    text = resources.files("wsnais").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _block(cls, raw: dict, path: str, errors: list[str], **extra):
    try:
        return cls(**raw, **extra)
    except (TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


def parse_scenario(doc: dict[str, Any]) -> ScenarioConfig:
    validator = jsonschema.Draft202012Validator(schema())
    errors = [f"{_path(e.absolute_path)}: {e.message}"
              for e in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.path)))]
    if errors:
        raise ScenarioError(errors)

    area_raw = {"x_min": 0.0, "x_max": 1.0, "y_min": 0.0, "y_max": 1.0, **doc.get("area", {})}
    area = (area_raw["x_min"], area_raw["x_max"], area_raw["y_min"], area_raw["y_max"])
    if area[0] >= area[1] or area[2] >= area[3]:
        errors.append("area: empty bounds")

    def inside(p, where):
        if not (area[0] <= p[0] <= area[1] and area[2] <= p[1] <= area[3]):
            errors.append(f"{where}: point {tuple(p)} outside the area bounds")

    ids = [n["id"] for n in doc["nodes"]]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        errors.append(f"nodes: duplicate ids {dup}")
    known = set(ids)
    nodes = []
    for k, raw in enumerate(doc["nodes"]):
        where = f"nodes[{k}]"
        inside(raw["position"], f"{where}.position")
        for t, p in enumerate(raw.get("trajectory", [])):
            inside(p, f"{where}.trajectory[{t}]")
        beh = raw.get("behavior", {"mode": "drop"})
        if beh["mode"] == "forward":
            if "dst" not in beh:
                errors.append(f"{where}.behavior.dst: required when mode is forward")
                continue
            if beh["dst"] not in known:
                errors.append(f"{where}.behavior.dst: references undefined node id {beh['dst']}")
                continue
        id_bits = raw.get("id_bits", raw["id"])
        if id_bits >= 1 << 18:
            errors.append(f"{where}.id_bits: does not fit in 18 bits")
            continue
        cred = make_credential(id_bits)
        if raw.get("credential") == "bad_parity":
            cred = Credential(cred.id_bits, cred.parity_bit ^ 1, cred.crc8)
        elif raw.get("credential") == "bad_crc":
            cred = Credential(cred.id_bits, cred.parity_bit, cred.crc8 ^ 0xFF)
        traj = tuple(Position(*p) for p in raw.get("trajectory", [])) or None
        nodes.append(Node(raw["id"], Role(raw["role"]), Position(*raw["position"]),
                          float(raw.get("energy", 100.0)), cred, traj,
                          Behavior(BehaviorMode(beh["mode"]), beh.get("dst"),
                                   beh.get("delay", 1))))

    tr = dict(doc.get("tracking", {}))
    extras = {key: tr.pop(key) for key in ("step_sigma", "sensing_radius", "motion_window",
                                            "motion_tolerance") if key in tr}
    tconf = _block(TrackingConfig, tr, "tracking", errors)
    tracking = TrackingBlock(tconf, **extras) if tconf else None

    admission = _block(AdmissionBlock, doc.get("admission", {}), "admission", errors)
    if admission:
        _block(ProbePolicy, {"probe_packet_count": admission.probe_packet_count,
                             "observation_window": admission.observation_window},
               "admission", errors)

    ai = dict(doc.get("ais", {}))
    ais_extras = {key: ai.pop(key) for key in ("detector_count", "max_attempts",
                                               "maturation_generations") if key in ai}
    if "scheme" in ai:
        ai["scheme"] = Scheme(ai["scheme"])
    aconf = _block(AffinityConfig, ai, "ais", errors)
    ais = AisBlock(aconf, **ais_extras) if aconf else None

    rs = dict(doc.get("response", {}))
    rs_extras = {key: rs.pop(key) for key in ("adjacency_radius", "counter_attack") if key in rs}
    dconf = _block(DrainConfig, rs, "response", errors)
    response = ResponseBlock(dconf, **rs_extras) if dconf else None

    optimizer = _block(ClonalParams, doc.get("optimizer", {}), "optimizer", errors)

    if errors:
        raise ScenarioError(errors)
    registry = frozenset(doc.get("registry", {}).get("ids", []))
    return ScenarioConfig(doc["seed"], nodes, registry, doc.get("max_ticks", 100), area,
                          tracking, admission, ais, response, optimizer, source=doc)


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return parse_scenario(doc)


def dump_scenario(doc: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(tomli_w.dumps(doc), encoding="utf-8")


def benchmark_document(seed: int = 7, n_nodes: int = 200, hostiles: int = 20,
                       compliant: int = 30, max_ticks: int = 60) -> dict[str, Any]:
    """A seeded network with scripted hostile and compliant newcomers.

    Node 0 is the base station, 1-3 are database nodes and 4 is the enemy
    sink hostile newcomers exfiltrate to.  Newcomers drift inwards from the
    area edge; hostiles forward honeypot packets to the enemy sink within the
    observation window, compliant newcomers drop them or hand them to a
    database node.
    """
    rng = np.random.default_rng(seed)
    window = 10
    n_friends = n_nodes - 5 - hostiles - compliant
    if n_friends < 1:
        raise ValueError("not enough nodes for the requested newcomers")
    nodes: list[dict[str, Any]] = [
        {"id": 0, "role": "base_station", "position": [0.5, 0.5]},
        {"id": 1, "role": "database", "position": [0.3, 0.3]},
        {"id": 2, "role": "database", "position": [0.7, 0.3]},
        {"id": 3, "role": "database", "position": [0.5, 0.75]},
        {"id": 4, "role": "hostile", "position": [1.0, 1.0], "id_bits": 0x3FFFF},
    ]
    next_id = 5
    for _ in range(n_friends):
        x, y = rng.uniform(0.05, 0.95, 2)
        nodes.append({"id": next_id, "role": "friend", "position": [round(x, 4), round(y, 4)]})
        next_id += 1
    kinds = ["hostile"] * hostiles + ["compliant"] * compliant
    kinds = [kinds[i] for i in rng.permutation(len(kinds))]
    for kind in kinds:
        start, end = _edge_path(rng)
        steps = 12
        traj = [[round(start[0] + (end[0] - start[0]) * t / steps, 4),
                 round(start[1] + (end[1] - start[1]) * t / steps, 4)] for t in range(steps + 1)]
        node = {"id": next_id, "role": "unknown", "position": traj[0], "trajectory": traj,
                "energy": float(round(rng.uniform(20.0, 120.0), 2))}
        delay = int(rng.integers(1, window))
        if kind == "hostile":
            node["behavior"] = {"mode": "forward", "dst": 4, "delay": delay}
        elif rng.random() < 0.5:
            node["behavior"] = {"mode": "drop", "delay": delay}
        else:
            node["behavior"] = {"mode": "forward", "dst": int(rng.integers(1, 4)), "delay": delay}
        nodes.append(node)
        next_id += 1
    registry = sorted(n["id"] for n in nodes if n["role"] != "hostile")
    return {
        "seed": seed,
        "max_ticks": max_ticks,
        "registry": {"ids": registry},
        "nodes": nodes,
        "tracking": {"particle_count": 100, "sensing_radius": 0.25},
        "admission": {"observation_window": window, "scan_radius": 0.15},
    }


def _edge_path(rng: np.random.Generator):
    side = int(rng.integers(0, 4))
    u = float(rng.uniform(0.1, 0.9))
    start = [(0.0, u), (1.0, u), (u, 0.0), (u, 1.0)][side]
    target = rng.uniform(0.3, 0.7, 2)
    return start, (float(target[0]), float(target[1]))


def benchmark_scenario(**kwargs) -> ScenarioConfig:
    return parse_scenario(benchmark_document(**kwargs))

