"""End-to-end run: track, admit, detect and respond, then write metrics.

Every tick the world advances, friendly sensors report closer/farther bits
about each tracked newcomer, and newcomers that come within scan range or
move suspiciously are probed.  Hostile verdicts push the system through
recognition into a draining confrontation.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .admission import AdmissionVerdict, Probe, Verdict, check_identity, scan_candidates
from .ais import (Bitstring, ClonalParams, Detector, DetectorState, affinity, detect,
                  mature_detectors, negative_selection)
from .response import (Mode, ModeEvent, NeutralizationReport, NoDetectorError,
                       behavior_signature, counter_attack, local_scan, run_confrontation,
                       transition_mode)
from .scenario import ScenarioConfig
from .tracking import Motion, ParticleTracker, classify_motion, sense
from .world import Event, Role, WorldState, centroid, step_world

log = logging.getLogger(__name__)

HEADER = ("tick", "node_id", "event", "verdict", "affinity", "energy", "mode")


@dataclass(frozen=True)
class MetricRow:
    tick: int
    node_id: int
    event: str
    verdict: str = ""
    affinity: float | None = None
    energy: float | None = None
    mode: str = Mode.SENSING.value


@dataclass
class RunReport:
    rows: list[MetricRow] = field(default_factory=list)
    verdicts: dict[int, AdmissionVerdict] = field(default_factory=dict)
    neutralizations: list[NeutralizationReport] = field(default_factory=list)
    summary: dict[str, float | int | bool] = field(default_factory=dict)


def _rate(num: int, den: int) -> tuple[float, bool]:
    return (1.0, True) if den == 0 else (num / den, False)


def summarize(nonself: Iterable[int], self_ids: Iterable[int], flagged: set[int],
              confrontations: list[tuple[int, float]]) -> dict[str, float | int | bool]:
    """Summary metrics.

    ``flagged`` holds nodes ever judged Hostile or Rejected; each
    confrontation is (ticks taken, energy drained).  A rate whose
    denominator is zero is reported as 1.0 and its ``*_vacuous`` flag is set,
    so an empty population never shows up as NaN.
    """
    nonself, self_ids = sorted(nonself), sorted(self_ids)
    detected = sum(1 for i in nonself if i in flagged)
    false_pos = sum(1 for i in self_ids if i in flagged)
    detection, det_vac = _rate(detected, len(nonself))
    fp, fp_vac = _rate(false_pos, len(self_ids))
    ticks = [t for t, _ in confrontations]
    return {
        "detection_rate": detection,
        "false_positive_rate": fp,
        "mean_ticks_to_neutralize": sum(ticks) / len(ticks) if ticks else 0.0,
        "total_energy_drained": math.fsum(e for _, e in confrontations),
        "nonself_count": len(nonself),
        "detected_count": detected,
        "self_count": len(self_ids),
        "false_positive_count": false_pos,
        "confrontations": len(confrontations),
        "detection_vacuous": det_vac,
        "false_positive_vacuous": fp_vac,
    }


class _Run:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.state = config.build_world()
        seeds = np.random.SeedSequence(config.seed).spawn(2)
        self.track_rng = np.random.default_rng(seeds[0])
        self.ais_rng = np.random.default_rng(seeds[1])
        self.mode = Mode.SENSING
        self.report = RunReport()
        self.policy = config.probe_policy()
        self.probes: dict[int, Probe] = {}
        self.trackers: dict[int, ParticleTracker] = {}
        self.windows: dict[int, list[float]] = {}
        self.prev_pos = {i: n.position for i, n in self.state.nodes.items()}
        self.decided: set[int] = set()
        self.admitted_at: dict[int, int] = {}
        self.flagged: set[int] = set()
        self.detectors = self._train_detectors()

    # -- bookkeeping --------------------------------------------------------
    def row(self, node_id: int, event: str, verdict: str = "", affinity=None, energy=None):
        self.report.rows.append(MetricRow(self.state.tick, node_id, event, verdict,
                                          affinity, energy, self.mode.value))

    def transition(self, event: ModeEvent, node_id: int) -> None:
        new = transition_mode(self.mode, event)
        if new is not self.mode:
            self.mode = new
            self.row(node_id, "mode")

    # -- immune repertoire ----------------------------------------------------
    def self_signatures(self) -> list[Bitstring]:
        length = self.config.ais.affinity.length
        sinks = self.state.ids(Role.DATABASE, Role.BASE_STATION)
        sigs = {Bitstring(0, length)}
        for i in sinks:
            # a one-event world in which some node forwards to sink i
            honest = WorldState({i: self.state.nodes[i]},
                                event_log=[Event(0, "forward", -1, {"dst": i})])
            sigs.add(behavior_signature(honest, -1, length))
        return sorted(sigs, key=lambda b: b.value)

    def _train_detectors(self) -> dict[int, Detector]:
        ais = self.config.ais
        self.self_set = self.self_signatures()
        pool = negative_selection(self.self_set, ais.detector_count, ais.affinity,
                                  ais.max_attempts, self.ais_rng)
        friends = self.state.ids(Role.FRIEND)
        if not pool:
            return {}
        return {f: Detector(pool[k % len(pool)].pattern) for k, f in enumerate(friends)}

    # -- main loop -------------------------------------------------------------
    def run(self) -> RunReport:
        cfg = self.config
        for i in cfg.newcomers():
            self.row(i, "newcomer", "nonself" if cfg.is_nonself(i) else "self",
                     energy=self.state.nodes[i].energy)
        while self.state.tick < cfg.max_ticks:
            step_world(self.state)
            self.track()
            self.admit()
            self.observe_probes()
        for i, v in sorted(self.report.verdicts.items()):
            if v.verdict is not Verdict.FRIEND:
                self.flagged.add(i)
        nonself = [i for i in cfg.newcomers() if cfg.is_nonself(i)]
        self_ids = [i for i in cfg.newcomers() if not cfg.is_nonself(i)]
        self.report.summary = summarize(
            nonself, self_ids, self.flagged,
            [(r.ticks_to_neutralize, r.energy_drained) for r in self.report.neutralizations])
        return self.report

    def track(self) -> None:
        tcfg = self.config.tracking
        friends = self.state.ids(Role.FRIEND)
        center = centroid(self.state.nodes[i].position for i in friends)
        for i in self.state.ids(Role.UNKNOWN):
            node = self.state.nodes[i]
            if not node.mobile or i in self.decided or i in self.probes:
                continue
            prev, curr = self.prev_pos[i], node.position
            sensors = [f for f in friends
                       if self.state.nodes[f].position.distance(curr) <= tcfg.sensing_radius]
            signs = {f: sense(self.state.nodes[f], prev, curr, tcfg.config.noise_flip_prob,
                              self.state.rng, self.state.tick).sign for f in sensors}
            tracker = self.trackers.get(i)
            if tracker is None:
                tracker = self.trackers[i] = ParticleTracker(
                    tcfg.config, self.track_rng, start=prev, step_sigma=tcfg.step_sigma,
                    bounds=self.config.area)
            xy = {f: self.state.nodes[f].position.as_tuple() for f in sensors}
            estimate = tracker.update(xy, signs)
            window = self.windows.setdefault(i, [])
            window.append(estimate.distance(center))
            del window[:-tcfg.motion_window]
            if len(window) == tcfg.motion_window:
                if classify_motion(window, tcfg.motion_tolerance) is Motion.SUSPICIOUS:
                    if i not in self.probes and i not in self.decided:
                        self.row(i, "suspicious")
                        self.start(i)
        for i, n in self.state.nodes.items():
            self.prev_pos[i] = n.position

    def admit(self) -> None:
        for i in scan_candidates(self.state, self.config.admission.scan_radius):
            if i not in self.decided and i not in self.probes:
                self.start(i)
        every = self.config.admission.reprobe_interval
        for i, since in sorted(self.admitted_at.items()):
            if (self.state.tick - since) % every == 0 and self.state.tick > since \
                    and i not in self.probes and self.state.nodes[i].role is Role.FRIEND:
                self.start(i)

    def start(self, i: int) -> None:
        node = self.state.nodes[i]
        if not check_identity(node, self.config.admission.crc_mode, self.state.registry):
            v = AdmissionVerdict(i, Verdict.REJECTED, [(self.state.tick, "credential-failure")])
            self.conclude(v)
            return
        self.probes[i] = Probe(self.state, i, self.policy)
        self.row(i, "honeypot", energy=node.energy)

    def observe_probes(self) -> None:
        for i in sorted(self.probes):
            probe = self.probes[i]
            probe.observe(self.state)
            if probe.done(self.state):
                del self.probes[i]
                self.conclude(AdmissionVerdict(i, probe.verdict, probe.evidence))

    def conclude(self, verdict: AdmissionVerdict) -> None:
        i = verdict.node_id
        previous = self.report.verdicts.get(i)
        if previous is None or previous.verdict is Verdict.FRIEND:
            self.report.verdicts[i] = verdict
        self.decided.add(i)
        self.state.log("verdict", i, verdict=verdict.verdict.value)
        self.row(i, "verdict", verdict.verdict.value, energy=self.state.nodes[i].energy)
        if verdict.verdict is Verdict.FRIEND:
            if self.state.nodes[i].role is Role.UNKNOWN:
                self.state.nodes[i].role = Role.FRIEND
                self.admitted_at[i] = self.state.tick
                self.give_detector(i)
        elif verdict.verdict is Verdict.HOSTILE:
            self.flagged.add(i)
            self.state.nodes[i].role = Role.HOSTILE
            self.admitted_at.pop(i, None)
            self.respond(i)
        else:
            self.flagged.add(i)

    def give_detector(self, i: int) -> None:
        if self.detectors:
            pool = sorted(self.detectors)
            self.detectors[i] = Detector(self.detectors[pool[i % len(pool)]].pattern)

    def respond(self, target: int) -> None:
        ais = self.config.ais
        self.transition(ModeEvent.ANOMALY_DETECTED, target)
        signature = behavior_signature(self.state, target, ais.affinity.length)
        found = detect(list(self.detectors.values()), signature, ais.affinity)
        if found is None and ais.maturation_generations > 0:
            self.grow_memory(target, signature)
            found = detect(list(self.detectors.values()), signature, ais.affinity)
        self.row(target, "detect", affinity=found[1] if found else None,
                 energy=self.state.nodes[target].energy)
        drain = self.config.response.drain
        if self.state.nodes[target].energy <= drain.neutralized_floor:
            self.transition(ModeEvent.TIMEOUT, target)
            return
        ranking = local_scan(self.state, target, self.detectors, ais.affinity, signature)
        if not ranking:
            self.transition(ModeEvent.TIMEOUT, target)
            return
        self.transition(ModeEvent.PLAN_DECIDED, target)
        self.row(target, "team", affinity=ranking[0][1], energy=self.state.nodes[target].energy)
        try:
            _, report = run_confrontation(self.state, target, self.detectors, ais.affinity,
                                          drain, signature)
        except NoDetectorError:
            self.transition(ModeEvent.TIMEOUT, target)
            return
        self.report.neutralizations.append(report)
        self.row(target, "neutralized", energy=self.state.nodes[target].energy)
        self.transition(ModeEvent.TARGET_NEUTRALIZED, target)
        if self.config.response.counter_attack:
            decoy = self.state.next_id()
            counter_attack(self.state, target, floor=drain.neutralized_floor)
            self.row(decoy, "decoy")

    def grow_memory(self, target: int, signature: Bitstring) -> None:
        """Clonally mature a detector for an unmatched antigen and hand it to
        the friend nearest the target."""
        ais = self.config.ais
        params = ClonalParams(population_size=20, select_count=8, clone_budget=20,
                              maturity_level=self.config.optimizer.maturity_level,
                              replace_worst_n=4, max_generations=ais.maturation_generations)
        grown = mature_detectors(self.self_set, signature, ais.affinity, params, self.ais_rng)
        if not grown:
            return
        best = max(grown, key=lambda d: affinity(d.pattern, signature, ais.affinity))
        where = self.state.nodes[target].position
        friends = self.state.ids(Role.FRIEND)
        if not friends:
            return
        nearest = min(friends, key=lambda f: (self.state.nodes[f].position.distance(where), f))
        self.detectors[nearest] = Detector(best.pattern, DetectorState.MATURE)


def run_scenario(config: ScenarioConfig) -> RunReport:
    return _Run(config).run()


# -- CSV ------------------------------------------------------------------------

def format_value(value) -> str:
    """CSV text for a metric value: blank for None, repr for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_metrics(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in report.rows:
        writer.writerow([r.tick, r.node_id, r.event, r.verdict, format_value(r.affinity),
                         format_value(r.energy), r.mode])
    for key in sorted(report.summary):
        buf.write(f"# summary: {key}={format_value(report.summary[key])}\n")
    return buf.getvalue()


def emit_metrics(report: RunReport, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(render_metrics(report), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc}") from exc


def read_metrics(path: str | Path) -> tuple[list[MetricRow], dict[str, str]]:
    rows, summary = [], {}
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    for ln in lines:
        if ln.startswith("# summary: "):
            key, _, value = ln[len("# summary: "):].partition("=")
            summary[key] = value
    reader = csv.reader(body)
    header = tuple(next(reader))
    if header != HEADER:
        raise ValueError(f"{path}: unexpected header {header}")
    for rec in reader:
        tick, node, event, verdict, aff, energy, mode = rec
        rows.append(MetricRow(int(tick), int(node), event, verdict,
                              float(aff) if aff else None, float(energy) if energy else None,
                              mode))
    return rows, summary


def recompute_summary(rows: list[MetricRow]) -> dict[str, float | int | bool]:
    """Rebuild the summary from metric rows alone."""
    nonself = [r.node_id for r in rows if r.event == "newcomer" and r.verdict == "nonself"]
    self_ids = [r.node_id for r in rows if r.event == "newcomer" and r.verdict == "self"]
    flagged = {r.node_id for r in rows
               if r.event == "verdict" and r.verdict in (Verdict.HOSTILE.value,
                                                         Verdict.REJECTED.value)}
    open_teams: dict[int, MetricRow] = {}
    confrontations = []
    for r in rows:
        if r.event == "team":
            open_teams[r.node_id] = r
        elif r.event == "neutralized" and r.node_id in open_teams:
            start = open_teams.pop(r.node_id)
            confrontations.append((r.tick - start.tick, start.energy - r.energy))
    return summarize(nonself, self_ids, flagged, confrontations)
