"""Target tracking from one-bit closer/farther sensor reports.

Each sensor only says whether the target got closer (+1) or not (-1) since
the previous tick.  Candidate target moves (particles) are weighted by how
consistent they are with every sensor's last two reports, then normalised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .world import Node, Position

CLOSER = 1
FARTHER = -1


class Motion(str, enum.Enum):
    APPROACHING = "approaching"
    RECEDING = "receding"
    SUSPICIOUS = "suspicious"


@dataclass(frozen=True)
class BinaryReading:
    sensor_id: int
    tick: int
    sign: int

    def __post_init__(self):
        if self.sign not in (CLOSER, FARTHER):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class Particle:
    prev_position: Position
    curr_position: Position
    weight: float = 1.0


@dataclass(frozen=True)
class TrackingConfig:
    threshold: float = 0.5
    floor_weight: float = 0.01
    noise_flip_prob: float = 0.05
    particle_count: int = 500

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if not 0 < self.floor_weight <= self.threshold:
            raise ValueError("floor_weight must lie in (0, threshold]")
        if not 0 <= self.noise_flip_prob < 0.5:
            raise ValueError("noise_flip_prob must lie in [0, 0.5)")
        if self.particle_count < 1:
            raise ValueError("particle_count must be positive")


def sense(sensor: Node, target_prev: Position, target_curr: Position,
          noise_flip_prob: float, rng: np.random.Generator, tick: int = 0) -> BinaryReading:
    """One noisy closer/farther bit; equal distances read as farther.

    Exactly one uniform draw is consumed per call whatever the noise level,
    so reading streams stay aligned across configurations.
    """
    closer = sensor.position.distance(target_curr) < sensor.position.distance(target_prev)
    sign = CLOSER if closer else FARTHER
    if rng.random() < noise_flip_prob:
        sign = -sign
    return BinaryReading(sensor.id, tick, sign)


def _ratio_weight(ratio: float, threshold: float, floor_weight: float) -> float:
    if ratio <= threshold:
        return 1.0
    if ratio <= 1.0:
        return ratio
    return floor_weight


def case_weight(sensor_pos: Position, s_prev: int, s_curr: int, particle: Particle,
                threshold: float, floor_weight: float) -> float:
    if s_prev != s_curr:
        return 1.0
    d_prev = sensor_pos.distance(particle.prev_position)
    d_curr = sensor_pos.distance(particle.curr_position)
    if d_prev == 0.0 or d_curr == 0.0:
        return 1.0
    ratio = d_curr / d_prev if s_curr == CLOSER else d_prev / d_curr
    return _ratio_weight(ratio, threshold, floor_weight)


def case_weights(sensor_xy: np.ndarray, s_prev: np.ndarray, s_curr: np.ndarray,
                 prev_xy: np.ndarray, curr_xy: np.ndarray,
                 threshold: float, floor_weight: float) -> np.ndarray:
    """Vectorised :func:`case_weight` for S sensors by P particles -> (S, P)."""
    sensor_xy = np.asarray(sensor_xy, dtype=float).reshape(-1, 2)
    d_prev = np.linalg.norm(prev_xy[None, :, :] - sensor_xy[:, None, :], axis=2)
    d_curr = np.linalg.norm(curr_xy[None, :, :] - sensor_xy[:, None, :], axis=2)
    closer = (np.asarray(s_curr) == CLOSER)[:, None]
    degenerate = (d_prev == 0.0) | (d_curr == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(closer, d_curr / d_prev, d_prev / d_curr)
    w = np.where(ratio <= threshold, 1.0, np.where(ratio <= 1.0, ratio, floor_weight))
    same = (np.asarray(s_prev) == np.asarray(s_curr))[:, None]
    return np.where(same & ~degenerate, w, 1.0)


def reweigh_particles(sensors: Sequence[Node], readings_prev: Sequence[int],
                      readings_curr: Sequence[int], particles: Sequence[Particle],
                      config: TrackingConfig) -> list[Particle]:
    if len(readings_prev) != len(sensors) or len(readings_curr) != len(sensors):
        raise ValueError("readings must cover every sensor")
    if not particles:
        raise ValueError("particle set is empty")
    raw = particle_likelihoods(
        np.array([s.position.as_tuple() for s in sensors], dtype=float).reshape(-1, 2),
        readings_prev, readings_curr,
        np.array([p.prev_position.as_tuple() for p in particles], dtype=float),
        np.array([p.curr_position.as_tuple() for p in particles], dtype=float),
        config)
    weights = raw / raw.sum()
    return [replace(p, weight=float(w)) for p, w in zip(particles, weights)]


def particle_likelihoods(sensor_xy, readings_prev, readings_curr, prev_xy, curr_xy,
                         config: TrackingConfig) -> np.ndarray:
    """Unnormalised particle weights: product of per-sensor case weights."""
    if len(sensor_xy) == 0:
        return np.ones(len(curr_xy))
    w = case_weights(sensor_xy, np.asarray(readings_prev), np.asarray(readings_curr),
                     prev_xy, curr_xy, config.threshold, config.floor_weight)
    raw = np.prod(w, axis=0)
    assert raw.sum() > 0.0, "floor_weight > 0 keeps the particle mass positive"
    return raw


def estimate_position(particles: Sequence[Particle]) -> Position:
    w = np.array([p.weight for p in particles], dtype=float)
    xy = np.array([p.curr_position.as_tuple() for p in particles], dtype=float)
    mean = (w[:, None] * xy).sum(axis=0) / w.sum()
    return Position(float(mean[0]), float(mean[1]))


def classify_motion(window: Sequence[float], tolerance: float = 0.0) -> Motion:
    """Approaching/receding when every step moves the same way.

    A step counts as decreasing when it rises by less than ``tolerance`` and
    as increasing when it falls by less than ``tolerance``; the net change
    must agree, so a flat window is never approaching or receding.
    """
    if len(window) < 3:
        raise ValueError(f"motion window needs at least 3 samples, got {len(window)}")
    steps = np.diff(np.asarray(window, dtype=float))
    net = window[-1] - window[0]
    if net < 0 and np.all(steps < tolerance):
        return Motion.APPROACHING
    if net > 0 and np.all(steps > -tolerance):
        return Motion.RECEDING
    return Motion.SUSPICIOUS


class ParticleTracker:
    """Bootstrap-style tracker for one target driven by binary readings.

    Particles diffuse with a Gaussian step, are reweighted against the last
    two reading vectors and resampled systematically when the effective
    sample size collapses below half the particle count.
    """

    def __init__(self, config: TrackingConfig, rng: np.random.Generator,
                 start: Position | None = None, step_sigma: float = 0.03,
                 bounds: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)):
        self.config = config
        self.rng = rng
        self.step_sigma = step_sigma
        self.bounds = bounds
        n = config.particle_count
        if start is None:
            xs = rng.uniform(bounds[0], bounds[1], n)
            ys = rng.uniform(bounds[2], bounds[3], n)
            self.curr = np.column_stack([xs, ys])
        else:
            self.curr = np.tile(start.as_tuple(), (n, 1)).astype(float)
        self.prev = self.curr.copy()
        self.weights = np.full(n, 1.0 / n)
        self.last_signs: dict[int, int] = {}

    def update(self, sensor_xy: dict[int, tuple[float, float]], signs: dict[int, int]) -> Position:
        self.prev = self.curr
        step = self.rng.normal(0.0, self.step_sigma, self.curr.shape)
        lo = np.array([self.bounds[0], self.bounds[2]])
        hi = np.array([self.bounds[1], self.bounds[3]])
        self.curr = np.clip(self.curr + step, lo, hi)
        ids = sorted(i for i in signs if i in self.last_signs)
        if ids:
            raw = particle_likelihoods(
                np.array([sensor_xy[i] for i in ids]),
                [self.last_signs[i] for i in ids], [signs[i] for i in ids],
                self.prev, self.curr, self.config)
            w = self.weights * raw
            self.weights = w / w.sum()
        self.last_signs = dict(signs)
        estimate = self.estimate()
        if 1.0 / np.sum(self.weights ** 2) < 0.5 * len(self.weights):
            self._resample()
        return estimate

    def estimate(self) -> Position:
        mean = self.weights @ self.curr
        return Position(float(mean[0]), float(mean[1]))

    def _resample(self) -> None:
        n = len(self.weights)
        positions = (self.rng.random() + np.arange(n)) / n
        idx = np.minimum(np.searchsorted(np.cumsum(self.weights), positions), n - 1)
        self.curr = self.curr[idx]
        self.prev = self.prev[idx]
        self.weights = np.full(n, 1.0 / n)


def distance_to(point: Position, center: Position) -> float:
    return math.hypot(point.x - center.x, point.y - center.y)
