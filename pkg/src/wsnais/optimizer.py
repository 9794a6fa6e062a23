"""Clonal-selection search over the node-placement fitness landscape.

The landscape is ``(15 x y (1-x) (1-y) sin(9 pi x) sin(9 pi y))**2`` on the
unit square: a 9 x 9 grid of humps whose tallest sits at (0.5, 0.5) with
height 0.87890625.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ais import BoxSpace, ClonalParams, clonal_step_batch

GLOBAL_OPTIMUM = 0.87890625


def _factor(t):
    return t * (1.0 - t) * np.sin(t * (9.0 * np.pi))


def _landscape(x, y):
    # the product of the two factors is formed first so swapping x and y is exact
    return (15.0 * (_factor(x) * _factor(y))) ** 2


def fitness(x, y):
    """Landscape value; accepts scalars or broadcastable arrays in [0, 1]."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any((xa < 0) | (xa > 1) | (ya < 0) | (ya > 1)) or np.any(np.isnan(xa) | np.isnan(ya)):
        raise ValueError("fitness is defined on [0, 1] x [0, 1] only")
    out = _landscape(xa, ya)
    return float(out) if out.ndim == 0 else out


def genome_fitness(genomes: np.ndarray) -> np.ndarray:
    return _landscape(genomes[:, 0], genomes[:, 1])


@dataclass(frozen=True)
class ContinuousAntibody:
    x: float
    y: float
    fitness: float


@dataclass
class OptimizerReport:
    best: ContinuousAntibody
    generations_used: int
    history: list[float] = field(default_factory=list)


def optimize(params: ClonalParams, rng: np.random.Generator,
             landscape: Callable[[np.ndarray], np.ndarray] = genome_fitness) -> OptimizerReport:
    """Run clonal selection for ``params.max_generations`` generations.

    ``landscape`` maps an (n, 2) array of points to n fitness values.  The
    report's best antibody is the elitist memory cell, so ``history`` never
    decreases.
    """
    return optimize_many(params, [rng], landscape)[0]


def optimize_many(params: ClonalParams, rngs: Sequence[np.random.Generator],
                  landscape: Callable[[np.ndarray], np.ndarray] = genome_fitness
                  ) -> list[OptimizerReport]:
    """Independent :func:`optimize` runs, one per generator, stepped together.

    Each run consumes only its own generator, so ``optimize_many(p, [g])``
    and ``optimize(p, g)`` agree for equally seeded generators.
    """
    space = BoxSpace(dim=2, low=0.0, high=1.0, scale=0.1)
    R = len(rngs)
    genomes = np.stack([space.random(params.population_size, g) for g in rngs])
    aff = np.asarray(landscape(genomes.reshape(-1, 2)), dtype=float).reshape(R, -1)
    best_xy = np.zeros((R, 2))
    best_fit = np.full(R, -np.inf)
    history = np.empty((R, params.max_generations))
    for gen in range(params.max_generations):
        genomes, aff, mem_xy, mem_fit, _ = clonal_step_batch(
            genomes, aff, landscape, params, rngs, space, normalize=True)
        improved = mem_fit > best_fit
        best_xy[improved] = mem_xy[improved]
        best_fit[improved] = mem_fit[improved]
        history[:, gen] = best_fit
    return [OptimizerReport(ContinuousAntibody(float(xy[0]), float(xy[1]), float(f)),
                            params.max_generations, h.tolist())
            for xy, f, h in zip(best_xy, best_fit, history)]


def optimize_seeds(params: ClonalParams, seeds: Sequence[int]) -> list[OptimizerReport]:
    return optimize_many(params, [np.random.default_rng(s) for s in seeds])


def grid_oracle(resolution: int) -> tuple[float, float, float]:
    """Exhaustive scan of the (resolution + 1)**2 lattice.

    Ties go to the lexicographically smallest (x, y).
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = np.arange(resolution + 1) / resolution
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    values = _landscape(xs, ys)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return float(axis[i]), float(axis[j]), float(values[i, j])


def write_history(report: OptimizerReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["generation", "best_fitness"])
        for g, value in enumerate(report.history, 1):
            writer.writerow([g, repr(value)])


def write_lattice(path: str | Path, resolution: int = 100) -> None:
    """Dump ``x,y,fitness`` rows of the lattice for external surface plots."""
    axis = np.arange(resolution + 1) / resolution
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "fitness"])
        for x in axis:
            for y, value in zip(axis, _landscape(x, axis)):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(value))])
