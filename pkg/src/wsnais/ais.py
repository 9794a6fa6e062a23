"""Immune core: bitstring affinity, negative selection and clonal selection.

Bitstrings are stored as Python ints with an explicit length; bit position 0
is the leftmost character of the string form.  Clonal selection works on 2-D
numpy genome arrays so the same step serves bitstring detectors and the
continuous optimiser.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence, TextIO

import numpy as np


class Scheme(str, enum.Enum):
    R_CONTIGUOUS = "r_contiguous"
    HAMMING = "hamming"


class DetectorState(str, enum.Enum):
    IMMATURE = "immature"
    MATURE = "mature"
    MEMORY = "memory"


@dataclass(frozen=True)
class Bitstring:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("bitstring length must be positive")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, bits: str) -> Bitstring:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        return cls(int(bits, 2), len(bits))

    @classmethod
    def from_hex(cls, text: str, length: int) -> Bitstring:
        return cls(int(text, 16), length)

    @classmethod
    def from_array(cls, bits: Sequence[int]) -> Bitstring:
        return cls.from_str("".join("1" if b else "0" for b in bits))

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> Bitstring:
        return cls.from_array(rng.integers(0, 2, length))

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    def hex(self) -> str:
        return format(self.value, f"0{(self.length + 3) // 4}x")

    def to_array(self) -> np.ndarray:
        return np.frombuffer(str(self).encode(), dtype=np.uint8) - ord("0")

    def complement(self) -> Bitstring:
        return Bitstring(self.value ^ ((1 << self.length) - 1), self.length)


@dataclass(frozen=True)
class AffinityConfig:
    scheme: Scheme = Scheme.R_CONTIGUOUS
    r: int = 8
    recognition_threshold: float = 0.8
    length: int = 32

    def __post_init__(self):
        if not 1 <= self.r <= self.length:
            raise ValueError(f"r must lie in [1, length={self.length}], got {self.r}")
        if not 0 < self.recognition_threshold <= 1:
            raise ValueError("recognition_threshold must lie in (0, 1]")


@dataclass
class Detector:
    pattern: Bitstring
    state: DetectorState = DetectorState.MATURE
    age: int = 0
    match_count: int = 0

    def __post_init__(self):
        if self.state is DetectorState.MEMORY and self.match_count < 1:
            raise ValueError("memory detectors must have matched at least once")


@dataclass(frozen=True)
class ClonalParams:
    population_size: int = 50
    select_count: int = 20
    clone_budget: int = 20
    maturity_level: float = 80.0
    replace_worst_n: int = 5
    max_generations: int = 600

    def __post_init__(self):
        for name in ("population_size", "select_count", "clone_budget",
                     "replace_worst_n", "max_generations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.select_count > self.population_size:
            raise ValueError("select_count cannot exceed population_size")
        if self.replace_worst_n >= self.population_size:
            raise ValueError("replace_worst_n must be below population_size")
        if self.maturity_level < 0:
            raise ValueError("maturity_level must be non-negative")


def _agreement(a: Bitstring, b: Bitstring) -> int:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return ~(a.value ^ b.value) & ((1 << a.length) - 1)


def _longest_run(mask: int) -> int:
    run = 0
    while mask:
        mask &= mask << 1
        run += 1
    return run


def affinity(a: Bitstring, b: Bitstring, config: AffinityConfig) -> float:
    agree = _agreement(a, b)
    if config.scheme is Scheme.HAMMING:
        return bin(agree).count("1") / a.length
    return _longest_run(agree) / a.length


def matches(detector: Detector | Bitstring, sample: Bitstring, config: AffinityConfig) -> bool:
    pattern = detector.pattern if isinstance(detector, Detector) else detector
    agree = _agreement(pattern, sample)
    if config.scheme is Scheme.HAMMING:
        return bin(agree).count("1") / sample.length >= config.recognition_threshold
    return _longest_run(agree) >= config.r


def negative_selection(self_set: Sequence[Bitstring], requested: int, config: AffinityConfig,
                       max_attempts: int, rng: np.random.Generator | None = None,
                       candidates: Iterable[Bitstring] | None = None) -> list[Detector]:
    """Censor random candidates against ``self_set``.

    Candidates come from ``candidates`` when given (e.g. an exhaustive
    enumeration), otherwise uniformly from ``rng``.  Duplicates are skipped.
    Generation stops at ``requested`` detectors, after ``max_attempts``
    candidates, or when the candidate stream runs dry.
    """
    for s in self_set:
        if s.length != config.length:
            raise ValueError(f"self element of length {s.length}, expected {config.length}")
    if candidates is None:
        if rng is None:
            raise ValueError("need an rng when no candidate stream is given")
        stream: Iterable[Bitstring] = (Bitstring.random(config.length, rng)
                                       for _ in range(max_attempts))
    else:
        stream = candidates
    detectors: list[Detector] = []
    seen: set[int] = set()
    attempts = 0
    for cand in stream:
        if len(detectors) >= requested or attempts >= max_attempts:
            break
        attempts += 1
        if cand.value in seen:
            continue
        if any(matches(cand, s, config) for s in self_set):
            continue
        seen.add(cand.value)
        detectors.append(Detector(cand, DetectorState.MATURE))
    return detectors


def all_bitstrings(length: int) -> Iterable[Bitstring]:
    return (Bitstring(v, length) for v in range(1 << length))


def detect(detectors: Sequence[Detector], sample: Bitstring,
           config: AffinityConfig) -> tuple[Detector, float] | None:
    best: tuple[Detector, float] | None = None
    for d in detectors:
        if not matches(d, sample, config):
            continue
        a = affinity(d.pattern, sample, config)
        if best is None or a > best[1]:
            best = (d, a)
    if best is not None:
        d = best[0]
        d.match_count += 1
        if d.state is DetectorState.MATURE:
            d.state = DetectorState.MEMORY
    return best


def dump_detectors(detectors: Iterable[Detector], fh: TextIO) -> None:
    """Write ``<hex-pattern> <state> <age> <match_count>`` lines."""
    for d in detectors:
        fh.write(f"{d.pattern.hex()} {d.state.value} {d.age} {d.match_count}\n")


def load_detectors(fh: TextIO, length: int) -> list[Detector]:
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        pattern, state, age, count = parts
        out.append(Detector(Bitstring.from_hex(pattern, length), DetectorState(state),
                            int(age), int(count)))
    return out


# --- clonal selection -------------------------------------------------------
#
# Genome spaces split mutation into drawing noise (per replicate, from that
# replicate's own generator) and applying it, so a batch of independent runs
# can share one vectorised generation.

class BitstringSpace:
    """Genome rows of 0/1 bytes; mutation flips bits independently."""

    dtype = np.uint8

    def __init__(self, length: int):
        self.length = length
        self.dim = length

    def random(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, 2, (n, self.length)).astype(np.uint8)

    def noise(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.length))

    def apply(self, genomes: np.ndarray, noise: np.ndarray, intensity: np.ndarray) -> np.ndarray:
        flips = noise < (intensity / self.length)[..., None]
        return genomes ^ flips.astype(np.uint8)

    def mutate(self, genomes, intensity, rng):
        return self.apply(genomes, self.noise(len(genomes), rng), np.asarray(intensity))


class BoxSpace:
    """Real genomes in an axis-aligned box; Gaussian mutation, clamped."""

    dtype = float

    def __init__(self, dim: int = 2, low: float = 0.0, high: float = 1.0, scale: float = 0.1):
        self.dim = dim
        self.low = low
        self.high = high
        self.scale = scale

    def random(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.low, self.high, (n, self.dim))

    def noise(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((n, self.dim))

    def apply(self, genomes: np.ndarray, noise: np.ndarray, intensity: np.ndarray) -> np.ndarray:
        out = genomes + noise * (intensity * self.scale)[..., None]
        np.minimum(out, self.high, out=out)
        np.maximum(out, self.low, out=out)
        return out

    def mutate(self, genomes, intensity, rng):
        return self.apply(genomes, self.noise(len(genomes), rng), np.asarray(intensity))


class Population(NamedTuple):
    genomes: np.ndarray
    affinities: np.ndarray


class ClonalStep(NamedTuple):
    population: Population
    memory: list[tuple[np.ndarray, float]]
    clone_counts: list[int]


def _allocate_exact(shares: np.ndarray, budget: int) -> np.ndarray:
    exact = [Fraction(float(w)) for w in shares]
    total = sum(exact)
    quotas = ([w * budget / total for w in exact] if total > 0
              else [Fraction(budget, len(exact))] * len(exact))
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(exact)), key=lambda i: (counts[i] - quotas[i], i))
    for i in order[:budget - sum(counts)]:
        counts[i] += 1
    return np.array(counts, dtype=np.int64)


def _allocate_rows(shares: np.ndarray, budget: int) -> np.ndarray:
    """Row-wise largest-remainder allocation; see :func:`allocate_clones`.

    Float quotas settle almost every row.  A row is redone in exact rational
    arithmetic when rounding could change its answer: some nonzero quota lies
    within rounding distance of an integer, or the remainders on either side
    of the cut-off are nearly tied.
    """
    rows, k = shares.shape
    total = shares.sum(axis=1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    quota = np.where(total > 0, shares * budget / safe, budget / k)
    counts = np.floor(quota).astype(np.int64)
    left = budget - counts.sum(axis=1)
    remainder = quota - counts
    order = np.argsort(-remainder, axis=1, kind="stable")
    bonus = (np.arange(k)[None, :] < left[:, None]).astype(np.int64)
    np.add.at(counts, (np.arange(rows)[:, None], order), bonus)

    tol = 1e-9 * max(budget, 1)
    near_integer = (np.minimum(remainder, 1.0 - remainder) <= tol) & (quota > 0)
    doubtful = near_integer.any(axis=1) | (total[:, 0] <= 0)
    if k > 1:
        ranked = np.take_along_axis(remainder, order, axis=1)
        cut = np.clip(left, 1, k - 1)
        gap = ranked[np.arange(rows), cut - 1] - ranked[np.arange(rows), cut]
        doubtful |= (left > 0) & (left < k) & (gap <= tol)
    for r in np.flatnonzero(doubtful):
        counts[r] = _allocate_exact(shares[r], budget)
    return counts


def allocate_clones(affinities: Sequence[float], budget: int) -> list[int]:
    """Largest-remainder split of ``budget`` proportional to ``affinities``.

    Remainder ties go to the earlier entry; all-zero affinities split evenly.
    """
    a = np.asarray(affinities, dtype=float)
    if a.size == 0:
        return []
    if np.any(a < 0):
        raise ValueError("affinities must be non-negative")
    return _allocate_rows(a[None, :], budget)[0].tolist()


def clonal_step_batch(genomes: np.ndarray, affinities: np.ndarray,
                      evaluate: Callable[[np.ndarray], np.ndarray], params: ClonalParams,
                      rngs: Sequence[np.random.Generator], space, normalize: bool = False):
    """:func:`clonal_step` over R independent populations at once.

    ``genomes`` is (R, N, d) and ``affinities`` (R, N); replicate r draws all
    of its randomness from ``rngs[r]``.  Returns the new genomes and
    affinities, the per-replicate best genome and affinity after maturation
    (before the worst are replaced), and the (R, select_count) clone counts.
    """
    R, n, _ = genomes.shape
    if n != params.population_size or affinities.shape != (R, n):
        raise ValueError(f"population has {n} members, expected {params.population_size}")
    if len(rngs) != R:
        raise ValueError("need one generator per replicate")
    genomes = genomes.copy()
    aff = np.array(affinities, dtype=float)
    rows = np.arange(R)[:, None]
    k, budget = params.select_count, params.clone_budget

    selected = np.argsort(-aff, axis=1, kind="stable")[:, :k]
    sel_aff = aff[rows, selected]
    shares = sel_aff
    if normalize:
        top = sel_aff[:, :1]
        shares = np.where(top > 0, sel_aff / np.where(top > 0, top, 1.0), sel_aff)
    counts = _allocate_rows(shares, budget)

    # clone c of replicate r descends from selected slot[r, c]
    ends = np.cumsum(counts, axis=1)
    slot = (np.arange(budget)[None, :, None] >= ends[:, None, :]).sum(axis=2)
    parents = selected[rows, slot]
    intensity = (1.0 - np.clip(sel_aff[rows, slot], 0.0, 1.0)) * (params.maturity_level / 100.0)
    noise = np.stack([space.noise(budget, g) for g in rngs])
    fresh = np.stack([space.random(params.replace_worst_n, g) for g in rngs])
    clones = space.apply(genomes[rows, parents], noise, intensity)

    d = genomes.shape[2]
    pool = np.concatenate((clones, fresh), axis=1)
    scored = np.asarray(evaluate(pool.reshape(-1, d)), dtype=float).reshape(R, -1)
    clone_aff, fresh_aff = scored[:, :budget], scored[:, budget:]

    # best clone per slot; lexsort is stable so the first clone wins ties
    ranked = np.lexsort((-clone_aff, slot), axis=-1)
    first = np.take_along_axis(ranked, np.minimum(ends - counts, budget - 1), axis=1)
    cand = clone_aff[rows, first]
    better = (counts > 0) & (cand > sel_aff)
    r_idx, s_idx = np.nonzero(better)
    targets = selected[r_idx, s_idx]
    genomes[r_idx, targets] = clones[r_idx, first[r_idx, s_idx]]
    aff[r_idx, targets] = cand[r_idx, s_idx]

    best = np.argmax(aff, axis=1)
    best_genomes = genomes[np.arange(R), best].copy()
    best_aff = aff[np.arange(R), best]

    worst = np.argsort(aff, axis=1, kind="stable")[:, :params.replace_worst_n]
    genomes[rows, worst] = fresh
    aff[rows, worst] = fresh_aff
    return genomes, aff, best_genomes, best_aff, counts


def clonal_step(population: Population, evaluate: Callable[[np.ndarray], np.ndarray],
                params: ClonalParams, rng: np.random.Generator, space,
                normalize: bool = False) -> ClonalStep:
    """One generation of clonal selection.

    The ``select_count`` best antibodies are cloned in proportion to
    affinity, clones hypermutate with intensity
    ``(1 - affinity) * maturity_level / 100``, each parent is replaced by its
    best clone when that clone is strictly better, the best antibody is
    copied to memory and the ``replace_worst_n`` worst are re-drawn at random.

    With ``normalize`` clone allocation uses affinities divided by the
    population maximum (for landscapes whose scale is arbitrary); mutation
    intensity always uses the raw affinity clipped to [0, 1].
    """
    genomes, aff = population
    n = params.population_size
    if len(genomes) != n or len(aff) != n:
        raise ValueError(f"population has {len(genomes)} members, expected {n}")
    g, a, best_g, best_a, counts = clonal_step_batch(
        np.asarray(genomes)[None], np.asarray(aff, dtype=float)[None], evaluate, params,
        [rng], space, normalize)
    return ClonalStep(Population(g[0], a[0]), [(best_g[0], float(best_a[0]))],
                      counts[0].tolist())


def bitstring_population(patterns: Sequence[Bitstring], target: Bitstring,
                         config: AffinityConfig) -> Population:
    genomes = np.array([p.to_array() for p in patterns], dtype=np.uint8)
    return Population(genomes, np.array([affinity(p, target, config) for p in patterns]))


def bitstring_evaluator(target: Bitstring, config: AffinityConfig):
    """Vectorised affinity of genome rows against ``target``."""
    def evaluate(genomes: np.ndarray) -> np.ndarray:
        return np.array([affinity(Bitstring.from_array(g), target, config) for g in genomes])
    return evaluate


def mature_detectors(self_set: Sequence[Bitstring], antigen: Bitstring, config: AffinityConfig,
                     params: ClonalParams, rng: np.random.Generator,
                     generations: int | None = None) -> list[Detector]:
    """Clonal maturation towards ``antigen`` that never keeps a self-reactive memory cell."""
    space = BitstringSpace(config.length)
    evaluate = bitstring_evaluator(antigen, config)
    genomes = space.random(params.population_size, rng)
    pop = Population(genomes, evaluate(genomes))
    memory: dict[int, Detector] = {}
    for _ in range(params.max_generations if generations is None else generations):
        pop, additions, _ = clonal_step(pop, evaluate, params, rng, space)
        for genome, _aff in additions:
            b = Bitstring.from_array(genome)
            if b.value not in memory and not any(matches(b, s, config) for s in self_set):
                memory[b.value] = Detector(b, DetectorState.MATURE)
    return list(memory.values())


def hamming_distance(a: Bitstring, b: Bitstring) -> int:
    return a.length - bin(_agreement(a, b)).count("1")

