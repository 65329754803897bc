"""Genetic operators on automata and the pairwise reproduction loop.

The chromosome of an automaton is its sequence of per-letter transition
matrices in alphabet order; an allele is one row of one of those matrices.
Entry and exit vectors are not part of the chromosome unless
``GAConfig.evolve_entry`` is set, in which case the entry vector is treated
as one extra allele.

Row indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Collection, Hashable, Mapping, Sequence

import numpy as np

from .algebra import Mode, WeightedAutomaton
from .errors import (
    IncompatibleShapes,
    MissingFitness,
    RowIndexOutOfRange,
    SamplerModeMismatch,
)
from .rng import derive_stream


class RowSampler:
    """Produces a replacement row for mutation. ``mode`` None matches any automaton."""

    mode: Mode | None = None

    def __call__(self, row: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class SimplexSampler(RowSampler):
    """n values uniform in (0, 1], divided by their sum."""

    mode = Mode.STOCHASTIC

    def __call__(self, row, rng):
        draws = 1.0 - rng.random(row.shape[0])
        return draws / draws.sum()

    def __repr__(self):
        return "SimplexSampler()"


class UniformSampler(RowSampler):
    mode = Mode.GENERAL

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not lo <= hi:
            raise ValueError("lo must not exceed hi")
        self.lo = lo
        self.hi = hi

    def __call__(self, row, rng):
        return rng.uniform(self.lo, self.hi, size=row.shape[0])

    def __repr__(self):
        return f"UniformSampler({self.lo}, {self.hi})"


class IdentitySampler(RowSampler):
    """Returns the row unchanged; turns mutation into a no-op."""

    def __call__(self, row, rng):
        return np.array(row, copy=True)

    def __repr__(self):
        return "IdentitySampler()"


def default_sampler(mode: Mode) -> RowSampler:
    return SimplexSampler() if Mode(mode) is Mode.STOCHASTIC else UniformSampler(0.0, 1.0)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    generations: int = 100
    # Fixed row set to swap in every crossover; None draws one per pair.
    crossover_rows: tuple[int, ...] | None = None
    # Size of the drawn row set; None draws it uniformly from {1..n-1}.
    crossover_count: int | None = None
    mutation_sampler: RowSampler | None = None
    rng_seed: int = 0
    evolve_entry: bool = False
    dump_every: int = 0

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError(f"population_size must be even and >= 2, got {self.population_size}")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.crossover_count is not None and self.crossover_count < 0:
            raise ValueError("crossover_count must be >= 0")

    def sampler_for(self, mode: Mode) -> RowSampler:
        return self.mutation_sampler if self.mutation_sampler is not None else default_sampler(mode)


class ChromosomeView:
    """Read-only view of an automaton's loci (per-letter matrices) and alleles (rows)."""

    def __init__(self, subject: WeightedAutomaton):
        self.subject = subject

    @property
    def loci(self) -> tuple[np.ndarray, ...]:
        return self.subject.matrices

    def allele(self, letter, row_index: int) -> np.ndarray:
        m = self.subject.mu(letter)
        if not 0 <= row_index < m.shape[0]:
            raise RowIndexOutOfRange(f"row {row_index} outside 0..{m.shape[0] - 1}")
        return m[row_index]

    def __len__(self):
        return len(self.subject.matrices)


def duplicate(A: WeightedAutomaton) -> WeightedAutomaton:
    return WeightedAutomaton(
        A.alphabet,
        A.entry.copy(),
        [m.copy() for m in A.matrices],
        A.exit.copy(),
        A.mode,
        A.semiring,
    )


def _check_pair(A, B):
    if not A.same_shape(B) or A.mode != B.mode or A.semiring is not B.semiring:
        raise IncompatibleShapes("crossover needs automata with equal alphabet, state count and mode")


def crossover(A: WeightedAutomaton, B: WeightedAutomaton, row_set, swap_entry: bool = False):
    """Exchange rows ``row_set`` of every letter matrix between A and B."""
    _check_pair(A, B)
    rows = sorted(set(int(r) for r in row_set))
    for r in rows:
        if not 0 <= r < A.n:
            raise RowIndexOutOfRange(f"row {r} outside 0..{A.n - 1}")
    mats_a = [m.copy() for m in A.matrices]
    mats_b = [m.copy() for m in B.matrices]
    if rows:
        for ma, mb in zip(mats_a, mats_b):
            tmp = ma[rows].copy()
            ma[rows] = mb[rows]
            mb[rows] = tmp
    entry_a, entry_b = (B.entry, A.entry) if swap_entry else (A.entry, B.entry)
    return (
        A.replace(matrices=mats_a, entry=entry_a),
        B.replace(matrices=mats_b, entry=entry_b),
    )


def _sampler_matches(sampler: RowSampler, A: WeightedAutomaton):
    if sampler.mode is not None and sampler.mode is not A.mode:
        raise SamplerModeMismatch(f"{sampler!r} samples {sampler.mode.value} rows, automaton is {A.mode.value}")


def mutate(A: WeightedAutomaton, sampler: RowSampler, rng: np.random.Generator, mutate_entry: bool = False):
    """Replace one uniformly drawn row in each letter matrix by a sampled row."""
    _sampler_matches(sampler, A)
    mats = []
    for m in A.matrices:
        m = m.copy()
        r = int(rng.integers(m.shape[0]))
        m[r] = sampler(m[r], rng)
        mats.append(m)
    entry = A.entry
    if mutate_entry:
        entry = sampler(A.entry, rng)
    return A.replace(matrices=mats, entry=entry)


def draw_row_set(n: int, cfg: GAConfig, rng: np.random.Generator) -> tuple[int, ...]:
    if cfg.crossover_rows is not None:
        return tuple(cfg.crossover_rows)
    if cfg.crossover_count is not None:
        count = min(cfg.crossover_count, n)
    elif n > 1:
        count = int(rng.integers(1, n))
    else:
        count = 0
    return tuple(sorted(int(r) for r in rng.choice(n, size=count, replace=False)))


def reproduce_pair(
    A: WeightedAutomaton,
    B: WeightedAutomaton,
    cfg: GAConfig,
    rng: np.random.Generator,
    row_set: Sequence[int] | None = None,
):
    """Duplicate, cross over on one row set (drawn unless given), then mutate each child."""
    _check_pair(A, B)
    sampler = cfg.sampler_for(A.mode)
    _sampler_matches(sampler, A)
    rows = draw_row_set(A.n, cfg, rng) if row_set is None else tuple(row_set)
    swap_entry = cfg.evolve_entry and bool(rng.integers(2))
    ca, cb = crossover(duplicate(A), duplicate(B), rows, swap_entry=swap_entry)
    return (
        mutate(ca, sampler, rng, mutate_entry=cfg.evolve_entry),
        mutate(cb, sampler, rng, mutate_entry=cfg.evolve_entry),
    )


def select_quad(
    parents: Sequence[Hashable],
    children: Sequence[Hashable],
    fitness: Mapping,
    redundant: Collection[Hashable] = (),
) -> tuple:
    """Two fittest of (p1, p2, c1, c2), best first.

    Ties go to parents first, then to the lower position in that order.
    Children listed in ``redundant`` (copies of a parent) rank below the rest.
    """
    quad = [*parents, *children]
    if len(quad) != 4:
        raise ValueError("select_quad needs two parents and two children")
    values = []
    for pos, member in enumerate(quad):
        try:
            f = fitness[member]
        except KeyError:
            raise MissingFitness(f"no fitness for quad member {pos} ({member!r})") from None
        if f is None or (isinstance(f, float) and math.isnan(f)):
            raise MissingFitness(f"fitness of quad member {pos} is undefined")
        values.append(f)
    ranked = sorted(range(4), key=lambda i: (i >= 2 and quad[i] in redundant, -values[i], i))
    return quad[ranked[0]], quad[ranked[1]]


@dataclass(frozen=True)
class Individual:
    id: int
    automaton: WeightedAutomaton


@dataclass(frozen=True)
class Candidate:
    """An individual offered for evaluation, with the population slot it would occupy."""

    id: int
    automaton: WeightedAutomaton
    slot: int
    is_child: bool = False


FitnessFn = Callable[[Sequence[Candidate], int], Sequence[float]]


@dataclass(frozen=True)
class PairRecord:
    slots: tuple[int, int]
    parent_ids: tuple[int, int]
    child_ids: tuple[int, int]
    fitness: tuple[float, float, float, float]  # p1, p2, c1, c2
    survivor_ids: tuple[int, int]
    row_set: tuple[int, ...] = ()

    @property
    def parent_best(self) -> float:
        return max(self.fitness[:2])

    @property
    def survivor_best(self) -> float:
        lookup = dict(zip(self.parent_ids + self.child_ids, self.fitness))
        return max(lookup[i] for i in self.survivor_ids)


@dataclass(frozen=True)
class GenerationSnapshot:
    generation: int
    individuals: tuple[Individual, ...]
    fitness: tuple[float, ...]
    pairs: tuple[PairRecord, ...] = ()
    extra: dict = field(default_factory=dict)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(ind.id for ind in self.individuals)

    @property
    def min_fitness(self) -> float:
        return min(self.fitness)

    @property
    def max_fitness(self) -> float:
        return max(self.fitness)

    @property
    def mean_fitness(self) -> float:
        return float(np.mean(self.fitness))

    @property
    def best_index(self) -> int:
        return max(range(len(self.fitness)), key=lambda i: (self.fitness[i], -i))

    @property
    def best(self) -> Individual:
        return self.individuals[self.best_index]

    @property
    def best_id(self) -> int:
        return self.best.id


def _evaluate(fitness_fn, candidates, generation):
    values = [float(v) for v in fitness_fn(candidates, generation)]
    if len(values) != len(candidates):
        raise MissingFitness(f"fitness function returned {len(values)} values for {len(candidates)} candidates")
    for c, v in zip(candidates, values):
        if math.isnan(v):
            raise MissingFitness(f"fitness of individual {c.id} is NaN")
    return values


def pair_slots(size: int, seed: int, generation: int) -> list[tuple[int, int]]:
    order = derive_stream(seed, "pairing", generation).permutation(size)
    return [(int(order[i]), int(order[i + 1])) for i in range(0, size - 1, 2)]


def generation_step(
    individuals: Sequence[Individual],
    fitness_fn: FitnessFn,
    cfg: GAConfig,
    generation: int,
    next_id: int,
):
    """One reproduction/evaluation/selection round.

    Returns ``(new_individuals, fitness, pair_records, next_id)``. A child is
    offered for the slot of the parent in the same position of the pair; a
    survivor returns to its lineage slot unless both survivors share one, in
    which case the fitter keeps it. A child equal to one of its parents is
    not a new individual and only survives if nothing else can. With an odd population the unpaired
    individual carries over.
    """
    size = len(individuals)
    pairs = pair_slots(size, cfg.rng_seed, generation)
    children = []
    row_sets = []
    for index, (s1, s2) in enumerate(pairs):
        rng = derive_stream(cfg.rng_seed, "pair", generation, index)
        a, b = individuals[s1].automaton, individuals[s2].automaton
        rows = draw_row_set(a.n, cfg, rng)
        row_sets.append(rows)
        ca, cb = reproduce_pair(a, b, cfg, rng, row_set=rows)
        children.append(
            (Candidate(next_id, ca, s1, True), Candidate(next_id + 1, cb, s2, True))
        )
        next_id += 2

    candidates = [Candidate(ind.id, ind.automaton, slot) for slot, ind in enumerate(individuals)]
    for ca, cb in children:
        candidates.extend((ca, cb))
    values = _evaluate(fitness_fn, candidates, generation)
    fit = {c.id: v for c, v in zip(candidates, values)}
    by_id = {c.id: c for c in candidates}

    new_inds = list(individuals)
    new_fit = [fit[ind.id] for ind in individuals]
    records = []
    for (s1, s2), (ca, cb), rows in zip(pairs, children, row_sets):
        p1, p2 = individuals[s1].id, individuals[s2].id
        parents = (individuals[s1].automaton, individuals[s2].automaton)
        copies = {c.id for c in (ca, cb) if any(c.automaton == p for p in parents)}
        best, second = select_quad((p1, p2), (ca.id, cb.id), fit, copies)
        lineage = {p1: s1, ca.id: s1, p2: s2, cb.id: s2}
        slot_best = lineage[best]
        slot_second = lineage[second] if lineage[second] != slot_best else (s2 if slot_best == s1 else s1)
        for ident, slot in ((best, slot_best), (second, slot_second)):
            new_inds[slot] = Individual(ident, by_id[ident].automaton)
            new_fit[slot] = fit[ident]
        records.append(
            PairRecord(
                slots=(s1, s2),
                parent_ids=(p1, p2),
                child_ids=(ca.id, cb.id),
                fitness=(fit[p1], fit[p2], fit[ca.id], fit[cb.id]),
                survivor_ids=(best, second),
                row_set=rows,
            )
        )
    return new_inds, new_fit, records, next_id


def evolve(population: Sequence[WeightedAutomaton], fitness_fn: FitnessFn, cfg: GAConfig):
    """Run ``cfg.generations`` rounds; yields a snapshot per generation, starting at 0.

    Snapshot 0 holds the initial population evaluated at generation 0.
    """
    if len(population) < 2 or len(population) % 2:
        raise ValueError(f"population size must be even and >= 2, got {len(population)}")
    first = population[0]
    for A in population[1:]:
        _check_pair(first, A)
    _sampler_matches(cfg.sampler_for(first.mode), first)

    individuals = [Individual(i, A) for i, A in enumerate(population)]
    next_id = len(individuals)
    candidates = [Candidate(ind.id, ind.automaton, slot) for slot, ind in enumerate(individuals)]
    fitness = _evaluate(fitness_fn, candidates, 0)
    yield GenerationSnapshot(0, tuple(individuals), tuple(fitness))
    for generation in range(1, cfg.generations + 1):
        individuals, fitness, records, next_id = generation_step(
            individuals, fitness_fn, cfg, generation, next_id
        )
        yield GenerationSnapshot(generation, tuple(individuals), tuple(fitness), tuple(records))


def snapshot_csv_header() -> str:
    return "generation,min_fitness,mean_fitness,max_fitness,best_id"


def fmt_num(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_csv_row(snap: GenerationSnapshot) -> str:
    return ",".join(
        [
            str(snap.generation),
            fmt_num(snap.min_fitness),
            fmt_num(snap.mean_fitness),
            fmt_num(snap.max_fitness),
            str(snap.best_id),
        ]
    )
