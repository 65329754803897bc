"""Behavior semi-distance between agents and the emergence loop.

An agent's evaluation matrix sums, for every ordered state pair (i, j), the
weights of the cycle-free paths from i to j in the letter-collapsed matrix
``sum_a mu(a)``, scaled by entry(i) and exit(j). Two agents are compared by
a norm of the difference of their evaluations, which is a pseudometric:
behaviors that differ only on self-loops, for instance, are at distance 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from . import kernels
from .algebra import Mode, Norm, WeightedAutomaton, make_automaton
from .errors import EmptyNeighborhood, IncompatibleShapes, TooManyStates
from .genetics import Candidate, GAConfig, Individual, generation_step
from .rng import derive_stream

MAX_EVAL_STATES = 12
MAX_BRUTEFORCE_STATES = 8
INFINITE = math.inf


@dataclass(frozen=True, eq=False)
class Agent:
    id: int
    behavior: WeightedAutomaton
    position: tuple = ()


def _automaton(x) -> WeightedAutomaton:
    return x.behavior if isinstance(x, Agent) else x


def collapsed_matrix(A: WeightedAutomaton) -> np.ndarray:
    return np.sum([m.astype(np.float64) for m in A.matrices], axis=0)


def evaluate(x) -> np.ndarray:
    """Evaluation matrix of an agent (or a bare behavior automaton)."""
    A = _automaton(x)
    if A.n > MAX_EVAL_STATES:
        raise TooManyStates(f"{A.n} states exceed the path-enumeration limit of {MAX_EVAL_STATES}")
    paths = kernels.simple_path_sums(collapsed_matrix(A))
    return A.entry.astype(np.float64)[:, None] * paths * A.exit.astype(np.float64)[None, :]


def evaluate_bruteforce(x) -> np.ndarray:
    """Same as :func:`evaluate`, by listing every repeat-free state sequence."""
    A = _automaton(x)
    n = A.n
    if n > MAX_BRUTEFORCE_STATES:
        raise TooManyStates(f"{n} states exceed the brute-force limit of {MAX_BRUTEFORCE_STATES}")
    M = collapsed_matrix(A)
    entry = A.entry.astype(np.float64)
    exit = A.exit.astype(np.float64)
    e = np.zeros((n, n))
    for length in range(1, n + 1):
        for seq in itertools.permutations(range(n), length):
            w = 1.0
            for u, v in zip(seq, seq[1:]):
                w *= M[u, v]
            e[seq[0], seq[-1]] += entry[seq[0]] * w * exit[seq[-1]]
    return e


def distance_between(e_x: np.ndarray, e_y: np.ndarray, norm: Norm = Norm()) -> float:
    if e_x.shape != e_y.shape:
        raise IncompatibleShapes(f"evaluation shapes differ: {e_x.shape} vs {e_y.shape}")
    return norm(e_x - e_y)


def pairwise_distances(evals: Sequence[np.ndarray], norm: Norm = Norm()) -> np.ndarray:
    """Symmetric matrix of norms of evaluation differences."""
    E = np.stack([np.asarray(e, dtype=np.float64).ravel() for e in evals])
    count = E.shape[0]
    diffs = (E[:, None, :] - E[None, :, :]).reshape(count * count, -1)
    return norm.rows(diffs).reshape(count, count)


def semi_distance(x, y, norm: Norm = Norm()) -> float:
    ax, ay = _automaton(x), _automaton(y)
    if ax.n != ay.n:
        raise IncompatibleShapes(f"behaviors have {ax.n} and {ay.n} states")
    return distance_between(evaluate(ax), evaluate(ay), norm)


def fitness_from_distances(distances: Sequence[float]) -> float:
    """card(V) / sum of squared distances, or infinity when that sum is 0."""
    if len(distances) == 0:
        raise EmptyNeighborhood("agent has no neighbors")
    total = math.fsum(d * d for d in distances)
    if total == 0.0:
        return INFINITE
    return len(distances) / total


def agent_fitness(x, neighbors: Sequence, norm: Norm = Norm()) -> float:
    if len(neighbors) == 0:
        raise EmptyNeighborhood(f"agent {getattr(x, 'id', '?')} has no neighbors")
    ex = evaluate(x)
    return fitness_from_distances([distance_between(ex, evaluate(y), norm) for y in neighbors])


@dataclass(frozen=True)
class GridRadius:
    radius: float


@dataclass(frozen=True)
class KNearest:
    k: int


@dataclass(frozen=True)
class Graph:
    adjacency: Mapping[Hashable, Sequence[Hashable]]


NeighborhoodSpec = GridRadius | KNearest | Graph


def build_neighborhoods(agents: Sequence[Agent], spec: NeighborhoodSpec) -> dict:
    """Map each agent id to its neighbor ids (never including itself)."""
    ids = [a.id for a in agents]
    if len(set(ids)) != len(ids):
        raise ValueError("agent ids must be unique")
    result: dict = {}
    if isinstance(spec, Graph):
        known = set(ids)
        for a in agents:
            nbrs = [b for b in spec.adjacency.get(a.id, ()) if b != a.id]
            unknown = [b for b in nbrs if b not in known]
            if unknown:
                raise ValueError(f"graph links agent {a.id} to unknown agents {unknown}")
            result[a.id] = list(dict.fromkeys(nbrs))
    else:
        pos = {a.id: np.asarray(a.position, dtype=np.float64) for a in agents}
        for a in agents:
            others = sorted(
                ((float(np.linalg.norm(pos[a.id] - pos[b.id])), b.id) for b in agents if b.id != a.id),
                key=lambda t: (t[0], t[1]),
            )
            if isinstance(spec, GridRadius):
                result[a.id] = sorted(b for d, b in others if d <= spec.radius)
            elif isinstance(spec, KNearest):
                if spec.k < 1:
                    raise ValueError("k must be >= 1")
                result[a.id] = [b for _, b in others[: spec.k]]
            else:
                raise TypeError(f"unknown neighborhood spec {spec!r}")
    isolated = [i for i, nb in result.items() if not nb]
    if isolated:
        raise EmptyNeighborhood(f"agents without neighbors: {isolated}")
    return result


@dataclass(frozen=True)
class ClusterReport:
    clusters: tuple[tuple, ...]

    def __len__(self):
        return len(self.clusters)

    def label_of(self, agent_id) -> int:
        for i, c in enumerate(self.clusters):
            if agent_id in c:
                return i
        raise KeyError(agent_id)


def _components(ids: Sequence, linked: Callable[[int, int], bool]) -> ClusterReport:
    parent = list(range(len(ids)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(ids)), 2):
        if linked(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list] = {}
    for i in range(len(ids)):
        groups.setdefault(find(i), []).append(ids[i])
    clusters = sorted((tuple(sorted(g)) for g in groups.values()), key=lambda c: c[0])
    return ClusterReport(tuple(clusters))


def detect_clusters(agents: Sequence[Agent], tau: float, norm: Norm = Norm()) -> ClusterReport:
    """Connected components of the graph linking agents at semi-distance <= tau."""
    if not tau > 0:
        raise ValueError("tau must be > 0")
    if not agents:
        return ClusterReport(())
    D = pairwise_distances([evaluate(a) for a in agents], norm)
    return _components([a.id for a in agents], lambda i, j: D[i, j] <= tau)


def normalize_scores(values: Sequence[float]) -> list[float]:
    """Min-max scale to [0, 1]; infinite values first become (finite max + 1)."""
    finite = [v for v in values if math.isfinite(v)]
    top = (max(finite) if finite else 0.0) + 1.0
    vals = [top if math.isinf(v) and v > 0 else v for v in values]
    lo, hi = min(vals), max(vals)
    if hi == lo:
        return [1.0] * len(vals)
    return [(v - lo) / (hi - lo) for v in vals]


BatchFitness = Callable[[Sequence[Candidate], int], Sequence[float]]


def composed_fitness(base: BatchFitness, task: BatchFitness, weight: float) -> BatchFitness:
    """``weight * normalized(base) + (1 - weight) * normalized(task)`` over one generation's batch."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must lie in [0, 1]")

    def fitness(candidates, generation):
        b = normalize_scores(list(base(candidates, generation)))
        t = normalize_scores(list(task(candidates, generation)))
        return [weight * x + (1.0 - weight) * y for x, y in zip(b, t)]

    return fitness


@dataclass(frozen=True)
class BehaviorShape:
    """Template for the agents' behavior automata."""

    states: int = 3
    letters: tuple = ("a", "b")
    initial: tuple[int, ...] = (0,)
    final: tuple[int, ...] = (2,)

    def __post_init__(self):
        if self.states < 1:
            raise ValueError("states must be >= 1")
        for s in (*self.initial, *self.final):
            if not 0 <= s < self.states:
                raise ValueError(f"state index {s} outside 0..{self.states - 1}")
        if not self.initial or not self.final:
            raise ValueError("need at least one initial and one final state")

    def entry(self) -> np.ndarray:
        v = np.zeros(self.states)
        v[list(self.initial)] = 1.0 / len(self.initial)
        return v

    def exit(self) -> np.ndarray:
        v = np.zeros(self.states)
        v[list(self.final)] = 1.0
        return v

    def random_behavior(self, rng: np.random.Generator) -> WeightedAutomaton:
        mats = []
        for _ in self.letters:
            draws = 1.0 - rng.random((self.states, self.states))
            mats.append(draws / draws.sum(axis=1, keepdims=True))
        return make_automaton(self.letters, self.entry(), mats, self.exit(), mode=Mode.STOCHASTIC)


@dataclass(frozen=True)
class EmergenceConfig:
    agents: int = 20
    grid_w: int = 5
    grid_h: int = 4
    neighborhood: NeighborhoodSpec = GridRadius(1.5)
    generations: int = 200
    norm: Norm = Norm(2.0)
    tau: float = 0.1
    seed: int = 0
    shape: BehaviorShape = BehaviorShape()
    task: BatchFitness | None = None
    task_weight: float = 1.0
    mutation_sampler: object = None

    def __post_init__(self):
        if self.agents < 1:
            raise ValueError("agents must be >= 1")
        if self.agents > self.grid_w * self.grid_h:
            raise ValueError(f"{self.agents} agents do not fit a {self.grid_w}x{self.grid_h} grid")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not 0.0 <= self.task_weight <= 1.0:
            raise ValueError("task_weight must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")


@dataclass(frozen=True)
class EmergenceSnapshot:
    generation: int
    agents: tuple[Agent, ...]
    fitness: tuple[float, ...]
    mean_within_distance: float
    clusters: ClusterReport

    @property
    def count_infinite(self) -> int:
        return sum(1 for f in self.fitness if math.isinf(f))

    @property
    def mean_fitness_finite(self) -> float:
        finite = [f for f in self.fitness if math.isfinite(f)]
        return float(np.mean(finite)) if finite else float("nan")


def initial_agents(cfg: EmergenceConfig) -> list[Agent]:
    rng = derive_stream(cfg.seed, "emergence-init")
    return [
        Agent(i, cfg.shape.random_behavior(rng), (i % cfg.grid_w, i // cfg.grid_w))
        for i in range(cfg.agents)
    ]


def mean_within_neighborhood_distance(evals: Mapping, neighborhoods: Mapping, norm: Norm) -> float:
    """Mean of d(x, y) over every agent x and every y in its neighborhood."""
    ids = list(evals)
    index = {a: i for i, a in enumerate(ids)}
    D = pairwise_distances([evals[a] for a in ids], norm)
    ds = [D[index[x], index[y]] for x, nbrs in neighborhoods.items() for y in nbrs]
    return float(np.mean(ds)) if ds else 0.0


def _ga_config(cfg: EmergenceConfig, size: int) -> GAConfig:
    return GAConfig(
        population_size=size + (size % 2),
        generations=cfg.generations,
        mutation_sampler=cfg.mutation_sampler,
        rng_seed=cfg.seed,
    )


def emerge(cfg: EmergenceConfig, agents: Sequence[Agent] | None = None):
    """Evolve agent behaviors toward their neighbors'; yields one snapshot per generation.

    Agents keep id and position; only behaviors change. A candidate's fitness
    is measured at the slot (agent position) it would take, against the
    behaviors that the other agents held at the start of the generation.
    """
    agents = list(initial_agents(cfg) if agents is None else agents)
    if not agents:
        raise ValueError("no agents")
    neighborhoods = build_neighborhoods(agents, cfg.neighborhood)
    slot_of = {a.id: i for i, a in enumerate(agents)}
    nbr_slots = [[slot_of[b] for b in neighborhoods[a.id]] for a in agents]
    ga = _ga_config(cfg, len(agents))

    def neighborhood_fitness(evals):
        E = np.stack([e.ravel() for e in evals])

        def fitness(candidates: Sequence[Candidate], generation: int):
            out = []
            for c in candidates:
                ec = evaluate(c.automaton).ravel()
                ds = cfg.norm.rows(E[nbr_slots[c.slot]] - ec)
                out.append(fitness_from_distances(ds.tolist()))
            return out

        return fitness

    def snapshot(generation, individuals, fitness):
        current = tuple(
            Agent(a.id, ind.automaton, a.position) for a, ind in zip(agents, individuals)
        )
        evals = {a.id: evaluate(a) for a in current}
        mean_d = mean_within_neighborhood_distance(evals, neighborhoods, cfg.norm)
        report = detect_clusters(current, cfg.tau, cfg.norm)
        return EmergenceSnapshot(generation, current, tuple(fitness), mean_d, report)

    individuals = [Individual(a.id, a.behavior) for a in agents]
    next_id = max(a.id for a in agents) + 1

    def fitness_fn_for(individuals):
        evals = [evaluate(ind.automaton) for ind in individuals]
        base = neighborhood_fitness(evals)
        if cfg.task is None:
            return base
        return composed_fitness(base, cfg.task, cfg.task_weight)

    start = [Candidate(ind.id, ind.automaton, slot) for slot, ind in enumerate(individuals)]
    fitness = [float(v) for v in fitness_fn_for(individuals)(start, 0)]
    yield snapshot(0, individuals, fitness)
    for generation in range(1, cfg.generations + 1):
        # Individual ids are lineage ids; the agent ids stay attached to slots.
        individuals, fitness, _, next_id = generation_step(
            individuals, fitness_fn_for(individuals), ga, generation, next_id
        )
        yield snapshot(generation, individuals, fitness)


TREND_HEADER = "generation,mean_within_neighborhood_distance,num_clusters,mean_fitness_finite,count_infinite"
CLUSTERS_HEADER = "generation,cluster_id,agent_id"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trend_row(s: EmergenceSnapshot) -> str:
    return ",".join(
        [str(s.generation), _fmt(s.mean_within_distance), str(len(s.clusters)), _fmt(s.mean_fitness_finite), str(s.count_infinite)]
    )


def cluster_rows(s: EmergenceSnapshot):
    for cid, members in enumerate(s.clusters.clusters):
        for agent_id in members:
            yield f"{s.generation},{cid},{agent_id}"
