"""Iterated prisoner's dilemma with automaton strategies.

A probabilistic strategy is a 2-state stochastic automaton over the letters
``C`` and ``D`` (the opponent's previous action). State 0 is reached by
cooperating and state 1 by betraying, so the sampled destination state *is*
the action played. The six parameters map onto the matrix triplet as::

    entry = (p1, 1-p1)          exit = (p6, 1-p6)
    mu(C) = [[p2, 1-p2],        mu(D) = [[p4, 1-p4],
             [p3, 1-p3]]                 [p5, 1-p5]]

The exit vector plays no role during a match.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .algebra import Mode, WeightedAutomaton, make_automaton
from .errors import InvalidState, ParseError
from .genetics import Candidate, GAConfig, GenerationSnapshot, evolve
from .rng import derive_stream
from .textio import load_automaton

LETTERS = ("C", "D")


class Action(enum.IntEnum):
    C = 0
    D = 1

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PayoffTable:
    """(my action, their action) -> (my payoff, their payoff)."""

    entries: dict = field(
        default_factory=lambda: {
            (Action.C, Action.C): (3, 3),
            (Action.C, Action.D): (0, 5),
            (Action.D, Action.C): (5, 0),
            (Action.D, Action.D): (1, 1),
        }
    )

    def __post_init__(self):
        keys = set(itertools.product(Action, Action))
        if set(self.entries) != keys:
            raise ValueError("payoff table must define all four action pairs")

    def __getitem__(self, key):
        return self.entries[(Action(key[0]), Action(key[1]))]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Payoff lookup arrays indexed ``[my action, their action]``."""
        mine = np.zeros((2, 2), dtype=np.int64)
        theirs = np.zeros((2, 2), dtype=np.int64)
        for (a, b), (pa, pb) in self.entries.items():
            mine[a, b] = pa
            theirs[a, b] = pb
        return mine, theirs

    @classmethod
    def parse(cls, text: str, path=None) -> "PayoffTable":
        """Lines ``<mine> <theirs> <my payoff> <their payoff>``, e.g. ``C D 0 5``."""
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"expected 'A B payA payB', got {raw.strip()!r}", lineno, path)
            try:
                key = (Action[parts[0]], Action[parts[1]])
                entries[key] = (int(parts[2]), int(parts[3]))
            except (KeyError, ValueError):
                raise ParseError(f"bad payoff line {raw.strip()!r}", lineno, path) from None
        try:
            return cls(entries)
        except ValueError as exc:
            raise ParseError(str(exc), None, path) from None

    @classmethod
    def load(cls, path) -> "PayoffTable":
        return cls.parse(Path(path).read_text(), path=str(path))


DEFAULT_TABLE = PayoffTable()


def payoff(table: PayoffTable, mine: Action, theirs: Action) -> tuple[int, int]:
    return table[(mine, theirs)]


class Kind(enum.IntEnum):
    TIT_FOR_TAT = kernels.TFT
    VINDICTIVE = kernels.VINDICTIVE
    ALWAYS_C = kernels.ALLC
    ALWAYS_D = kernels.ALLD
    PROBABILISTIC = kernels.PROB


def probabilistic_automaton(p1, p2, p3, p4, p5, p6=1.0) -> WeightedAutomaton:
    return make_automaton(
        LETTERS,
        [p1, 1.0 - p1],
        {"C": [[p2, 1.0 - p2], [p3, 1.0 - p3]], "D": [[p4, 1.0 - p4], [p5, 1.0 - p5]]},
        [p6, 1.0 - p6],
        mode=Mode.STOCHASTIC,
    )


def automaton_params(A: WeightedAutomaton) -> np.ndarray:
    """(p1..p6) of a probabilistic strategy automaton."""
    mc, md = A.mu("C"), A.mu("D")
    return np.array(
        [A.entry[0], mc[0, 0], mc[1, 0], md[0, 0], md[1, 0], A.exit[0]], dtype=np.float64
    )


def _check_strategy_automaton(A: WeightedAutomaton):
    if A.n != 2 or tuple(A.alphabet) != LETTERS or A.mode is not Mode.STOCHASTIC:
        raise InvalidState(
            "a probabilistic strategy needs a 2-state stochastic automaton over the alphabet C D"
        )
    if not (0.0 <= A.exit[0] <= 1.0 and abs(A.exit[0] + A.exit[1] - 1.0) <= 1e-9):
        raise InvalidState("exit vector must have the form (p6, 1-p6)")


@dataclass(frozen=True, eq=False)
class StrategySpec:
    kind: Kind
    automaton: WeightedAutomaton | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind is Kind.PROBABILISTIC:
            if self.automaton is None:
                raise InvalidState("probabilistic strategy needs an automaton")
            _check_strategy_automaton(self.automaton)

    @property
    def params(self) -> np.ndarray:
        if self.automaton is None:
            return np.zeros(6)
        return automaton_params(self.automaton)

    @property
    def is_random(self) -> bool:
        return self.kind is Kind.PROBABILISTIC

    def __str__(self):
        if self.name:
            return self.name
        if self.kind is Kind.PROBABILISTIC:
            return "prob:" + ",".join(format(p, ".6g") for p in self.params)
        return _NAMES[self.kind]

    @classmethod
    def probabilistic(cls, p1, p2, p3, p4, p5, p6=1.0) -> "StrategySpec":
        return cls(Kind.PROBABILISTIC, probabilistic_automaton(p1, p2, p3, p4, p5, p6))

    @classmethod
    def from_automaton(cls, A: WeightedAutomaton) -> "StrategySpec":
        return cls(Kind.PROBABILISTIC, A)


TIT_FOR_TAT = StrategySpec(Kind.TIT_FOR_TAT)
VINDICTIVE = StrategySpec(Kind.VINDICTIVE)
ALWAYS_C = StrategySpec(Kind.ALWAYS_C)
ALWAYS_D = StrategySpec(Kind.ALWAYS_D)

_NAMES = {
    Kind.TIT_FOR_TAT: "tft",
    Kind.VINDICTIVE: "vindictive",
    Kind.ALWAYS_C: "allc",
    Kind.ALWAYS_D: "alld",
}
_BY_NAME = {"tft": TIT_FOR_TAT, "vindictive": VINDICTIVE, "allc": ALWAYS_C, "alld": ALWAYS_D}


def parse_strategy(text: str) -> StrategySpec:
    """``tft | vindictive | allc | alld | prob:p1,...,p6 | file:<path>``."""
    text = text.strip()
    if text.lower() in _BY_NAME:
        return _BY_NAME[text.lower()]
    if text.startswith("prob:"):
        try:
            values = [float(x) for x in text[5:].split(",")]
        except ValueError:
            raise ParseError(f"bad probability list in {text!r}") from None
        if len(values) not in (5, 6):
            raise ParseError(f"prob: needs 5 or 6 values, got {len(values)}")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ParseError(f"probabilities must lie in [0, 1]: {text!r}")
        return StrategySpec.probabilistic(*values)
    if text.startswith("file:"):
        return StrategySpec.from_automaton(load_automaton(text[5:]))
    raise ParseError(f"unknown strategy {text!r}")


def strategy_step(spec: StrategySpec, state, opponent_last: Action | None, rng):
    """Next action and state for one round.

    ``state`` is None before round 1. Deterministic kinds draw nothing; the
    probabilistic kind draws one ``rng.random()`` per round.
    """
    first = state is None
    if first != (opponent_last is None):
        raise InvalidState("opponent_last must be None exactly on the first round")
    kind = spec.kind
    if kind is Kind.TIT_FOR_TAT:
        action = Action.C if first else Action(opponent_last)
        return action, action
    if kind is Kind.VINDICTIVE:
        if state not in (None, 0, 1):
            raise InvalidState(f"vindictive state must be 0 or 1, got {state!r}")
        betrayed = (not first and bool(state)) or opponent_last == Action.D
        return (Action.D if betrayed else Action.C), int(betrayed)
    if kind is Kind.ALWAYS_C:
        return Action.C, 0
    if kind is Kind.ALWAYS_D:
        return Action.D, 0
    p = spec.params
    if first:
        stay = p[0]
    else:
        if state not in (0, 1):
            raise InvalidState(f"probabilistic state must be 0 or 1, got {state!r}")
        if opponent_last == Action.C:
            stay = p[1] if state == 0 else p[2]
        else:
            stay = p[3] if state == 0 else p[4]
    nxt = 0 if rng.random() < stay else 1
    return Action(nxt), nxt


@dataclass(frozen=True)
class MatchResult:
    actions_a: tuple[Action, ...]
    actions_b: tuple[Action, ...]
    total_a: int
    total_b: int

    @property
    def rounds(self) -> int:
        return len(self.actions_a)

    @property
    def totals(self) -> tuple[int, int]:
        return self.total_a, self.total_b

    def round_payoffs(self, table: PayoffTable = DEFAULT_TABLE):
        return [table[(a, b)] for a, b in zip(self.actions_a, self.actions_b)]

    def cooperation_rate(self, side: int = 0) -> float:
        acts = self.actions_a if side == 0 else self.actions_b
        return sum(1 for a in acts if a == Action.C) / len(acts)


def _draws(spec: StrategySpec, rng, shape) -> np.ndarray:
    if spec.is_random:
        return rng.random(shape)
    return np.zeros(shape)


def _run(spec_a, spec_b, ua, ub):
    return kernels.run_matches(int(spec_a.kind), spec_a.params, int(spec_b.kind), spec_b.params, ua, ub)


def play_match(
    spec_a: StrategySpec,
    spec_b: StrategySpec,
    rounds: int,
    table: PayoffTable = DEFAULT_TABLE,
    rng: np.random.Generator | None = None,
) -> MatchResult:
    """Simultaneous-move match. A's draws (if random) come first from ``rng``, then B's."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if rng is None:
        rng = derive_stream(0, "match")
    ua = _draws(spec_a, rng, (1, rounds))
    ub = _draws(spec_b, rng, (1, rounds))
    acts_a, acts_b = _run(spec_a, spec_b, ua, ub)
    mine, theirs = table.arrays()
    a, b = acts_a[0], acts_b[0]
    return MatchResult(
        tuple(Action(x) for x in a),
        tuple(Action(x) for x in b),
        int(mine[a, b].sum()),
        int(theirs[a, b].sum()),
    )


@dataclass(frozen=True)
class FitnessOutcome:
    payoff: float
    cooperation_rate: float
    rounds_played: int


def evaluate_vs(
    s0: StrategySpec,
    candidate: StrategySpec,
    plays: int,
    rounds: int,
    rng: np.random.Generator,
    table: PayoffTable = DEFAULT_TABLE,
) -> FitnessOutcome:
    """Total candidate payoff over ``plays`` matches against ``s0``, plus its cooperation rate.

    Each play gets its own row of draws, so plays are independent streams.
    """
    if plays < 1 or rounds < 1:
        raise ValueError("plays and rounds must be >= 1")
    uc = _draws(candidate, rng, (plays, rounds))
    us = _draws(s0, rng, (plays, rounds))
    acts_c, acts_s = _run(candidate, s0, uc, us)
    mine, _ = table.arrays()
    total = float(mine[acts_c, acts_s].sum())
    coop = float(np.count_nonzero(acts_c == Action.C)) / acts_c.size
    return FitnessOutcome(total, coop, plays * rounds)


def fitness_vs(
    s0: StrategySpec,
    candidate: StrategySpec,
    plays: int,
    rounds: int,
    rng: np.random.Generator,
    table: PayoffTable = DEFAULT_TABLE,
) -> float:
    return evaluate_vs(s0, candidate, plays, rounds, rng, table).payoff


@dataclass(frozen=True)
class MatchConfig:
    plays: int = 10
    rounds: int = 50
    table: PayoffTable = DEFAULT_TABLE


@dataclass(frozen=True)
class TrainSnapshot:
    snapshot: GenerationSnapshot
    mean_cooperation_rate: float
    best_payoff_per_round: float

    @property
    def generation(self) -> int:
        return self.snapshot.generation


def random_population(size: int, seed: int) -> list[WeightedAutomaton]:
    """Probabilistic strategy automata with every p_i uniform in [0, 1]."""
    rng = derive_stream(seed, "init-population")
    return [probabilistic_automaton(*rng.random(6)) for _ in range(size)]


def train(
    s0: StrategySpec,
    ga_cfg: GAConfig,
    match_cfg: MatchConfig = MatchConfig(),
    population: Sequence[WeightedAutomaton] | None = None,
):
    """Evolve probabilistic strategies against the fixed opponent ``s0``.

    Fitness of a candidate in generation g is its summed payoff over
    ``match_cfg.plays`` matches, drawn from a stream keyed by (g, candidate id).
    """
    if population is None:
        population = random_population(ga_cfg.population_size, ga_cfg.rng_seed)
    per_round = match_cfg.plays * match_cfg.rounds
    coop: dict[tuple[int, int], float] = {}

    def fitness_fn(candidates: Sequence[Candidate], generation: int):
        coop.clear()
        values = []
        for c in candidates:
            rng = derive_stream(ga_cfg.rng_seed, "ipd-fitness", generation, c.id)
            out = evaluate_vs(
                s0, StrategySpec.from_automaton(c.automaton), match_cfg.plays, match_cfg.rounds, rng, match_cfg.table
            )
            coop[c.id] = out.cooperation_rate
            values.append(out.payoff)
        return values

    for snap in evolve(population, fitness_fn, ga_cfg):
        rates = [coop[i] for i in snap.ids]
        yield TrainSnapshot(snap, float(np.mean(rates)), snap.max_fitness / per_round)


def corner_action_table(params: Sequence[float], history_len: int = 3) -> dict[tuple, tuple]:
    """Responses of a 0/1-parameter automaton to every opponent history up to ``history_len``."""
    spec = StrategySpec.probabilistic(*params)
    out = {}
    for length in range(history_len + 1):
        for opp in itertools.product((Action.C, Action.D), repeat=length):
            acts = []
            state = None
            last = None
            rng = _NoDraws()
            for r in range(length + 1):
                act, state = strategy_step(spec, state, last, rng)
                acts.append(act)
                if r < length:
                    last = opp[r]
            out[opp] = tuple(acts)
    return out


class _NoDraws:
    """Stand-in rng for 0/1 parameters: any value in [0, 1) gives the same outcome."""

    def random(self):
        return 0.5
