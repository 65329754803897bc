"""Acceptance criteria, each checked at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are printed as they are
produced and again in the terminal summary.
"""

import subprocess
import sys

import numpy as np
import pytest

from genauto.algebra import (
    automaton_distance,
    behavior_gap,
    devectorize,
    iter_words,
    vectorize,
    word_weight,
    word_weight_bruteforce,
)
from genauto.dilemma import (
    ALWAYS_C,
    ALWAYS_D,
    DEFAULT_TABLE,
    TIT_FOR_TAT,
    VINDICTIVE,
    Action,
    MatchConfig,
    StrategySpec,
    fitness_vs,
    play_match,
    random_population,
    strategy_step,
    train,
)
from genauto.emergence import EmergenceConfig, emerge, evaluate, evaluate_bruteforce, semi_distance
from genauto.genetics import GAConfig, evolve
from genauto.rng import derive_stream

from _helpers import ACCEPTANCE_LINES, random_automaton, random_stochastic


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_payoff_table():
    expected = {(Action.C, Action.C): (3, 3), (Action.C, Action.D): (0, 5),
                (Action.D, Action.C): (5, 0), (Action.D, Action.D): (1, 1)}
    mismatches = [k for k, v in expected.items() if DEFAULT_TABLE[k] != v]
    record(1, "payoff table exact", not mismatches, f"{4 - len(mismatches)}/4 action pairs")


def test_criterion_02_path_oracles():
    rng = np.random.default_rng(2002)
    word_err = 0.0
    for _ in range(1000):
        A = random_automaton(rng, n=3)
        for w in iter_words(A.alphabet, 4):
            word_err = max(word_err, abs(word_weight(A, w) - word_weight_bruteforce(A, w)))
    eval_err = 0.0
    for _ in range(500):
        A = random_stochastic(rng, n=4)
        eval_err = max(eval_err, float(np.abs(evaluate(A) - evaluate_bruteforce(A)).max()))
    record(2, "matrix and path oracles agree", word_err <= 1e-12 and eval_err <= 1e-12,
           f"word max err {word_err:.3g}, evaluation max err {eval_err:.3g}, tol 1e-12")


def _axiom_violations(dist, triples, tol=1e-9):
    bad = 0
    for x, y, z in triples:
        dxy, dyz, dxz = dist(x, y), dist(y, z), dist(x, z)
        bad += dxy < 0 or abs(dxy - dist(y, x)) > tol or dxz > dxy + dyz + tol or dist(x, x) != 0
    return bad


def test_criterion_03_metric_axioms():
    rng = np.random.default_rng(2003)
    real = [tuple(random_automaton(rng) for _ in range(3)) for _ in range(1000)]
    behaviors = [tuple(random_stochastic(rng) for _ in range(3)) for _ in range(1000)]
    bad_auto = _axiom_violations(automaton_distance, real)
    bad_semi = _axiom_violations(semi_distance, behaviors)
    A = random_automaton(rng, n=3, alphabet=("a",))
    loop = [A.matrices[0].copy()]
    loop[0][1, 1] += 0.5
    B = A.replace(matrices=loop)
    witness = semi_distance(A, B) == 0.0 and automaton_distance(A, B) > 0
    record(3, "distance axioms and semi-distance witness", bad_auto == 0 and bad_semi == 0 and witness,
           f"violations {bad_auto}+{bad_semi} over 2x1000 triples, self-loop witness {witness}")


def test_criterion_04_behavior_convergence():
    rng = np.random.default_rng(2004)
    L = random_automaton(rng, n=3)
    direction = rng.uniform(-1, 1, vectorize(L).shape)
    gaps = [behavior_gap(devectorize(vectorize(L) + direction / n, L.alphabet, L.n), L, 5) for n in (10, 100, 1000)]
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] <= gaps[0] / 50
    record(4, "behavior gap shrinks with coefficient gap", ok,
           "gaps " + ", ".join(f"{g:.3g}" for g in gaps) + f", ratio {gaps[2] / gaps[0]:.3g} <= 0.02")


def _respond(spec, opponent):
    state, last, out = None, None, []
    for theirs in opponent:
        act, state = strategy_step(spec, state, last, None if not spec.is_random else _Half())
        out.append(act)
        last = theirs
    return out


class _Half:
    def random(self):
        return 0.5


def test_criterion_05_strategy_equivalences():
    rng = np.random.default_rng(2005)
    tft_corner = StrategySpec.probabilistic(1, 1, 1, 0, 0)
    vin_corner = StrategySpec.probabilistic(1, 1, 0, 0, 0)
    agree_tft = agree_vin = 0
    for _ in range(100):
        opp = [Action(int(b)) for b in rng.integers(0, 2, 50)]
        agree_tft += _respond(tft_corner, opp) == _respond(TIT_FOR_TAT, opp)
        agree_vin += _respond(vin_corner, opp) == _respond(VINDICTIVE, opp)
    record(5, "corner automata reproduce TFT and Vindictive", agree_tft == 100 and agree_vin == 100,
           f"TFT {agree_tft}/100, Vindictive {agree_vin}/100")


def test_criterion_06_match_fixtures():
    got = (play_match(TIT_FOR_TAT, TIT_FOR_TAT, 10).totals,
           play_match(VINDICTIVE, ALWAYS_D, 3).totals,
           play_match(ALWAYS_C, ALWAYS_D, 20).totals)
    record(6, "match fixtures", got == ((30, 30), (2, 7), (0, 100)), f"got {got}")


def test_criterion_07_elitism():
    pairs = violations = 0
    for seed in range(5):
        def fitness(candidates, generation, seed=seed):
            # same stream for every call: fitness depends on the automaton only
            return [fitness_vs(TIT_FOR_TAT, StrategySpec.from_automaton(c.automaton), 2, 20,
                               derive_stream(seed, "fixed-fitness")) for c in candidates]

        cfg = GAConfig(population_size=50, generations=50, rng_seed=seed)
        for snap in evolve(random_population(50, seed), fitness, cfg):
            for rec in snap.pairs:
                pairs += 1
                violations += rec.survivor_best < rec.parent_best
    record(7, "per-pair elitism under deterministic fitness", violations == 0 and pairs == 5 * 50 * 25,
           f"{violations} violations over {pairs} pair selections, 5 seeds")


def _train_final(s0, seed):
    cfg = GAConfig(population_size=50, generations=100, rng_seed=seed)
    *_, last = train(s0, cfg, MatchConfig(plays=10, rounds=50))
    return last


@pytest.mark.slow
def test_criterion_08_adaptive_trend():
    coop = [_train_final(ALWAYS_D, seed).mean_cooperation_rate for seed in range(10)]
    best = [_train_final(TIT_FOR_TAT, seed).best_payoff_per_round for seed in range(10)]
    low = sum(c < 0.2 for c in coop)
    high = sum(b >= 2.5 for b in best)
    record(8, "strategies adapt to the opponent", low >= 8 and high >= 8,
           f"vs AllD coop<0.2 in {low}/10 (max {max(coop):.3f}); vs TFT best>=2.5 in {high}/10 (min {min(best):.3f})")


@pytest.mark.slow
def test_criterion_09_emergence_trend():
    closer = fewer = 0
    for seed in range(20):
        cfg = EmergenceConfig(seed=seed)  # 20 agents, 5x4 grid, radius 1.5, 200 generations, tau 0.1
        snaps = emerge(cfg)
        first = next(snaps)
        *_, last = snaps
        closer += last.mean_within_distance < first.mean_within_distance
        fewer += len(last.clusters) <= len(first.clusters)
    record(9, "neighbors aggregate", closer >= 18 and fewer >= 15,
           f"distance decreased in {closer}/20, clusters non-increasing in {fewer}/20")


AGENT = """\
alphabet = a b
states = 3
mode = stochastic
entry = 1 0 0
exit = 0 0 1
matrix a = 0.25 0.5 0.25 ; 0 0.5 0.5 ; 0.5 0.5 0
matrix b = 0 1 0 ; 0.5 0 0.5 ; 0 0 1
"""


def _cli(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "genauto", *args], cwd=cwd, capture_output=True)
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def _snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(tmp_path):
    commands = [
        ["dist", "--a", "agent.wa", "--b", "other.wa", "--alpha", "3"],
        ["eval", "--agent", "agent.wa"],
        ["play", "--a", "prob:0.5,0.7,0.2,0.4,0.6", "--b", "tft", "--rounds", "40", "--seed", "5", "--out", "out/play.csv"],
        ["evolve", "--s0", "tft", "--pop", "10", "--gens", "8", "--plays", "3", "--rounds", "20", "--seed", "5",
         "--dump-every", "4", "--out", "out/evolve.csv"],
        ["emerge", "--agents", "12", "--grid-w", "4", "--grid-h", "3", "--gens", "10", "--seed", "5", "--out-dir", "out/emerge"],
    ]
    identical = 0
    for run_dir in ("r1", "r2"):
        (tmp_path / run_dir).mkdir()
        (tmp_path / run_dir / "agent.wa").write_text(AGENT)
        (tmp_path / run_dir / "other.wa").write_text(AGENT.replace("0.25 0.5 0.25", "0.2 0.6 0.2"))
    outputs = {}
    for run_dir in ("r1", "r2"):
        streams = [_cli(cmd, tmp_path / run_dir) for cmd in commands]
        outputs[run_dir] = (streams, _snapshot(tmp_path / run_dir / "out"))
    for i in range(len(commands)):
        identical += outputs["r1"][0][i] == outputs["r2"][0][i]
    files_equal = outputs["r1"][1] == outputs["r2"][1] and len(outputs["r1"][1]) == 8
    record(10, "byte-identical reruns", identical == len(commands) and files_equal,
           f"stdout identical for {identical}/{len(commands)} subcommands, "
           f"{len(outputs['r1'][1])} output files {'identical' if files_equal else 'DIFFER'}")
