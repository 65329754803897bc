"""Genetic automata with multiplicities.

Matrix-triplet automata over the boolean and real semirings, row-level genetic
operators, iterated prisoner's dilemma strategy training, and behavior
semi-distances driving agent aggregation.
"""

__version__ = "0.1.0"

from .algebra import (
    BOOLEAN,
    REAL,
    Mode,
    Norm,
    Semiring,
    WeightedAutomaton,
    automaton_distance,
    behavior_table,
    devectorize,
    make_automaton,
    vectorize,
    word_weight,
    word_weight_bruteforce,
)
from .textio import format_automaton, load_automaton, parse_automaton, save_automaton

__all__ = [
    "BOOLEAN",
    "REAL",
    "Mode",
    "Norm",
    "Semiring",
    "WeightedAutomaton",
    "automaton_distance",
    "behavior_table",
    "devectorize",
    "make_automaton",
    "vectorize",
    "word_weight",
    "word_weight_bruteforce",
    "format_automaton",
    "load_automaton",
    "parse_automaton",
    "save_automaton",
]
