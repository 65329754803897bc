import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genauto.algebra import (
    BOOLEAN,
    REAL,
    Mode,
    Norm,
    automaton_distance,
    behavior_gap,
    behavior_table,
    devectorize,
    make_automaton,
    vectorize,
    word_weight,
    word_weight_bruteforce,
)
from genauto.errors import (
    DimensionMismatch,
    IncompatibleShapes,
    StochasticityViolation,
    TableTooLarge,
    UnknownLetter,
)

from _helpers import random_automaton

reals = st.floats(-10, 10, allow_nan=False)
bools = st.booleans()


@given(reals, reals, reals)
def test_real_semiring_axioms(a, b, c):
    add, mul = REAL.add, REAL.mul
    assert math.isclose(add(add(a, b), c), add(a, add(b, c)), abs_tol=1e-12)
    assert math.isclose(mul(mul(a, b), c), mul(a, mul(b, c)), rel_tol=1e-12, abs_tol=1e-12)
    assert add(a, b) == add(b, a)
    assert add(a, REAL.zero) == a
    assert mul(a, REAL.zero) == 0
    assert mul(a, REAL.one) == a == mul(REAL.one, a)
    assert math.isclose(mul(a, add(b, c)), add(mul(a, b), mul(a, c)), rel_tol=1e-12, abs_tol=1e-12)


def test_boolean_semiring_axioms_exhaustive():
    add, mul = BOOLEAN.add, BOOLEAN.mul
    for a, b, c in itertools.product((False, True), repeat=3):
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert add(a, b) == add(b, a)
        assert add(a, BOOLEAN.zero) == a
        assert mul(a, BOOLEAN.zero) is False
        assert mul(a, BOOLEAN.one) == a
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert add(True, True) is True  # or, not xor


def test_make_automaton_tft_instance(tft_automaton):
    A = tft_automaton
    assert A.n == 2 and A.k == 2
    assert A.mode is Mode.STOCHASTIC
    np.testing.assert_array_equal(A.mu("C"), [[1, 0], [1, 0]])


def test_make_automaton_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        make_automaton(("a",), [1, 0, 0], {"a": np.eye(2)}, [1, 0])
    with pytest.raises(DimensionMismatch):
        make_automaton(("a", "b"), [1, 0], {"a": np.eye(2)}, [1, 0])
    with pytest.raises(DimensionMismatch):
        make_automaton((), [1], {}, [1])


def test_make_automaton_stochasticity_violation():
    with pytest.raises(StochasticityViolation):
        make_automaton(("a",), [1, 0], {"a": [[0.5, 0.6], [0, 1]]}, [1, 0], mode="stochastic")
    with pytest.raises(StochasticityViolation):
        make_automaton(("a",), [1, 0], {"a": [[1.5, -0.5], [0, 1]]}, [1, 0], mode="stochastic")
    with pytest.raises(StochasticityViolation):
        make_automaton(("a",), [0.5, 0.4], {"a": np.eye(2)}, [1, 0], mode="stochastic")
    with pytest.raises(StochasticityViolation):
        make_automaton(("a",), [1, 0], {"a": np.eye(2)}, [1.2, 0], mode="stochastic")
    # within tolerance
    make_automaton(("a",), [1, 0], {"a": [[0.5 + 5e-10, 0.5], [0, 1]]}, [1, 0], mode="stochastic")


def test_automaton_is_immutable(tft_automaton):
    with pytest.raises(AttributeError):
        tft_automaton.entry = np.zeros(2)
    with pytest.raises(ValueError):
        tft_automaton.matrices[0][0, 0] = 5.0


def test_word_weight_examples(tft_automaton):
    A = tft_automaton
    assert word_weight(A, "") == 1.0  # entry . exit
    assert word_weight(A, "CC") == 1.0
    assert word_weight(A, "CD") == 0.0
    assert word_weight(A, "DC") == 1.0
    Z = make_automaton(("a",), [2, 3], {"a": [[1, 2], [3, 4]]}, [0, 0])
    for w in ["", "a", "aaa"]:
        assert word_weight(Z, w) == 0.0
    with pytest.raises(UnknownLetter):
        word_weight(A, "CX")


def test_word_weight_empty_is_entry_dot_exit():
    rng = np.random.default_rng(3)
    A = random_automaton(rng)
    assert word_weight(A, ()) == pytest.approx(float(A.entry @ A.exit), abs=1e-15)


def test_word_weight_bruteforce_single_letter():
    A = make_automaton(("a",), [1, 2], {"a": [[1, 2], [3, 4]]}, [5, 6])
    # sum_ij entry_i mu_ij exit_j
    expected = sum(
        [1, 2][i] * [[1, 2], [3, 4]][i][j] * [5, 6][j] for i in range(2) for j in range(2)
    )
    assert word_weight_bruteforce(A, "a") == expected == word_weight(A, "a")
    assert word_weight_bruteforce(A, "") == 1 * 5 + 2 * 6


def test_word_weight_matches_bruteforce_random():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        A = random_automaton(rng)
        for w in itertools.chain.from_iterable(itertools.product("ab", repeat=l) for l in range(4)):
            worst = max(worst, abs(word_weight(A, w) - word_weight_bruteforce(A, w)))
    assert worst <= 1e-12


def test_boolean_word_weight_is_recognition():
    # accepts words containing at least one 'b'
    A = make_automaton(
        ("a", "b"), [1, 0], {"a": [[1, 0], [0, 1]], "b": [[0, 1], [0, 1]]}, [0, 1], semiring=BOOLEAN
    )
    for w in itertools.chain.from_iterable(itertools.product("ab", repeat=l) for l in range(5)):
        expected = "b" in w
        assert word_weight(A, w) is expected
        assert word_weight_bruteforce(A, w) is expected
    np.testing.assert_array_equal(vectorize(A)[:2], [1.0, 0.0])


def test_vectorize_layout():
    A = make_automaton(("a",), [2], {"a": [[3]]}, [5])
    np.testing.assert_array_equal(vectorize(A), [2, 3, 5])


def test_vectorize_tft(tft_automaton):
    v = vectorize(tft_automaton)
    assert v.shape == (2 * 4 + 2 * 2,)
    np.testing.assert_array_equal(v, [1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0])


def test_vectorize_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(20):
        A = random_automaton(rng, n=int(rng.integers(1, 5)), alphabet=("x", "y", "z"))
        assert devectorize(vectorize(A), A.alphabet, A.n) == A


def test_vectorize_injective_on_shape():
    rng = np.random.default_rng(6)
    A = random_automaton(rng)
    B = A.replace(exit=A.exit + np.array([0, 0, 1e-9]))
    assert not np.array_equal(vectorize(A), vectorize(B))
    assert A != B


@pytest.mark.parametrize("norm", [Norm(1), Norm(2), Norm(3.5), Norm.max()])
def test_distance_to_self_is_zero(norm, tft_automaton):
    assert automaton_distance(tft_automaton, tft_automaton, norm) == 0.0


def test_distance_single_coefficient():
    rng = np.random.default_rng(8)
    A = random_automaton(rng)
    mats = [m.copy() for m in A.matrices]
    mats[1][2, 0] += 0.375
    B = A.replace(matrices=mats)
    assert automaton_distance(A, B, Norm(2)) == pytest.approx(0.375, abs=1e-15)
    assert automaton_distance(A, B, Norm.max()) == pytest.approx(0.375, abs=1e-15)


def test_distance_incompatible_shapes(tft_automaton):
    rng = np.random.default_rng(0)
    with pytest.raises(IncompatibleShapes):
        automaton_distance(tft_automaton, random_automaton(rng))


def test_norm_definitions():
    v = np.array([3.0, -4.0, 0.0])
    assert Norm(2)(v) == 5.0
    assert Norm(1)(v) == 7.0
    assert Norm.max()(v) == 4.0
    assert Norm(3)(v) == pytest.approx((27 + 64) ** (1 / 3))
    with pytest.raises(ValueError):
        Norm(0.5)
    assert Norm.parse("max").is_max and Norm.parse("2").alpha == 2.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_distance_metric_axioms(seed, alpha):
    rng = np.random.default_rng(seed)
    norm = Norm(alpha)
    A, B, C = (random_automaton(rng) for _ in range(3))
    dab = automaton_distance(A, B, norm)
    assert dab >= 0
    assert dab == automaton_distance(B, A, norm)
    assert automaton_distance(A, C, norm) <= dab + automaton_distance(B, C, norm) + 1e-9


def test_behavior_table_counts(tft_automaton):
    t0 = behavior_table(tft_automaton, 0)
    assert t0 == {(): 1.0}
    t2 = behavior_table(tft_automaton, 2)
    assert len(t2) == 7
    assert list(t2)[:3] == [(), ("C",), ("D",)]
    assert list(t2)[3:] == [("C", "C"), ("C", "D"), ("D", "C"), ("D", "D")]


def test_behavior_table_agrees_with_word_weight():
    rng = np.random.default_rng(9)
    A = random_automaton(rng)
    for w, v in behavior_table(A, 3).items():
        assert v == pytest.approx(word_weight(A, w), abs=1e-14)


def test_behavior_table_guard():
    A = make_automaton(tuple("abcdefghij"), [1], {c: [[1]] for c in "abcdefghij"}, [1])
    with pytest.raises(TableTooLarge):
        behavior_table(A, 6)


def test_behavior_converges_under_coefficient_convergence():
    rng = np.random.default_rng(21)
    L = random_automaton(rng)
    direction = rng.choice([-1.0, 1.0], size=vectorize(L).shape)
    gaps = []
    for n in (10, 100, 1000):
        An = devectorize(vectorize(L) + direction / n, L.alphabet, L.n)
        assert automaton_distance(An, L, Norm.max()) == pytest.approx(1 / n)
        gaps.append(behavior_gap(An, L, 4))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < gaps[0] / 50
