"""Correlation/strategy checkers against hand-built oracles.

The main oracles are regular representations of Z2 and Z2^2, where every
table entry and every extracted observable is known in closed form.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from corrgroups.correlations import (
    Correlation,
    InvariantViolation,
    NotGoodStrategy,
    Scenario,
    ScenarioMismatch,
    Strategy,
    check_perfect,
    correlation_from_strategy,
    extract_solution_observables,
    is_nonsignalling,
    is_synchronous,
    make_good,
    perfect_scenario,
    synchronous_consistency,
    validate,
    variable_label,
)
from corrgroups.cyclotomic import cos_value
from corrgroups.presentations import BinaryLinearSystem

HALF = Fraction(1, 2)


def square_scenario(questions, answers):
    q, a = tuple(questions), tuple(answers)
    return Scenario(q, q, a, a)


def deterministic_correlation(scenario, assign):
    """P(assign(x), assign(y) | x, y) = 1 for every question pair."""
    table = {
        (assign(x), assign(y), x, y): Fraction(1)
        for x in scenario.X
        for y in scenario.Y
    }
    return Correlation(scenario, table, exact=True)


# -- small exact strategies -------------------------------------------------


def z2_regular_strategy():
    """Both parties measure the generator of Z2 in its regular representation."""
    plus = ((HALF, HALF), (HALF, HALF))
    minus = ((HALF, -HALF), (-HALF, HALF))
    scenario = square_scenario([0], [0, 1])
    pvm = {0: {0: plus, 1: minus}}
    return Strategy(scenario, 2, (Fraction(1), Fraction(0)), pvm, pvm, "commuting", True)


SYSTEM_111 = BinaryLinearSystem(3, [[0, 1, 2]])


def _xor_matrix(h):
    """Permutation |g> -> |g xor h> on Z2^2, indices 2*e0 + e1."""
    mat = [[Fraction(0)] * 4 for _ in range(4)]
    for g in range(4):
        mat[g ^ h][g] = Fraction(1)
    return tuple(tuple(row) for row in mat)


def gamma111_strategy():
    """Regular representation of the solution group of x0 + x1 + x2 = 0.

    That group is Z2^2 with x2 = x0 x1; both parties use the same matrices
    (the group is abelian, so left and right translations agree).
    """
    gens = {0: _xor_matrix(2), 1: _xor_matrix(1), 2: _xor_matrix(3)}
    eye = _xor_matrix(0)

    def signed(k, bit):
        sign = Fraction(1) if bit == 0 else Fraction(-1)
        return tuple(
            tuple((e + sign * g) / 2 for e, g in zip(er, gr))
            for er, gr in zip(eye, gens[k])
        )

    def matmul(a, b):
        return tuple(
            tuple(sum(x * y for x, y in zip(row, col)) for col in zip(*b)) for row in a
        )

    scenario = perfect_scenario(SYSTEM_111)
    measurements = {}
    row_pvm = {}
    for ans in scenario.A:
        p = eye
        for k in range(3):
            p = matmul(p, signed(k, ans[k]))
        row_pvm[ans] = p
    measurements[0] = row_pvm
    for i in range(3):
        measurements[variable_label(i)] = {
            (0, 0, 0): signed(i, 0),
            (0, 0, 1): signed(i, 1),
        }
    state = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    return Strategy(scenario, 4, state, measurements, measurements, "commuting", True)


# -- validate ----------------------------------------------------------------


def test_validate_deterministic_table():
    sc = square_scenario([0, 1], [0, 1])
    c = deterministic_correlation(sc, lambda q: q)
    report = validate(c)
    assert report.max_defect == 0.0
    assert report.ok()
    assert not report.negative_entries


def test_validate_all_zero_table():
    sc = square_scenario([0, 1], [0, 1])
    c = Correlation(sc, {}, exact=True)
    report = validate(c)
    assert report.max_defect == 1.0
    assert all(d == 1.0 for d in report.normalization_defects.values())


def test_validate_flags_negative_entries():
    sc = Scenario((0,), (0,), (0, 1), (0,))
    table = {(0, 0, 0, 0): 1.1, (1, 0, 0, 0): -0.1}
    report = validate(Correlation(sc, table, exact=False))
    assert len(report.negative_entries) == 1
    assert report.negative_entries[0][:4] == (1, 0, 0, 0)
    assert report.max_defect == pytest.approx(0.1)


def test_validate_random_normalized_tables():
    rng = np.random.default_rng(7)
    sc = square_scenario([0, 1, 2], [0, 1])
    table = {}
    for x in sc.X:
        for y in sc.Y:
            block = rng.random((2, 2))
            block /= block.sum()
            for a in (0, 1):
                for b in (0, 1):
                    table[(a, b, x, y)] = block[a][b]
    report = validate(Correlation(sc, table, exact=False))
    assert report.ok(1e-12)


def test_correlation_rejects_labels_outside_scenario():
    sc = square_scenario([0], [0])
    with pytest.raises(ValueError):
        Correlation(sc, {(0, 0, 0, 7): Fraction(1)}, exact=True)
    with pytest.raises(TypeError):
        Correlation(sc, {(0, 0, 0, 0): 0.5}, exact=True)


# -- nonsignalling and synchronicity ----------------------------------------


def test_deterministic_correlation_is_nonsignalling():
    sc = square_scenario([0, 1], [0, 1])
    c = deterministic_correlation(sc, lambda q: 1 - q)
    assert is_nonsignalling(c).max_defect == 0.0


def test_signalling_table_is_caught():
    sc = Scenario((0,), (0, 1), (0, 1), (0,))
    table = {(0, 0, 0, 0): 1.0, (1, 0, 0, 1): 1.0}
    report = is_nonsignalling(Correlation(sc, table, exact=False))
    assert report.max_defect == 1.0
    assert report.worst[0] == "A"


def test_synchronous_checks():
    sc = square_scenario([0, 1], [0, 1])
    assert is_synchronous(deterministic_correlation(sc, lambda q: q))
    rng = np.random.default_rng(3)
    table = {}
    for x in sc.X:
        for y in sc.Y:
            block = rng.random(4)
            block /= block.sum()
            for k, (a, b) in enumerate(itertools.product((0, 1), repeat=2)):
                table[(a, b, x, y)] = block[k]
    assert not is_synchronous(Correlation(sc, table, exact=False))


def test_synchronous_requires_square_scenario():
    sc = Scenario((0,), (1,), (0,), (0,))
    with pytest.raises(ScenarioMismatch):
        is_synchronous(Correlation(sc, {(0, 0, 0, 1): Fraction(1)}, exact=True))


# -- perfect correlations -----------------------------------------------------


def zero_solution_correlation(system):
    sc = perfect_scenario(system)
    kappa = system.uniform_row_size()
    return deterministic_correlation(sc, lambda q: (0,) * kappa)


def test_zero_solution_passes_all_six_conditions():
    c = zero_solution_correlation(SYSTEM_111)
    report = check_perfect(c, SYSTEM_111)
    assert report.passed
    assert all(v == () for v in report.violations)
    # passing correlations are synchronous
    assert is_synchronous(c)


def test_each_condition_catches_its_own_violation():
    sc = perfect_scenario(SYSTEM_111)

    def single(a, b, x, y):
        return Correlation(sc, {(a, b, x, y): Fraction(1)}, exact=True)

    # 1: odd-parity answer to the row question
    report = check_perfect(single((1, 0, 0), (0, 0, 0), 0, variable_label(1)), SYSTEM_111)
    assert report.violations[0] == (((1, 0, 0), (0, 0, 0), 0, variable_label(1)),)
    assert not report.passed
    # 2: variable answered with a nonzero prefix
    x0 = variable_label(0)
    report = check_perfect(single((1, 0, 0), (0, 0, 0), x0, x0), SYSTEM_111)
    assert report.violations[1] == (((1, 0, 0), (0, 0, 0), x0, x0),)
    assert report.violations[5] == ()
    # 3: two row questions disagreeing on a shared variable
    report = check_perfect(single((0, 0, 0), (1, 1, 0), 0, 0), SYSTEM_111)
    assert report.violations[2] == (((0, 0, 0), (1, 1, 0), 0, 0),)
    # 4: row answer vs directly asked variable, row on the left
    report = check_perfect(single((0, 0, 0), (0, 0, 1), 0, variable_label(2)), SYSTEM_111)
    assert report.violations[3] == (((0, 0, 0), (0, 0, 1), 0, variable_label(2)),)
    # 5: same with the row on the right
    report = check_perfect(single((0, 0, 1), (0, 0, 0), variable_label(2), 0), SYSTEM_111)
    assert report.violations[4] == (((0, 0, 1), (0, 0, 0), variable_label(2), 0),)
    # 6: one variable, two different direct answers
    x1 = variable_label(1)
    report = check_perfect(single((0, 0, 0), (0, 0, 1), x1, x1), SYSTEM_111)
    assert report.violations[5] == (((0, 0, 0), (0, 0, 1), x1, x1),)


def test_condition3_uses_the_phi_bijections():
    system = BinaryLinearSystem(4, [[0, 1, 2], [1, 2, 3]])
    sc = perfect_scenario(system)
    # row 0 assigns x1 = 1 (position 1), row 1 assigns x1 = 0 (position 0)
    table = {((0, 1, 1), (0, 0, 0), 0, 1): Fraction(1)}
    report = check_perfect(Correlation(sc, table, exact=True), system)
    assert report.violations[2] == (((0, 1, 1), (0, 0, 0), 0, 1),)
    assert report.violations[0] == ()


def test_check_perfect_scenario_mismatch():
    c = zero_solution_correlation(SYSTEM_111)
    other = BinaryLinearSystem(4, [[0, 1], [2, 3]])
    with pytest.raises(ScenarioMismatch):
        check_perfect(c, other)


# -- strategies ---------------------------------------------------------------


def test_z2_regular_strategy_table():
    s = z2_regular_strategy()
    report = s.check_invariants(level="full")
    assert report.ok(0.0)
    c = correlation_from_strategy(s)
    assert c.exact
    for a, b in itertools.product((0, 1), repeat=2):
        expected = HALF if a == b else Fraction(0)
        assert c.value(a, b, 0, 0) == expected
    assert is_synchronous(c)
    assert validate(c).max_defect == 0.0
    assert is_nonsignalling(c).max_defect == 0.0


def test_one_dimensional_strategy_is_deterministic():
    sc = square_scenario([0, 1], [0, 1])
    one = ((Fraction(1),),)
    zero = ((Fraction(0),),)
    pvms = {0: {0: one, 1: zero}, 1: {0: zero, 1: one}}
    s = Strategy(sc, 1, (Fraction(1),), pvms, pvms, "commuting", True)
    c = correlation_from_strategy(s)
    assert c.equals(deterministic_correlation(sc, lambda q: q))


def test_bell_state_tensor_strategy():
    sc = square_scenario([0], [0, 1])
    basis = {
        0: {0: np.diag([1.0, 0.0]), 1: np.diag([0.0, 1.0])},
    }
    state = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)
    s = Strategy(sc, 2, state, basis, basis, "tensor", False)
    c = correlation_from_strategy(s)
    for a, b in itertools.product((0, 1), repeat=2):
        expected = 0.5 if a == b else 0.0
        assert c.value(a, b, 0, 0) == pytest.approx(expected, abs=1e-15)
    assert is_synchronous(c, tol=1e-12)


def test_invariant_violation_raises():
    sc = square_scenario([0], [0, 1])
    not_projection = ((Fraction(7, 10), Fraction(0)), (Fraction(0), Fraction(3, 10)))
    complement = ((Fraction(3, 10), Fraction(0)), (Fraction(0), Fraction(7, 10)))
    pvm = {0: {0: not_projection, 1: complement}}
    s = Strategy(sc, 2, (Fraction(1), Fraction(0)), pvm, pvm, "commuting", True)
    with pytest.raises(InvariantViolation):
        correlation_from_strategy(s)


def test_make_good_merges_dead_outcomes():
    sc = square_scenario([0], [0, 1, 2])
    dead = np.diag([0.0, 1.0])
    live = np.diag([1.0, 0.0])
    zero = np.zeros((2, 2))
    pvm = {0: {0: dead, 1: live, 2: zero}}
    s = Strategy(sc, 2, np.array([1.0, 0.0]), pvm, pvm, "commuting", False)
    better = make_good(s)
    # absorber is answer 1, the first with nonzero probability
    assert np.allclose(better.alice[0][1], np.eye(2))
    assert np.allclose(better.alice[0][0], 0.0)
    assert np.allclose(better.alice[0][2], 0.0)
    before = correlation_from_strategy(s)
    after = correlation_from_strategy(better)
    assert before.equals(after, tol=1e-14)
    for ans in (0, 1, 2):
        weight = better.outcome_weight("A", 0, ans)
        if weight <= 1e-9:
            assert np.allclose(better.alice[0][ans], 0.0)


def test_make_good_keeps_good_strategies():
    s = gamma111_strategy()
    better = make_good(s)
    for q in s.scenario.X:
        for ans in s.scenario.A:
            assert better.alice[q][ans] == s.alice[q][ans]


def test_synchronous_consistency_zero_for_shared_measurements():
    s = gamma111_strategy()
    assert synchronous_consistency(s).max_defect == 0.0


def test_synchronous_consistency_positive_for_mismatched_parties():
    s = z2_regular_strategy()
    flipped = {0: {0: s.alice[0][1], 1: s.alice[0][0]}}
    mismatched = Strategy(
        s.scenario, 2, s.state, s.alice, flipped, "commuting", True
    )
    report = synchronous_consistency(mismatched)
    assert report.max_defect > 0.5
    assert report.worst[0] == 0


# -- observable extraction -----------------------------------------------------


def test_gamma111_strategy_is_perfect_and_extracts_exactly():
    s = gamma111_strategy()
    c = correlation_from_strategy(s, level="full")
    assert validate(c).max_defect == 0.0
    assert is_nonsignalling(c).max_defect == 0.0
    assert is_synchronous(c)
    assert check_perfect(c, SYSTEM_111).passed

    report = extract_solution_observables(s, SYSTEM_111)
    assert report.max_defect == 0.0
    # the observables are exactly the regular-representation generators
    assert report.alice_observables[0] == _xor_matrix(2)
    assert report.alice_observables[1] == _xor_matrix(1)
    assert report.alice_observables[2] == _xor_matrix(3)
    # grouped row projections agree with the variable projections on the state
    p = report.row_projections[(0, 1, 0)]
    direct = s.alice[variable_label(1)][(0, 0, 0)]
    psi = s.state
    lhs = tuple(sum(row[j] * psi[j] for j in range(4)) for row in p)
    rhs = tuple(sum(row[j] * psi[j] for j in range(4)) for row in direct)
    assert lhs == rhs


def test_extraction_rejects_non_good_strategies():
    s = gamma111_strategy()
    bad_pvm = dict(s.alice)
    dead_projection = tuple(
        tuple(Fraction(1) if i == j == 1 else Fraction(0) for j in range(4))
        for i in range(4)
    )
    bad_pvm[variable_label(0)] = {
        (0, 0, 0): s.alice[variable_label(0)][(0, 0, 0)],
        (0, 0, 1): s.alice[variable_label(0)][(0, 0, 1)],
        (1, 0, 0): dead_projection,
    }
    bad = Strategy(s.scenario, 4, s.state, bad_pvm, s.bob, "commuting", True)
    with pytest.raises(NotGoodStrategy):
        extract_solution_observables(bad, SYSTEM_111)


def test_deterministic_zero_solution_strategy_extracts_with_zero_defect():
    sc = perfect_scenario(SYSTEM_111)
    one = ((Fraction(1),),)
    zero = ((Fraction(0),),)
    pvm = {}
    for q in sc.X:
        answers = {}
        target = (0,) * 3
        for ans in sc.A:
            answers[ans] = one if ans == target else zero
        pvm[q] = answers
    s = Strategy(sc, 1, (Fraction(1),), pvm, pvm, "commuting", True)
    report = extract_solution_observables(s, SYSTEM_111)
    assert report.max_defect == 0.0


# -- serialization -------------------------------------------------------------


def test_correlation_json_round_trip_exact():
    sc = Scenario((0,), (0,), ("u", "v"), (("w", 1),))
    c2 = cos_value(1, 5) * cos_value(1, 5)
    table = {
        ("u", ("w", 1), 0, 0): c2,
        ("v", ("w", 1), 0, 0): 1 - c2,
    }
    c = Correlation(sc, table, exact=True)
    back = Correlation.from_json(c.to_json())
    assert back.exact
    assert back.equals(c)
    assert back.value("u", ("w", 1), 0, 0) == c2


def test_correlation_json_round_trip_float():
    sc = square_scenario([0, 1], [0, 1])
    rng = np.random.default_rng(11)
    table = {}
    for x in sc.X:
        for y in sc.Y:
            block = rng.random(4)
            block /= block.sum()
            for k, (a, b) in enumerate(itertools.product((0, 1), repeat=2)):
                table[(a, b, x, y)] = float(block[k])
    c = Correlation(sc, table, exact=False)
    back = Correlation.from_json(c.to_json())
    assert back.equals(c)


def test_strategy_json_round_trip():
    s = z2_regular_strategy()
    back = Strategy.from_json(s.to_json())
    assert back.exact and back.mode == "commuting"
    assert correlation_from_strategy(back).equals(correlation_from_strategy(s))

    sc = square_scenario([0], [0, 1])
    basis = {0: {0: np.diag([1.0, 0.0]), 1: np.diag([0.0, 1.0])}}
    state = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)
    tensor = Strategy(sc, 2, state, basis, basis, "tensor", False)
    back = Strategy.from_json(tensor.to_json())
    assert correlation_from_strategy(back).equals(
        correlation_from_strategy(tensor), tol=1e-15
    )
