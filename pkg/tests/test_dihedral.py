import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrgroups.correlations import (
    NotGoodStrategy,
    ScenarioMismatch,
    Strategy,
    correlation_from_strategy,
    is_nonsignalling,
    is_synchronous,
    validate,
)
from corrgroups.cyclotomic import CyclotomicNumber, cos_value, sin_value
from corrgroups.dihedral import (
    CP_ANSWERS,
    CP_PRIME_SCENARIO,
    CP_QUESTIONS,
    CP_SCENARIO,
    DihedralAlgebraElement,
    DihedralElement,
    NotPrimitiveRoot,
    algebra_pairing,
    automorphism_unitary,
    build_cp,
    build_cp_prime,
    canonical_strategy,
    dihedral_inv,
    dihedral_mul,
    extract_cp_prime_strategy,
    extraction_normalization,
    generator_t1,
    generator_t2,
    idempotents,
    packed_answer,
    psi_vectors,
    regular_rep,
    verify_fcp,
)

# ---------------------------------------------------------------------------
# group law


def vertex_action(g: DihedralElement, k: int, p: int) -> int:
    """Independent model of D_p: rho^j moves vertex k to k+j, tau reflects."""
    s, j = g
    return (k + j) % p if s == 0 else (-k - j) % p


elements = st.tuples(st.integers(0, 1), st.integers(0, 12))


@settings(max_examples=80, deadline=None)
@given(elements, elements, st.sampled_from([5, 7, 13]))
def test_group_law_matches_vertex_action(a, b, p):
    a = DihedralElement(a[0], a[1] % p)
    b = DihedralElement(b[0], b[1] % p)
    prod = dihedral_mul(a, b, p)
    for k in range(p):
        assert vertex_action(prod, k, p) == vertex_action(a, vertex_action(b, k, p), p)


@settings(max_examples=40, deadline=None)
@given(elements, st.sampled_from([5, 7]))
def test_inverse_law(a, p):
    a = DihedralElement(a[0], a[1] % p)
    assert dihedral_mul(a, dihedral_inv(a, p), p) == DihedralElement(0, 0)
    assert dihedral_mul(dihedral_inv(a, p), a, p) == DihedralElement(0, 0)


def test_group_law_examples():
    p = 7
    assert dihedral_mul(DihedralElement(0, 3), DihedralElement(0, 5), p) == (0, 1)
    t2 = generator_t2(p)
    assert dihedral_mul(t2, t2, p) == (0, 0)
    assert dihedral_mul(DihedralElement(0, 1), DihedralElement(1, 0), p) == (1, p - 1)
    # t1 * t2 is the basic rotation
    assert dihedral_mul(generator_t1(p), t2, p) == (0, 1)


# ---------------------------------------------------------------------------
# the group algebra


def test_algebra_arithmetic_and_star():
    p = 5
    e = DihedralAlgebraElement.one(p)
    t1 = DihedralAlgebraElement.from_element(p, generator_t1(p))
    rho = DihedralAlgebraElement.from_element(p, DihedralElement(0, 1))
    assert (t1 * t1) == e
    assert (rho * rho).coefficient((0, 2)) == 1
    half = (e + t1) * Fraction(1, 2)
    assert half * half == half  # (e+t)/2 is idempotent
    assert half.star() == half
    # star is an anti-homomorphism
    x = rho + 2 * t1
    y = e - rho * rho
    assert (x * y).star() == y.star() * x.star()
    # zero coefficients are dropped
    assert (x - x).is_zero()
    assert (x - x).support == {}


def test_algebra_rejects_mixed_sizes_and_bad_elements():
    a = DihedralAlgebraElement.one(5)
    b = DihedralAlgebraElement.one(7)
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        DihedralAlgebraElement(5, {DihedralElement(0, 6): 1})
    with pytest.raises(TypeError):
        DihedralAlgebraElement(5, {DihedralElement(0, 0): 0.5})


def test_algebra_pairing_is_the_identity_coefficient_of_products():
    # <e|L(a)R(b)|e> picks the coefficient of e in a * iota(b)
    p = 5
    rng = random.Random(11)
    for _ in range(20):
        a = DihedralAlgebraElement(
            p,
            {
                DihedralElement(rng.randint(0, 1), rng.randint(0, p - 1)): rng.randint(-3, 3)
                for _ in range(4)
            },
        )
        b = DihedralAlgebraElement(
            p,
            {
                DihedralElement(rng.randint(0, 1), rng.randint(0, p - 1)): rng.randint(-3, 3)
                for _ in range(4)
            },
        )
        iota_b = DihedralAlgebraElement(
            p, {dihedral_inv(g, p): c for g, c in b.support.items()}
        )
        assert algebra_pairing(a, b) == (a * iota_b).coefficient((0, 0))


# ---------------------------------------------------------------------------
# idempotents


@pytest.mark.parametrize("p", [5, 7])
def test_nine_idempotents_are_projections(p):
    pi = idempotents(p)
    e = DihedralAlgebraElement.one(p)
    assert set(pi) == {(i, a) for i in range(3) for a in range(3)}
    for key, elt in pi.items():
        assert elt * elt == elt, key
        assert elt.star() == elt, key
    for i in range(3):
        row = [pi[(i, a)] for a in range(3)]
        assert row[0] + row[1] + row[2] == e
        for a in range(3):
            for b in range(3):
                if a != b:
                    assert (row[a] * row[b]).is_zero(), (i, a, b)


def test_idempotent_coefficients():
    p = 7
    pi = idempotents(p)
    assert pi[(0, 0)].coefficient((0, 0)) == Fraction(1, p)
    assert pi[(0, 0)].coefficient((0, 3)) == Fraction(1, p)
    assert pi[(0, 1)].coefficient((0, 0)) == Fraction(2, p)
    assert pi[(0, 1)].coefficient((0, 1)) == 2 * Fraction(1, p) * cos_value(1, p)
    # reflection weights of rows 1 and 2
    assert pi[(1, 0)].coefficient((1, 2)) == Fraction(1, p) * cos_value(5, 2 * p)
    assert pi[(2, 0)].coefficient((1, 2)) == Fraction(1, p) * sin_value(2, p)
    # row 0 is central: it commutes with both generators
    for g in (generator_t1(p), generator_t2(p)):
        t = DihedralAlgebraElement.from_element(p, g)
        for a in range(3):
            assert pi[(0, a)] * t == t * pi[(0, a)]


def test_idempotents_reject_bad_p():
    for bad in (3, 4, 9, 15):
        with pytest.raises(ValueError):
            idempotents(bad)


# ---------------------------------------------------------------------------
# regular representation


def test_regular_rep_identity_and_homomorphism():
    p = 5
    e = DihedralAlgebraElement.one(p)
    assert regular_rep(e) == tuple(
        tuple(1 if i == j else 0 for j in range(2 * p)) for i in range(2 * p)
    )
    rng = random.Random(3)

    def matmul(a, b):
        bt = tuple(zip(*b))
        return tuple(
            tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
        )

    for _ in range(5):
        g = DihedralElement(rng.randint(0, 1), rng.randint(0, p - 1))
        h = DihedralElement(rng.randint(0, 1), rng.randint(0, p - 1))
        lg = regular_rep(g, "left", p=p)
        lh = regular_rep(h, "left", p=p)
        lgh = regular_rep(dihedral_mul(g, h, p), "left", p=p)
        assert matmul(lg, lh) == lgh
        rg = regular_rep(g, "right", p=p)
        rh = regular_rep(h, "right", p=p)
        rgh = regular_rep(dihedral_mul(g, h, p), "right", p=p)
        assert matmul(rg, rh) == rgh
        # left and right translations commute
        assert matmul(lg, rh) == matmul(rh, lg)


def test_regular_rep_trace_of_two_dimensional_component():
    # the central projection onto the 2-dim component with multiplicity 2
    for p in (5, 7):
        pi01 = idempotents(p)[(0, 1)]
        m = regular_rep(pi01, "left")
        trace = sum(m[i][i] for i in range(2 * p))
        assert trace == 4


def test_regular_rep_requires_p_for_bare_elements():
    with pytest.raises(ValueError):
        regular_rep(DihedralElement(0, 1))
    with pytest.raises(ValueError):
        regular_rep(DihedralAlgebraElement.one(5), "sideways")


# ---------------------------------------------------------------------------
# the seven-question correlation


def test_build_cp_diagonal_question_zero():
    for p in (5, 7):
        cp = build_cp(p)
        assert cp.value((0, 0), (0, 0), 0, 0) == Fraction(1, p)
        assert cp.value((1, 0), (1, 0), 0, 0) == Fraction(2, p)
        assert cp.value((2, 0), (2, 0), 0, 0) == Fraction(p - 3, p)
        for a in CP_ANSWERS:
            for b in CP_ANSWERS:
                if a != b:
                    assert cp.value(a, b, 0, 0) == 0


def test_build_cp_reflection_against_rows_one_and_two():
    p = 7
    cp = build_cp(p)
    one = CyclotomicNumber.from_rational(1)
    cos_pi_over_p = cos_value(1, 2 * p)  # cos(pi/p)
    sin_pi_over_p = sin_value(0, p)  # sin(pi/p)
    inv2p = Fraction(1, 2 * p)
    # against row 1: (1 +- cos)/2p, which is cos^2/ sin^2 of the half angle over p
    assert cp.value((0, 0), (0, 0), "t1", 1) == (one + cos_pi_over_p) * inv2p
    assert cp.value((0, 0), (1, 0), "t1", 1) == (one - cos_pi_over_p) * inv2p
    assert cp.value((0, 0), (2, 0), "t1", 1) == Fraction(p - 2, 2 * p)
    # against row 2 the sine enters, with opposite signs for t1 and t2
    assert cp.value((0, 0), (0, 0), "t1", 2) == (one - sin_pi_over_p) * inv2p
    assert cp.value((0, 0), (0, 0), "t2", 2) == (one + sin_pi_over_p) * inv2p
    assert cp.value((0, 1), (1, 0), "t2", 2) == (one + sin_pi_over_p) * inv2p
    assert cp.value((0, 1), (0, 0), "t2", 2) == (one - sin_pi_over_p) * inv2p


def test_build_cp_row_pairs():
    p = 5
    cp = build_cp(p)
    assert cp.value((0, 0), (0, 0), 1, 2) == Fraction(1, 2 * p)
    assert cp.value((0, 0), (2, 0), 0, 1) == Fraction(1, p)
    assert cp.value((2, 0), (2, 0), 1, 2) == Fraction(p - 2, p)
    assert cp.value((0, 0), (0, 0), 0, 1) == 0


def test_build_cp_product_questions():
    p = 5
    cp = build_cp(p)
    # question 0 against the joint question
    assert cp.value((0, 0), (0, 0), 0, (0, "t1")) == Fraction(1, 2 * p)
    assert cp.value((1, 0), (1, 0), 0, (0, "t1")) == Fraction(1, p)
    # reflection against the joint question
    assert cp.value((0, 0), (0, 0), "t1", (0, "t1")) == Fraction(1, 2 * p)
    # the two joint questions against each other: the trivial-component
    # block has diagonal 1/2p (each operator is rank one onto the uniform
    # vector of a coset) and off-diagonal zero
    for a1 in (0, 1):
        assert cp.value((0, a1), (0, a1), (0, "t1"), (0, "t2")) == Fraction(1, 2 * p)
    assert cp.value((0, 0), (0, 1), (0, "t1"), (0, "t2")) == 0
    assert cp.value((0, 1), (0, 0), (0, "t1"), (0, "t2")) == 0


def test_build_cp_is_a_valid_synchronous_correlation():
    cp = build_cp(5)
    assert validate(cp).ok(0.0)
    assert is_nonsignalling(cp).max_defect == 0.0
    assert is_synchronous(cp)
    for _, _, _, _, v in cp.nonzero_items():
        if isinstance(v, CyclotomicNumber):
            assert v.is_real()


def test_build_cp_json_round_trip():
    from corrgroups.correlations import Correlation

    cp = build_cp(5)
    again = Correlation.from_json(cp.to_json())
    assert again.equals(cp)


# ---------------------------------------------------------------------------
# the canonical strategy


def test_canonical_strategy_realizes_build_cp_exactly():
    p = 5
    s = canonical_strategy(p)
    assert s.dimension == 2 * p
    assert s.p == p
    got = correlation_from_strategy(s)
    assert got.equals(build_cp(p))


def test_canonical_strategy_matrices_are_exact_projections():
    s = canonical_strategy(5)
    report = s.check_invariants(level="projections")
    assert report.ok(0.0)


def test_canonical_strategy_t1_measurement_is_the_reflection_average():
    p = 5
    s = canonical_strategy(p)
    e = DihedralAlgebraElement.one(p)
    t1 = DihedralAlgebraElement.from_element(p, generator_t1(p))
    expected = regular_rep((e + t1) * Fraction(1, 2), "left")
    assert s.alice["t1"][(0, 0)] == expected


def test_canonical_strategy_cross_party_commutation_sampled():
    s = canonical_strategy(5)
    rng = random.Random(5)
    pairs = [
        (x, a, y, b)
        for x in CP_QUESTIONS
        for a in CP_ANSWERS
        for y in CP_QUESTIONS
        for b in CP_ANSWERS
    ]
    for x, a, y, b in rng.sample(pairs, 12):
        m = np.array(
            [[complex(v) if isinstance(v, int) else v.to_complex() for v in row]
             for row in s.alice[x][a]]
        )
        n = np.array(
            [[complex(v) if isinstance(v, int) else v.to_complex() for v in row]
             for row in s.bob[y][b]]
        )
        assert np.linalg.norm(m @ n - n @ m) < 1e-12


def test_canonical_strategy_float_agreement():
    for p in (5, 11):
        s = canonical_strategy(p)
        got = correlation_from_strategy(s.to_float())
        assert got.equals(build_cp(p), tol=1e-12)


def test_synchronicity_of_the_strategy_correlation():
    cp = correlation_from_strategy(canonical_strategy(5))
    for x in CP_QUESTIONS:
        total = sum(cp.value(a, a, x, x) for a in CP_ANSWERS)
        assert total == 1


# ---------------------------------------------------------------------------
# the five-question correlation and extraction


def test_build_cp_prime_is_valid_and_synchronous():
    cpp = build_cp_prime(5)
    assert cpp.scenario == CP_PRIME_SCENARIO
    assert validate(cpp).ok(0.0)
    assert is_synchronous(cpp)
    assert is_nonsignalling(cpp).max_defect == 0.0


def test_build_cp_prime_question_zero_block():
    p = 5
    cpp = build_cp_prime(p)
    # the two live answers at question 0 carry the rest of row 0, rescaled
    cp = build_cp(p)
    scale = Fraction(p, p - 1)
    for a in (0, 1):
        for b in (0, 1):
            assert cpp.value(a, b, 0, 0) == cp.value((a + 1, 0), (b + 1, 0), 0, 0) * scale
    assert cpp.value(2, 2, 0, 0) == 0


def test_extraction_normalization_is_exact():
    for p in (5, 7):
        s = canonical_strategy(p)
        assert extraction_normalization(s) == Fraction(p - 1, p)


def test_extracted_strategy_matches_build_cp_prime():
    p = 5
    s = canonical_strategy(p)
    extracted = extract_cp_prime_strategy(s)
    assert extracted.dimension == 2 * p - 2
    got = correlation_from_strategy(extracted)
    assert got.equals(build_cp_prime(p), tol=1e-10)
    # state came out normalized
    assert abs(np.linalg.norm(extracted.state) - 1.0) < 1e-12


def test_build_cp_prime_matches_direct_float_evaluation():
    # evaluate <psi'| P Q |psi'> directly from the canonical float matrices
    p = 5
    sf = canonical_strategy(p).to_float()
    psi = sf.state
    m0 = sf.alice[0][(0, 0)]
    residual = (np.eye(2 * p) - m0) @ psi
    psi_prime = residual / np.linalg.norm(residual)

    def party_map(ops):
        return {
            0: {0: ops[0][(1, 0)], 1: ops[0][(2, 0)]},
            1: {a: ops["t1"][(0, a)] for a in (0, 1)},
            2: {a: ops["t2"][(0, a)] for a in (0, 1)},
            3: {a: ops[1][(a, 0)] for a in range(3)},
            4: {a: ops[2][(a, 0)] for a in range(3)},
        }

    alice, bob = party_map(sf.alice), party_map(sf.bob)
    cpp = build_cp_prime(p)
    for x in range(5):
        for y in range(5):
            for a, m in alice[x].items():
                for b, n in bob[y].items():
                    direct = float(np.vdot(psi_prime, m @ (n @ psi_prime)).real)
                    target = cpp.value(a, b, x, y)
                    target = float(target) if isinstance(target, Fraction) else target.to_float()
                    assert abs(direct - target) < 1e-12


def test_extraction_rejects_dead_answer_projections():
    s = canonical_strategy(5).to_float()
    alice = {q: dict(pvm) for q, pvm in s.alice.items()}
    # move the (2,0) projection onto the dead answer (0,1): still a PVM,
    # but no longer a strategy for the target correlation
    alice[0] = dict(alice[0])
    alice[0][(0, 1)] = alice[0][(2, 0)]
    alice[0][(2, 0)] = np.zeros((10, 10))
    bad = Strategy(CP_SCENARIO, 10, s.state, alice, s.bob, "commuting", exact=False)
    with pytest.raises(NotGoodStrategy):
        extract_cp_prime_strategy(bad)


def test_extraction_rejects_wrong_scenario_and_mode():
    with pytest.raises(ScenarioMismatch):
        extract_cp_prime_strategy(extract_cp_prime_strategy(canonical_strategy(5)))
    one = np.ones((1, 1))
    alice = {x: {(0, 0): one} for x in CP_QUESTIONS}
    tensor = Strategy(CP_SCENARIO, 1, [1.0], alice, alice, "tensor", exact=False)
    with pytest.raises(NotGoodStrategy):
        extract_cp_prime_strategy(tensor)


# ---------------------------------------------------------------------------
# psi vectors and the order-p certificate


def test_automorphism_unitaries_are_permutations():
    for p, r in ((5, 2), (7, 3)):
        for side in ("A", "B"):
            u = automorphism_unitary(p, r, side)
            assert u.shape == (2 * p, 2 * p)
            assert ((u == 0) | (u == 1)).all()
            assert (u.sum(axis=0) == 1).all() and (u.sum(axis=1) == 1).all()
            # reflections are fixed
            assert (u[p:, p:] == np.eye(p)).all()


def test_automorphism_example_and_identity_fixing():
    u_a = automorphism_unitary(5, 2, "A")
    assert u_a[2, 1] == 1  # |rho^1> -> |rho^2>
    assert u_a[0, 0] == 1
    u_b = automorphism_unitary(5, 2, "B")
    e = np.zeros(10)
    e[0] = 1
    assert np.array_equal(u_a @ (u_b @ e), e)


def test_automorphism_unitary_rejects_non_primitive_roots():
    with pytest.raises(NotPrimitiveRoot):
        automorphism_unitary(5, 4, "A")
    with pytest.raises(NotPrimitiveRoot):
        automorphism_unitary(7, 2, "B")
    with pytest.raises(ValueError):
        automorphism_unitary(5, 2, "C")


def test_psi_vector_geometry():
    p, r = 5, 2
    s = canonical_strategy(p)
    u_a = automorphism_unitary(p, r, "A")
    u_b = automorphism_unitary(p, r, "B")
    vecs = psi_vectors(s, u_a, u_b, r)
    assert len(vecs) == p + 1
    psi = s.to_float().state
    assert abs(np.linalg.norm(vecs[0]) ** 2 - 1 / (2 * p)) < 1e-12
    assert abs(np.linalg.norm(vecs[p]) ** 2 - 1 / (2 * p)) < 1e-12
    for j in range(1, p):
        assert abs(np.linalg.norm(vecs[j]) ** 2 - 1 / p) < 1e-12
    assert abs(np.vdot(psi, vecs[1]) - 1 / p) < 1e-12
    assert np.linalg.norm(sum(vecs) - psi) < 1e-12
    for i in range(p + 1):
        for j in range(i + 1, p + 1):
            assert abs(np.vdot(vecs[i], vecs[j])) < 1e-12


def test_psi_zero_and_psi_p_are_t1_eigenvectors():
    p, r = 5, 2
    s = canonical_strategy(p)
    sf = s.to_float()
    m_t1 = sf.alice["t1"][(0, 0)] - sf.alice["t1"][(0, 1)]
    vecs = psi_vectors(
        s, automorphism_unitary(p, r, "A"), automorphism_unitary(p, r, "B"), r
    )
    assert np.linalg.norm(m_t1 @ vecs[0] - vecs[0]) < 1e-12
    assert np.linalg.norm(m_t1 @ vecs[p] + vecs[p]) < 1e-12


def test_psi_vectors_argument_validation():
    p = 5
    s = canonical_strategy(p)
    u = automorphism_unitary(p, 2, "A")
    with pytest.raises(NotPrimitiveRoot):
        psi_vectors(s, u, u, 4)
    with pytest.raises(ValueError):
        psi_vectors(s, 2 * np.eye(2 * p), u, 2)  # not unitary
    # p cannot be inferred from a plain Strategy
    plain = Strategy(
        s.scenario, s.dimension, s.state, s.alice, s.bob, "commuting", exact=True
    )
    with pytest.raises(ValueError):
        psi_vectors(plain, u, u, 2)
    vecs = psi_vectors(plain, u, u, 2, p=5)
    assert len(vecs) == 6


def test_verify_fcp_exact_hypotheses_and_conclusion():
    p, r = 5, 2
    s = canonical_strategy(p)
    report = verify_fcp(
        s, automorphism_unitary(p, r, "A"), automorphism_unitary(p, r, "B"), r
    )
    h = report.hypothesis_defects
    # the unitaries commute on the state, fix it as a product, and rescale
    # both reflection-product observables exactly
    assert h[0] < 1e-14 and h[3] < 1e-14 and h[4] < 1e-14 and h[5] < 1e-14
    assert report.conclusion_defect < 1e-14
    assert max(report.eigenvalue_defects) < 1e-12
    # no basis permutation can also commute with the other party's
    # projections on the state: preserving the Gram matrix of the row-0
    # images forces cos(2 pi/p) = cos(2 pi r/p).  The defect is sqrt(2/p).
    assert h[1] > 0.5 and h[2] > 0.5
    assert abs(h[1] - (2 / p) ** 0.5) < 1e-9
    assert not report.hypotheses_ok
    assert not report.passed
    assert report.max_defect == max(h)


def test_verify_fcp_with_second_primitive_root():
    p, r = 7, 5  # 5 generates (Z/7)*
    s = canonical_strategy(p)
    report = verify_fcp(
        s, automorphism_unitary(p, r, "A"), automorphism_unitary(p, r, "B"), r
    )
    assert report.conclusion_defect < 1e-13
    assert max(report.eigenvalue_defects) < 1e-12
    assert max(report.hypothesis_defects[4:]) < 1e-13


def test_packed_answer_layout():
    assert [packed_answer(a0, a1) for a0 in range(3) for a1 in range(2)] == list(range(6))
