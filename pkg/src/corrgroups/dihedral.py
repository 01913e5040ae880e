"""Dihedral group algebra and the constant-sized correlation built from it.

For odd ``p`` the dihedral group of order 2p is generated by two reflections
``t1, t2`` with ``t1^2 = t2^2 = (t1 t2)^p = e``.  Writing ``rho = t1*t2``
(rotation) and ``tau = t2``, every element has the normal form
``tau^s rho^j`` with ``s in {0,1}`` and ``j in [p]``, held here as the pair
``(s, j)``.

The module provides, in exact cyclotomic arithmetic:

* the group algebra with its star structure (:class:`DihedralAlgebraElement`),
* nine idempotents ``pi_i^(a)`` forming three commuting three-outcome
  measurements (:func:`idempotents`),
* the left/right regular representations (:func:`regular_rep`),
* the seven-question correlation :func:`build_cp` and its five-question
  sibling :func:`build_cp_prime`,
* an explicit strategy realizing ``build_cp`` exactly
  (:func:`canonical_strategy`) and the reduction that turns any good strategy
  for it into one for ``build_cp_prime`` (:func:`extract_cp_prime_strategy`);

and, in floating point, the vector machinery used to certify that the product
of the two reflection observables has order p on the strategy state:
:func:`psi_vectors`, :func:`automorphism_unitary`, and :func:`verify_fcp`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _product
from typing import NamedTuple

import numpy as np

from .correlations import (
    Correlation,
    NotGoodStrategy,
    Scenario,
    ScenarioMismatch,
    Strategy,
)
from .cyclotomic import CyclotomicNumber, cos_value, sin_value


class NotPrimitiveRoot(ValueError):
    """r does not generate the multiplicative group mod p."""


def packed_answer(a0: int, a1: int) -> int:
    """Pack an answer pair into a single index, a0 the high bit: 2*a0 + a1.

    This is the only place the packing convention is defined; every module
    that flattens answer pairs imports it from here.
    """
    return 2 * a0 + a1


# ---------------------------------------------------------------------------
# group elements


class DihedralElement(NamedTuple):
    """Normal form tau^s rho^j of a dihedral group element."""

    s: int
    j: int


def dihedral_mul(a: DihedralElement, b: DihedralElement, p: int) -> DihedralElement:
    """Product in D_p.  Uses rho^j tau = tau rho^-j to renormalize."""
    if b.s == 0:
        return DihedralElement(a.s, (a.j + b.j) % p)
    return DihedralElement(a.s ^ 1, (b.j - a.j) % p)


def dihedral_inv(a: DihedralElement, p: int) -> DihedralElement:
    """Inverse in D_p: reflections are involutions, rotations negate."""
    if a.s == 1:
        return a
    return DihedralElement(0, (-a.j) % p)


def generator_t1(p: int) -> DihedralElement:
    """t1 = tau * rho^(p-1), so that t1*t2 = rho."""
    return DihedralElement(1, p - 1)


def generator_t2(p: int) -> DihedralElement:
    return DihedralElement(1, 0)


IDENTITY = DihedralElement(0, 0)


# ---------------------------------------------------------------------------
# group algebra


def _as_cyclotomic(value) -> CyclotomicNumber:
    if isinstance(value, CyclotomicNumber):
        return value
    if isinstance(value, (int, Fraction)):
        return CyclotomicNumber.from_rational(value)
    raise TypeError(f"cannot use {type(value).__name__} as an algebra coefficient")


class DihedralAlgebraElement:
    """An element of the group algebra of D_p over the cyclotomic field.

    ``support`` maps group elements to nonzero :class:`CyclotomicNumber`
    coefficients; zero coefficients are never stored, so equality is plain
    dict comparison.  Instances are immutable.
    """

    __slots__ = ("p", "support")

    def __init__(self, p: int, support=()):
        p = int(p)
        if p < 1:
            raise ValueError("p must be positive")
        clean = {}
        for g, c in dict(support).items():
            g = DihedralElement(int(g[0]), int(g[1]))
            if g.s not in (0, 1) or not 0 <= g.j < p:
                raise ValueError(f"group element {g} out of range for p={p}")
            coeff = _as_cyclotomic(c)
            if not coeff.is_zero():
                clean[g] = coeff
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "support", clean)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("DihedralAlgebraElement is immutable")

    @classmethod
    def zero(cls, p: int) -> "DihedralAlgebraElement":
        return cls(p)

    @classmethod
    def one(cls, p: int) -> "DihedralAlgebraElement":
        return cls(p, {IDENTITY: 1})

    @classmethod
    def from_element(cls, p: int, g: DihedralElement, coeff=1) -> "DihedralAlgebraElement":
        return cls(p, {g: coeff})

    def items(self):
        """Support in deterministic (s, j) order."""
        return tuple(sorted(self.support.items()))

    def coefficient(self, g) -> CyclotomicNumber:
        g = DihedralElement(int(g[0]), int(g[1]))
        return self.support.get(g, CyclotomicNumber.zero())

    def is_zero(self) -> bool:
        return not self.support

    def _require_same_p(self, other: "DihedralAlgebraElement"):
        if self.p != other.p:
            raise ValueError(f"mixed group sizes: {self.p} vs {other.p}")

    def __add__(self, other):
        if not isinstance(other, DihedralAlgebraElement):
            return NotImplemented
        self._require_same_p(other)
        out = dict(self.support)
        for g, c in other.support.items():
            out[g] = out[g] + c if g in out else c
        return DihedralAlgebraElement(self.p, out)

    def __sub__(self, other):
        if not isinstance(other, DihedralAlgebraElement):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return DihedralAlgebraElement(self.p, {g: -c for g, c in self.support.items()})

    def __mul__(self, other):
        if isinstance(other, DihedralAlgebraElement):
            self._require_same_p(other)
            out: dict = {}
            for g1, c1 in self.support.items():
                for g2, c2 in other.support.items():
                    g = dihedral_mul(g1, g2, self.p)
                    term = c1 * c2
                    out[g] = out[g] + term if g in out else term
            return DihedralAlgebraElement(self.p, out)
        if isinstance(other, (int, Fraction, CyclotomicNumber)):
            return DihedralAlgebraElement(
                self.p, {g: c * other for g, c in self.support.items()}
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicNumber)):
            # coefficients commute, so scalar action is two-sided
            return self * other
        return NotImplemented

    def star(self) -> "DihedralAlgebraElement":
        """Adjoint: conjugate coefficients at inverted group elements."""
        return DihedralAlgebraElement(
            self.p,
            {dihedral_inv(g, self.p): c.conjugate() for g, c in self.support.items()},
        )

    def __eq__(self, other):
        if not isinstance(other, DihedralAlgebraElement):
            return NotImplemented
        return self.p == other.p and self.support == other.support

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None

    def __repr__(self):
        if not self.support:
            return f"DihedralAlgebraElement(p={self.p}, 0)"
        parts = ", ".join(f"{tuple(g)}: {c}" for g, c in self.items())
        return f"DihedralAlgebraElement(p={self.p}, {{{parts}}})"


def algebra_pairing(alpha: DihedralAlgebraElement, beta: DihedralAlgebraElement):
    """<e| L(alpha) R(beta) |e> = sum_g alpha_g beta_g.

    L(alpha)R(beta)|e> has coefficient sum over g h^-1 = e, i.e. h = g.
    """
    if alpha.p != beta.p:
        raise ValueError("mixed group sizes")
    total = CyclotomicNumber.zero()
    small, large = alpha.support, beta.support
    if len(large) < len(small):
        small, large = large, small
    for g, c in small.items():
        other = large.get(g)
        if other is not None:
            total = total + c * other
    return total


# ---------------------------------------------------------------------------
# idempotents

_SMALL_PRIMES_CACHE: set = set()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n in _SMALL_PRIMES_CACHE:
        return True
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    _SMALL_PRIMES_CACHE.add(n)
    return True


def _require_odd_prime(p: int) -> int:
    p = int(p)
    if p < 5 or p % 2 == 0 or not _is_prime(p):
        raise ValueError(f"p must be an odd prime >= 5, got {p}")
    return p


def idempotents(p: int) -> dict:
    """The nine self-adjoint idempotents pi_i^(a), keyed by (i, a) in [3]x[3].

    Row i of the result is a resolution of the identity: the three elements
    are mutually orthogonal projections summing to e.  Row 0 is central
    (supported on rotations); rows 1 and 2 add reflection terms weighted by
    cos((2j+1)pi/p) and sin((2j+1)pi/p) respectively.
    """
    return _idempotent_table(_require_odd_prime(p))


def _idempotent_table(p: int) -> dict:
    # the formulas make sense for any odd prime; public callers go through
    # idempotents(), which pins the supported range
    e = DihedralAlgebraElement.one(p)
    inv_p = Fraction(1, p)

    pi00 = DihedralAlgebraElement(
        p, {DihedralElement(0, j): inv_p for j in range(p)}
    )
    pi01 = DihedralAlgebraElement(
        p, {DihedralElement(0, j): 2 * inv_p * cos_value(j, p) for j in range(p)}
    )
    pi02 = e - pi00 - pi01

    half_pi01 = pi01 * Fraction(1, 2)
    pi10 = half_pi01 + DihedralAlgebraElement(
        p,
        {DihedralElement(1, j): inv_p * cos_value(2 * j + 1, 2 * p) for j in range(p)},
    )
    pi11 = pi01 - pi10
    pi12 = e - pi01

    pi20 = half_pi01 + DihedralAlgebraElement(
        p,
        {DihedralElement(1, j): inv_p * sin_value(j, p) for j in range(p)},
    )
    pi21 = pi01 - pi20
    pi22 = e - pi01

    return {
        (0, 0): pi00, (0, 1): pi01, (0, 2): pi02,
        (1, 0): pi10, (1, 1): pi11, (1, 2): pi12,
        (2, 0): pi20, (2, 1): pi21, (2, 2): pi22,
    }


# ---------------------------------------------------------------------------
# regular representation


def basis_index(g: DihedralElement, p: int) -> int:
    """Position of |tau^s rho^j> in the basis: rotations first, then reflections."""
    return g.s * p + g.j


def regular_rep(x, side: str = "left", p: int | None = None):
    """The 2p x 2p matrix of L(x) or R(x) over exact cyclotomic entries.

    ``x`` may be a :class:`DihedralAlgebraElement` or a bare
    :class:`DihedralElement` (then ``p`` is required).  L(g)|h> = |gh> and
    R(g)|h> = |h g^-1>, extended linearly.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if isinstance(x, DihedralAlgebraElement):
        elem = x
    else:
        if p is None:
            raise ValueError("p is required when x is a bare group element")
        elem = DihedralAlgebraElement.from_element(p, x)
    n = 2 * elem.p
    rows = [[0] * n for _ in range(n)]
    for s in (0, 1):
        for j in range(elem.p):
            h = DihedralElement(s, j)
            col = basis_index(h, elem.p)
            for g, c in elem.support.items():
                if side == "left":
                    target = dihedral_mul(g, h, elem.p)
                else:
                    target = dihedral_mul(h, dihedral_inv(g, elem.p), elem.p)
                row = basis_index(target, elem.p)
                existing = rows[row][col]
                rows[row][col] = c if existing == 0 else existing + c
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------
# the correlations


CP_QUESTIONS = (0, 1, 2, "t1", "t2", (0, "t1"), (0, "t2"))
CP_ANSWERS = tuple(_product((0, 1, 2), (0, 1)))
CP_SCENARIO = Scenario(CP_QUESTIONS, CP_QUESTIONS, CP_ANSWERS, CP_ANSWERS)

CP_PRIME_QUESTIONS = (0, 1, 2, 3, 4)
CP_PRIME_ANSWERS = (0, 1, 2)
CP_PRIME_SCENARIO = Scenario(
    CP_PRIME_QUESTIONS, CP_PRIME_QUESTIONS, CP_PRIME_ANSWERS, CP_PRIME_ANSWERS
)

# Answers that must carry the zero projection in any strategy realizing
# build_cp: questions 0,1,2 only answer (a0, 0), t-questions only (0, a1),
# and the product questions use all six answers.
CP_DEAD_ANSWERS = {
    **{x: tuple((a0, 1) for a0 in range(3)) for x in (0, 1, 2)},
    **{x: tuple((a0, a1) for a0 in (1, 2) for a1 in (0, 1)) for x in ("t1", "t2")},
    (0, "t1"): (),
    (0, "t2"): (),
}


def _cp_measurement_elements(p: int) -> dict:
    """Group-algebra element of each measurement operator, keyed question ->
    answer -> element.  Answers absent from a family are the zero operator."""
    pi = idempotents(p)
    e = DihedralAlgebraElement.one(p)
    reflections = {"t1": generator_t1(p), "t2": generator_t2(p)}
    half = Fraction(1, 2)

    out: dict = {}
    for x in (0, 1, 2):
        out[x] = {(a0, 0): pi[(x, a0)] for a0 in range(3)}
    for name, g in reflections.items():
        t = DihedralAlgebraElement.from_element(p, g)
        out[name] = {
            (0, 0): (e + t) * half,
            (0, 1): (e - t) * half,
        }
    for name in ("t1", "t2"):
        out[(0, name)] = {
            (a0, a1): out[0][(a0, 0)] * out[name][(0, a1)]
            for a0 in range(3)
            for a1 in (0, 1)
        }
    return out


def build_cp(p: int) -> Correlation:
    """The exact seven-question correlation of the dihedral construction.

    Questions 0,1,2 measure the three idempotent rows, t1/t2 measure the two
    reflections, and (0,t) asks both question 0 and question t at once (the
    row-0 idempotents are central, so the joint measurement is projective).
    Alice uses the left regular representation and Bob the right one, with
    the counting-measure unit vector |e> as the state, which makes the value
    at (a, b | x, y) equal to sum_g alpha_g beta_g over the two measurement
    elements.
    """
    p = _require_odd_prime(p)
    elements = _cp_measurement_elements(p)
    table: dict = {}
    for x in CP_QUESTIONS:
        for y in CP_QUESTIONS:
            for a, alpha in elements[x].items():
                for b, beta in elements[y].items():
                    value = algebra_pairing(alpha, beta)
                    if not value.is_zero():
                        table[(a, b, x, y)] = value
    return Correlation(CP_SCENARIO, table, exact=True)


def build_cp_prime(p: int) -> Correlation:
    """The exact five-question correlation induced on the complement of the
    trivial component.

    With gamma = e - pi_0^(0), entries are
    <e| L(gamma) P Q L(gamma) |e> / ((p-1)/p); question 0 carries the two
    nontrivial row-0 idempotents, questions 1,2 the reflections, and
    questions 3,4 the full rows 1 and 2.
    """
    p = _require_odd_prime(p)
    pi = idempotents(p)
    e = DihedralAlgebraElement.one(p)
    reflections = {1: generator_t1(p), 2: generator_t2(p)}
    half = Fraction(1, 2)

    families: dict = {0: {0: pi[(0, 1)], 1: pi[(0, 2)]}}
    for x, g in reflections.items():
        t = DihedralAlgebraElement.from_element(p, g)
        families[x] = {0: (e + t) * half, 1: (e - t) * half}
    families[3] = {a: pi[(1, a)] for a in range(3)}
    families[4] = {a: pi[(2, a)] for a in range(3)}

    gamma = e - pi[(0, 0)]
    scale = Fraction(p, p - 1)  # 1 / ||L(gamma)|e>||^2
    table: dict = {}
    for x in CP_PRIME_QUESTIONS:
        for y in CP_PRIME_QUESTIONS:
            for a, alpha in families[x].items():
                for b, beta in families[y].items():
                    value = algebra_pairing(gamma * alpha * gamma, beta) * scale
                    if not value.is_zero():
                        table[(a, b, x, y)] = value
    return Correlation(CP_PRIME_SCENARIO, table, exact=True)


# ---------------------------------------------------------------------------
# the canonical strategy


class CanonicalCpStrategy(Strategy):
    """The commuting-operator strategy on l2(D_p) that realizes build_cp.

    Alice's projections are left translations of the measurement elements,
    Bob's are right translations, and the state is the standard basis vector
    at the identity.  Construction verifies exactly, at the algebra level,
    that every family is a projective measurement: each element is a
    self-adjoint idempotent, distinct elements multiply to zero, and each
    family sums to e.  (For the product questions this reduces to centrality
    of the row-0 idempotents, checked directly.)
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = _require_odd_prime(p)
        elements = _cp_measurement_elements(p)
        e = DihedralAlgebraElement.one(p)

        for x in (0, 1, 2, "t1", "t2"):
            family = elements[x]
            total = DihedralAlgebraElement.zero(p)
            for a, elt in family.items():
                total = total + elt
                if elt.star() != elt:
                    raise AssertionError(f"measurement ({x}, {a}) is not self-adjoint")
                for b, other in family.items():
                    prod = elt * other
                    expected = elt if a == b else DihedralAlgebraElement.zero(p)
                    if prod != expected:
                        raise AssertionError(f"family {x} is not projective at {a},{b}")
            if total != e:
                raise AssertionError(f"family {x} does not sum to the identity")
        # centrality of the row-0 idempotents makes the product families
        # projective once the factors are
        for a0 in range(3):
            pi = elements[0][(a0, 0)]
            for name in ("t1", "t2"):
                for t_half in elements[name].values():
                    if pi * t_half != t_half * pi:
                        raise AssertionError("row-0 idempotents are not central")
        for x in ((0, "t1"), (0, "t2")):
            total = DihedralAlgebraElement.zero(p)
            for elt in elements[x].values():
                total = total + elt
            if total != e:
                raise AssertionError(f"family {x} does not sum to the identity")

        alice = {
            x: {a: regular_rep(elt, "left") for a, elt in fam.items()}
            for x, fam in elements.items()
        }
        bob = {
            y: {b: regular_rep(elt, "right") for b, elt in fam.items()}
            for y, fam in elements.items()
        }
        state = tuple(1 if i == 0 else 0 for i in range(2 * p))
        super().__init__(CP_SCENARIO, 2 * p, state, alice, bob, "commuting", True)
        object.__setattr__(self, "p", p)


def canonical_strategy(p: int) -> CanonicalCpStrategy:
    """Explicit exact strategy whose correlation is build_cp(p), entry for entry."""
    return CanonicalCpStrategy(p)


# ---------------------------------------------------------------------------
# extraction of a strategy for build_cp_prime


def extraction_normalization(s: Strategy):
    """||(1 - M_0^((0,0))) psi||^2, exact for exact strategies.

    This is the normalization constant of the extracted state; it equals
    (p-1)/p on the canonical strategy.
    """
    return 1 - s.outcome_weight("A", 0, (0, 0))


def extract_cp_prime_strategy(s: Strategy, tol: float = 1e-9) -> Strategy:
    """Turn a good strategy for build_cp into one for build_cp_prime.

    The new state is (1 - M_0^((0,0)))|psi> normalized, and the measurements
    are reindexed: question 0 gets M_0^((1,0)), M_0^((2,0)) and the zero
    projection, questions 1,2 get the t1/t2 families, questions 3,4 get the
    row-1/row-2 families (Bob symmetric).  Everything is compressed onto the
    range of 1 - M_0^((0,0)) so the reindexed families stay complete.

    Works in floating point; exact input strategies are converted first.
    Raises NotGoodStrategy if an answer that build_cp gives zero probability
    carries a nonzero projection, if the state has no component outside the
    range of M_0^((0,0)), or if compression breaks projectivity (the input
    was not good).
    """
    if s.scenario != CP_SCENARIO:
        raise ScenarioMismatch("strategy does not use the seven-question scenario")
    if s.mode != "commuting":
        raise NotGoodStrategy("extraction needs a commuting-operator strategy")
    sf = s.to_float()

    for party, ops in (("A", sf.alice), ("B", sf.bob)):
        for x, dead in CP_DEAD_ANSWERS.items():
            for ans in dead:
                if np.linalg.norm(ops[x][ans]) > tol:
                    raise NotGoodStrategy(
                        f"party {party} answers {ans} to {x!r} with a nonzero projection"
                    )

    m0 = sf.alice[0][(0, 0)]
    d = sf.dimension
    complement = np.eye(d, dtype=complex) - m0
    residual = complement @ sf.state
    norm = float(np.linalg.norm(residual))
    if norm <= tol:
        raise NotGoodStrategy("state is entirely inside the trivial component")

    # orthonormal basis of range(1 - M_0^((0,0))) via the spectral split
    eigenvalues, vectors = np.linalg.eigh(complement)
    keep = eigenvalues > 0.5
    if not keep.any():
        raise NotGoodStrategy("1 - M_0^((0,0)) has trivial range")
    isometry = vectors[:, keep]

    def compress(matrix):
        return isometry.conj().T @ matrix @ isometry

    def build_party(ops):
        return {
            0: {0: compress(ops[0][(1, 0)]), 1: compress(ops[0][(2, 0)])},
            1: {a: compress(ops["t1"][(0, a)]) for a in (0, 1)},
            2: {a: compress(ops["t2"][(0, a)]) for a in (0, 1)},
            3: {a: compress(ops[1][(a, 0)]) for a in range(3)},
            4: {a: compress(ops[2][(a, 0)]) for a in range(3)},
        }

    extracted = Strategy(
        CP_PRIME_SCENARIO,
        isometry.shape[1],
        isometry.conj().T @ (residual / norm),
        build_party(sf.alice),
        build_party(sf.bob),
        "commuting",
        exact=False,
    )
    report = extracted.check_invariants(tol=tol, level="projections")
    if not report.ok(tol):
        raise NotGoodStrategy(
            "compressed measurements are not projective; the input strategy "
            f"was not good (defects {report})"
        )
    return extracted


# ---------------------------------------------------------------------------
# psi vectors and the order-p certificate


def _infer_p(s: Strategy, p: int | None) -> int:
    if p is not None:
        return _require_odd_prime(p)
    if isinstance(s, CanonicalCpStrategy):
        return s.p
    raise ValueError("p cannot be inferred from the strategy; pass p explicitly")


def _require_primitive_root(r: int, p: int) -> int:
    r = r % p
    if r == 0:
        raise NotPrimitiveRoot(f"{r} is not invertible mod {p}")
    order = 1
    power = r % p
    while power != 1:
        power = power * r % p
        order += 1
    if order != p - 1:
        raise NotPrimitiveRoot(f"{r} has order {order} mod {p}, need {p - 1}")
    return r


def _float_operators(s: Strategy):
    """State and per-question answer->matrix maps, in floating point."""
    sf = s.to_float()
    return sf.state, sf.alice, sf.bob


def _reflection_observables(ops):
    """M_t = M_t^((0,0)) - M_t^((0,1)) for t1 and t2, and their product."""
    m_t1 = ops["t1"][(0, 0)] - ops["t1"][(0, 1)]
    m_t2 = ops["t2"][(0, 0)] - ops["t2"][(0, 1)]
    return m_t1, m_t2, m_t1 @ m_t2


def psi_vectors(s: Strategy, u_a, u_b, r: int, *, p: int | None = None) -> list:
    """The p+1 vectors psi_0 ... psi_p attached to a strategy for build_cp.

    psi_0 and psi_p project the state onto the trivial component and split it
    by the t1 eigenvalue; psi_1 is the quarter sum
    (M_1^((0,0)) - i M_2 M_1^((1,0)) + i M_2 M_1^((0,0)) + M_1^((1,0))) psi / 2
    with M_2 the row-2 difference observable; and psi_j for 2 <= j <= p-1 is
    (U_A U_B)^(log_r j) psi_1 with discrete logs base r.  On the canonical
    strategy with the automorphism unitaries these are, exactly, the isotypic
    components of the state.
    """
    p = _infer_p(s, p)
    r = _require_primitive_root(r, p)
    psi, alice, _ = _float_operators(s)
    u_a = np.asarray(u_a, dtype=complex)
    u_b = np.asarray(u_b, dtype=complex)
    d = psi.shape[0]
    for name, u in (("U_A", u_a), ("U_B", u_b)):
        if u.shape != (d, d):
            raise ValueError(f"{name} must be {d}x{d}")
        if np.linalg.norm(u.conj().T @ u - np.eye(d)) > 1e-8:
            raise ValueError(f"{name} is not unitary")

    m0 = alice[0][(0, 0)]
    psi0 = alice["t1"][(0, 0)] @ (m0 @ psi)
    psip = alice["t1"][(0, 1)] @ (m0 @ psi)

    m2 = alice[2][(0, 0)] - alice[2][(1, 0)]
    m1_00 = alice[1][(0, 0)]
    m1_10 = alice[1][(1, 0)]
    psi1 = 0.5 * (
        m1_00 @ psi
        - 1j * (m2 @ (m1_10 @ psi))
        + 1j * (m2 @ (m1_00 @ psi))
        + m1_10 @ psi
    )

    by_index = {0: psi0, 1: psi1, p: psip}
    step = u_a @ u_b
    current = psi1
    j = 1
    for _ in range(p - 2):
        current = step @ current
        j = j * r % p
        by_index[j] = current
    return [by_index[j] for j in range(p + 1)]


def automorphism_unitary(p: int, r: int, side: str):
    """A basis permutation witnessing the rescaling rho -> rho^r on the state.

    Side A transposes the rotation basis vectors |rho^1> and |rho^r| and
    fixes everything else; side B sends |rho^m> to |rho^(t(m)/r)> with the
    same transposition t, fixing reflections.  The product U_A U_B then maps
    |rho^m> to |rho^(m/r)>, and both factors fix |e> and the reflection
    subspace.  These are the unitaries fed to verify_fcp; none of the
    certificate's hypotheses are assumed from the construction, they are all
    checked numerically there.
    """
    p = _require_odd_prime(p)
    r = _require_primitive_root(r, p)
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    r_inv = pow(r, p - 2, p)

    def transposition(m: int) -> int:
        if m == 1:
            return r
        if m == r:
            return 1
        return m

    perm = np.zeros((2 * p, 2 * p))
    for m in range(p):
        image = transposition(m) if side == "A" else transposition(r_inv * m % p)
        perm[image, m] = 1.0
    for j in range(p, 2 * p):
        perm[j, j] = 1.0
    return perm


@dataclass(frozen=True)
class FcpReport:
    """Defects from checking the order-p certificate on a strategy.

    ``hypothesis_defects`` holds, in order: commutation of the two unitaries
    on the state, U_A against every Bob projection, U_B against every Alice
    projection, U_A U_B fixing the state, and the two rescaling equations for
    the reflection-product observables of Bob and Alice.  The conclusion is
    ||(M_t1 M_t2)^p psi - psi||, and eigenvalue_defects[j-1] is
    ||M_t1 M_t2 psi_j - w^j psi_j|| for j = 1 .. p-1.  All defects are always
    computed; ``passed`` summarizes them against ``tolerance``.
    """

    p: int
    r: int
    tolerance: float
    hypothesis_defects: tuple
    conclusion_defect: float
    eigenvalue_defects: tuple

    @property
    def hypotheses_ok(self) -> bool:
        return max(self.hypothesis_defects) <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.hypotheses_ok and self.conclusion_defect <= self.tolerance

    @property
    def max_defect(self) -> float:
        return max(
            max(self.hypothesis_defects),
            self.conclusion_defect,
            max(self.eigenvalue_defects),
        )


def verify_fcp(
    s: Strategy, u_a, u_b, r: int, *, p: int | None = None, tol: float = 1e-9
) -> FcpReport:
    """Check the hypotheses and conclusion of the order-p certificate.

    The certificate: if U_A and U_B commute on the state, commute with the
    other party's projections on the state, fix the state as a product, and
    rescale the reflection-product observables by the exponent r, then
    (M_t1 M_t2)^p fixes the state.  Every hypothesis defect, the conclusion
    defect, and the per-eigenvector defects are reported, whether or not the
    hypotheses hold.
    """
    p = _infer_p(s, p)
    r = _require_primitive_root(r, p)
    psi, alice, bob = _float_operators(s)
    u_a = np.asarray(u_a, dtype=complex)
    u_b = np.asarray(u_b, dtype=complex)

    def defect(u, v) -> float:
        return float(np.linalg.norm(u - v))

    ua_psi = u_a @ psi
    ub_psi = u_b @ psi
    hyp1 = defect(u_a @ ub_psi, u_b @ ua_psi)
    hyp2 = max(
        defect(u_a @ (n @ psi), n @ ua_psi)
        for pvm in bob.values()
        for n in pvm.values()
    )
    hyp3 = max(
        defect(u_b @ (m @ psi), m @ ub_psi)
        for pvm in alice.values()
        for m in pvm.values()
    )
    hyp4 = defect(u_a @ ub_psi, psi)

    _, _, n_prod = _reflection_observables(bob)
    _, _, m_prod = _reflection_observables(alice)
    n_prod_r = np.linalg.matrix_power(n_prod, r)
    m_prod_r = np.linalg.matrix_power(m_prod, r)
    hyp5 = defect(n_prod @ ub_psi, u_b @ (n_prod_r @ psi))
    hyp6 = defect(m_prod @ ua_psi, u_a @ (m_prod_r @ psi))

    conclusion = defect(np.linalg.matrix_power(m_prod, p) @ psi, psi)

    vectors = psi_vectors(s, u_a, u_b, r, p=p)
    omega = cmath.exp(2j * cmath.pi / p)
    eigen = tuple(
        defect(m_prod @ vectors[j], omega**j * vectors[j]) for j in range(1, p)
    )

    return FcpReport(
        p=p,
        r=r,
        tolerance=tol,
        hypothesis_defects=(hyp1, hyp2, hyp3, hyp4, hyp5, hyp6),
        conclusion_defect=conclusion,
        eigenvalue_defects=eigen,
    )
