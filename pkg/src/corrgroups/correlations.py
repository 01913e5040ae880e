"""Correlation tables, measurement strategies, and the checkers tying the
two together: validity, nonsignalling, synchronicity, perfect-correlation
conditions for binary linear systems, and extraction of binary observables
from good strategies.

Values are either exact (Fraction / CyclotomicNumber) or floating point;
every checker keeps exact inputs exact and reports defects as floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _exact as xla
from .cyclotomic import CyclotomicNumber
from .presentations import BinaryLinearSystem

DEFAULT_TOL = 1e-9


class ScenarioMismatch(Exception):
    """The scenario does not have the shape a check requires."""


class InvariantViolation(Exception):
    """A strategy failed its structural invariants."""


class NotGoodStrategy(Exception):
    """Some outcome has zero probability but a nonzero projection."""


# -- labels and values ----------------------------------------------------


def variable_label(i: int) -> tuple:
    """Question label for the i-th variable of a linear system."""
    return ("x", i)


def _label_to_json(label):
    if isinstance(label, tuple):
        return [_label_to_json(part) for part in label]
    return label


def _label_from_json(data):
    if isinstance(data, list):
        return tuple(_label_from_json(part) for part in data)
    return data


def _canonical_exact(value):
    if isinstance(value, CyclotomicNumber):
        return value.to_fraction() if value.is_rational() else value
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise TypeError(f"not an exact value: {value!r}")


def _canonical_float(value) -> float:
    if isinstance(value, CyclotomicNumber):
        return value.to_float()
    if isinstance(value, Fraction):
        return float(value)
    z = complex(value)
    if abs(z.imag) > 1e-9 * max(1.0, abs(z.real)):
        raise ValueError(f"value has a nonzero imaginary part: {value!r}")
    return z.real


def _value_to_json(value):
    if isinstance(value, CyclotomicNumber):
        return value.to_json()
    if isinstance(value, Fraction):
        return {"rat": [value.numerator, value.denominator]}
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _value_from_json(data, exact: bool):
    if isinstance(data, dict):
        if "conductor" in data:
            return CyclotomicNumber.from_json(data)
        if "rat" in data:
            return Fraction(int(data["rat"][0]), int(data["rat"][1]))
        if "re" in data:
            return complex(data["re"], data["im"])
        raise ValueError(f"unknown value encoding: {data!r}")
    if exact:
        if isinstance(data, int):
            return Fraction(data)
        raise ValueError("exact tables cannot hold bare floats")
    return float(data)


# -- scenario and correlation ---------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """Question and answer label sets (X, Y, A, B) of a two-party scenario.

    Labels are arbitrary hashable values; tuples survive JSON round trips.
    """

    X: tuple
    Y: tuple
    A: tuple
    B: tuple

    def __post_init__(self):
        for name in ("X", "Y", "A", "B"):
            labels = tuple(getattr(self, name))
            if not labels:
                raise ValueError(f"label set {name} is empty")
            if len(set(labels)) != len(labels):
                raise ValueError(f"label set {name} has duplicates")
            object.__setattr__(self, name, labels)

    @property
    def is_square(self) -> bool:
        return self.X == self.Y and self.A == self.B

    def to_json(self) -> dict:
        return {
            name: [_label_to_json(l) for l in getattr(self, name)]
            for name in ("X", "Y", "A", "B")
        }

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        return cls(
            *(tuple(_label_from_json(l) for l in data[name]) for name in ("X", "Y", "A", "B"))
        )


class Correlation:
    """A table P(a, b | x, y) over a scenario, exact or floating point.

    Entries not present in the table are zero.  Exact tables store Fractions
    and CyclotomicNumbers; float tables store plain floats.
    """

    __slots__ = ("scenario", "exact", "_blocks")

    def __init__(self, scenario: Scenario, table: dict, exact: bool):
        canon = _canonical_exact if exact else _canonical_float
        x_set, y_set = set(scenario.X), set(scenario.Y)
        a_set, b_set = set(scenario.A), set(scenario.B)
        blocks: dict = {}
        for (a, b, x, y), value in table.items():
            if x not in x_set or y not in y_set or a not in a_set or b not in b_set:
                raise ValueError(f"entry ({a!r}, {b!r}, {x!r}, {y!r}) is outside the scenario")
            v = canon(value)
            if v == 0:
                continue
            blocks.setdefault((x, y), {})[(a, b)] = v
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "_blocks", blocks)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Correlation is immutable")

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def value(self, a, b, x, y):
        return self._blocks.get((x, y), {}).get((a, b), self._zero())

    def block(self, x, y) -> dict:
        """All nonzero entries for a fixed question pair, keyed by (a, b)."""
        return dict(self._blocks.get((x, y), {}))

    def nonzero_items(self):
        for (x, y), block in self._blocks.items():
            for (a, b), v in block.items():
                yield a, b, x, y, v

    def equals(self, other: "Correlation", tol: float | None = None) -> bool:
        """Table equality; exact when both sides are exact and tol is None."""
        if self.scenario != other.scenario:
            return False
        exact_cmp = tol is None and self.exact and other.exact
        for x in self.scenario.X:
            for y in self.scenario.Y:
                keys = set(self.block(x, y)) | set(other.block(x, y))
                for a, b in keys:
                    mine, theirs = self.value(a, b, x, y), other.value(a, b, x, y)
                    if exact_cmp:
                        if mine != theirs:
                            return False
                    elif abs(_canonical_float(mine) - _canonical_float(theirs)) > (tol or 0.0):
                        return False
        return True

    def to_json(self) -> dict:
        x_pos = {x: i for i, x in enumerate(self.scenario.X)}
        y_pos = {y: i for i, y in enumerate(self.scenario.Y)}
        a_pos = {a: i for i, a in enumerate(self.scenario.A)}
        b_pos = {b: i for i, b in enumerate(self.scenario.B)}
        entries = sorted(
            self.nonzero_items(),
            key=lambda it: (x_pos[it[2]], y_pos[it[3]], a_pos[it[0]], b_pos[it[1]]),
        )
        return {
            "scenario": self.scenario.to_json(),
            "exact": self.exact,
            "table": [
                [
                    _label_to_json(a),
                    _label_to_json(b),
                    _label_to_json(x),
                    _label_to_json(y),
                    _value_to_json(v),
                ]
                for a, b, x, y, v in entries
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Correlation":
        scenario = Scenario.from_json(data["scenario"])
        exact = bool(data["exact"])
        table = {}
        for a, b, x, y, v in data["table"]:
            key = tuple(_label_from_json(part) for part in (a, b, x, y))
            table[key] = _value_from_json(v, exact)
        return cls(scenario, table, exact)


# -- correlation checkers --------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Nonnegativity and per-question-pair normalization defects."""

    negative_entries: tuple
    normalization_defects: dict
    max_defect: float

    def ok(self, tol: float = 0.0) -> bool:
        return self.max_defect <= tol


def validate(c: Correlation) -> ValidationReport:
    """Check that c is a correlation: entries >= 0, each block sums to 1."""
    negative = []
    norm: dict = {}
    worst = 0.0
    for x in c.scenario.X:
        for y in c.scenario.Y:
            block = c.block(x, y)
            total = sum(block.values()) if block else c._zero()
            if c.exact:
                defect = _entry_defect_exact(total - 1)
            else:
                defect = abs(total - 1.0)
            norm[(x, y)] = defect
            worst = max(worst, defect)
            for (a, b), v in block.items():
                bad = _entry_negativity(v, c.exact)
                if bad > 0.0:
                    negative.append((a, b, x, y, v))
                    worst = max(worst, bad)
    return ValidationReport(tuple(negative), norm, worst)


def _entry_defect_exact(value) -> float:
    """|value| as a float, where value is an exact difference (possibly complex)."""
    if isinstance(value, CyclotomicNumber):
        return abs(value.to_complex())
    return abs(float(value))


def _entry_negativity(value, exact: bool) -> float:
    if not exact:
        return max(0.0, -value)
    if isinstance(value, CyclotomicNumber):
        if not value.is_real():
            return abs(value.to_complex().imag)
        return max(0.0, -value.to_float())
    return max(0.0, -float(value))


@dataclass(frozen=True)
class NonsignallingReport:
    """Largest variation of a party's marginal across the other's questions."""

    max_defect: float
    worst: tuple | None

    def ok(self, tol: float = 0.0) -> bool:
        return self.max_defect <= tol


def is_nonsignalling(c: Correlation) -> NonsignallingReport:
    worst, witness = 0.0, None
    # Alice's marginal must not depend on y; Bob's must not depend on x.
    for x in c.scenario.X:
        for a in c.scenario.A:
            values = [
                _canonical_float(sum((c.value(a, b, x, y) for b in c.scenario.B), c._zero()))
                for y in c.scenario.Y
            ]
            spread = max(values) - min(values)
            if spread > worst:
                worst, witness = spread, ("A", a, x)
    for y in c.scenario.Y:
        for b in c.scenario.B:
            values = [
                _canonical_float(sum((c.value(a, b, x, y) for a in c.scenario.A), c._zero()))
                for x in c.scenario.X
            ]
            spread = max(values) - min(values)
            if spread > worst:
                worst, witness = spread, ("B", b, y)
    return NonsignallingReport(worst, witness)


def is_synchronous(c: Correlation, tol: float | None = None) -> bool:
    """Whether the diagonal answers carry all the mass on equal questions."""
    if c.scenario.X != c.scenario.Y or c.scenario.A != c.scenario.B:
        raise ScenarioMismatch("synchronicity needs X = Y and A = B")
    for x in c.scenario.X:
        total = sum((c.value(k, k, x, x) for k in c.scenario.A), c._zero())
        if c.exact and tol is None:
            if total != 1:
                return False
        elif abs(_canonical_float(total) - 1.0) > (DEFAULT_TOL if tol is None else tol):
            return False
    return True


# -- perfect correlations for binary linear systems -------------------------


def _perfect_scenario(system: BinaryLinearSystem) -> tuple[tuple, tuple, int]:
    kappa = system.uniform_row_size()
    if kappa is None:
        raise ScenarioMismatch("all rows must have the same number of nonzero entries")
    questions = tuple(range(system.m)) + tuple(variable_label(i) for i in range(system.n))
    answers = tuple(itertools.product((0, 1), repeat=kappa))
    return questions, answers, kappa


def perfect_scenario(system: BinaryLinearSystem) -> Scenario:
    """The scenario ([m] + variables, same, Z2^kappa, Z2^kappa) of a system."""
    questions, answers, _ = _perfect_scenario(system)
    return Scenario(questions, questions, answers, answers)


def _require_perfect_scenario(scenario: Scenario, system: BinaryLinearSystem) -> int:
    questions, answers, kappa = _perfect_scenario(system)
    if set(scenario.X) != set(questions) or set(scenario.Y) != set(questions):
        raise ScenarioMismatch("questions must be the row indices plus the variables")
    if set(scenario.A) != set(answers) or set(scenario.B) != set(answers):
        raise ScenarioMismatch(f"answers must be all of Z2^{kappa}")
    return kappa


@dataclass(frozen=True)
class PerfectCorrelationReport:
    """Violating (a, b, x, y) tuples for each of the six zero conditions.

    Conditions, in order:
      1. a row question was answered with an odd-parity string;
      2. a variable question was answered with a nonzero prefix;
      3. two row questions disagree on a shared variable;
      4. a row answer disagrees with a directly asked variable (row on the left);
      5. a row answer disagrees with a directly asked variable (row on the right);
      6. the same variable was asked twice and answered differently.
    """

    violations: tuple

    @property
    def passed(self) -> bool:
        return all(not v for v in self.violations)


def check_perfect(
    c: Correlation, system: BinaryLinearSystem, tol: float = 0.0
) -> PerfectCorrelationReport:
    """Test the six zero conditions of a perfect correlation for ``system``."""
    kappa = _require_perfect_scenario(c.scenario, system)
    supports = [set(row) for row in system.rows]
    hits = ([], [], [], [], [], [])
    for a, b, x, y, v in c.nonzero_items():
        if not c.exact and _canonical_float(v) <= tol:
            continue
        x_row = isinstance(x, int)
        y_row = isinstance(y, int)
        if (x_row and sum(a) % 2) or (y_row and sum(b) % 2):
            hits[0].append((a, b, x, y))
        if (not x_row and any(a[:-1])) or (not y_row and any(b[:-1])):
            hits[1].append((a, b, x, y))
        if x_row and y_row:
            shared = supports[x] & supports[y]
            if any(a[system.phi(x, k)] != b[system.phi(y, k)] for k in shared):
                hits[2].append((a, b, x, y))
        if x_row and not y_row and y[1] in supports[x]:
            if a[system.phi(x, y[1])] != b[kappa - 1]:
                hits[3].append((a, b, x, y))
        if not x_row and y_row and x[1] in supports[y]:
            if a[kappa - 1] != b[system.phi(y, x[1])]:
                hits[4].append((a, b, x, y))
        if not x_row and x == y and a[kappa - 1] != b[kappa - 1]:
            hits[5].append((a, b, x, y))
    return PerfectCorrelationReport(tuple(tuple(h) for h in hits))


# -- strategies -------------------------------------------------------------


def _as_exact_matrix(m, d: int):
    rows = tuple(tuple(row) for row in m)
    if len(rows) != d or any(len(row) != d for row in rows):
        raise ValueError(f"expected a {d}x{d} matrix")
    return rows


class Strategy:
    """Projective measurements for both parties with a shared state.

    mode "commuting": one register of dimension d; the correlation rule is
    <psi| M N |psi> and cross-party projections are expected to commute.
    mode "tensor": the state lives on C^d x C^d, Alice acts on the left
    register and Bob on the right, and the rule is <psi| M (x) N |psi>.

    Exact strategies hold nested-tuple matrices over Fraction or
    CyclotomicNumber entries; float strategies hold numpy arrays.  Missing
    answers are implicitly the zero matrix (measurements may have dead
    outcomes).
    """

    __slots__ = ("scenario", "dimension", "state", "alice", "bob", "mode", "exact")

    def __init__(self, scenario, dimension, state, alice, bob, mode, exact):
        if mode not in ("tensor", "commuting"):
            raise ValueError("mode must be 'tensor' or 'commuting'")
        d = int(dimension)
        full = d * d if mode == "tensor" else d
        if exact:
            state = tuple(state)
            if len(state) != full:
                raise ValueError(f"state must have length {full}")
        else:
            state = np.asarray(state, dtype=complex).reshape(full)
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "dimension", d)
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "alice", self._clean_party(alice, scenario.X, scenario.A))
        object.__setattr__(self, "bob", self._clean_party(bob, scenario.Y, scenario.B))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Strategy is immutable")

    def _clean_party(self, party, questions, answers):
        if set(party) - set(questions):
            raise ValueError("measurement for an unknown question")
        d = self.dimension
        cleaned = {}
        for q in questions:
            given = dict(party.get(q, {}))
            if set(given) - set(answers):
                raise ValueError(f"unknown answer label for question {q!r}")
            pvm = {}
            for ans in answers:
                if ans in given:
                    m = given[ans]
                    pvm[ans] = _as_exact_matrix(m, d) if self.exact else np.asarray(
                        m, dtype=complex
                    ).reshape(d, d)
                else:
                    pvm[ans] = xla.zeros(d) if self.exact else np.zeros((d, d), dtype=complex)
            cleaned[q] = pvm
        return cleaned

    # -- basic linear algebra, dispatched on exactness --

    def _identity(self):
        return xla.identity(self.dimension) if self.exact else np.eye(self.dimension, dtype=complex)

    def _mat_norm(self, m) -> float:
        return xla.frobenius_float(m) if self.exact else float(np.linalg.norm(m))

    def _mat_mul(self, a, b):
        return xla.mat_mul(a, b) if self.exact else a @ b

    def _mat_sub(self, a, b):
        return xla.mat_sub(a, b) if self.exact else a - b

    def _state_matrix(self):
        """The state of a tensor strategy reshaped to d x d."""
        d = self.dimension
        if self.exact:
            return tuple(self.state[i * d : (i + 1) * d] for i in range(d))
        return self.state.reshape(d, d)

    def outcome_weight(self, party: str, question, answer):
        """<psi| P |psi> for one projection (on its own register in tensor mode)."""
        pvm = (self.alice if party == "A" else self.bob)[question]
        p = pvm[answer]
        if self.mode == "commuting":
            if self.exact:
                return _canonical_exact(xla.vec_dot(self.state, xla.mat_vec(p, self.state)))
            return float(np.vdot(self.state, p @ self.state).real)
        psi = self._state_matrix()
        if self.exact:
            acted = xla.mat_mul(p, psi) if party == "A" else xla.mat_mul(psi, xla.transpose(p))
            total = sum(
                xla.vec_dot(psi[i], acted[i]) for i in range(self.dimension)
            )
            return _canonical_exact(total)
        acted = p @ psi if party == "A" else psi @ p.T
        return float(np.vdot(psi, acted).real)

    def check_invariants(self, tol: float | None = None, level: str | None = None):
        """Verify state, completeness, projections and (optionally) commutation.

        level is "basic" (state and completeness), "projections" (plus
        P^2 = P = P*), or "full" (plus cross-party commutation in commuting
        mode).  Default: "full" for float strategies, "projections" for exact
        ones, where the quadratically many exact products are costly.
        """
        if level is None:
            level = "projections" if self.exact else "full"
        if level not in ("basic", "projections", "full"):
            raise ValueError("level must be 'basic', 'projections' or 'full'")
        if self.exact:
            norm_defect = _entry_defect_exact(
                _canonical_exact(xla.vec_dot(self.state, self.state)) - 1
            )
        else:
            norm_defect = abs(float(np.vdot(self.state, self.state).real) - 1.0)
        completeness = 0.0
        projection = None
        commutation = None
        eye = self._identity()
        parties = (self.alice, self.bob)
        for party in parties:
            for pvm in party.values():
                total = None
                for p in pvm.values():
                    total = p if total is None else (
                        xla.mat_add(total, p) if self.exact else total + p
                    )
                completeness = max(completeness, self._mat_norm(self._mat_sub(total, eye)))
        if level in ("projections", "full"):
            projection = 0.0
            for party in parties:
                for pvm in party.values():
                    for p in pvm.values():
                        if self.exact and xla.is_zero_matrix(p):
                            continue
                        adj = xla.adjoint(p) if self.exact else p.conj().T
                        projection = max(
                            projection,
                            self._mat_norm(self._mat_sub(self._mat_mul(p, p), p)),
                            self._mat_norm(self._mat_sub(adj, p)),
                        )
        if level == "full" and self.mode == "commuting":
            commutation = 0.0
            bobs = [
                p
                for pvm in self.bob.values()
                for p in pvm.values()
                if not (self.exact and xla.is_zero_matrix(p))
            ]
            for pvm in self.alice.values():
                for m in pvm.values():
                    if self.exact and xla.is_zero_matrix(m):
                        continue
                    for n in bobs:
                        commutation = max(
                            commutation,
                            self._mat_norm(
                                self._mat_sub(self._mat_mul(m, n), self._mat_mul(n, m))
                            ),
                        )
        return StrategyReport(level, norm_defect, completeness, projection, commutation)

    def to_float(self) -> "Strategy":
        """Explicit conversion to the float backend (no-op if already float)."""
        if not self.exact:
            return self

        def convert_party(party):
            return {
                q: {
                    ans: np.array(
                        [[xla.to_complex(v) for v in row] for row in p], dtype=complex
                    )
                    for ans, p in pvm.items()
                }
                for q, pvm in party.items()
            }

        state = np.array([xla.to_complex(v) for v in self.state], dtype=complex)
        return Strategy(
            self.scenario,
            self.dimension,
            state,
            convert_party(self.alice),
            convert_party(self.bob),
            self.mode,
            exact=False,
        )

    def to_json(self) -> dict:
        def encode_party(party, questions):
            return [
                [
                    _label_to_json(q),
                    [
                        [_label_to_json(ans), [[_value_to_json(v) for v in row] for row in p]]
                        for ans, p in party[q].items()
                        if not (xla.is_zero_matrix(p) if self.exact else not p.any())
                    ],
                ]
                for q in questions
            ]

        return {
            "mode": self.mode,
            "exact": self.exact,
            "dimension": self.dimension,
            "scenario": self.scenario.to_json(),
            "state": [_value_to_json(v) for v in (self.state if self.exact else self.state.tolist())],
            "alice": encode_party(self.alice, self.scenario.X),
            "bob": encode_party(self.bob, self.scenario.Y),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Strategy":
        exact = bool(data["exact"])
        scenario = Scenario.from_json(data["scenario"])

        def decode_party(encoded):
            return {
                _label_from_json(q): {
                    _label_from_json(ans): [
                        [_value_from_json(v, exact) for v in row] for row in matrix
                    ]
                    for ans, matrix in pvm
                }
                for q, pvm in encoded
            }

        return cls(
            scenario,
            int(data["dimension"]),
            [_value_from_json(v, exact) for v in data["state"]],
            decode_party(data["alice"]),
            decode_party(data["bob"]),
            data["mode"],
            exact,
        )


@dataclass(frozen=True)
class StrategyReport:
    """Float defects from Strategy.check_invariants (None = not checked)."""

    level: str
    state_norm_defect: float
    completeness_defect: float
    projection_defect: float | None
    commutation_defect: float | None

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        checked = [self.state_norm_defect, self.completeness_defect]
        checked += [d for d in (self.projection_defect, self.commutation_defect) if d is not None]
        return max(checked) <= tol


def correlation_from_strategy(
    s: Strategy, tol: float | None = None, level: str | None = None
) -> Correlation:
    """Evaluate the correlation table of a strategy.

    Invariants are checked first (see Strategy.check_invariants for the
    levels); exact strategies must satisfy them exactly, float strategies
    within tol (default 1e-9).
    """
    report = s.check_invariants(tol=tol, level=level)
    bound = 0.0 if s.exact else (DEFAULT_TOL if tol is None else tol)
    if not report.ok(bound):
        raise InvariantViolation(f"strategy invariants fail: {report}")
    table: dict = {}
    if s.mode == "commuting":
        left = {
            (x, a): (xla.mat_vec(p, s.state) if s.exact else p @ s.state)
            for x, pvm in s.alice.items()
            for a, p in pvm.items()
        }
        right = {
            (y, b): (xla.mat_vec(p, s.state) if s.exact else p @ s.state)
            for y, pvm in s.bob.items()
            for b, p in pvm.items()
        }
        for (x, a), mv in left.items():
            for (y, b), nv in right.items():
                if s.exact:
                    table[(a, b, x, y)] = _canonical_exact(xla.vec_dot(mv, nv))
                else:
                    table[(a, b, x, y)] = _canonical_float(complex(np.vdot(mv, nv)))
    else:
        psi = s._state_matrix()
        if s.exact:
            left = {
                (x, a): xla.mat_mul(p, psi) for x, pvm in s.alice.items() for a, p in pvm.items()
            }
            for (x, a), mpsi in left.items():
                for y, pvm in s.bob.items():
                    for b, p in pvm.items():
                        acted = xla.mat_mul(mpsi, xla.transpose(p))
                        total = sum(xla.vec_dot(psi[i], acted[i]) for i in range(s.dimension))
                        table[(a, b, x, y)] = _canonical_exact(total)
        else:
            left = {(x, a): p @ psi for x, pvm in s.alice.items() for a, p in pvm.items()}
            for (x, a), mpsi in left.items():
                for y, pvm in s.bob.items():
                    for b, p in pvm.items():
                        table[(a, b, x, y)] = _canonical_float(
                            complex(np.vdot(psi, mpsi @ p.T))
                        )
    return Correlation(s.scenario, table, s.exact)


def make_good(s: Strategy, tol: float | None = None) -> Strategy:
    """Merge zero-probability outcomes into a surviving outcome per question.

    The absorbing outcome is the first answer (in scenario order) with
    nonzero probability; the induced correlation is unchanged.
    """
    bound = DEFAULT_TOL if tol is None else tol

    def repair(party_name, measurements, questions, answers):
        out = {}
        for q in questions:
            pvm = measurements[q]
            weights = {ans: s.outcome_weight(party_name, q, ans) for ans in answers}
            if s.exact:
                dead = [ans for ans in answers if weights[ans] == 0]
            else:
                dead = [ans for ans in answers if weights[ans] <= bound]
            live = [ans for ans in answers if ans not in dead]
            if not live:
                raise InvariantViolation(f"no outcome of question {q!r} has positive weight")
            merged = dict(pvm)
            if dead:
                absorber = live[0]
                total = pvm[absorber]
                for ans in dead:
                    total = (
                        xla.mat_add(total, pvm[ans]) if s.exact else total + pvm[ans]
                    )
                    merged[ans] = xla.zeros(s.dimension) if s.exact else np.zeros(
                        (s.dimension, s.dimension), dtype=complex
                    )
                merged[absorber] = total
            out[q] = merged
        return out

    alice = repair("A", s.alice, s.scenario.X, s.scenario.A)
    bob = repair("B", s.bob, s.scenario.Y, s.scenario.B)
    return Strategy(s.scenario, s.dimension, s.state, alice, bob, s.mode, s.exact)


@dataclass(frozen=True)
class ConsistencyReport:
    """max over (question, answer) of ||(M - N)|psi>||."""

    max_defect: float
    worst: tuple | None


def synchronous_consistency(s: Strategy) -> ConsistencyReport:
    """How far the two parties are from acting identically on the state."""
    if s.scenario.X != s.scenario.Y or s.scenario.A != s.scenario.B:
        raise ScenarioMismatch("synchronous consistency needs X = Y and A = B")
    worst, witness = 0.0, None
    for q in s.scenario.X:
        for ans in s.scenario.A:
            defect = _pair_defect(s, s.alice[q][ans], s.bob[q][ans])
            if defect > worst:
                worst, witness = defect, (q, ans)
    return ConsistencyReport(worst, witness)


def _pair_defect(s: Strategy, m, n) -> float:
    """||M|psi> - N|psi>|| with M on Alice's register and N on Bob's."""
    if s.mode == "commuting":
        if s.exact:
            return xla.norm_float(
                xla.vec_sub(xla.mat_vec(m, s.state), xla.mat_vec(n, s.state))
            )
        return float(np.linalg.norm(m @ s.state - n @ s.state))
    psi = s._state_matrix()
    if s.exact:
        return xla.frobenius_float(
            xla.mat_sub(xla.mat_mul(m, psi), xla.mat_mul(psi, xla.transpose(n)))
        )
    return float(np.linalg.norm(m @ psi - psi @ n.T))


# -- observables from good strategies ---------------------------------------


@dataclass(frozen=True)
class ObservableReport:
    """Binary observables extracted from a strategy for a linear system.

    alice_observables / bob_observables map a variable index i to the
    observable built from the directly-asked variable question; the row
    projections map (row, variable, bit) to the grouped projection summed
    from the row question's outcomes.
    """

    alice_observables: dict
    bob_observables: dict
    row_projections: dict
    observable_defect: float
    row_product_defect: float
    commutation_defect: float
    consistency_defect: float

    @property
    def max_defect(self) -> float:
        return max(
            self.observable_defect,
            self.row_product_defect,
            self.commutation_defect,
            self.consistency_defect,
        )


def extract_solution_observables(
    s: Strategy, system: BinaryLinearSystem, tol: float | None = None
) -> ObservableReport:
    """Build the +-1 observables of a (good) strategy for a linear system.

    For each variable, the observable is the difference of the two live
    projections of its direct question; row questions contribute grouped
    projections per variable.  Reported defects cover the observable law
    O^2 = 1, the per-row products applied to the state, pairwise commutation
    on the state within each row, and cross-party consistency on the state.
    """
    kappa = _require_perfect_scenario(s.scenario, system)
    bound = DEFAULT_TOL if tol is None else tol
    for party_name, measurements, questions, answers in (
        ("A", s.alice, s.scenario.X, s.scenario.A),
        ("B", s.bob, s.scenario.Y, s.scenario.B),
    ):
        for q in questions:
            for ans in answers:
                weight = s.outcome_weight(party_name, q, ans)
                p = measurements[q][ans]
                if s.exact:
                    if weight == 0 and not xla.is_zero_matrix(p):
                        raise NotGoodStrategy(f"dead outcome {ans!r} of {q!r} has a nonzero projection")
                elif abs(_canonical_float(weight)) <= bound and s._mat_norm(p) > bound:
                    raise NotGoodStrategy(f"dead outcome {ans!r} of {q!r} has a nonzero projection")

    plus = (0,) * kappa
    minus = (0,) * (kappa - 1) + (1,)
    sub = s._mat_sub
    mul = s._mat_mul
    alice_obs = {
        i: sub(s.alice[variable_label(i)][plus], s.alice[variable_label(i)][minus])
        for i in range(system.n)
    }
    bob_obs = {
        i: sub(s.bob[variable_label(i)][plus], s.bob[variable_label(i)][minus])
        for i in range(system.n)
    }
    row_proj: dict = {}
    for i, row in enumerate(system.rows):
        for k in row:
            pos = system.phi(i, k)
            for c in (0, 1):
                total = None
                for ans in s.scenario.A:
                    if ans[pos] == c:
                        p = s.alice[i][ans]
                        total = p if total is None else (
                            xla.mat_add(total, p) if s.exact else total + p
                        )
                row_proj[(i, k, c)] = total

    eye = s._identity()
    observable_defect = 0.0
    for obs in itertools.chain(alice_obs.values(), bob_obs.values()):
        observable_defect = max(observable_defect, s._mat_norm(sub(mul(obs, obs), eye)))

    row_product_defect = 0.0
    for row in system.rows:
        product = None
        for k in row:
            product = bob_obs[k] if product is None else mul(product, bob_obs[k])
        row_product_defect = max(row_product_defect, _applied_defect(s, "B", product, eye))

    commutation_defect = 0.0
    for row in system.rows:
        for k, l in itertools.combinations(row, 2):
            for party_name, obs in (("A", alice_obs), ("B", bob_obs)):
                commutator = sub(mul(obs[k], obs[l]), mul(obs[l], obs[k]))
                zero = xla.zeros(s.dimension) if s.exact else np.zeros_like(eye)
                commutation_defect = max(
                    commutation_defect, _applied_defect(s, party_name, commutator, zero)
                )

    consistency_defect = 0.0
    for i in range(system.n):
        consistency_defect = max(consistency_defect, _pair_defect(s, alice_obs[i], bob_obs[i]))

    return ObservableReport(
        alice_obs,
        bob_obs,
        row_proj,
        observable_defect,
        row_product_defect,
        commutation_defect,
        consistency_defect,
    )


def _applied_defect(s: Strategy, party: str, op, target) -> float:
    """||(op - target)|psi>|| with op acting on the named party's register."""
    diff = s._mat_sub(op, target)
    if s.mode == "commuting":
        if s.exact:
            return xla.norm_float(xla.mat_vec(diff, s.state))
        return float(np.linalg.norm(diff @ s.state))
    psi = s._state_matrix()
    if party == "A":
        acted = xla.mat_mul(diff, psi) if s.exact else diff @ psi
    else:
        acted = xla.mat_mul(psi, xla.transpose(diff)) if s.exact else psi @ diff.T
    return xla.frobenius_float(acted) if s.exact else float(np.linalg.norm(acted))
