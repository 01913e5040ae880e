"""Approximate-representation tooling in the normalized Hilbert-Schmidt
norm: relator defects of unitary assignments, rounding families of
near-projections to exact projective measurements with an explicit
constant, and tensor strategies built from a representation through the
maximally entangled state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .correlations import (
    DEFAULT_TOL,
    Correlation,
    InvariantViolation,
    Scenario,
    Strategy,
    _label_from_json,
    _label_to_json,
)
from .presentations import Presentation

__all__ = [
    "DefectReport",
    "NotUnitary",
    "OperatorFamily",
    "SpectralGapFailure",
    "approx_defect",
    "correlation_from_rep",
    "delta",
    "delta_pos",
    "hs_norm",
    "matrix_from_json",
    "matrix_to_json",
    "normalized_trace",
    "round_to_pvm",
    "strategy_from_rep",
]

UNITARITY_TOL = 1e-9
SPECTRAL_GAP = 1e-8


class NotUnitary(Exception):
    """An assignment matrix fails the unitarity check."""


class SpectralGapFailure(Exception):
    """Thresholding hit an eigenvalue too close to 1/2 to classify."""


# -- norms ------------------------------------------------------------------


def _square(M) -> np.ndarray:
    m = np.asarray(M, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return m


def hs_norm(M) -> float:
    """sqrt(Tr(M^dag M) / d), the dimension-normalized Hilbert-Schmidt norm."""
    m = _square(M)
    return float(np.linalg.norm(m)) / math.sqrt(m.shape[0])


def normalized_trace(M) -> complex:
    """Tr(M) / d."""
    m = _square(M)
    return complex(np.trace(m)) / m.shape[0]


# -- matrix and family serialization ---------------------------------------


def matrix_to_json(M) -> list:
    """Row-major entries as [re, im] decimal strings (repr round-trips)."""
    m = np.asarray(M, dtype=complex)
    return [[[repr(float(v.real)), repr(float(v.imag))] for v in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.array(
        [[complex(float(re), float(im)) for re, im in row] for row in data],
        dtype=complex,
    )


class OperatorFamily:
    """Finitely many d x d complex matrices with unique hashable labels.

    Iteration order is insertion order; rounding treats it as the family's
    order, so the last operator absorbs whatever part of the identity the
    earlier ones leave behind.
    """

    __slots__ = ("dimension", "operators")

    def __init__(self, dimension: int, operators):
        d = int(dimension)
        if d < 1:
            raise ValueError("dimension must be positive")
        items = operators.items() if isinstance(operators, Mapping) else operators
        table: dict = {}
        for label, mat in items:
            if label in table:
                raise ValueError(f"duplicate label {label!r}")
            m = np.asarray(mat, dtype=complex)
            if m.shape != (d, d):
                raise ValueError(f"operator {label!r} is not {d}x{d}")
            table[label] = m
        object.__setattr__(self, "dimension", d)
        object.__setattr__(self, "operators", table)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("OperatorFamily is immutable")

    @property
    def labels(self) -> tuple:
        return tuple(self.operators)

    def __getitem__(self, label) -> np.ndarray:
        return self.operators[label]

    def __contains__(self, label) -> bool:
        return label in self.operators

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "operators": [
                {"label": _label_to_json(label), "matrix": matrix_to_json(m)}
                for label, m in self.operators.items()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorFamily":
        ops = [
            (_label_from_json(entry["label"]), matrix_from_json(entry["matrix"]))
            for entry in data["operators"]
        ]
        return cls(int(data["dimension"]), ops)


@dataclass(frozen=True)
class DefectReport:
    """Nonnegative hs_norm defects, one per checked item."""

    labels: tuple
    defects: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "defects", tuple(float(v) for v in self.defects))
        if len(self.labels) != len(self.defects):
            raise ValueError("one defect per label")
        if any(v < 0.0 for v in self.defects):
            raise ValueError("defects are nonnegative")

    @property
    def epsilon(self) -> float:
        """The overall defect: the maximum over all items."""
        return max(self.defects, default=0.0)

    def items(self):
        return zip(self.labels, self.defects)


# -- relator defects ---------------------------------------------------------


def approx_defect(
    pres: Presentation, assignment: OperatorFamily, tol: float = UNITARITY_TOL
) -> DefectReport:
    """Defect hs_norm(phi(r) - 1) of every relator under a unitary assignment.

    Generators are matched by presentation name, falling back to the bare
    index; every generator must be covered, and every assigned matrix must
    be unitary within tol (hs_norm of U^dag U - 1), else NotUnitary.
    """
    units: dict[int, np.ndarray] = {}
    d = assignment.dimension
    eye = np.eye(d)
    for i in range(pres.generators):
        name = pres.name_of(i)
        if name in assignment:
            m = assignment[name]
        elif i in assignment:
            m = assignment[i]
        else:
            raise ValueError(f"assignment misses generator {name}")
        if hs_norm(m.conj().T @ m - eye) > tol:
            raise NotUnitary(f"assignment for {name} is not unitary within {tol}")
        units[i] = m
    defects = []
    for rel in pres.relators:
        acc = eye
        for sym, exp in rel:
            u = units[sym]
            acc = acc @ (u if exp == 1 else u.conj().T)
        defects.append(hs_norm(acc - eye))
    return DefectReport(tuple(pres.relators), tuple(defects))


# -- rounding to projective measurements -------------------------------------


def delta_pos(n: int) -> float:
    """Rounding constant for n positive near-projections: 2*sqrt(2) for a
    single one, and each further operator multiplies by (40n + 3)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    value = 2.0 * math.sqrt(2.0)
    for k in range(1, n):
        value *= 40 * k + 3
    return value


def delta(c: float, n: int) -> float:
    """Rounding constant for n near-projections of operator norm at most c."""
    if c < 1:
        raise ValueError("c must be at least 1")
    return delta_pos(n) * (2 * c * c + 7 * c + 5) * n + 2 * c + 4


def _threshold_half(q: np.ndarray, gap: float = SPECTRAL_GAP) -> np.ndarray:
    """Spectral projection of a self-adjoint matrix onto [1/2, infinity)."""
    w, v = np.linalg.eigh(q)
    if np.any(np.abs(w - 0.5) < gap):
        raise SpectralGapFailure(f"an eigenvalue sits within {gap} of 1/2")
    cols = v[:, w > 0.5]
    proj = cols @ cols.conj().T
    return (proj + proj.conj().T) / 2


def round_to_pvm(
    family: OperatorFamily, c: float = 1.0
) -> tuple[OperatorFamily, DefectReport]:
    """Round a family of near-projections to an exact projective measurement.

    Pipeline: symmetrize each operator, threshold its spectrum at 1/2, then
    orthogonalize sequentially - each projection is compressed by the
    complement of its predecessors and re-thresholded, and the last one takes
    the leftover of the identity.  The output satisfies Pi^2 = Pi = Pi^* and
    sum(Pi) = 1 to machine precision regardless of the input; the reported
    distances hs_norm(Pi_i - P_i) stay within delta(c, n) * eps when the
    input is eps-close to a PVM with operator norms at most c, and simply
    come out large on garbage input.
    """
    labels = family.labels
    n = len(labels)
    if n == 0:
        raise ValueError("the family must contain at least one operator")
    d = family.dimension
    eye = np.eye(d)
    rounded = [
        _threshold_half((family[l] + family[l].conj().T) / 2) for l in labels
    ]
    out: list[np.ndarray] = []
    used = np.zeros((d, d), dtype=complex)
    for i in range(n - 1):
        comp = eye - used
        pi = _threshold_half(comp @ rounded[i] @ comp)
        out.append(pi)
        used = used + pi
    out.append(eye - used)
    distances = tuple(hs_norm(out[i] - family[labels[i]]) for i in range(n))
    return OperatorFamily(d, zip(labels, out)), DefectReport(labels, distances)


# -- strategies from representations ------------------------------------------


def _collect_measurements(measurements: Mapping):
    if not measurements:
        raise ValueError("at least one question is required")
    questions = tuple(measurements)
    answers: list = []
    d = None
    table: dict = {}
    for q in questions:
        pvm = {}
        for ans, mat in measurements[q].items():
            m = np.asarray(mat, dtype=complex)
            if d is None:
                if m.ndim != 2 or m.shape[0] != m.shape[1]:
                    raise ValueError("projections must be square matrices")
                d = m.shape[0]
            if m.shape != (d, d):
                raise ValueError("all projections must share one dimension")
            if ans not in answers:
                answers.append(ans)
            pvm[ans] = m
        table[q] = pvm
    return questions, tuple(answers), d, table


def strategy_from_rep(measurements: Mapping, tol: float | None = None) -> Strategy:
    """Tensor strategy of a family of per-question PVMs on dimension d.

    The shared state is the maximally entangled 1/sqrt(d) sum |i>|i>, Alice
    plays the given PVMs and Bob their plain (entrywise, not conjugate)
    transposes, so the induced correlation entry is
    normalized_trace(M_x^a M_y^b); correlation_from_rep evaluates the same
    table directly.  Raises InvariantViolation when the input is not a PVM
    family within tol.
    """
    questions, answers, d, table = _collect_measurements(measurements)
    alice = {q: dict(pvm) for q, pvm in table.items()}
    bob = {q: {ans: m.T.copy() for ans, m in pvm.items()} for q, pvm in table.items()}
    state = np.zeros(d * d, dtype=complex)
    state[:: d + 1] = 1.0 / math.sqrt(d)
    scenario = Scenario(questions, questions, answers, answers)
    s = Strategy(scenario, d, state, alice, bob, "tensor", exact=False)
    report = s.check_invariants(tol=tol)
    if not report.ok(DEFAULT_TOL if tol is None else tol):
        raise InvariantViolation(f"measurement invariants fail: {report}")
    return s


def correlation_from_rep(measurements: Mapping) -> Correlation:
    """The correlation with entries normalized_trace(M_x^a M_y^b).

    This is the direct evaluation of the table realized by
    strategy_from_rep; the two paths agree to rounding error.
    """
    questions, answers, _, table = _collect_measurements(measurements)
    scenario = Scenario(questions, questions, answers, answers)
    entries = {
        (a, b, x, y): normalized_trace(table[x][a] @ table[y][b])
        for x in questions
        for y in questions
        for a in table[x]
        for b in table[y]
    }
    return Correlation(scenario, entries, exact=False)
