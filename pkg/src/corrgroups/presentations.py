"""Binary linear systems and the group presentations they generate.

``Ax = 0`` over Z2 is stored as the list of per-row support sets.  The
homogeneous solution group of the system has one involution generator per
column, a product relator per row, and commutation relators within each row.
An extended presentation additionally carries conjugacy data: triples making
one x conjugate another into a third, triples conjugating x's by extra
generators y, and a strictly lower-triangular matrix of power-conjugacy
exponents among the y's.

Row normalization rewrites any system into one with exactly three nonzero
entries per row without changing the solution set over the original
variables (checked by the brute-force oracle at the bottom).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .words import Word, commutator

__all__ = [
    "BinaryLinearSystem",
    "EhlpcPresentation",
    "Presentation",
    "TriangularityViolation",
    "TooLarge",
    "solution_group",
    "ehlpc_presentation",
    "normalize_rows_to_three",
    "add_conjugacy",
    "add_power_conjugacy",
    "solution_set",
    "restricted_solution_sets_equal",
]


class TriangularityViolation(Exception):
    """A power-conjugacy entry would sit on or above the diagonal."""


class TooLarge(Exception):
    """Brute-force enumeration would exceed the supported size."""


@dataclass(frozen=True)
class BinaryLinearSystem:
    """An m x n system over Z2, stored as sorted per-row support sets."""

    n: int
    rows: tuple[tuple[int, ...], ...]

    def __init__(self, n: int, rows: Iterable[Iterable[int]]):
        clean = tuple(tuple(sorted(set(r))) for r in rows)
        for row in clean:
            if not row:
                raise ValueError("rows must have at least one nonzero entry")
            if row[0] < 0 or row[-1] >= n:
                raise ValueError("row index out of range")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rows", clean)

    @property
    def m(self) -> int:
        return len(self.rows)

    def uniform_row_size(self) -> int | None:
        sizes = {len(r) for r in self.rows}
        return sizes.pop() if len(sizes) == 1 else None

    def phi(self, i: int, j: int) -> int:
        """Position of column j within row i (the order-preserving bijection
        from the row's support onto 0..size-1)."""
        return self.rows[i].index(j)

    def to_json(self) -> dict:
        return {"n": self.n, "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> "BinaryLinearSystem":
        return cls(int(data["n"]), data["rows"])


@dataclass(frozen=True)
class Presentation:
    """Finitely many integer-indexed generators with relator words."""

    generators: int
    relators: tuple[Word, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(self.relators))
        object.__setattr__(self, "names", tuple(self.names))
        if self.names and len(self.names) != self.generators:
            raise ValueError("one name per generator")
        for rel in self.relators:
            for sym in rel.symbols():
                if not (isinstance(sym, int) and 0 <= sym < self.generators):
                    raise ValueError(f"relator uses unknown generator {sym!r}")

    def name_of(self, index: int) -> str:
        return self.names[index] if self.names else f"g{index}"


def _x_names(n: int) -> tuple[str, ...]:
    return tuple(f"x{j}" for j in range(n))


def solution_group(A: BinaryLinearSystem) -> Presentation:
    """Involutions per column, a product relator per row, and commutation of
    variables sharing a row (each unordered pair emitted once)."""
    relators = [Word.gen(j) ** 2 for j in range(A.n)]
    for row in A.rows:
        w = Word.identity()
        for k in row:
            w = w * Word.gen(k)
        relators.append(w)
    seen: set[tuple[int, int]] = set()
    for row in A.rows:
        for j, k in combinations(row, 2):
            if (j, k) not in seen:
                seen.add((j, k))
                relators.append(commutator(Word.gen(j), Word.gen(k)))
    return Presentation(A.n, tuple(relators), _x_names(A.n))


@dataclass(frozen=True)
class EhlpcPresentation:
    """A solution group plus conjugacy structure.

    ``C0`` holds triples (i, j, k) of x-indices asserting x_i x_j x_i = x_k;
    ``C1`` holds triples (i, j, k) asserting y_i^-1 x_j y_i = x_k; ``L`` maps
    strictly-lower-triangular y-index pairs (i, j) to positive exponents r,
    asserting y_i^-1 y_j y_i = y_j^r.
    """

    A: BinaryLinearSystem
    ell: int = 0
    C0: tuple[tuple[int, int, int], ...] = ()
    C1: tuple[tuple[int, int, int], ...] = ()
    L: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "C0", tuple(tuple(t) for t in self.C0))
        object.__setattr__(self, "C1", tuple(tuple(t) for t in self.C1))
        object.__setattr__(self, "L", dict(self.L))
        n = self.A.n
        for i, j, k in self.C0:
            if not all(0 <= v < n for v in (i, j, k)):
                raise IndexError("C0 triple out of range")
        for i, j, k in self.C1:
            if not 0 <= i < self.ell:
                raise IndexError("C1 conjugator out of range")
            if not (0 <= j < n and 0 <= k < n):
                raise IndexError("C1 x-index out of range")
        for (i, j), r in self.L.items():
            if not (0 <= j < i < self.ell):
                raise TriangularityViolation(
                    f"power-conjugacy entry ({i},{j}) must have i > j"
                )
            if r <= 0:
                raise ValueError("power-conjugacy exponents must be positive")

    def to_json(self) -> dict:
        out = self.A.to_json()
        out["ell"] = self.ell
        out["C0"] = [list(t) for t in self.C0]
        out["C1"] = [list(t) for t in self.C1]
        out["L"] = [[i, j, r] for (i, j), r in sorted(self.L.items())]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EhlpcPresentation":
        return cls(
            A=BinaryLinearSystem(int(data["n"]), data["rows"]),
            ell=int(data.get("ell", 0)),
            C0=tuple(tuple(t) for t in data.get("C0", [])),
            C1=tuple(tuple(t) for t in data.get("C1", [])),
            L={(i, j): r for i, j, r in data.get("L", [])},
        )


def ehlpc_presentation(E: EhlpcPresentation) -> Presentation:
    """Flatten the extended data into one presentation.

    Generators 0..n-1 are the x's, n..n+ell-1 the y's.
    """
    n = E.A.n
    base = solution_group(E.A)
    relators = list(base.relators)
    for i, j, k in E.C0:
        xi, xj, xk = Word.gen(i), Word.gen(j), Word.gen(k)
        relators.append(xi * xj * xi * xk.inverse())
    for i, j, k in E.C1:
        yi, xj, xk = Word.gen(n + i), Word.gen(j), Word.gen(k)
        relators.append(yi.inverse() * xj * yi * xk.inverse())
    for (i, j), r in sorted(E.L.items()):
        yi, yj = Word.gen(n + i), Word.gen(n + j)
        relators.append(yi.inverse() * yj * yi * yj ** (-r))
    names = _x_names(n) + tuple(f"y{i}" for i in range(E.ell))
    return Presentation(n + E.ell, tuple(relators), names)


def add_conjugacy(E: EhlpcPresentation, yi: int, xj: int, xk: int) -> EhlpcPresentation:
    """Append the assertion y_i^-1 x_j y_i = x_k."""
    ell = max(E.ell, yi + 1)
    return replace(E, ell=ell, C1=E.C1 + ((yi, xj, xk),))


def add_power_conjugacy(E: EhlpcPresentation, yi: int, yj: int, r: int) -> EhlpcPresentation:
    """Append the assertion y_i^-1 y_j y_i = y_j^r (requires yi > yj)."""
    if yi <= yj:
        raise TriangularityViolation(f"need yi > yj, got ({yi}, {yj})")
    if r <= 0:
        raise ValueError("exponent must be positive")
    ell = max(E.ell, yi + 1)
    L = dict(E.L)
    L[(yi, yj)] = r
    return replace(E, ell=ell, L=L)


def normalize_rows_to_three(
    A: BinaryLinearSystem,
) -> tuple[BinaryLinearSystem, dict[int, int]]:
    """Rewrite every row to exactly three nonzero entries.

    Rows longer than three repeatedly shed their two smallest columns into a
    fresh product variable z3 (with commutation-forcing pair equations
    z_{1t} x_{j1} x_{jt} = z_{2t} x_{j2} x_{jt} = e); one- and two-entry rows
    are padded with fresh forced-to-identity variables.  Original columns
    keep their indices, and fresh columns are appended in processing order,
    so the output is deterministic.  Returns the new system together with
    the (identity) map on original variable indices.
    """
    n = A.n
    rows = [list(r) for r in A.rows]
    new_rows: list[list[int]] = []
    for row in rows:
        while len(row) > 3:
            j1, j2, *rest = row
            z3 = n
            n += 1
            new_rows.append([z3, j1, j2])
            for jt in rest:
                z1t, z2t = n, n + 1
                n += 2
                new_rows.append([z1t, j1, jt])
                new_rows.append([z2t, j2, jt])
            row = [z3] + rest
        if len(row) == 3:
            new_rows.append(row)
        elif len(row) == 2:
            j, k = row
            z1, z2 = n, n + 1
            n += 2
            new_rows.append([j, z1, z2])
            new_rows.append([k, z1, z2])
        else:  # single entry: force it (and three helpers) to the identity
            (j,) = row
            z1, z2, z3 = n, n + 1, n + 2
            n += 3
            new_rows.append([j, z1, z2])
            new_rows.append([j, z1, z3])
            new_rows.append([j, z2, z3])
            new_rows.append([z1, z2, z3])
    return BinaryLinearSystem(n, new_rows), {j: j for j in range(A.n)}


def solution_set(A: BinaryLinearSystem) -> set[tuple[int, ...]]:
    """Every Z2 assignment satisfying all rows.

    Rows are reduced to echelon form over Z2 first, so only the free
    coordinates are enumerated; the enumeration is refused once it would
    exceed 2^20 assignments.
    """
    pivot_rows: dict[int, int] = {}  # pivot column -> row bitmask
    for row in A.rows:
        mask = 0
        for j in row:
            mask |= 1 << j
        for c, pm in list(pivot_rows.items()):
            if mask >> c & 1:
                mask ^= pm
        if mask == 0:
            continue
        lead = (mask & -mask).bit_length() - 1
        for c, pm in list(pivot_rows.items()):
            if pm >> lead & 1:
                pivot_rows[c] = pm ^ mask
        pivot_rows[lead] = mask
    free_cols = [j for j in range(A.n) if j not in pivot_rows]
    if len(free_cols) > 20:
        raise TooLarge(f"solution space needs 2^{len(free_cols)} assignments")
    out = set()
    for bits in product((0, 1), repeat=len(free_cols)):
        assign = [0] * A.n
        for f, b in zip(free_cols, bits):
            assign[f] = b
        for c, pm in pivot_rows.items():
            rest = pm & ~(1 << c)
            v = 0
            while rest:
                v ^= assign[(rest & -rest).bit_length() - 1]
                rest &= rest - 1
            assign[c] = v
        out.add(tuple(assign))
    return out


def restricted_solution_sets_equal(
    A: BinaryLinearSystem, B: BinaryLinearSystem, originals: Sequence[int]
) -> bool:
    """Whether A and B admit the same solutions on the listed columns."""
    proj_a = {tuple(sol[j] for j in originals) for sol in solution_set(A)}
    proj_b = {tuple(sol[j] for j in originals) for sol in solution_set(B)}
    return proj_a == proj_b
