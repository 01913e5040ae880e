"""Word calculus for encoding counter machines into group presentations.

A machine with k glasses and states 0..N is encoded over three generator
families: ``x(q_i A_{i_1}...A_{i_m})`` tracking state together with a subset
of glass bottoms, involutions ``A_i`` marking the bottom of each glass, and
coin generators ``a_i, a_i', ~a_i, ~a_i'``.  The star operation

    f * a_j = f^-1 (a_j^-1 f a_j) (a_j f^-1 a_j^-1) (a_j' f a_j'^-1)
    f * A_j = [f, A_j]

drives everything: each machine command contributes one relator built from
star expressions, and the word w(n) encoding input n is an n-fold star
iterate.  This module only produces words; deciding equality of the words in
the presented group is intentionally out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .minsky import ADD, EMPTY_CHECK, STOP, SUB, Command, MinskyMachine
from .words import Word, commutator

__all__ = [
    "KmsGenerator",
    "x_gen",
    "A_gen",
    "a_gen",
    "t_gen",
    "generator_sets",
    "circledast",
    "iterated_circledast",
    "command_relator",
    "machine_relators",
    "common_relators",
    "COMMON_RELATORS_COMPLETE",
    "input_word",
    "input_word_reduced",
    "accept_word",
    "extension_relators",
    "pn_quotient_relators",
    "word_to_json",
]

_FAMILIES = ("x", "A", "a", "a'", "a~", "a~'", "t")


@dataclass(frozen=True)
class KmsGenerator:
    """One generator: family tag, subscript, and (for x) a glass subset."""

    family: str
    index: int = 0
    glasses: tuple[int, ...] = ()

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.family == "x":
            if any(a >= b for a, b in zip(self.glasses, self.glasses[1:])):
                raise ValueError("glass subset must be strictly increasing")
        elif self.glasses:
            raise ValueError("only x generators carry a glass subset")

    @property
    def name(self) -> str:
        if self.family == "x":
            subset = "".join(f"A{i}" for i in self.glasses)
            return f"x(q{self.index}{subset})"
        if self.family == "t":
            return "t"
        if self.family.endswith("'"):
            return f"{self.family[:-1]}{self.index}'"
        return f"{self.family}{self.index}"

    def __repr__(self):
        return self.name


def x_gen(state: int, glasses: Iterable[int] = (0,)) -> KmsGenerator:
    return KmsGenerator("x", state, tuple(glasses))


def A_gen(i: int) -> KmsGenerator:
    return KmsGenerator("A", i)


def a_gen(i: int, primed: bool = False, tilde: bool = False) -> KmsGenerator:
    family = ("a~" if tilde else "a") + ("'" if primed else "")
    return KmsGenerator(family, i)


def t_gen() -> KmsGenerator:
    return KmsGenerator("t")


def generator_sets(
    k: int, N: int
) -> tuple[list[KmsGenerator], list[KmsGenerator], list[KmsGenerator]]:
    """The three generator families for k glasses and states 0..N.

    L0 ranges over every state paired with every subset of {0..k}, L1 holds
    the glass bottoms A_0..A_k, L2 the four coin generators per glass.
    """
    if k < 1 or N < 1:
        raise ValueError("need k >= 1 and N >= 1")
    subsets: list[tuple[int, ...]] = [()]
    for i in range(k + 1):
        subsets += [s + (i,) for s in subsets]
    L0 = [x_gen(q, s) for q in range(N + 1) for s in sorted(subsets, key=lambda s: (len(s), s))]
    L1 = [A_gen(i) for i in range(k + 1)]
    L2 = [
        a_gen(i, primed=primed, tilde=tilde)
        for i in range(1, k + 1)
        for tilde in (False, True)
        for primed in (False, True)
    ]
    return L0, L1, L2


def circledast(f: Word, g: KmsGenerator) -> Word:
    """The star operation against a coin generator a_j or a bottom A_j."""
    if g.family == "A":
        return commutator(f, Word.gen(g))
    if g.family == "a":
        a = Word.gen(g)
        a_prime = Word.gen(a_gen(g.index, primed=True))
        return (
            f.inverse()
            * f.conjugated_by(a)
            * f.inverse().conjugated_by(a.inverse())
            * f.conjugated_by(a_prime.inverse())
        )
    raise ValueError("star only accepts plain a_j or A_j generators")


def iterated_circledast(f: Word, gens: Sequence[KmsGenerator]) -> Word:
    """Left-nested fold ``((f * g1) * g2) * ...``."""
    for g in gens:
        f = circledast(f, g)
    return f


def command_relator(cmd: Command, k: int) -> Word:
    """The defining relator contributed by one machine command.

    Each command type equates two star expressions in the state generators
    x(q_i A_0); the relator is (left side) * (right side)^-1.
    """
    xi = Word.gen(x_gen(cmd.input_state))
    xj = Word.gen(x_gen(cmd.output_state))
    if cmd.kind == ADD:
        rhs = iterated_circledast(xj, [a_gen(g) for g in cmd.glasses])
        return xi * rhs.inverse()
    if cmd.kind == SUB:
        lhs = iterated_circledast(xi, [a_gen(g) for g in cmd.glasses])
        return lhs * xj.inverse()
    if cmd.kind == EMPTY_CHECK:
        bottoms = [A_gen(g) for g in cmd.glasses]
        return iterated_circledast(xi, bottoms) * iterated_circledast(xj, bottoms).inverse()
    # Stop: x(q_i A_0) = x(q_0 A_0)
    return xi * Word.gen(x_gen(0)).inverse()


def common_relators(k: int, N: int) -> list[Word]:
    """The documented machine-independent relators: elements of L0 and L1
    square to the identity, and each of the three families commutes
    internally.  This list is knowingly partial (see
    :data:`COMMON_RELATORS_COMPLETE`): the full presentation has further
    machine-independent relations that are only ever used abstractly here.
    """
    L0, L1, L2 = generator_sets(k, N)
    relators = [Word.gen(g) ** 2 for g in L0 + L1]
    for family in (L0, L1, L2):
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                relators.append(commutator(Word.gen(family[i]), Word.gen(family[j])))
    return relators


COMMON_RELATORS_COMPLETE = False
"""Whether :func:`common_relators` emits the full machine-independent set."""


def machine_relators(m: MinskyMachine) -> list[Word]:
    """One relator per command of the machine."""
    return [command_relator(cmd, m.glasses) for cmd in m.commands]


def input_word(n: int, k: int) -> Word:
    """w(n): the start-state generator starred n times by a_1, then by each A_i."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    f = Word.gen(x_gen(1))
    f = iterated_circledast(f, [a_gen(1)] * n)
    return iterated_circledast(f, [A_gen(i) for i in range(1, k + 1)])


def input_word_reduced(k: int) -> Word:
    """The one-generator form of w(0) that the group relations allow."""
    return Word.gen(x_gen(1, range(k + 1)))


def accept_word(k: int) -> Word:
    """The one-generator form of the accept-configuration word."""
    return Word.gen(x_gen(0, range(k + 1)))


def accept_word_expanded(k: int) -> Word:
    """The accept word before applying group relations: a star iterate."""
    return iterated_circledast(Word.gen(x_gen(0)), [A_gen(i) for i in range(1, k + 1)])


def extension_relators(k: int) -> list[Word]:
    """Relators adjoining a stable letter t that commutes with a_1, a_1' and
    conjugates the start generator to its a_1 star."""
    t = Word.gen(t_gen())
    x1 = Word.gen(x_gen(1))
    return [
        commutator(t, Word.gen(a_gen(1))),
        commutator(t, Word.gen(a_gen(1, primed=True))),
        t.inverse() * x1 * t * circledast(x1, a_gen(1)).inverse(),
    ]


def pn_quotient_relators(p: int, k: int) -> list[Word]:
    """Relators for the quotient where p-fold starring fixes the start
    generator and t has order p."""
    if p < 2:
        raise ValueError("p must be at least 2")
    x1 = Word.gen(x_gen(1))
    first = iterated_circledast(x1, [a_gen(1)] * p) * x1.inverse()
    return [first, Word.gen(t_gen()) ** p]


def word_to_json(w: Word) -> list[dict]:
    return [{"gen": sym.name, "exp": exp} for sym, exp in w]
