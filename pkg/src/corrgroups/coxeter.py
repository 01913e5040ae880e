"""Word rewriting in Coxeter-style groups with one braid pair.

The groups handled here are generated by involutions x_0..x_{l-1}, with a
set of commuting pairs (typically: generators sharing a row of a linear
system) and a single braid relation (t1 t2)^p = e.  Every group element is a
positive word, and two words are equal exactly when some third word is
reachable from both under the moves

    x_j x_j -> (nothing)
    x_j x_k -> x_k x_j            for commuting pairs
    t1 t2 t1 ... -> t2 t1 t2 ...  (alternating windows of length exactly p)

None of the moves increases length, so the full set of words reachable from
a given one is finite; the normal form is the shortest, lexicographically
least word in that set.  Closures can still be large, so they run under a
node cap and fail loudly when it is hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "CoxeterContext",
    "NormalWord",
    "CoxeterCapExceeded",
    "RelatorViolation",
    "neighbors",
    "rewrite_closure",
    "normal_form",
    "equal",
    "finite_quotient_oracle",
    "dihedral_permutation_hom",
    "sign_hom",
    "perm_mul",
    "perm_identity",
]

DEFAULT_NODE_CAP = 200_000


class CoxeterCapExceeded(Exception):
    """The rewriting closure grew past the configured node cap."""


class RelatorViolation(Exception):
    """A proposed finite-quotient homomorphism breaks a defining relator."""


class NormalWord(tuple):
    """A word already in normal form (fixed point of normal_form)."""

    __slots__ = ()


@dataclass(frozen=True)
class CoxeterContext:
    """Generator count, commuting pairs, and the braid pair (t1, t2, p)."""

    generators: int
    commuting: frozenset[tuple[int, int]]
    braid: tuple[int, int, int]

    def __init__(
        self,
        generators: int,
        commuting: Iterable[tuple[int, int]],
        braid: tuple[int, int, int],
    ):
        pairs = frozenset(tuple(sorted(p)) for p in commuting)
        t1, t2, p = braid
        if not (0 <= t1 < generators and 0 <= t2 < generators) or t1 == t2:
            raise ValueError("braid pair must be two distinct generators in range")
        if p < 2:
            raise ValueError("braid exponent must be at least 2")
        if any(a == b or not (0 <= a < generators and 0 <= b < generators) for a, b in pairs):
            raise ValueError("commuting pairs must be distinct in-range generators")
        if tuple(sorted((t1, t2))) in pairs:
            raise ValueError("the braid pair cannot also be a commuting pair")
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "commuting", pairs)
        object.__setattr__(self, "braid", (t1, t2, p))

    @classmethod
    def from_rows(
        cls,
        generators: int,
        rows: Iterable[Sequence[int]],
        t1: int,
        t2: int,
        p: int,
    ) -> "CoxeterContext":
        """Commuting pairs from shared row membership; rejects rows that
        would make the braid pair commute (degenerate for odd p)."""
        pairs: set[tuple[int, int]] = set()
        for row in rows:
            row = sorted(set(row))
            for i in range(len(row)):
                for j in range(i + 1, len(row)):
                    pairs.add((row[i], row[j]))
        if tuple(sorted((t1, t2))) in pairs:
            raise ValueError("braid generators may not share a row")
        return cls(generators, pairs, (t1, t2, p))

    def commutes(self, j: int, k: int) -> bool:
        return (min(j, k), max(j, k)) in self.commuting

    def braid_windows(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        t1, t2, p = self.braid
        one = tuple(t1 if i % 2 == 0 else t2 for i in range(p))
        other = tuple(t2 if i % 2 == 0 else t1 for i in range(p))
        return one, other

    def to_json(self) -> dict:
        return {
            "generators": self.generators,
            "commuting": sorted(list(p) for p in self.commuting),
            "braid": list(self.braid),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoxeterContext":
        return cls(
            int(data["generators"]),
            [tuple(p) for p in data["commuting"]],
            tuple(data["braid"]),
        )


def neighbors(ctx: CoxeterContext, w: Sequence[int]) -> set[tuple[int, ...]]:
    """All words one move away from w."""
    w = tuple(w)
    for g in w:
        if not 0 <= g < ctx.generators:
            raise ValueError(f"generator {g} out of range")
    out: set[tuple[int, ...]] = set()
    for i in range(len(w) - 1):
        if w[i] == w[i + 1]:
            out.add(w[:i] + w[i + 2 :])
        elif ctx.commutes(w[i], w[i + 1]):
            out.add(w[:i] + (w[i + 1], w[i]) + w[i + 2 :])
    fwd, bwd = ctx.braid_windows()
    p = len(fwd)
    for i in range(len(w) - p + 1):
        window = w[i : i + p]
        if window == fwd:
            out.add(w[:i] + bwd + w[i + p :])
        elif window == bwd:
            out.add(w[:i] + fwd + w[i + p :])
    return out


def rewrite_closure(
    ctx: CoxeterContext, w: Sequence[int], node_cap: int = DEFAULT_NODE_CAP
) -> set[tuple[int, ...]]:
    """Every word reachable from w (the moves never grow words, so this is
    finite); raises CoxeterCapExceeded past the node cap."""
    start = tuple(w)
    seen = {start}
    stack = [start]
    while stack:
        for nb in neighbors(ctx, stack.pop()):
            if nb not in seen:
                if len(seen) >= node_cap:
                    raise CoxeterCapExceeded(
                        f"closure exceeded {node_cap} words; raise the cap"
                    )
                seen.add(nb)
                stack.append(nb)
    return seen


def normal_form(
    ctx: CoxeterContext, w: Sequence[int], node_cap: int = DEFAULT_NODE_CAP
) -> NormalWord:
    """Shortest, then lexicographically least, word reachable from w."""
    best = min(rewrite_closure(ctx, w, node_cap), key=lambda t: (len(t), t))
    return NormalWord(best)


def equal(
    ctx: CoxeterContext,
    w1: Sequence[int],
    w2: Sequence[int],
    node_cap: int = DEFAULT_NODE_CAP,
) -> bool:
    return normal_form(ctx, w1, node_cap) == normal_form(ctx, w2, node_cap)


# -- finite quotient oracles -------------------------------------------------
#
# Elements of the finite quotient are permutations written as tuples;
# composition applies the right factor first.


def perm_identity(degree: int) -> tuple[int, ...]:
    return tuple(range(degree))


def perm_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(a[b[i]] for i in range(len(b)))


def _perm_power(a: Sequence[int], n: int) -> tuple[int, ...]:
    out = perm_identity(len(a))
    for _ in range(n):
        out = perm_mul(out, a)
    return out


def finite_quotient_oracle(
    ctx: CoxeterContext, hom: Mapping[int, tuple[int, ...]]
) -> Callable[[Sequence[int], Sequence[int]], bool]:
    """Build a word-equality tester from a map into a finite permutation group.

    The map must send every generator to a permutation of one common degree
    and respect all relators (squares, commuting pairs, braid); otherwise
    RelatorViolation is raised.  The resulting tester is sound for
    inequality: words equal in the group always get equal images.
    """
    degrees = {len(hom[g]) for g in range(ctx.generators)}
    if len(degrees) != 1:
        raise ValueError("all images must be permutations of one degree")
    degree = degrees.pop()
    e = perm_identity(degree)
    for g in range(ctx.generators):
        if sorted(hom[g]) != list(range(degree)):
            raise ValueError(f"image of generator {g} is not a permutation")
        if perm_mul(hom[g], hom[g]) != e:
            raise RelatorViolation(f"image of generator {g} is not an involution")
    for j, k in ctx.commuting:
        if perm_mul(hom[j], hom[k]) != perm_mul(hom[k], hom[j]):
            raise RelatorViolation(f"images of commuting pair ({j},{k}) do not commute")
    t1, t2, p = ctx.braid
    if _perm_power(perm_mul(hom[t1], hom[t2]), p) != e:
        raise RelatorViolation("braid relator does not map to the identity")

    def image(w: Sequence[int]) -> tuple[int, ...]:
        acc = e
        for g in w:
            acc = perm_mul(acc, hom[g])
        return acc

    return lambda w1, w2: image(w1) == image(w2)


def dihedral_permutation_hom(ctx: CoxeterContext) -> dict[int, tuple[int, ...]]:
    """Quotient killing all non-braid generators; t1, t2 become reflections
    of a p-gon whose product is a full rotation."""
    t1, t2, p = ctx.braid
    reflect = tuple((-i) % p for i in range(p))  # i -> -i
    reflect_shift = tuple((1 - i) % p for i in range(p))  # i -> 1 - i
    hom = {g: perm_identity(p) for g in range(ctx.generators)}
    hom[t1] = reflect_shift
    hom[t2] = reflect
    return hom


def sign_hom(ctx: CoxeterContext) -> dict[int, tuple[int, ...]]:
    """Every generator maps to the same transposition: a parity check."""
    return {g: (1, 0) for g in range(ctx.generators)}
