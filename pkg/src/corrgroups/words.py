"""Freely reduced words over an arbitrary alphabet.

A :class:`Word` is an immutable sequence of letters ``(symbol, exponent)``
with exponents +1 or -1, kept freely reduced (no adjacent ``s s^-1``).
Symbols can be any hashable objects, which lets the same machinery serve
group presentations whose generators are strings, tuples, or richer keys.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Iterator, Sequence, TypeVar

__all__ = ["Word", "commutator"]

T = TypeVar("T")

Letter = tuple[Hashable, int]


def _free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for sym, exp in letters:
        if exp not in (1, -1):
            raise ValueError("letter exponents must be +1 or -1")
        if out and out[-1][0] == sym and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((sym, exp))
    return tuple(out)


class Word:
    """A freely reduced word; the identity is the empty word."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[Letter] = ()):
        object.__setattr__(self, "letters", _free_reduce(letters))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Word is immutable")

    @classmethod
    def identity(cls) -> "Word":
        return cls()

    @classmethod
    def gen(cls, symbol: Hashable, exponent: int = 1) -> "Word":
        """A single-letter word, or ``symbol**exponent`` for any integer exponent."""
        if exponent == 0:
            return cls()
        sign = 1 if exponent > 0 else -1
        return cls([(symbol, sign)] * abs(exponent))

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word()
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def inverse(self) -> "Word":
        return Word([(sym, -exp) for sym, exp in reversed(self.letters)])

    def conjugated_by(self, h: "Word") -> "Word":
        """``h^-1 * self * h``."""
        return h.inverse() * self * h

    def cyclically_reduced(self) -> "Word":
        letters = list(self.letters)
        while len(letters) >= 2 and letters[0][0] == letters[-1][0] and letters[0][1] == -letters[-1][1]:
            letters = letters[1:-1]
        return Word(letters)

    def symbols(self) -> set:
        return {sym for sym, _ in self.letters}

    def evaluate(
        self,
        assign: Callable[[Hashable], T],
        mul: Callable[[T, T], T],
        inv: Callable[[T], T],
        identity: T,
    ) -> T:
        """Image of the word under the map sending each symbol through ``assign``."""
        acc = identity
        for sym, exp in self.letters:
            g = assign(sym)
            acc = mul(acc, g if exp == 1 else inv(g))
        return acc

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def format(self, name: Callable[[Hashable], str] = str) -> str:
        """Compact text form, grouping runs of equal letters into powers."""
        if not self.letters:
            return "1"
        parts: list[str] = []
        i = 0
        letters: Sequence[Letter] = self.letters
        while i < len(letters):
            sym, exp = letters[i]
            j = i
            while j + 1 < len(letters) and letters[j + 1] == (sym, exp):
                j += 1
            count = (j - i + 1) * exp
            parts.append(name(sym) if count == 1 else f"{name(sym)}^{count}")
            i = j + 1
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"Word({self.format()})"


def commutator(a: Word, b: Word) -> Word:
    """``a^-1 b^-1 a b``."""
    return a.inverse() * b.inverse() * a * b
