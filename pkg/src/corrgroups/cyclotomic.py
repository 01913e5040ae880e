"""Exact arithmetic in cyclotomic fields.

A value is stored against an explicit conductor ``n`` as a vector of rational
coefficients over the power basis ``1, w, w^2, ..., w^(phi(n)-1)`` where ``w``
is the primitive root of unity ``exp(2*pi*i/n)``.  Reduction modulo the n-th
cyclotomic polynomial makes the representation canonical for a fixed
conductor; values at different conductors are compared by lifting both to the
least common multiple.

Internally a value keeps an integer coefficient vector plus a single positive
denominator, so multiplication is integer polynomial multiplication followed
by an integer remainder (the cyclotomic polynomials are monic).
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

__all__ = [
    "CyclotomicNumber",
    "cyclotomic_polynomial",
    "root_of_unity",
    "cos_value",
    "sin_value",
    "euler_phi",
]


def _factorize(n: int) -> dict[int, int]:
    factors: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def euler_phi(n: int) -> int:
    """Euler totient; the degree of the n-th cyclotomic field."""
    if n < 1:
        raise ValueError("conductor must be positive")
    result = n
    for p in _factorize(n):
        result = result // p * (p - 1)
    return result


def _divisors(n: int) -> list[int]:
    divs = [d for d in range(1, n + 1) if n % d == 0]
    return divs


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    if len(a) * len(b) <= 64:
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] += ai * bj
        return out
    # Kronecker substitution: pack each polynomial into one big integer,
    # multiply once, and read the (signed) digits back off.
    amax = max(abs(c) for c in a)
    bmax = max(abs(c) for c in b)
    if amax == 0 or bmax == 0:
        return [0] * (len(a) + len(b) - 1)
    k = (amax * bmax * min(len(a), len(b))).bit_length() + 2
    packed_a = 0
    for c in reversed(a):
        packed_a = (packed_a << k) + c
    packed_b = 0
    for c in reversed(b):
        packed_b = (packed_b << k) + c
    product = packed_a * packed_b
    base = 1 << k
    half = base >> 1
    out = []
    for _ in range(len(a) + len(b) - 1):
        digit = product & (base - 1)
        if digit >= half:
            digit -= base
        product = (product - digit) >> k
        out.append(digit)
    return out


def _poly_divmod_monic(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    """Quotient and remainder of integer polynomials; ``den`` must be monic."""
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    num = list(num)
    deg_d = len(den) - 1
    q = [0] * max(len(num) - deg_d, 1)
    for i in range(len(num) - 1, deg_d - 1, -1):
        c = num[i]
        if c:
            q[i - deg_d] = c
            for j, dj in enumerate(den):
                num[i - deg_d + j] -= c * dj
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return q, num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients (low degree first) of the n-th cyclotomic polynomial.

    Computed from ``x^n - 1 = prod_{d | n} Phi_d(x)`` by exact division.
    """
    if n < 1:
        raise ValueError("conductor must be positive")
    if n == 1:
        return (-1, 1)
    num = [0] * (n + 1)
    num[0] = -1
    num[n] = 1
    den: list[int] = [1]
    for d in _divisors(n):
        if d < n:
            den = _poly_mul(den, cyclotomic_polynomial(d))
    q, r = _poly_divmod_monic(num, den)
    if any(r_i != 0 for r_i in r):
        raise ArithmeticError("cyclotomic division left a remainder")
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    return tuple(q)


def _reduce_mod_cyclotomic(coeffs: Sequence[int], n: int) -> list[int]:
    phi = euler_phi(n)
    _, rem = _poly_divmod_monic(list(coeffs) + [0], list(cyclotomic_polynomial(n)))
    rem = list(rem) + [0] * (phi - len(rem))
    return rem[:phi]


class CyclotomicNumber:
    """An element of the n-th cyclotomic field, exactly represented.

    ``num`` is the integer coefficient vector over the power basis after
    reduction, ``den`` the common positive denominator.  Instances are
    immutable; all arithmetic returns new objects.  Mixed-conductor
    operations lift both operands to the lcm conductor.
    """

    __slots__ = ("conductor", "num", "den")

    def __init__(self, conductor: int, num: Iterable[int], den: int = 1):
        if den == 0:
            raise ZeroDivisionError("denominator is zero")
        num = list(num)
        phi = euler_phi(conductor)
        if len(num) > phi:
            num = _reduce_mod_cyclotomic(num, conductor)
        num += [0] * (phi - len(num))
        if den < 0:
            den = -den
            num = [-c for c in num]
        g = den
        for c in num:
            g = gcd(g, c)
            if g == 1:
                break
        if g > 1:
            den //= g
            num = [c // g for c in num]
        object.__setattr__(self, "conductor", conductor)
        object.__setattr__(self, "num", tuple(num))
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("CyclotomicNumber is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rational(cls, value, conductor: int = 1) -> "CyclotomicNumber":
        frac = Fraction(value)
        vec = [0] * euler_phi(conductor)
        vec[0] = frac.numerator
        return cls(conductor, vec, frac.denominator)

    @classmethod
    def zero(cls, conductor: int = 1) -> "CyclotomicNumber":
        return cls(conductor, [0])

    @classmethod
    def one(cls, conductor: int = 1) -> "CyclotomicNumber":
        return cls.from_rational(1, conductor)

    # -- structure ----------------------------------------------------

    def lift(self, conductor: int) -> "CyclotomicNumber":
        """Rewrite at a larger conductor (must be a multiple of the current one)."""
        if conductor == self.conductor:
            return self
        if conductor % self.conductor != 0:
            raise ValueError("can only lift to a multiple of the conductor")
        step = conductor // self.conductor
        vec = [0] * conductor
        for k, c in enumerate(self.num):
            if c:
                vec[k * step] += c
        return CyclotomicNumber(conductor, vec, self.den)

    def _unified(self, other: "CyclotomicNumber") -> tuple["CyclotomicNumber", "CyclotomicNumber"]:
        if self.conductor == other.conductor:
            return self, other
        m = self.conductor * other.conductor // gcd(self.conductor, other.conductor)
        return self.lift(m), other.lift(m)

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.num)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is not rational")
        return Fraction(self.num[0], self.den)

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.from_rational(other, 1)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._unified(other)
        num = [ca * b.den + cb * a.den for ca, cb in zip(a.num, b.num)]
        return CyclotomicNumber(a.conductor, num, a.den * b.den)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.conductor, [-c for c in self.num], self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_rational():
            q = other.to_fraction()
            return CyclotomicNumber(
                self.conductor,
                [c * q.numerator for c in self.num],
                self.den * q.denominator,
            )
        if self.is_rational():
            q = self.to_fraction()
            return CyclotomicNumber(
                other.conductor,
                [c * q.numerator for c in other.num],
                other.den * q.denominator,
            )
        a, b = self._unified(other)
        prod = _poly_mul(a.num, b.num)
        return CyclotomicNumber(a.conductor, prod, a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a rational (general field inverses are not needed here)."""
        if isinstance(other, CyclotomicNumber):
            if not other.is_rational():
                raise TypeError("division only by rational values")
            other = other.to_fraction()
        frac = Fraction(other)
        if frac == 0:
            raise ZeroDivisionError("division by zero")
        return CyclotomicNumber(
            self.conductor,
            [c * frac.denominator for c in self.num],
            self.den * frac.numerator,
        )

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._unified(other)
        return a.num == b.num and a.den == b.den

    def conjugate(self) -> "CyclotomicNumber":
        """Complex conjugation, i.e. the basis substitution ``w -> w^(n-1)``."""
        n = self.conductor
        vec = [0] * n
        for k, c in enumerate(self.num):
            vec[(n - k) % n] += c
        return CyclotomicNumber(n, vec, self.den)

    def is_real(self) -> bool:
        return self == self.conjugate()

    # -- conversions ---------------------------------------------------

    def to_complex(self) -> complex:
        total = 0j
        for k, c in enumerate(self.num):
            if c:
                total += c * cmath.exp(2j * cmath.pi * k / self.conductor)
        return total / self.den

    def to_float(self) -> float:
        z = self.to_complex()
        if abs(z.imag) > 1e-9 * max(1.0, abs(z.real)):
            raise ValueError("value is not real")
        return z.real

    def to_json(self) -> dict:
        return {
            "conductor": self.conductor,
            "coeffs": [
                [f.numerator, f.denominator]
                for f in (Fraction(c, self.den) for c in self.num)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CyclotomicNumber":
        conductor = int(data["conductor"])
        fracs = [Fraction(int(p), int(q)) for p, q in data["coeffs"]]
        den = 1
        for f in fracs:
            den = den * f.denominator // gcd(den, f.denominator)
        num = [int(f * den) for f in fracs]
        return cls(conductor, num, den)

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.num):
            if c:
                coeff = Fraction(c, self.den)
                if k == 0:
                    terms.append(str(coeff))
                else:
                    terms.append(f"{coeff}*w{self.conductor}^{k}")
        if not terms:
            return "Cyc(0)"
        return "Cyc(" + " + ".join(terms) + ")"


def root_of_unity(n: int, k: int = 1) -> CyclotomicNumber:
    """The root of unity ``exp(2*pi*i*k/n)`` as an exact value at conductor n."""
    k %= n
    vec = [0] * (n + 1)
    vec[k] = 1
    return CyclotomicNumber(n, vec)


def cos_value(j: int, p: int) -> CyclotomicNumber:
    """Exact ``cos(2*j*pi/p)`` as ``(w_p^j + w_p^-j) / 2`` at conductor p."""
    return (root_of_unity(p, j) + root_of_unity(p, -j)) / 2


def sin_value(j: int, p: int) -> CyclotomicNumber:
    """Exact ``sin((2j+1)*pi/p)`` at conductor 4p.

    Built as ``(w_{2p}^{2j+1} - w_{2p}^{-(2j+1)}) * w_4^3 / 2``; the factor
    ``w_4^3 = -i`` supplies the ``1/(2i)``.
    """
    m = 4 * p
    k = 2 * (2 * j + 1)  # exponent of w_{2p}^{2j+1} rewritten at conductor 4p
    diff = root_of_unity(m, k) - root_of_unity(m, -k)
    return diff * root_of_unity(m, 3 * p) / 2
