"""Exact dense linear algebra over duck-typed scalars.

Internal helper.  Matrices are tuples of row tuples, vectors plain tuples.
Entries may be int, Fraction, CyclotomicNumber, float, or complex -- anything
with ring arithmetic and ``.conjugate()``.  Sizes stay tiny (a few dozen
rows); exactness, not speed, is the point.
"""

from __future__ import annotations

import math


def to_complex(value) -> complex:
    if hasattr(value, "to_complex"):
        return value.to_complex()
    return complex(value)


def to_float(value) -> float:
    z = to_complex(value)
    if abs(z.imag) > 1e-9 * max(1.0, abs(z.real)):
        raise ValueError(f"value is not real: {value!r}")
    return z.real


def zeros(rows, cols=None):
    cols = rows if cols is None else cols
    return tuple((0,) * cols for _ in range(rows))


def identity(n, scale=1):
    return tuple(tuple(scale if i == j else 0 for j in range(n)) for i in range(n))


def mat_vec(m, v):
    return tuple(sum(entry * v[j] for j, entry in enumerate(row) if entry != 0) for row in m)


def mat_mul(a, b):
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col) if x != 0) for col in bt) for row in a
    )


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(m, s):
    return tuple(tuple(s * x for x in row) for row in m)


def transpose(m):
    return tuple(zip(*m))


def adjoint(m):
    return tuple(tuple(x.conjugate() for x in col) for col in zip(*m))


def trace(m):
    return sum(m[i][i] for i in range(len(m)))


def kron(a, b):
    nb = len(b)
    return tuple(
        tuple(a[i // nb][j // nb] * b[i % nb][j % nb] for j in range(len(a[0]) * len(b[0])))
        for i in range(len(a) * nb)
    )


def vec_add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(u, s):
    return tuple(s * x for x in u)


def vec_dot(u, v):
    """Inner product, conjugate-linear in the first argument."""
    return sum(x.conjugate() * y for x, y in zip(u, v))


def norm_float(v) -> float:
    return math.sqrt(sum(abs(to_complex(x)) ** 2 for x in v))


def frobenius_float(m) -> float:
    return math.sqrt(sum(abs(to_complex(x)) ** 2 for row in m for x in row))


def is_zero_matrix(m) -> bool:
    return all(x == 0 for row in m for x in row)


def mats_equal(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))
