"""Question/answer projections in the group algebra of a Coxeter group
with one braid pair, and the correlations they induce.

A context fixes a binary linear system (three variables per row), two
designated generators t1, t2 whose product has odd prime order p, and a
distinguished variable x0.  ``sigma`` sends each question/answer pair to a
self-adjoint idempotent of the group algebra: half-sums for variables,
triple products for rows, and dihedral idempotents transported along
rho = t1 t2 for the extra questions.  The union of supports of all pairwise
products is a finite word set; {0,1}-valued functions on it with pinned
values (1 at the identity, 0 at x0 and on the embedded dihedral subgroup)
induce exact correlations by linear extension, and the family of interest
keeps exactly those whose restriction to the linear-system questions is a
perfect correlation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import _exact as xla
from .correlations import (
    Correlation,
    PerfectCorrelationReport,
    Scenario,
    check_perfect,
    perfect_scenario,
    variable_label,
)
from .coxeter import CoxeterContext, NormalWord, RelatorViolation, normal_form
from .cyclotomic import CyclotomicNumber
from .dihedral import _as_cyclotomic, _idempotent_table, _is_prime, packed_answer
from .presentations import BinaryLinearSystem

__all__ = [
    "ANSWERS",
    "ConstraintViolation",
    "FnContext",
    "GroupAlgebraElement",
    "TraceConstraints",
    "TraceFunction",
    "sigma",
    "compute_Wn",
    "trace_constraints",
    "correlation_from_f",
    "membership_report",
    "is_in_Fn",
    "enumerate_Fn",
    "f_from_finite_image",
]

ANSWERS = tuple(itertools.product((0, 1), repeat=3))

IDENTITY = NormalWord(())


class ConstraintViolation(Exception):
    """A trace function breaks one of its pinned-value constraints."""


def _word_order(w):
    return (len(w), w)


@dataclass(frozen=True)
class FnContext:
    """A linear system with designated generators and a braid exponent.

    ``x0`` is the distinguished variable whose trace is pinned to 0; ``t1``
    and ``t2`` generate the embedded dihedral subgroup (their product gets
    order p).  ``u1`` and ``u2`` are accepted as bookkeeping for callers
    tracking a conjugating pair of generators, but nothing here uses them.
    """

    system: BinaryLinearSystem
    x0: int
    t1: int
    t2: int
    p: int
    u1: int | None = None
    u2: int | None = None

    def __post_init__(self):
        n = self.system.n
        if self.system.uniform_row_size() != 3:
            raise ValueError("every row must have exactly three nonzero entries")
        for name in ("x0", "t1", "t2"):
            idx = getattr(self, name)
            if not (isinstance(idx, int) and 0 <= idx < n):
                raise ValueError(f"{name} must be a generator index, got {idx!r}")
        if len({self.x0, self.t1, self.t2}) != 3:
            raise ValueError("x0, t1 and t2 must be three distinct generators")
        if self.p < 3 or self.p % 2 == 0 or not _is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        coxeter = CoxeterContext.from_rows(
            n, self.system.rows, self.t1, self.t2, self.p
        )
        object.__setattr__(self, "coxeter", coxeter)
        object.__setattr__(self, "_nf_memo", {})
        object.__setattr__(self, "_cache", {})

    @property
    def m(self) -> int:
        return self.system.m

    @property
    def variable_questions(self) -> tuple:
        return tuple(variable_label(i) for i in range(self.system.n))

    @property
    def row_questions(self) -> tuple:
        return tuple(range(self.m))

    @property
    def extra_questions(self) -> tuple:
        m = self.m
        return (m, m + 1, m + 2, (m, self.t1), (m, self.t2))

    @property
    def questions(self) -> tuple:
        return self.variable_questions + self.row_questions + self.extra_questions

    @property
    def scenario(self) -> Scenario:
        q = self.questions
        return Scenario(q, q, ANSWERS, ANSWERS)

    def normal(self, word) -> NormalWord:
        """Memoized Coxeter normal form of a word over the generators."""
        word = tuple(word)
        got = self._nf_memo.get(word)
        if got is None:
            got = normal_form(self.coxeter, word)
            self._nf_memo[word] = got
        return got

    def to_json(self) -> dict:
        out = {
            "system": self.system.to_json(),
            "x0": self.x0,
            "t1": self.t1,
            "t2": self.t2,
            "p": self.p,
        }
        if self.u1 is not None:
            out["u1"] = self.u1
        if self.u2 is not None:
            out["u2"] = self.u2
        return out

    @classmethod
    def from_json(cls, data: dict) -> "FnContext":
        return cls(
            BinaryLinearSystem.from_json(data["system"]),
            int(data["x0"]),
            int(data["t1"]),
            int(data["t2"]),
            int(data["p"]),
            u1=data.get("u1"),
            u2=data.get("u2"),
        )


class GroupAlgebraElement:
    """A finitely supported group-algebra element over the cyclotomic field.

    Coefficients are keyed by Coxeter normal forms; any word is accepted on
    input and canonicalized, and zero coefficients are dropped, so equality
    is plain support comparison.
    """

    __slots__ = ("ctx", "support")

    def __init__(self, ctx: FnContext, support: Mapping | Iterable = ()):
        items = support.items() if isinstance(support, Mapping) else support
        clean: dict = {}
        for word, coeff in items:
            coeff = _as_cyclotomic(coeff)
            key = ctx.normal(word)
            if key in clean:
                coeff = clean[key] + coeff
            if coeff == 0:
                clean.pop(key, None)
            else:
                clean[key] = coeff
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "support", clean)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("GroupAlgebraElement is immutable")

    @classmethod
    def _raw(cls, ctx, clean: dict) -> "GroupAlgebraElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "ctx", ctx)
        object.__setattr__(obj, "support", clean)
        return obj

    @classmethod
    def zero(cls, ctx: FnContext) -> "GroupAlgebraElement":
        return cls._raw(ctx, {})

    @classmethod
    def one(cls, ctx: FnContext) -> "GroupAlgebraElement":
        return cls._raw(ctx, {IDENTITY: CyclotomicNumber.one()})

    @classmethod
    def from_word(cls, ctx: FnContext, word, coeff=1) -> "GroupAlgebraElement":
        return cls(ctx, [(tuple(word), coeff)])

    def items(self) -> tuple:
        return tuple(sorted(self.support.items(), key=lambda kv: _word_order(kv[0])))

    def words(self) -> tuple:
        return tuple(sorted(self.support, key=_word_order))

    def coefficient(self, word) -> CyclotomicNumber:
        return self.support.get(self.ctx.normal(word), CyclotomicNumber.zero())

    @property
    def is_zero(self) -> bool:
        return not self.support

    def _require_same_ctx(self, other: "GroupAlgebraElement"):
        if self.ctx != other.ctx:
            raise ValueError("elements live over different contexts")

    def __add__(self, other):
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        self._require_same_ctx(other)
        out = dict(self.support)
        for g, c in other.support.items():
            total = out.get(g)
            total = c if total is None else total + c
            if total == 0:
                out.pop(g, None)
            else:
                out[g] = total
        return GroupAlgebraElement._raw(self.ctx, out)

    def __neg__(self):
        return GroupAlgebraElement._raw(
            self.ctx, {g: -c for g, c in self.support.items()}
        )

    def __sub__(self, other):
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GroupAlgebraElement):
            self._require_same_ctx(other)
            ctx = self.ctx
            acc: dict = {}
            for g, cg in self.support.items():
                for h, ch in other.support.items():
                    key = ctx.normal(g + h)
                    coeff = cg * ch
                    prev = acc.get(key)
                    if prev is not None:
                        coeff = prev + coeff
                    if coeff == 0:
                        acc.pop(key, None)
                    else:
                        acc[key] = coeff
            return GroupAlgebraElement._raw(ctx, acc)
        try:
            scalar = _as_cyclotomic(other)
        except TypeError:
            return NotImplemented
        if scalar == 0:
            return GroupAlgebraElement.zero(self.ctx)
        return GroupAlgebraElement._raw(
            self.ctx, {g: c * scalar for g, c in self.support.items()}
        )

    def __rmul__(self, other):
        try:
            scalar = _as_cyclotomic(other)
        except TypeError:
            return NotImplemented
        return self * scalar

    def star(self) -> "GroupAlgebraElement":
        """Conjugate coefficients at inverted group elements (generators are
        involutions, so inversion reverses words)."""
        ctx = self.ctx
        out = {}
        for g, c in self.support.items():
            out[ctx.normal(tuple(reversed(g)))] = c.conjugate()
        return GroupAlgebraElement._raw(ctx, out)

    def trace_under(self, values: Mapping) -> CyclotomicNumber:
        """Linear extension of a {0,1} word function to this element."""
        total = CyclotomicNumber.zero()
        for g, c in self.support.items():
            bit = values.get(g)
            if bit is None:
                raise ConstraintViolation(f"function undefined at {list(g)}")
            if bit:
                total = total + c
        return total

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupAlgebraElement)
            and self.ctx == other.ctx
            and self.support == other.support
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"GroupAlgebraElement({len(self.support)} words)"


# -- the sigma map -----------------------------------------------------------


def _check_answer(a) -> tuple:
    a = tuple(a)
    if a not in ANSWERS:
        raise ValueError(f"answers are binary triples, got {a!r}")
    return a


def _half_sum(ctx: FnContext, generator: int, sign_bit: int) -> GroupAlgebraElement:
    half = Fraction(1, 2)
    return GroupAlgebraElement(
        ctx, [((), half), ((generator,), -half if sign_bit else half)]
    )


def _embedded_idempotents(ctx: FnContext) -> dict:
    """The nine dihedral idempotents written in t1, t2 (rho = t1 t2)."""
    cached = ctx._cache.get("idempotents")
    if cached is None:
        cached = {}
        for key, elem in _idempotent_table(ctx.p).items():
            support = {}
            for g, coeff in elem.items():
                support[(ctx.t2,) * g.s + (ctx.t1, ctx.t2) * g.j] = coeff
            cached[key] = GroupAlgebraElement(ctx, support)
        ctx._cache["idempotents"] = cached
    return cached


def sigma(ctx: FnContext, x, a) -> GroupAlgebraElement:
    """The self-adjoint idempotent attached to a question/answer pair.

    Variables take half-sums (e +- x_i)/2 and are dead off (a0, a1) = (0, 0);
    rows take the product of their three half-sums; the three extra integer
    questions take dihedral idempotents (dead unless a2 = 0); the two pair
    questions take a dihedral idempotent times a t half-sum.
    """
    a0, a1, a2 = _check_answer(a)
    m = ctx.m
    if isinstance(x, tuple) and len(x) == 2 and x[0] == "x":
        i = x[1]
        if not (isinstance(i, int) and 0 <= i < ctx.system.n):
            raise ValueError(f"unknown variable question {x!r}")
        if (a0, a1) != (0, 0):
            return GroupAlgebraElement.zero(ctx)
        return _half_sum(ctx, i, a2)
    if isinstance(x, tuple) and len(x) == 2 and x[0] == m:
        if x[1] not in (ctx.t1, ctx.t2):
            raise ValueError(f"unknown pair question {x!r}")
        code = packed_answer(a0, a1)
        if code == 3:
            return GroupAlgebraElement.zero(ctx)
        return _embedded_idempotents(ctx)[(0, code)] * _half_sum(ctx, x[1], a2)
    if isinstance(x, int) and 0 <= x < m:
        row = ctx.system.rows[x]
        out = GroupAlgebraElement.one(ctx)
        for k in row:
            out = out * _half_sum(ctx, k, a[ctx.system.phi(x, k)])
        return out
    if isinstance(x, int) and m <= x < m + 3:
        code = packed_answer(a0, a1)
        if code == 3 or a2 != 0:
            return GroupAlgebraElement.zero(ctx)
        return _embedded_idempotents(ctx)[(x - m, code)]
    raise ValueError(f"unknown question {x!r}")


def _sigma_table(ctx: FnContext) -> list:
    """All nonzero sigma elements as ((x, a), element) pairs."""
    cached = ctx._cache.get("sigma")
    if cached is None:
        cached = [
            ((x, a), el)
            for x in ctx.questions
            for a in ANSWERS
            if not (el := sigma(ctx, x, a)).is_zero
        ]
        ctx._cache["sigma"] = cached
    return cached


def _product_table(ctx: FnContext) -> dict:
    """sigma(x, a) * sigma(y, b) for every pair with both factors nonzero."""
    cached = ctx._cache.get("products")
    if cached is None:
        table = _sigma_table(ctx)
        cached = {
            (x, a, y, b): left * right
            for (x, a), left in table
            for (y, b), right in table
        }
        ctx._cache["products"] = cached
    return cached


def compute_Wn(ctx: FnContext) -> frozenset:
    """The union of the supports of all pairwise measurement products."""
    cached = ctx._cache.get("wn")
    if cached is None:
        out: set = set()
        for element in _product_table(ctx).values():
            out.update(element.support)
        cached = frozenset(out)
        ctx._cache["wn"] = cached
    return cached


# -- trace functions ----------------------------------------------------------


@dataclass(frozen=True)
class TraceConstraints:
    """Partition of a support set into pinned-one, pinned-zero and free."""

    forced_one: tuple
    forced_zero: tuple
    free: tuple


def trace_constraints(ctx: FnContext, wn: Iterable) -> TraceConstraints:
    """Split wn: the identity is pinned to 1; the distinguished variable and
    the embedded dihedral subgroup (normal forms using only t letters) are
    pinned to 0; everything else is free."""
    wn = {NormalWord(tuple(w)) for w in wn}
    if IDENTITY not in wn:
        raise ValueError("the support set must contain the identity")
    t_letters = {ctx.t1, ctx.t2}
    x0_word = ctx.normal((ctx.x0,))
    forced_zero = {
        w for w in wn if w != IDENTITY and (w == x0_word or set(w) <= t_letters)
    }
    free = wn - forced_zero - {IDENTITY}
    return TraceConstraints(
        (IDENTITY,),
        tuple(sorted(forced_zero, key=_word_order)),
        tuple(sorted(free, key=_word_order)),
    )


class TraceFunction:
    """A {0,1}-valued function on a finite set of normal-form words."""

    __slots__ = ("values",)

    def __init__(self, values):
        items = values.items() if isinstance(values, Mapping) else values
        clean: dict = {}
        for word, bit in items:
            if bit not in (0, 1):
                raise ValueError(f"trace values must be bits, got {bit!r}")
            clean[NormalWord(tuple(word))] = int(bit)
        object.__setattr__(self, "values", clean)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("TraceFunction is immutable")

    def __call__(self, word) -> int:
        return self.values[NormalWord(tuple(word))]

    def domain(self) -> frozenset:
        return frozenset(self.values)

    def ones(self) -> tuple:
        return tuple(sorted((w for w, b in self.values.items() if b), key=_word_order))

    def __eq__(self, other) -> bool:
        return isinstance(other, TraceFunction) and self.values == other.values

    __hash__ = None

    def __repr__(self) -> str:
        return f"TraceFunction(domain={len(self.values)}, ones={len(self.ones())})"

    def to_json(self) -> list:
        return [
            [list(w), bit]
            for w, bit in sorted(self.values.items(), key=lambda kv: _word_order(kv[0]))
        ]

    @classmethod
    def from_json(cls, data) -> "TraceFunction":
        return cls([(tuple(int(g) for g in word), int(bit)) for word, bit in data])


def _check_constraints(ctx: FnContext, f: TraceFunction, wn) -> TraceConstraints:
    if set(f.values) != set(wn):
        raise ConstraintViolation(
            "the function must be defined on exactly the support set"
        )
    cons = trace_constraints(ctx, wn)
    if f.values[IDENTITY] != 1:
        raise ConstraintViolation("the identity must map to 1")
    bad = [w for w in cons.forced_zero if f.values[w] != 0]
    if bad:
        shown = ", ".join(str(list(w)) for w in bad[:4])
        raise ConstraintViolation(f"pinned-zero words map to 1: {shown}")
    return cons


# -- correlations and the membership filter -----------------------------------


def correlation_from_f(ctx: FnContext, f: TraceFunction) -> Correlation:
    """The exact correlation f(sigma(x, a) sigma(y, b)) over the full scenario."""
    _check_constraints(ctx, f, compute_Wn(ctx))
    fv = f.values
    table = {}
    for (x, a, y, b), element in _product_table(ctx).items():
        total = None
        for g, c in element.support.items():
            if fv[g]:
                total = c if total is None else total + c
        if total is not None:
            table[(a, b, x, y)] = total
    return Correlation(ctx.scenario, table, exact=True)


def _restricted_correlation(ctx: FnContext, f: TraceFunction) -> Correlation:
    """C_f restricted to the row and variable questions."""
    _check_constraints(ctx, f, compute_Wn(ctx))
    scenario = perfect_scenario(ctx.system)
    keep = set(scenario.X)
    fv = f.values
    table = {}
    for (x, a, y, b), element in _product_table(ctx).items():
        if x in keep and y in keep:
            total = None
            for g, c in element.support.items():
                if fv[g]:
                    total = c if total is None else total + c
            if total is not None:
                table[(a, b, x, y)] = total
    return Correlation(scenario, table, exact=True)


def membership_report(ctx: FnContext, f: TraceFunction) -> PerfectCorrelationReport:
    """The six zero conditions on the restriction of C_f to system questions."""
    return check_perfect(_restricted_correlation(ctx, f), ctx.system)


def is_in_Fn(ctx: FnContext, f: TraceFunction) -> bool:
    """Whether the restriction of C_f to the system questions is perfect."""
    return membership_report(ctx, f).passed


def enumerate_Fn(
    ctx: FnContext, limit: int, start: int = 0
) -> Iterator[tuple[TraceFunction, Correlation]]:
    """Stream members (f, C_f) in a canonical candidate order.

    Candidate i assigns bit k of i to the k-th free word (words ordered by
    length then lexicographically); the stream yields at most ``limit``
    members and is restartable from any candidate index via ``start``.
    Membership only depends on the free words that appear in restricted
    products, so verdicts are memoized on that projection of the bits.
    """
    if limit < 0 or start < 0:
        raise ValueError("limit and start must be nonnegative")
    wn = compute_Wn(ctx)
    cons = trace_constraints(ctx, wn)
    free = cons.free
    base = {w: 0 for w in cons.forced_zero}
    base[IDENTITY] = 1

    keep = set(perfect_scenario(ctx.system).X)
    touched: set = set()
    for (x, a, y, b), element in _product_table(ctx).items():
        if x in keep and y in keep:
            touched.update(element.support)
    positions = [k for k, w in enumerate(free) if w in touched]

    def candidate(index: int) -> TraceFunction:
        values = dict(base)
        for k, w in enumerate(free):
            values[w] = (index >> k) & 1
        return TraceFunction(values)

    verdicts: dict = ctx._cache.setdefault("verdicts", {})
    yielded = 0
    for index in range(start, 1 << len(free)):
        if yielded >= limit:
            return
        key = tuple((index >> k) & 1 for k in positions)
        ok = verdicts.get(key)
        if ok is None:
            ok = is_in_Fn(ctx, candidate(index))
            verdicts[key] = ok
        if ok:
            f = candidate(index)
            yield f, correlation_from_f(ctx, f)
            yielded += 1


# -- trace functions from finite-dimensional images ----------------------------


def _hom_is_exact(mats: dict) -> bool:
    for m in mats.values():
        for row in m:
            for v in row:
                if not isinstance(v, (int, Fraction, CyclotomicNumber)):
                    return False
    return True


def f_from_finite_image(
    ctx: FnContext, hom: Mapping[int, object], tol: float = 1e-9
) -> TraceFunction:
    """Pull the point mass at the identity back along a matrix image.

    ``hom`` maps every generator index to a unitary: nested sequences of
    exact entries (int / Fraction / cyclotomic) or float arrays.  The
    defining relators (squares, commuting pairs, braid) are checked first;
    the resulting function sends a word to 1 exactly when its image is the
    identity matrix (within ``tol`` in float mode), and it must satisfy the
    pinned-value constraints.
    """
    n = ctx.system.n
    mats = {}
    for g in range(n):
        if g not in hom:
            raise ValueError(f"hom misses generator {g}")
        mats[g] = [list(row) for row in hom[g]]
    dim = len(mats[0])
    for g, m in mats.items():
        if len(m) != dim or any(len(row) != dim for row in m):
            raise ValueError("all images must be square matrices of one dimension")

    if _hom_is_exact(mats):
        mats = {g: tuple(tuple(row) for row in m) for g, m in mats.items()}
        eye = xla.identity(dim)
        mul = xla.mat_mul

        def is_eye(m) -> bool:
            return xla.mats_equal(m, eye)

    else:
        mats = {g: np.asarray(m, dtype=complex) for g, m in mats.items()}
        eye = np.eye(dim)

        def mul(a, b):
            return a @ b

        def is_eye(m) -> bool:
            return bool(np.linalg.norm(m - eye) <= tol)

    for g, m in mats.items():
        if not is_eye(mul(m, m)):
            raise RelatorViolation(f"image of generator {g} is not an involution")
    for j, k in sorted(ctx.coxeter.commuting):
        if not is_eye(mul(mul(mats[j], mats[k]), mul(mats[j], mats[k]))):
            raise RelatorViolation(f"images of generators {j} and {k} do not commute")
    braid = mul(mats[ctx.t1], mats[ctx.t2])
    power = eye
    for _ in range(ctx.p):
        power = mul(power, braid)
    if not is_eye(power):
        raise RelatorViolation("the braid relator does not map to the identity")

    values = {}
    for w in sorted(compute_Wn(ctx), key=_word_order):
        img = eye
        for g in w:
            img = mul(img, mats[g])
        values[w] = 1 if is_eye(img) else 0
    f = TraceFunction(values)
    _check_constraints(ctx, f, compute_Wn(ctx))
    return f
