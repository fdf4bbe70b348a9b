"""Coefficient sequences ``n -> d x d matrix`` for the diagonals of band operators.

Every supported kind is *eventually periodic* in both directions: there is
a period ``P`` and a window ``[lo, hi)`` outside of which the sequence
coincides with a ``P``-periodic tail.  That is what makes the limit
operators of the resulting band operators computable in closed form.
The behaviour is reported by :meth:`Coefficient.asymptotics`.
"""

from dataclasses import dataclass
from math import lcm
from typing import NamedTuple

import numpy as np

from ._validation import check_positive_int, check_square_matrix

PROFILES = ("step", "linear", "cubic")


def _freeze(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _matrix_stack(values, dim=None, name="values"):
    mats = [check_square_matrix(v, dim, name) for v in values]
    if not mats:
        raise ValueError(f"{name} must be non-empty")
    d = mats[0].shape[0]
    if any(m.shape[0] != d for m in mats):
        raise ValueError(f"{name} must share one block size")
    return _freeze(np.stack(mats))


class Asymptotics(NamedTuple):
    """Eventually periodic description of a coefficient sequence.

    ``c(n) == plus[n % period]`` for ``n >= hi`` and
    ``c(n) == minus[n % period]`` for ``n < lo``.
    """

    period: int
    plus: np.ndarray
    minus: np.ndarray
    lo: int
    hi: int


class Coefficient:
    """Base class of the coefficient kinds."""

    kind = "abstract"

    @property
    def block_dim(self):
        raise NotImplementedError

    def values(self, ns):
        """Vectorised evaluation, returns shape ``(len(ns), d, d)``."""
        raise NotImplementedError

    def value_at(self, n):
        return self.values(np.array([n]))[0]

    def shifted(self, h):
        """The sequence ``n -> c(n + h)``."""
        raise NotImplementedError

    def reflected(self):
        """The sequence ``n -> c(-1 - n)``."""
        raise NotImplementedError

    def asymptotics(self):
        raise NotImplementedError

    def is_zero(self):
        return False


@dataclass(frozen=True, eq=False)
class Constant(Coefficient):
    value: np.ndarray
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", _freeze(check_square_matrix(self.value, name="value")))

    @property
    def block_dim(self):
        return self.value.shape[0]

    def values(self, ns):
        return np.broadcast_to(self.value, (len(ns),) + self.value.shape).copy()

    def shifted(self, h):
        return self

    def reflected(self):
        return self

    def asymptotics(self):
        tail = self.value[None]
        return Asymptotics(1, tail, tail, 0, 0)

    def is_zero(self):
        return not np.any(self.value)


@dataclass(frozen=True, eq=False)
class Periodic(Coefficient):
    """``c(n) = values[n mod period]``."""

    values_: np.ndarray
    kind = "periodic"

    def __init__(self, values):
        object.__setattr__(self, "values_", _matrix_stack(values))

    @property
    def period(self):
        return self.values_.shape[0]

    @property
    def block_dim(self):
        return self.values_.shape[1]

    def values(self, ns):
        return self.values_[np.mod(np.asarray(ns, dtype=int), self.period)]

    def shifted(self, h):
        return Periodic(np.roll(self.values_, -h, axis=0))

    def reflected(self):
        q = self.period
        return Periodic(self.values_[[(-1 - r) % q for r in range(q)]])

    def asymptotics(self):
        return Asymptotics(self.period, self.values_, self.values_, 0, 0)

    def is_zero(self):
        return not np.any(self.values_)


def _profile(kind, u):
    u = np.clip(u, 0.0, 1.0)
    if kind == "linear":
        return u
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True, eq=False)
class Stabilizing(Coefficient):
    """Sequence moving from ``value_minus`` to ``value_plus`` across a finite window.

    ``c(n) = (1 - theta(n)) value_minus + theta(n) value_plus`` where theta
    is 0 for ``n <= center - width`` and 1 for ``n >= center + width``
    (``step`` switches at ``n = center``).
    """

    value_minus: np.ndarray
    value_plus: np.ndarray
    profile: str = "step"
    width: int = 1
    center: int = 0
    kind = "stabilizing"

    def __post_init__(self):
        vm = check_square_matrix(self.value_minus, name="value_minus")
        vp = check_square_matrix(self.value_plus, vm.shape[0], "value_plus")
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        object.__setattr__(self, "value_minus", _freeze(vm))
        object.__setattr__(self, "value_plus", _freeze(vp))
        object.__setattr__(self, "width", check_positive_int(self.width, "width"))
        object.__setattr__(self, "center", int(self.center))

    @property
    def block_dim(self):
        return self.value_minus.shape[0]

    def theta(self, ns):
        ns = np.asarray(ns, dtype=float)
        if self.profile == "step":
            return (ns >= self.center).astype(float)
        u = (ns - self.center + self.width) / (2.0 * self.width)
        return _profile(self.profile, u)

    def values(self, ns):
        th = self.theta(ns)[:, None, None]
        out = (1.0 - th) * self.value_minus + th * self.value_plus
        # exact limits outside the window
        out[th[:, 0, 0] == 0.0] = self.value_minus
        out[th[:, 0, 0] == 1.0] = self.value_plus
        return out

    def shifted(self, h):
        return Stabilizing(self.value_minus, self.value_plus, self.profile, self.width,
                           self.center - h)

    def reflected(self):
        center = -self.center if self.profile == "step" else -self.center - 1
        return Stabilizing(self.value_plus, self.value_minus, self.profile, self.width, center)

    def asymptotics(self):
        if self.profile == "step":
            lo = hi = self.center
        else:
            lo, hi = self.center - self.width + 1, self.center + self.width
        return Asymptotics(1, self.value_plus[None], self.value_minus[None], lo, hi)


@dataclass(frozen=True, eq=False)
class FiniteSupport(Coefficient):
    """``c(start + i) = values[i]``, zero elsewhere."""

    start: int
    values_: np.ndarray
    kind = "finite_support"

    def __init__(self, start, values):
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "values_", _matrix_stack(values))

    @property
    def stop(self):
        return self.start + self.values_.shape[0]

    @property
    def block_dim(self):
        return self.values_.shape[1]

    def values(self, ns):
        ns = np.asarray(ns, dtype=int)
        d = self.block_dim
        out = np.zeros((len(ns), d, d), dtype=complex)
        inside = (ns >= self.start) & (ns < self.stop)
        out[inside] = self.values_[ns[inside] - self.start]
        return out

    def shifted(self, h):
        return FiniteSupport(self.start - h, self.values_)

    def reflected(self):
        return FiniteSupport(-self.stop, self.values_[::-1])

    def asymptotics(self):
        zero = np.zeros((1, self.block_dim, self.block_dim), dtype=complex)
        return Asymptotics(1, zero, zero, self.start, self.stop)

    def is_zero(self):
        return not np.any(self.values_)


def _tail_stack(asym, side, period):
    tail = asym.plus if side == "plus" else asym.minus
    return tail[np.arange(period) % asym.period]


@dataclass(frozen=True, eq=False)
class Sum(Coefficient):
    terms: tuple
    kind = "sum"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum needs at least one term")
        if len({t.block_dim for t in self.terms}) != 1:
            raise ValueError("Sum terms must share one block size")

    @property
    def block_dim(self):
        return self.terms[0].block_dim

    def values(self, ns):
        return sum(t.values(ns) for t in self.terms)

    def shifted(self, h):
        return Sum(tuple(t.shifted(h) for t in self.terms))

    def reflected(self):
        return Sum(tuple(t.reflected() for t in self.terms))

    def asymptotics(self):
        parts = [t.asymptotics() for t in self.terms]
        period = lcm(*(a.period for a in parts))
        plus = sum(_tail_stack(a, "plus", period) for a in parts)
        minus = sum(_tail_stack(a, "minus", period) for a in parts)
        return Asymptotics(period, plus, minus, min(a.lo for a in parts), max(a.hi for a in parts))


@dataclass(frozen=True, eq=False)
class Product(Coefficient):
    """Pointwise matrix product ``c(n) = f_1(n) @ f_2(n) @ ...``."""

    factors: tuple
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")
        if len({f.block_dim for f in self.factors}) != 1:
            raise ValueError("Product factors must share one block size")

    @property
    def block_dim(self):
        return self.factors[0].block_dim

    def values(self, ns):
        out = self.factors[0].values(ns)
        for f in self.factors[1:]:
            out = np.matmul(out, f.values(ns))
        return out

    def shifted(self, h):
        return Product(tuple(f.shifted(h) for f in self.factors))

    def reflected(self):
        return Product(tuple(f.reflected() for f in self.factors))

    def asymptotics(self):
        parts = [f.asymptotics() for f in self.factors]
        period = lcm(*(a.period for a in parts))
        plus = _tail_stack(parts[0], "plus", period)
        minus = _tail_stack(parts[0], "minus", period)
        for a in parts[1:]:
            plus = np.matmul(plus, _tail_stack(a, "plus", period))
            minus = np.matmul(minus, _tail_stack(a, "minus", period))
        return Asymptotics(period, plus, minus, min(a.lo for a in parts), max(a.hi for a in parts))


@dataclass(frozen=True, eq=False)
class Interleaved(Coefficient):
    """Scalar sequence read off block coefficients: ``c(n d + r) = parts[r](n)[row, col]``.

    ``parts[r]`` is ``(coefficient or None, row, col)``; None means zero.
    """

    factor: int
    parts: tuple
    kind = "interleaved"

    def __post_init__(self):
        object.__setattr__(self, "factor", check_positive_int(self.factor, "factor"))
        parts = tuple((c, int(row), int(col)) for c, row, col in self.parts)
        if len(parts) != self.factor:
            raise ValueError("need one part per residue")
        object.__setattr__(self, "parts", parts)

    @property
    def block_dim(self):
        return 1

    def values(self, ns):
        ns = np.asarray(ns, dtype=int)
        out = np.zeros((len(ns), 1, 1), dtype=complex)
        q, r = np.divmod(ns, self.factor)
        for res, (coef, row, col) in enumerate(self.parts):
            sel = r == res
            if coef is not None and sel.any():
                out[sel, 0, 0] = coef.values(q[sel])[:, row, col]
        return out

    def shifted(self, h):
        d = self.factor
        parts = []
        for r in range(d):
            carry, res = divmod(r + h, d)
            coef, row, col = self.parts[res]
            parts.append((None if coef is None else coef.shifted(carry), row, col))
        return Interleaved(d, tuple(parts))

    def reflected(self):
        d = self.factor
        parts = []
        for r in range(d):
            coef, row, col = self.parts[d - 1 - r]
            parts.append((None if coef is None else coef.reflected(), row, col))
        return Interleaved(d, tuple(parts))

    def asymptotics(self):
        d = self.factor
        asyms = [None if c is None else c.asymptotics() for c, _, _ in self.parts]
        live = [a for a in asyms if a is not None]
        if not live:
            zero = np.zeros((1, 1, 1), dtype=complex)
            return Asymptotics(1, zero, zero, 0, 0)
        q = lcm(*(a.period for a in live))
        period = d * q
        plus = np.zeros((period, 1, 1), dtype=complex)
        minus = np.zeros((period, 1, 1), dtype=complex)
        for big in range(period):
            n, r = divmod(big, d)
            a = asyms[r]
            if a is None:
                continue
            _, row, col = self.parts[r]
            plus[big, 0, 0] = a.plus[n % a.period][row, col]
            minus[big, 0, 0] = a.minus[n % a.period][row, col]
        return Asymptotics(period, plus, minus,
                           d * min(a.lo for a in live), d * max(a.hi for a in live))


BASE_KINDS = (Constant, Periodic, Stabilizing, FiniteSupport)
SUPPORTED_KINDS = BASE_KINDS + (Sum, Product, Interleaved)


def _shift_periodic_values(coefs):
    """Common-period value stack if every coefficient is constant or periodic."""
    if not all(isinstance(c, (Constant, Periodic)) for c in coefs):
        return None
    period = lcm(*(getattr(c, "period", 1) for c in coefs))
    return period, [c.values(np.arange(period)) for c in coefs]


def periodic_or_constant(stack):
    """Smallest-period :class:`Periodic` (or :class:`Constant`) for a value stack."""
    stack = np.asarray(stack, dtype=complex)
    period = stack.shape[0]
    for p in range(1, period + 1):
        if period % p == 0 and np.array_equal(stack, np.tile(stack[:p], (period // p, 1, 1))):
            break
    if p == 1:
        return Constant(stack[0])
    return Periodic(stack[:p])


def add(*coefs):
    """Sum of coefficients, folded to a base kind whenever that is exact."""
    coefs = [c for c in coefs if not c.is_zero()] or list(coefs[:1])
    if len(coefs) == 1:
        return coefs[0]
    folded = _shift_periodic_values(coefs)
    if folded is not None:
        return periodic_or_constant(sum(folded[1]))
    if all(isinstance(c, FiniteSupport) for c in coefs):
        start = min(c.start for c in coefs)
        stop = max(c.stop for c in coefs)
        ns = np.arange(start, stop)
        return FiniteSupport(start, sum(c.values(ns) for c in coefs))
    flat = []
    for c in coefs:
        flat.extend(c.terms if isinstance(c, Sum) else (c,))
    return Sum(tuple(flat))


def multiply(*coefs):
    """Pointwise product, folded to a base kind whenever that is exact."""
    if len(coefs) == 1:
        return coefs[0]
    d = coefs[0].block_dim
    if any(c.is_zero() for c in coefs):
        return Constant(np.zeros((d, d)))
    folded = _shift_periodic_values(coefs)
    if folded is not None:
        period, stacks = folded
        out = stacks[0]
        for s in stacks[1:]:
            out = np.matmul(out, s)
        return periodic_or_constant(out)
    finite = [c for c in coefs if isinstance(c, FiniteSupport)]
    if finite:
        start = max(c.start for c in finite)
        stop = min(c.stop for c in finite)
        if stop <= start:
            return Constant(np.zeros((d, d)))
        ns = np.arange(start, stop)
        out = coefs[0].values(ns)
        for c in coefs[1:]:
            out = np.matmul(out, c.values(ns))
        return FiniteSupport(start, out)
    flat = []
    for c in coefs:
        flat.extend(c.factors if isinstance(c, Product) else (c,))
    return Product(tuple(flat))


def scale(coef, factor):
    factor = complex(factor)
    if factor == 1:
        return coef
    d = coef.block_dim
    return multiply(Constant(factor * np.eye(d)), coef)
