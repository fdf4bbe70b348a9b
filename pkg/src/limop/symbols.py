"""Matrix Laurent symbols and their winding numbers.

A symbol is a trigonometric polynomial ``a(t) = sum_k a_k t^k`` with
``d x d`` complex coefficients.  It generates the Laurent operator with
entries ``A[i, j] = a_{i-j}`` and the Toeplitz operator obtained by
restricting that operator to the non-negative indices.

Winding numbers of scalar symbols are computed two independent ways:
by tracking the argument along an adaptively refined sample of the
curve (:func:`winding_argument`) and by counting polynomial roots inside
the unit disk (:func:`winding_roots`).
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_square_matrix, check_unit_modulus
from .exceptions import CurveUnderResolved, NotElliptic, RootOnCircle, TailNotDecayed

TWO_PI = 2.0 * np.pi
MAX_ROOT_DEGREE = 64
ROOT_CIRCLE_TOL = 1e-8


class LaurentSymbol:
    """Matrix-valued Laurent polynomial ``sum_{k=-lower}^{upper} a_k t^k``.

    Parameters
    ----------
    coefficients : array_like, shape (lower + upper + 1, d, d)
        Coefficient matrices ordered by increasing power.
    lower : int
        Number of negative powers, so ``coefficients[0]`` multiplies
        ``t**(-lower)``.

    Notes
    -----
    The representation is trimmed on construction: outermost zero
    coefficients are dropped as long as the power range still contains 0.
    Instances are immutable.
    """

    __slots__ = ("_coef", "_lower")

    def __init__(self, coefficients, lower=0):
        coef = np.array(coefficients, dtype=complex)
        if coef.ndim == 1:
            coef = coef.reshape(-1, 1, 1)
        if coef.ndim != 3 or coef.shape[1] != coef.shape[2] or coef.shape[0] == 0:
            raise ValueError(f"coefficients must have shape (n, d, d), got {coef.shape}")
        lower = int(lower)
        if lower < 0 or lower > coef.shape[0] - 1:
            raise ValueError("lower must satisfy 0 <= lower < len(coefficients)")
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficients contain non-finite entries")
        lo, hi = 0, coef.shape[0]
        while lo < lower and not np.any(coef[lo]):
            lo += 1
        while hi - 1 > lower and not np.any(coef[hi - 1]):
            hi -= 1
        coef = coef[lo:hi].copy()
        coef.setflags(write=False)
        self._coef = coef
        self._lower = lower - lo

    # -- constructors -------------------------------------------------
    @classmethod
    def from_dict(cls, coefficients, block_dim=None):
        """Build from a mapping ``power -> d x d matrix`` (scalars allowed for d=1)."""
        if not coefficients:
            d = 1 if block_dim is None else block_dim
            return cls(np.zeros((1, d, d)), 0)
        mats = {int(k): check_square_matrix(v, block_dim, f"coefficient {k}")
                for k, v in coefficients.items()}
        d = next(iter(mats.values())).shape[0]
        if any(m.shape[0] != d for m in mats.values()):
            raise ValueError("all coefficients must share one block size")
        lo = min(min(mats), 0)
        hi = max(max(mats), 0)
        coef = np.zeros((hi - lo + 1, d, d), dtype=complex)
        for k, m in mats.items():
            coef[k - lo] = m
        return cls(coef, -lo)

    @classmethod
    def monomial(cls, power, block_dim=1):
        return cls.from_dict({power: np.eye(block_dim)})

    @classmethod
    def constant(cls, value):
        return cls.from_dict({0: value})

    @classmethod
    def diag(cls, *symbols):
        """Block-diagonal symbol from scalar symbols."""
        lo = max(s.lower for s in symbols)
        hi = max(s.upper for s in symbols)
        d = len(symbols)
        coef = np.zeros((lo + hi + 1, d, d), dtype=complex)
        for r, s in enumerate(symbols):
            if s.block_dim != 1:
                raise ValueError("diag expects scalar symbols")
            for k, a in s.items():
                coef[k + lo, r, r] = a[0, 0]
        return cls(coef, lo)

    # -- structure ----------------------------------------------------
    @property
    def block_dim(self):
        return self._coef.shape[1]

    @property
    def lower(self):
        return self._lower

    @property
    def upper(self):
        return self._coef.shape[0] - 1 - self._lower

    @property
    def coefficients(self):
        """Read-only coefficient stack, index 0 holding power ``-lower``."""
        return self._coef

    @property
    def powers(self):
        return np.arange(-self.lower, self.upper + 1)

    def coefficient(self, power):
        idx = power + self.lower
        if 0 <= idx < self._coef.shape[0]:
            return self._coef[idx].copy()
        return np.zeros((self.block_dim, self.block_dim), dtype=complex)

    def items(self):
        """Yield ``(power, matrix)`` for every stored coefficient, zeros included."""
        for k, a in zip(self.powers, self._coef):
            yield int(k), a

    def to_dict(self):
        return {k: a.copy() for k, a in self.items() if np.any(a)}

    def __repr__(self):
        return f"LaurentSymbol(block_dim={self.block_dim}, lower={self.lower}, upper={self.upper})"

    def allclose(self, other, rtol=1e-12, atol=1e-14):
        if self.block_dim != other.block_dim:
            return False
        lo = max(self.lower, other.lower)
        hi = max(self.upper, other.upper)
        return all(np.allclose(self.coefficient(k), other.coefficient(k), rtol=rtol, atol=atol)
                   for k in range(-lo, hi + 1))

    # -- evaluation ---------------------------------------------------
    def at_angles(self, theta):
        """Evaluate at ``t = exp(i theta)``; returns shape ``theta.shape + (d, d)``."""
        theta = np.asarray(theta, dtype=float)
        phase = np.exp(1j * np.multiply.outer(theta, self.powers))
        return np.tensordot(phase, self._coef, axes=([-1], [0]))

    def _at_points(self, t):
        t = np.asarray(t, dtype=complex)
        return np.tensordot(np.power.outer(t, self.powers), self._coef, axes=([-1], [0]))

    def __call__(self, t):
        return evaluate(self, t)

    # -- algebra ------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, LaurentSymbol):
            if other.block_dim != self.block_dim:
                raise ValueError("block sizes differ")
            n = self._coef.shape[0] + other._coef.shape[0] - 1
            d = self.block_dim
            out = np.zeros((n, d, d), dtype=complex)
            for i, a in enumerate(self._coef):
                out[i:i + other._coef.shape[0]] += np.matmul(a, other._coef)
            return LaurentSymbol(out, self.lower + other.lower)
        return LaurentSymbol(self._coef * complex(other), self.lower)

    def __rmul__(self, other):
        return LaurentSymbol(self._coef * complex(other), self.lower)

    def __add__(self, other):
        if not isinstance(other, LaurentSymbol):
            other = LaurentSymbol.constant(np.eye(self.block_dim) * complex(other))
        merged = self.to_dict()
        for k, a in other.items():
            merged[k] = merged.get(k, 0) + a
        return LaurentSymbol.from_dict(merged or {0: np.zeros((self.block_dim,) * 2)})

    __radd__ = __add__

    def __neg__(self):
        return LaurentSymbol(-self._coef, self.lower)

    def __sub__(self, other):
        return self + (-other)

    def conj_reflect(self):
        """The symbol ``t -> conj(a(1 / conj(t)))``; on the circle, ``conj(a(t))``."""
        return LaurentSymbol(np.conj(self._coef[::-1]), self.upper)

    def reflect(self):
        """The symbol ``t -> a(1/t)`` of the reflected Laurent operator."""
        return LaurentSymbol(self._coef[::-1], self.upper)


def evaluate(sym, t):
    """Evaluate ``sym`` at unit-modulus point(s) ``t`` as an exact finite sum.

    Raises ``ValueError`` when ``t`` is off the unit circle by more than 1e-12.
    """
    t = check_unit_modulus(t)
    return sym._at_points(t)


def det_symbol(sym):
    """Scalar Laurent polynomial ``det(sum_k a_k t^k)``.

    With ``P(t) = t^m a(t)`` a polynomial matrix of degree ``m + s``, the
    determinant ``det P`` has degree at most ``d (m + s)``.  It is sampled
    at enough roots of unity and its coefficients are recovered by one FFT,
    which is exact up to rounding; ``det a = t^{-dm} det P``.
    """
    d = sym.block_dim
    if d == 1:
        return LaurentSymbol(sym.coefficients, sym.lower)
    m, s = sym.lower, sym.upper
    degree = d * (m + s)
    n = 1 << max(int(np.ceil(np.log2(degree + 1))), 0)
    theta = TWO_PI * np.arange(n) / n
    # t^m a(t) on the roots of unity
    poly_vals = sym.at_angles(theta) * np.exp(1j * m * theta)[:, None, None]
    dets = np.linalg.det(poly_vals)
    coef = np.fft.fft(dets) / n
    coef = coef[: degree + 1]
    scale = np.max(np.abs(dets)) if dets.size else 0.0
    tol = 64 * np.finfo(float).eps * max(scale, 1e-300)
    coef = np.where(np.abs(coef.real) <= tol, 0.0, coef.real) \
        + 1j * np.where(np.abs(coef.imag) <= tol, 0.0, coef.imag)
    return LaurentSymbol(coef, d * m)


@dataclass(frozen=True)
class CurveSamplePolicy:
    """Sampling rules for the argument-tracking winding count.

    Attributes
    ----------
    initial_points : int
        Uniform samples before refinement (at least 16).
    max_refinements : int
        Rounds of arc bisection allowed before giving up.
    min_modulus : float
        Ellipticity floor; samples below it mean "not certified Fredholm".
    max_arg_step : float
        Refinement stops once every adjacent argument increment is smaller.
    """

    initial_points: int = 64
    max_refinements: int = 20
    min_modulus: float = 1e-6
    max_arg_step: float = np.pi / 4

    def __post_init__(self):
        if int(self.initial_points) < 16:
            raise ValueError("initial_points must be >= 16")
        if int(self.max_refinements) < 0:
            raise ValueError("max_refinements must be >= 0")
        if not self.min_modulus > 0:
            raise ValueError("min_modulus must be positive")
        if not 0 < self.max_arg_step < np.pi:
            raise ValueError("max_arg_step must lie in (0, pi)")


class Winding(NamedTuple):
    number: int
    margin: float


def arg_increments(values):
    values = np.asarray(values, dtype=complex)
    return np.angle(values[1:] * np.conj(values[:-1]))


def refine_curve(func, params, policy):
    """Bisect every arc whose argument step reaches ``policy.max_arg_step``.

    ``func`` maps a parameter array to complex values.  Returns the refined
    ``(params, values)``.  Raises :class:`NotElliptic` as soon as a sample
    drops below ``policy.min_modulus`` and :class:`CurveUnderResolved` when
    the refinement budget runs out.
    """
    params = np.asarray(params, dtype=float)
    values = func(params)
    for rounds in range(policy.max_refinements + 1):
        margin = float(np.min(np.abs(values)))
        if margin < policy.min_modulus:
            raise NotElliptic(
                f"symbol modulus {margin:.3e} below floor {policy.min_modulus:.1e}", margin)
        bad = np.abs(arg_increments(values)) >= policy.max_arg_step
        if not bad.any():
            return params, values
        if rounds == policy.max_refinements:
            break
        mids = 0.5 * (params[:-1][bad] + params[1:][bad])
        order = np.argsort(np.concatenate([params, mids]), kind="stable")
        params = np.concatenate([params, mids])[order]
        values = np.concatenate([values, func(mids)])[order]
    raise CurveUnderResolved(
        f"argument steps still >= {policy.max_arg_step:.3f} after "
        f"{policy.max_refinements} refinements")


def symbol_curve(sym, policy=None):
    """Adaptively sampled closed curve ``theta -> a(e^{i theta})``, theta in [0, 2 pi]."""
    policy = policy or CurveSamplePolicy()
    if sym.block_dim != 1:
        raise ValueError("symbol_curve expects a scalar symbol")
    n0 = max(int(policy.initial_points), 8 * (sym.lower + sym.upper + 1))
    theta = np.linspace(0.0, TWO_PI, n0 + 1)
    return refine_curve(lambda th: sym.at_angles(th)[..., 0, 0], theta, policy)


def winding_argument(sym, policy=None):
    """Winding number of a scalar symbol by argument tracking.

    Returns
    -------
    Winding
        ``(number, margin)`` where ``margin`` is the smallest sampled modulus.

    Raises
    ------
    NotElliptic
        If the sampled modulus falls below ``policy.min_modulus``.
    """
    policy = policy or CurveSamplePolicy()
    _, values = symbol_curve(sym, policy)
    total = float(np.sum(arg_increments(values)))
    return Winding(int(round(total / TWO_PI)), float(np.min(np.abs(values))))


def _companion_roots(coeffs):
    # coeffs in increasing degree; leading coefficient nonzero
    degree = len(coeffs) - 1
    if degree <= 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((degree, degree), dtype=complex)
    comp[0, :] = -coeffs[-2::-1] / coeffs[-1]
    comp[np.arange(1, degree), np.arange(degree - 1)] = 1.0
    return np.linalg.eigvals(comp)


def winding_roots(sym):
    """Winding number of a scalar symbol by root counting.

    Writes ``a(t) = t^{-m} p(t)`` and returns the number of roots of ``p``
    strictly inside the unit disk minus ``m``.  Roots are companion-matrix
    eigenvalues.

    Raises
    ------
    RootOnCircle
        If a root lies within 1e-8 of the unit circle.
    """
    if sym.block_dim != 1:
        raise ValueError("winding_roots expects a scalar symbol")
    coeffs = sym.coefficients[:, 0, 0]
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        raise RootOnCircle("zero symbol has no winding number")
    coeffs = coeffs[: nz[-1] + 1]
    if len(coeffs) - 1 > MAX_ROOT_DEGREE:
        raise ValueError(f"polynomial degree {len(coeffs) - 1} exceeds cap {MAX_ROOT_DEGREE}")
    roots = _companion_roots(coeffs)
    mod = np.abs(roots)
    if np.any(np.abs(mod - 1.0) < ROOT_CIRCLE_TOL):
        raise RootOnCircle("symbol has a zero on the unit circle")
    return int(np.count_nonzero(mod < 1.0)) - sym.lower


def winding_continuous(samples, tail_bound, floor=1e-6, max_arg_step=np.pi / 2):
    """Winding number of a sampled curve closed through the value 1 at infinity.

    Parameters
    ----------
    samples : array_like of complex
        Values of ``1 + a(xi)`` on an increasing grid symmetric about 0.
    tail_bound : float
        Both endpoint samples must lie within this distance of 1, and the
        bound must stay below the smallest modulus on the curve.

    Notes
    -----
    The closure from the last sample back to the first is a straight
    segment through the neighbourhood of 1, contributing the argument of
    ``first / last``.
    """
    values = np.asarray(samples, dtype=complex)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("need at least two samples")
    ends = np.abs(values[[0, -1]] - 1.0)
    if np.any(ends >= tail_bound):
        raise TailNotDecayed(
            f"endpoint distance from 1 is {ends.max():.3e}, tail bound {tail_bound:.3e}")
    margin = float(np.min(np.abs(values)))
    if margin < floor:
        raise NotElliptic(f"curve modulus {margin:.3e} below floor {floor:.1e}", margin)
    if tail_bound >= margin:
        raise TailNotDecayed(f"tail bound {tail_bound:.3e} not below curve modulus {margin:.3e}")
    steps = arg_increments(np.append(values, values[0]))
    if np.any(np.abs(steps[:-1]) >= max_arg_step):
        raise CurveUnderResolved("sample grid too coarse for a reliable winding count")
    return int(round(float(np.sum(steps)) / TWO_PI))
