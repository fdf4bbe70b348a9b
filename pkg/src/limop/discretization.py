"""Discretization of convolution and multiplication operators on the line.

The line is cut into unit intervals ``[n, n+1)``; each interval is split
into ``N`` cells and functions are replaced by their cell averages.  In
the orthonormal basis ``sqrt(N) * indicator(cell)`` a convolution by ``k``
becomes the block Laurent operator with blocks

    B^{(K)}_{rs} = N * int_{cell r} int_{cell s} k(t - u + K) du dt,

which depend on ``m = K N + r - s`` only.  Multiplication by ``f`` becomes
the block diagonal operator of cell averages.

Fourier transforms use ``k^(xi) = int k(x) exp(i xi x) dx``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import coefficients as cf
from ._validation import check_positive_int
from .band_ops import BlockBandOperator
from .exceptions import TailTooFat
from .symbols import CurveSamplePolicy, refine_curve

MAX_BAND_CUT = 128


def _phi2(y):
    # (y - 1 + exp(-y)) / y^2, stable near 0
    y = np.asarray(y, dtype=complex)
    small = np.abs(y) < 0.5
    out = np.empty_like(y)
    ys = y[small]
    acc = np.zeros_like(ys)
    term = np.full_like(ys, 0.5)
    for n in range(2, 24):
        acc += term
        term = term * (-ys) / (n + 1)
    out[small] = acc
    yl = y[~small]
    out[~small] = (yl + np.expm1(-yl)) / yl**2
    return out


def _sinhc(x):
    x = np.asarray(x, dtype=complex)
    out = np.ones_like(x)
    nz = np.abs(x) > 1e-8
    out[nz] = np.sinh(x[nz]) / x[nz]
    return out


class ConvolutionKernel:
    """Base class of the L1 kernel families."""

    family = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    def fourier(self, xi):
        """``int k(x) exp(i xi x) dx``."""
        raise NotImplementedError

    @property
    def l1_norm_bound(self):
        raise NotImplementedError

    def tail_bound(self, radius):
        """Upper bound on ``int_{|x| > radius} |k(x)| dx``; decreasing to 0."""
        raise NotImplementedError

    def breakpoints(self):
        """Points where the kernel may fail to be smooth."""
        return np.array([0.0])

    def integral(self):
        raise NotImplementedError

    def cell_moments(self, ms, cells, order=8):
        """``N * int_{-h}^{h} (h - |z|) k(m h + z) dz`` for each ``m``, ``h = 1/N``.

        This is the double cell integral reduced to one variable ``z = t - u``.
        The default implementation is Gauss-Legendre on every piece between
        breakpoints.
        """
        return _quadrature_moments(self, ms, cells, order)


def _quadrature_moments(kernel, ms, cells, order):
    h = 1.0 / cells
    nodes, weights = np.polynomial.legendre.leggauss(order)
    bps = np.asarray(kernel.breakpoints(), dtype=float)
    out = np.zeros(len(ms), dtype=complex)
    for idx, m in enumerate(ms):
        center = m * h
        cuts = bps[(bps > center - h) & (bps < center + h)] - center
        edges = np.unique(np.concatenate([[-h, 0.0, h], cuts]))
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            z = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            total = total + 0.5 * (b - a) * np.sum(weights * (h - np.abs(z)) * kernel(center + z))
        out[idx] = cells * total
    return out


class _OneSidedTerm(NamedTuple):
    """``amplitude * exp(-rate |x|)`` on ``x > 0`` (side +1) or ``x < 0`` (side -1)."""

    amplitude: complex
    rate: complex
    side: int


class _ExponentialFamily(ConvolutionKernel):
    """Kernels that are finite sums of one-sided exponentials; closed-form cells."""

    def terms(self):
        raise NotImplementedError

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for a, b, side in self.terms():
            mask = side * x > 0
            out[mask] += a * np.exp(-b * np.abs(x[mask]))
        return out

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        return sum(a / (b - 1j * side * xi) for a, b, side in self.terms())

    @property
    def l1_norm_bound(self):
        return float(sum(abs(a) / b.real for a, b, _ in self.terms()))

    def tail_bound(self, radius):
        radius = max(float(radius), 0.0)
        return float(sum(abs(a) * np.exp(-b.real * radius) / b.real for a, b, _ in self.terms()))

    def integral(self):
        return complex(sum(a / b for a, b, _ in self.terms()))

    def cell_moments(self, ms, cells, order=8):
        ms = np.asarray(ms, dtype=int)
        h = 1.0 / cells
        out = np.zeros(len(ms), dtype=complex)
        for a, b, side in self.terms():
            mm = side * ms
            y = b * h
            pos = mm >= 1
            out[pos] += a * np.exp(-b * mm[pos] * h) * h * h * _sinhc(y / 2) ** 2
            out[mm == 0] += a * h * h * _phi2(y)
        return cells * out


@dataclass(frozen=True)
class OneSidedExponential(_ExponentialFamily):
    """``k(x) = alpha * exp(-rate x)`` for ``x > 0``, zero otherwise."""

    alpha: complex
    rate: float
    family = "exponential_onesided"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def terms(self):
        return [_OneSidedTerm(complex(self.alpha), complex(self.rate), 1)]


@dataclass(frozen=True)
class SymmetricExponential(_ExponentialFamily):
    """``k(x) = alpha * exp(-rate |x|)``."""

    alpha: complex
    rate: float
    family = "exponential_symmetric"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def terms(self):
        a, b = complex(self.alpha), complex(self.rate)
        return [_OneSidedTerm(a, b, 1), _OneSidedTerm(a, b, -1)]


@dataclass(frozen=True)
class Modulated(ConvolutionKernel):
    """``k(x) = exp(i frequency x) * base(x)``; the transform is ``base^(xi + frequency)``."""

    base: ConvolutionKernel
    frequency: float
    family = "modulated"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.frequency * x) * self.base(x)

    def fourier(self, xi):
        return self.base.fourier(np.asarray(xi, dtype=float) + self.frequency)

    @property
    def l1_norm_bound(self):
        return self.base.l1_norm_bound

    def tail_bound(self, radius):
        return self.base.tail_bound(radius)

    def breakpoints(self):
        return self.base.breakpoints()

    def integral(self):
        return complex(self.base.fourier(np.array([self.frequency]))[0])

    def cell_moments(self, ms, cells, order=8):
        if isinstance(self.base, _ExponentialFamily):
            mu = self.frequency
            terms = [_OneSidedTerm(a, b - 1j * side * mu, side) for a, b, side in self.base.terms()]
            return _TermKernel(terms).cell_moments(ms, cells, order)
        return _quadrature_moments(self, ms, cells, order)


class _TermKernel(_ExponentialFamily):
    def __init__(self, terms):
        self._terms = terms

    def terms(self):
        return self._terms


class Tabulated(ConvolutionKernel):
    """Piecewise linear kernel through ``(grid[i], values[i])``, zero outside the grid."""

    family = "table"

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=complex)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be 1-d of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        self.grid = grid
        self.values = values

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        re = np.interp(x, self.grid, self.values.real, left=0.0, right=0.0)
        im = np.interp(x, self.grid, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im

    def breakpoints(self):
        return self.grid

    def _abs_trapezoid(self, grid, values):
        # |linear| is convex on each segment, so the trapezoid rule bounds it from above
        a = np.abs(values)
        return float(np.sum(0.5 * (a[1:] + a[:-1]) * np.diff(grid)))

    @property
    def l1_norm_bound(self):
        return self._abs_trapezoid(self.grid, self.values)

    def tail_bound(self, radius):
        radius = max(float(radius), 0.0)
        total = 0.0
        right = self.grid > radius
        if right.any():
            g = np.concatenate([[max(radius, self.grid[0])], self.grid[right]])
            total += self._abs_trapezoid(g, self(g))
        left = self.grid < -radius
        if left.any():
            g = np.concatenate([self.grid[left], [min(-radius, self.grid[-1])]])
            total += self._abs_trapezoid(g, self(g))
        return total

    def integral(self):
        return complex(np.sum(0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)))

    def fourier(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        x0, dx = self.grid[:-1], np.diff(self.grid)
        v0, dv = self.values[:-1], np.diff(self.values)
        w = np.multiply.outer(xi, dx)
        small = np.abs(w) < 1e-3
        iw = 1j * np.where(small, 1.0, w)
        e = np.exp(1j * w)
        e0 = np.where(small, 1 + 1j * w / 2 - w**2 / 6, (e - 1) / iw) * dx
        e1 = np.where(small, 0.5 + 1j * w / 3 - w**2 / 8, e / iw - (e - 1) / iw**2) * dx**2
        seg = np.exp(1j * np.multiply.outer(xi, x0)) * (v0 * e0 + dv / dx * e1)
        return seg.sum(axis=-1)


@dataclass(frozen=True)
class DiscretizationConfig:
    """Cell count per unit interval, band cut and quadrature settings.

    ``band_cut=None`` picks the smallest cut ``K`` with
    ``tail_bound(K - 1) < defect_target``.
    """

    cells_per_unit: int = 8
    band_cut: int = None
    quadrature_order: int = 8
    defect_target: float = 1e-6

    def __post_init__(self):
        check_positive_int(self.cells_per_unit, "cells_per_unit")
        check_positive_int(self.quadrature_order, "quadrature_order")
        if self.band_cut is not None:
            check_positive_int(self.band_cut, "band_cut")
        if not self.defect_target > 0:
            raise ValueError("defect_target must be positive")


def choose_band_cut(kernel, cfg):
    if cfg.band_cut is not None:
        if kernel.tail_bound(cfg.band_cut - 1) >= cfg.defect_target:
            raise TailTooFat(f"band cut {cfg.band_cut} leaves tail "
                             f"{kernel.tail_bound(cfg.band_cut - 1):.3e} >= {cfg.defect_target:.1e}")
        return cfg.band_cut
    for cut in range(1, MAX_BAND_CUT + 1):
        if kernel.tail_bound(cut - 1) < cfg.defect_target:
            return cut
    raise TailTooFat(f"tail bound stays above {cfg.defect_target:.1e} up to band cut {MAX_BAND_CUT}")


class Discretization(NamedTuple):
    operator: BlockBandOperator
    band_cut: int
    dropped_mass: float
    defect: float


def discretize_convolution(kernel, cfg=None):
    """Block Laurent operator of a convolution, with band cut and defect bookkeeping.

    ``dropped_mass`` bounds the row sums of the discarded diagonals;
    ``defect`` is the uniform two-sided approximability defect of the kept
    blocks at the configured cell count.
    """
    cfg = cfg or DiscretizationConfig()
    n = cfg.cells_per_unit
    cut = choose_band_cut(kernel, cfg)
    ms = np.arange(-(cut + 1) * n, (cut + 1) * n + 1)
    g = kernel.cell_moments(ms, n, cfg.quadrature_order)
    lookup = dict(zip(ms.tolist(), g))
    r = np.arange(n)
    diff = r[:, None] - r[None, :]
    blocks = {}
    for k in range(-cut, cut + 1):
        block = np.vectorize(lambda m: lookup[m], otypes=[complex])(k * n + diff)
        if np.any(block):
            blocks[k] = block
    op = BlockBandOperator(n, {k: cf.Constant(b) for k, b in blocks.items()})
    defect = approx_defect(list(blocks.values()), n) if blocks else 0.0
    return Discretization(op, cut, kernel.tail_bound(cut), defect)


def gamma_convolution(kernel, cfg=None):
    """:func:`discretize_convolution` without the bookkeeping."""
    return discretize_convolution(kernel, cfg).operator


class LineFunction:
    """Coefficient function on the real line with declared behaviour at infinity.

    Parameters
    ----------
    func : callable
        Vectorised ``x -> f(x)``.
    kind : {"constant", "periodic", "stabilizing"}
    period : int, optional
        Integer period for ``"periodic"``.
    limits : tuple of complex, optional
        ``(f(-inf), f(+inf))`` for ``"stabilizing"``.
    radius : int, optional
        ``f`` equals its limits for ``|x| >= radius`` (``"stabilizing"``).
    """

    def __init__(self, func, kind, period=1, limits=None, radius=0):
        if kind not in ("constant", "periodic", "stabilizing"):
            raise ValueError(f"unknown kind {kind!r}")
        self.func = func
        self.kind = kind
        self.period = check_positive_int(period, "period")
        self.limits = None if limits is None else tuple(complex(v) for v in limits)
        self.radius = int(radius)
        if kind == "stabilizing" and self.limits is None:
            raise ValueError("stabilizing functions need limits")

    @classmethod
    def constant(cls, value):
        value = complex(value)
        return cls(lambda x: np.full(np.shape(x), value, dtype=complex), "constant")

    def cell_averages(self, n, cells, order=8):
        nodes, weights = np.polynomial.legendre.leggauss(order)
        h = 1.0 / cells
        left = n + h * np.arange(cells)
        x = left[:, None] + 0.5 * h * (nodes[None, :] + 1.0)
        return 0.5 * np.sum(weights * np.asarray(self.func(x), dtype=complex), axis=1)


def gamma_multiplication(coeff, cfg=None):
    """Block diagonal operator of cell averages of a multiplication coefficient."""
    cfg = cfg or DiscretizationConfig()
    cells, order = cfg.cells_per_unit, cfg.quadrature_order

    def block(n):
        return np.diag(coeff.cell_averages(n, cells, order))

    if coeff.kind == "constant":
        diag = cf.Constant(block(0))
    elif coeff.kind == "periodic":
        diag = cf.periodic_or_constant(np.stack([block(n) for n in range(coeff.period)]))
    else:
        lo, hi = coeff.limits
        eye = np.eye(cells)
        step = cf.Stabilizing(lo * eye, hi * eye, "step", 1, 0)
        ns = np.arange(-coeff.radius, coeff.radius)
        if len(ns):
            window = np.stack([block(n) for n in ns]) - step.values(ns)
            diag = cf.add(step, cf.FiniteSupport(-coeff.radius, window))
        else:
            diag = step
    return BlockBandOperator(cells, {0: diag})


def approx_defect(blocks, cut):
    """Uniform two-sided approximability defect of a block family.

    ``max_{n >= cut} max_B ||B - P_n B P_n||_2`` with ``P_n`` the projection
    onto the leading ``n`` coordinates.  Taking the maximum over all
    ``n >= cut`` makes the quantity the uniform defect for every finer cut,
    hence non-increasing in ``cut``; it vanishes at ``cut = d``.
    """
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    if not blocks:
        return 0.0
    d = blocks[0].shape[0]
    cut = int(cut)
    if not 0 <= cut <= d:
        raise ValueError(f"cut must lie in [0, {d}]")
    worst = 0.0
    for n in range(cut, d):
        for b in blocks:
            rest = b.copy()
            rest[:n, :n] = 0.0
            worst = max(worst, float(np.linalg.norm(rest, 2)))
    return worst


def kernel_symbol_curve(kernel, policy=None, tail_bound=1e-3, xi_start=1e2, xi_max=1e15):
    """Adaptively sampled curve ``xi -> 1 + k^(xi)`` on a symmetric grid.

    The half-width ``Xi`` is doubled until ``|k^(+-Xi)| < tail_bound / 2``;
    the grid is uniform in ``arctan(xi)`` before refinement so that both
    the origin and the tails are resolved.
    """
    policy = policy or CurveSamplePolicy()
    xi_cap = xi_start
    while max(abs(kernel.fourier(np.array([-xi_cap, xi_cap])))) >= tail_bound / 2:
        xi_cap *= 2.0
        if xi_cap > xi_max:
            raise TailTooFat("Fourier transform does not decay below the tail bound")
    phi_max = np.arctan(xi_cap)
    phi = np.linspace(-phi_max, phi_max, int(policy.initial_points) + 1)
    phi, values = refine_curve(lambda p: 1.0 + kernel.fourier(np.tan(p)), phi, policy)
    return np.tan(phi), values
