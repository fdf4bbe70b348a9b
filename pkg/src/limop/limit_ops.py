"""Operator spectra of band operators with eventually periodic coefficients.

Shifting ``A`` far to the right (left) along ``h = r (mod P)`` makes
every diagonal coincide with its plus (minus) tail translated by ``r``,
where ``P`` is the least common period of all tails.  Compact parts
(finitely supported coefficients) vanish in the limit, stabilizing ones
freeze at their limit values, periodic ones survive as translates.
Each limit operator is therefore shift-periodic and is decided by the
Laurent criterion on its period-blocked matrix symbol.
"""

from dataclasses import dataclass, field
from math import lcm

import numpy as np
from scipy.optimize import minimize_scalar

from . import coefficients as cf
from .band_ops import BlockBandOperator
from .exceptions import UnsupportedCoefficientClass
from .symbols import TWO_PI, LaurentSymbol

DEFAULT_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class LimitMember:
    """One limit operator together with the shift class that produces it."""

    operator: BlockBandOperator
    side: str
    residue: int
    period: int

    @property
    def witness(self):
        arrow = "+inf" if self.side == "plus" else "-inf"
        if self.period == 1:
            return f"h -> {arrow}"
        return f"h -> {arrow}, h = {self.residue} (mod {self.period})"

    @property
    def label(self):
        return f"{self.side}[{self.residue}]"


@dataclass(frozen=True, eq=False)
class LimitOperatorSet:
    plus: tuple
    minus: tuple

    def members(self):
        return self.plus + self.minus

    def __len__(self):
        return len(self.plus) + len(self.minus)


def _check_supported(coef, where):
    if not isinstance(coef, cf.SUPPORTED_KINDS):
        raise UnsupportedCoefficientClass(
            f"{where}: coefficient kind {type(coef).__name__!r} has no computable limits")
    children = ()
    if isinstance(coef, cf.Sum):
        children = coef.terms
    elif isinstance(coef, cf.Product):
        children = coef.factors
    elif isinstance(coef, cf.Interleaved):
        children = tuple(c for c, _, _ in coef.parts if c is not None)
    for child in children:
        _check_supported(child, where)


def limit_spectrum(op):
    """Closed-form ``sigma_+(A)`` and ``sigma_-(A)`` for eventually periodic diagonals.

    One member per residue of the common tail period, in each direction.
    """
    for k, coef in op.diagonals.items():
        _check_supported(coef, f"diagonal {k}")
    asyms = {k: c.asymptotics() for k, c in op.diagonals.items()}
    period = lcm(*(a.period for a in asyms.values())) if asyms else 1
    sides = {}
    for side in ("plus", "minus"):
        members = []
        for r in range(period):
            diags = {}
            for k, a in asyms.items():
                tail = a.plus if side == "plus" else a.minus
                stack = tail[(np.arange(period) + r) % a.period]
                diags[k] = cf.periodic_or_constant(stack)
            members.append(LimitMember(BlockBandOperator(op.block_dim, diags, op.identity_offset),
                                       side, r, period))
        sides[side] = tuple(members)
    return LimitOperatorSet(sides["plus"], sides["minus"])


def shift_period(op):
    """Common period of a shift-periodic operator (all diagonals constant or periodic)."""
    periods = []
    for k, coef in op.diagonals.items():
        if isinstance(coef, cf.Constant):
            periods.append(1)
        elif isinstance(coef, cf.Periodic):
            periods.append(coef.period)
        else:
            raise ValueError(f"diagonal {k} ({coef.kind}) is not shift-periodic")
    return lcm(*periods) if periods else 1


def periodic_symbol(op, period=None):
    """Matrix symbol of a shift-periodic operator after grouping ``period`` indices per block.

    Block row ``I``, block column ``J`` of the grouped operator is
    ``[A(I q + a, J q + b)]_{a, b}``; it depends on ``I - J`` only, and the
    grouping is aligned with index 0 so its half-line compression is exactly
    the block Toeplitz operator of the returned symbol.
    """
    q = shift_period(op) if period is None else int(period)
    if q % shift_period(op):
        raise ValueError(f"period {q} is not a multiple of the operator period")
    reach = (op.bandwidth + q - 1) // q
    base = np.arange(q)
    coefs = {K: op.window(K * q + base, base) for K in range(-reach, reach + 1)}
    return LaurentSymbol.from_dict(coefs)


def min_singular_value(symbol, samples=None):
    """``min_{|t|=1} sigma_min(symbol(t))`` by dense sampling plus local polishing."""
    n = samples or max(512, 64 * (symbol.lower + symbol.upper + 1))
    theta = TWO_PI * np.arange(n) / n
    smin = np.linalg.svd(symbol.at_angles(theta), compute_uv=False)[:, -1]
    best = int(np.argmin(smin))
    value = float(smin[best])
    if value > 0:
        step = TWO_PI / n
        res = minimize_scalar(
            lambda th: np.linalg.svd(symbol.at_angles(np.array([th]))[0], compute_uv=False)[-1],
            bounds=(theta[best] - step, theta[best] + step), method="bounded",
            options={"xatol": 1e-10})
        value = min(value, float(res.fun))
    return value


@dataclass(frozen=True, eq=False)
class MemberVerdict:
    member: LimitMember
    invertible: bool
    margin: float

    @property
    def inverse_norm_bound(self):
        return np.inf if self.margin <= 0 else 1.0 / self.margin


@dataclass(frozen=True, eq=False)
class InvertibilityCertificate:
    verdicts: tuple
    floor: float
    uniform_margin: float = field(init=False)

    def __post_init__(self):
        margin = min((v.margin for v in self.verdicts), default=np.inf)
        object.__setattr__(self, "uniform_margin", float(margin))

    @property
    def invertible(self):
        return all(v.invertible for v in self.verdicts)

    @property
    def uniform_inverse_bound(self):
        return max((v.inverse_norm_bound for v in self.verdicts), default=0.0)

    def failures(self):
        return [v for v in self.verdicts if not v.invertible]


def certify_invertibility(limit_set, floor=DEFAULT_FLOOR):
    """Decide invertibility of every member by the Laurent criterion.

    A shift-periodic operator on l^2 is invertible iff its period-blocked
    symbol is invertible at every point of the unit circle; the inverse
    norm is ``1 / min sigma_min``.  The winding of the determinant plays no
    role for bi-infinite operators.
    """
    verdicts = []
    for member in limit_set.members():
        margin = min_singular_value(periodic_symbol(member.operator, member.period))
        verdicts.append(MemberVerdict(member, margin > floor, margin))
    return InvertibilityCertificate(tuple(verdicts), floor)
