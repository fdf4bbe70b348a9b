"""Bi-infinite block band operators and their half-line compressions.

An operator is stored as ``lam * I + sum_k D_k V_k`` where ``V_k`` is the
shift ``(V_k x)_n = x_{n-k}`` and ``D_k`` multiplies by the coefficient
sequence of diagonal ``k``.  Entry ``(i, j)`` is therefore
``lam * delta_ij * I_d + D_{i-j}(i)``.
"""

from dataclasses import dataclass

import numpy as np

from . import coefficients as cf
from ._validation import check_positive_int
from .coefficients import Coefficient, Constant, Interleaved


class BlockBandOperator:
    """Bi-infinite band matrix with ``d x d`` block entries.

    Parameters
    ----------
    block_dim : int
        Size ``d`` of the blocks.
    diagonals : dict[int, Coefficient], optional
        Coefficient sequence per diagonal offset ``k = i - j``.
    identity_offset : complex, default 0
        Multiple of the identity kept apart from the diagonal ``k = 0`` so
        that an ``I + K`` structure stays visible.
    """

    __slots__ = ("block_dim", "diagonals", "identity_offset")

    def __init__(self, block_dim, diagonals=None, identity_offset=0.0):
        d = check_positive_int(block_dim, "block_dim")
        diags = {}
        for k, coef in (diagonals or {}).items():
            if not isinstance(coef, Coefficient):
                raise TypeError(f"diagonal {k}: expected a Coefficient, got {type(coef).__name__}")
            if coef.block_dim != d:
                raise ValueError(f"diagonal {k} has block size {coef.block_dim}, expected {d}")
            if not coef.is_zero():
                diags[int(k)] = coef
        object.__setattr__(self, "block_dim", d)
        object.__setattr__(self, "diagonals", dict(sorted(diags.items())))
        object.__setattr__(self, "identity_offset", complex(identity_offset))

    def __setattr__(self, name, value):
        raise AttributeError("BlockBandOperator is immutable")

    def __repr__(self):
        return (f"BlockBandOperator(block_dim={self.block_dim}, "
                f"diagonals={sorted(self.diagonals)}, identity_offset={self.identity_offset})")

    # -- constructors -------------------------------------------------
    @classmethod
    def identity(cls, block_dim=1, scale=1.0):
        return cls(block_dim, {}, scale)

    @classmethod
    def shift(cls, k, block_dim=1):
        """The shift ``V_k`` with ``(V_k x)_n = x_{n-k}``."""
        return cls(block_dim, {k: Constant(np.eye(block_dim))})

    @classmethod
    def laurent(cls, symbol):
        """Laurent operator with entries ``a_{i-j}`` for a :class:`LaurentSymbol`."""
        return cls(symbol.block_dim, {k: Constant(a) for k, a in symbol.items()})

    # -- structure ----------------------------------------------------
    @property
    def bandwidth(self):
        return max((abs(k) for k in self.diagonals), default=0)

    def entry(self, i, j):
        """The ``(i, j)`` block as a fresh ``d x d`` array."""
        d = self.block_dim
        out = np.zeros((d, d), dtype=complex)
        if i == j:
            out += self.identity_offset * np.eye(d)
        coef = self.diagonals.get(i - j)
        if coef is not None:
            out += coef.value_at(i)
        return out

    def block_window(self, rows, cols):
        """Dense 4-d array ``W[a, b] = entry(rows[a], cols[b])``."""
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        d = self.block_dim
        out = np.zeros((len(rows), len(cols), d, d), dtype=complex)
        if len(rows) == 0 or len(cols) == 0:
            return out
        col_pos = {int(c): b for b, c in enumerate(cols)}
        contiguous = np.array_equal(cols, np.arange(cols[0], cols[0] + len(cols)))
        for k, coef in self.diagonals.items():
            js = rows - k
            if contiguous:
                keep = (js >= cols[0]) & (js < cols[0] + len(cols))
                b = js[keep] - cols[0]
            else:
                keep = np.array([int(j) in col_pos for j in js], dtype=bool)
                b = np.array([col_pos[int(j)] for j in js[keep]], dtype=int)
            if keep.any():
                out[np.flatnonzero(keep), b] += coef.values(rows[keep])
        if self.identity_offset != 0:
            for a, i in enumerate(rows):
                b = col_pos.get(int(i))
                if b is not None:
                    out[a, b] += self.identity_offset * np.eye(d)
        return out

    def window(self, rows, cols):
        """Dense ``(len(rows) d) x (len(cols) d)`` matrix of the given block rows/cols."""
        w = self.block_window(rows, cols)
        r, c, d, _ = w.shape
        return w.transpose(0, 2, 1, 3).reshape(r * d, c * d)

    def transient_window(self):
        """Smallest ``(lo, hi)`` outside of which every diagonal follows its periodic tails."""
        asyms = [c.asymptotics() for c in self.diagonals.values()]
        if not asyms:
            return 0, 0
        return min(a.lo for a in asyms), max(a.hi for a in asyms)

    # -- transformations ---------------------------------------------
    def shifted(self, h):
        """``V_{-h} A V_h``, whose ``(i, j)`` entry is ``A[i + h, j + h]``."""
        return BlockBandOperator(self.block_dim,
                                 {k: c.shifted(h) for k, c in self.diagonals.items()},
                                 self.identity_offset)

    def reflected(self):
        """Reflection through ``n -> -1 - n``: entry ``(i, j)`` becomes ``A[-1-i, -1-j]``.

        This map carries the negative half-axis onto the non-negative one,
        so ``P + QAQ`` becomes ``P R R' P + Q`` for the reflected operator.
        """
        return BlockBandOperator(self.block_dim,
                                 {-k: c.reflected() for k, c in self.diagonals.items()},
                                 self.identity_offset)

    def with_identity_offset(self, value):
        return BlockBandOperator(self.block_dim, self.diagonals, value)

    # -- algebra ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, BlockBandOperator):
            return self.with_identity_offset(self.identity_offset + complex(other))
        _check_same_dim(self, other)
        keys = sorted(set(self.diagonals) | set(other.diagonals))
        diags = {}
        for k in keys:
            parts = [x.diagonals[k] for x in (self, other) if k in x.diagonals]
            diags[k] = cf.add(*parts)
        return BlockBandOperator(self.block_dim, diags,
                                 self.identity_offset + other.identity_offset)

    __radd__ = __add__

    def __mul__(self, scalar):
        scalar = complex(scalar)
        return BlockBandOperator(self.block_dim,
                                 {k: cf.scale(c, scalar) for k, c in self.diagonals.items()},
                                 self.identity_offset * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        return compose(self, other)


def _check_same_dim(a, b):
    if a.block_dim != b.block_dim:
        raise ValueError(f"block sizes differ: {a.block_dim} vs {b.block_dim}")


def compose(a, b):
    """Exact product ``a b`` of two band operators; bandwidths add.

    Diagonal ``k + m`` of the product collects ``a_k(n) b_m(n - k)``
    together with the identity-offset cross terms.
    """
    _check_same_dim(a, b)
    d = a.block_dim
    lam, mu = a.identity_offset, b.identity_offset
    terms = {}
    for k, ak in a.diagonals.items():
        if mu != 0:
            terms.setdefault(k, []).append(cf.scale(ak, mu))
        for m, bm in b.diagonals.items():
            terms.setdefault(k + m, []).append(cf.multiply(ak, bm.shifted(-k)))
    if lam != 0:
        for m, bm in b.diagonals.items():
            terms.setdefault(m, []).append(cf.scale(bm, lam))
    diags = {k: cf.add(*parts) for k, parts in terms.items()}
    return BlockBandOperator(d, diags, lam * mu)


def windows_equal(a, b, radius=10, atol=0.0):
    """Entry-wise comparison of two operators on the block window ``[-radius, radius]^2``."""
    idx = np.arange(-radius, radius + 1)
    wa, wb = a.window(idx, idx), b.window(idx, idx)
    if wa.shape != wb.shape:
        return False
    return bool(np.allclose(wa, wb, rtol=0.0, atol=atol)) if atol else bool(np.array_equal(wa, wb))


@dataclass(frozen=True, eq=False)
class Truncation:
    """Dense section of an operator on the given block index ranges."""

    row_range: range
    col_range: range
    matrix: np.ndarray
    block_dim: int = 1

    def __post_init__(self):
        expected = (len(self.row_range) * self.block_dim, len(self.col_range) * self.block_dim)
        if self.matrix.shape != expected:
            raise ValueError(f"matrix shape {self.matrix.shape} does not match ranges {expected}")


def truncate(op, rows, cols):
    """:class:`Truncation` of a bi-infinite operator on block ranges ``rows x cols``."""
    rows, cols = range(*_as_range(rows)), range(*_as_range(cols))
    return Truncation(rows, cols, op.window(np.arange(rows.start, rows.stop),
                                            np.arange(cols.start, cols.stop)), op.block_dim)


def _as_range(r):
    if isinstance(r, range):
        return r.start, r.stop
    start, stop = r
    return int(start), int(stop)


class HalfLineCompression:
    """``PAP + Q`` (side ``"plus"``) or ``P + QAQ`` (side ``"minus"``) of a band operator.

    ``P`` projects onto the indices ``n >= 0`` and ``Q = I - P``.  On the
    full axis the handle acts as the identity on the complementary half.
    The compressed part is exposed as an operator on the non-negative
    half-axis through :meth:`half_window`; for the minus side it is the
    reflection ``n -> -1 - n`` of ``A`` restricted to ``n >= 0``.
    """

    def __init__(self, op, side="plus", adjoint=False):
        if side not in ("plus", "minus"):
            raise ValueError("side must be 'plus' or 'minus'")
        self.op = op
        self.side = side
        self.adjoint_ = bool(adjoint)
        self.half_line_operator = op if side == "plus" else op.reflected()

    def __repr__(self):
        star = "*" if self.adjoint_ else ""
        return f"HalfLineCompression({self.op!r}, side={self.side!r}){star}"

    @property
    def block_dim(self):
        return self.op.block_dim

    @property
    def bandwidth(self):
        return self.op.bandwidth

    def adjoint(self):
        return HalfLineCompression(self.op, self.side, not self.adjoint_)

    def transient_extent(self):
        """Last half-line index at which a coefficient has not yet reached its tail."""
        return max(self.half_line_operator.transient_window()[1], 0)

    def _full_block(self, i, j):
        compressed = (i >= 0 and j >= 0) if self.side == "plus" else (i < 0 and j < 0)
        if compressed:
            return self.op.entry(i, j)
        d = self.block_dim
        return np.eye(d, dtype=complex) if i == j else np.zeros((d, d), dtype=complex)

    def entry(self, i, j):
        """Full-axis ``(i, j)`` block of the compression (or of its adjoint)."""
        if self.adjoint_:
            return self._full_block(j, i).conj().T
        return self._full_block(i, j)

    def window(self, rows, cols):
        """Dense full-axis window, assembled from the operator's own window."""
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        if self.adjoint_:
            return self.adjoint().window(cols, rows).conj().T
        d = self.block_dim
        w = self.op.block_window(rows, cols)
        if self.side == "plus":
            inside = np.outer(rows >= 0, cols >= 0)
            outside = np.outer(rows < 0, cols < 0)
        else:
            inside = np.outer(rows < 0, cols < 0)
            outside = np.outer(rows >= 0, cols >= 0)
        w[~inside] = 0.0
        diag = outside & np.equal.outer(rows, cols)
        w[diag] = np.eye(d)
        r, c = len(rows), len(cols)
        return w.transpose(0, 2, 1, 3).reshape(r * d, c * d)

    def half_window(self, n_rows, n_cols):
        """Dense section of the compressed half-line operator, rows ``0..n_rows-1``."""
        if self.adjoint_:
            return self.adjoint().half_window(n_cols, n_rows).conj().T
        return self.half_line_operator.window(np.arange(n_rows), np.arange(n_cols))


def plus_compression(op):
    return HalfLineCompression(op, "plus")


def minus_compression(op):
    return HalfLineCompression(op, "minus")


def rect_truncate(handle, n, band_margin):
    """Rectangular section of a half-line operator: columns ``0..n``, rows ``0..n + band_margin``.

    With ``band_margin`` at least the bandwidth, every image of a vector
    supported in the column window lies inside the row window, so the
    truncation loses nothing on that subspace.
    """
    if band_margin < handle.bandwidth:
        raise ValueError(f"band_margin {band_margin} smaller than bandwidth {handle.bandwidth}")
    rows, cols = range(0, n + band_margin + 1), range(0, n + 1)
    return Truncation(rows, cols, handle.half_window(len(rows), len(cols)), handle.block_dim)


def block_interleave(op):
    """Scalar operator ``J A J^{-1}`` with ``(J x)_{n d + r} = (x_n)_r``.

    Scalar diagonal ``K`` at row ``n d + r`` reads entry ``(r, s)`` of block
    diagonal ``k`` where ``k d + r - s = K``.  Bandwidth grows to at most
    ``(w + 1) d - 1``.
    """
    d = op.block_dim
    if d == 1:
        return op
    w = op.bandwidth
    reach = (w + 1) * d - 1
    diags = {}
    for K in range(-reach, reach + 1):
        parts = []
        for r in range(d):
            k = -((r - K) // d)
            s = k * d + r - K
            parts.append((op.diagonals.get(k), r, s))
        sources = [p[0] for p in parts if p[0] is not None]
        if not sources:
            continue
        if all(isinstance(c, (cf.Constant, cf.Periodic)) for c in sources):
            q = 1
            for c in sources:
                q = np.lcm(q, getattr(c, "period", 1))
            stack = np.zeros((d * int(q), 1, 1), dtype=complex)
            for big in range(d * int(q)):
                n, r = divmod(big, d)
                coef, row, col = parts[r]
                if coef is not None:
                    stack[big, 0, 0] = coef.value_at(n)[row, col]
            coef = cf.periodic_or_constant(stack)
        else:
            coef = Interleaved(d, tuple(parts))
        if not coef.is_zero():
            diags[K] = coef
    return BlockBandOperator(1, diags, op.identity_offset)
