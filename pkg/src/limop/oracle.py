"""Finite-section rank oracle for half-line band operators.

Kernel dimensions are counted as the number of relatively small singular
values of rectangular sections ``rows 0..N+m, cols 0..N`` with ``m`` at
least the bandwidth.  Kernel vectors of Fredholm band operators decay
geometrically, so the count settles once ``N`` outgrows the decay length.
Cokernels are kernels of the adjoint.  Everything is Euclidean: the index
of these operators does not depend on the l^p exponent.
"""

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import svdvals

from ._validation import check_increasing, check_positive_int
from .band_ops import rect_truncate
from .exceptions import NotStabilized

SIZE_CAP_ENV = "LIMOP_ORACLE_MAXSIZE"
P_INDEPENDENCE_NOTE = (
    "oracle works in l^2 (p = 2); the Fredholm index of these band-dominated "
    "operators is the same for every p in (1, inf), so the Euclidean rank count "
    "validates the index for all p"
)


@dataclass(frozen=True)
class OracleConfig:
    """Truncation sizes and rank rule for the finite-section oracle."""

    sizes: tuple = (64, 128, 256, 512)
    rank_tol: float = 1e-8
    stability_required: int = 3

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(check_increasing(self.sizes)))
        if not 0 < self.rank_tol < 1:
            raise ValueError("rank_tol must lie in (0, 1)")
        check_positive_int(self.stability_required, "stability_required")

    def effective_sizes(self):
        """Sizes after applying the ``LIMOP_ORACLE_MAXSIZE`` cap, if set."""
        cap = os.environ.get(SIZE_CAP_ENV)
        if not cap:
            return self.sizes
        cap = int(cap)
        return tuple(n for n in self.sizes if n <= cap)


@dataclass
class SizeDiagnostics:
    size: int
    rows: int
    cols: int
    sigma_max: float
    count: int
    tail: np.ndarray


@dataclass
class DimEstimate:
    """Stabilized dimension plus per-size singular value diagnostics."""

    dim: int
    which: str
    diagnostics: list = field(default_factory=list)

    @property
    def counts(self):
        return [d.count for d in self.diagnostics]


def _section_count(handle, n, rank_tol, tail_len=6):
    trunc = rect_truncate(handle, n, handle.bandwidth)
    s = svdvals(trunc.matrix, check_finite=False)
    smax = float(s[0]) if s.size else 0.0
    count = int(np.count_nonzero(s < rank_tol * smax)) if smax > 0 else s.size
    return SizeDiagnostics(n, trunc.matrix.shape[0], trunc.matrix.shape[1], smax, count,
                           s[-tail_len:].copy())


def _dimension(handle, cfg, which):
    cfg = cfg or OracleConfig()
    sizes = cfg.effective_sizes()
    if not sizes:
        raise NotStabilized(f"no oracle sizes left under {SIZE_CAP_ENV}")
    extent = handle.transient_extent()
    if extent > sizes[0] // 2:
        raise ValueError(
            f"non-periodic part reaches index {extent}, beyond half the smallest size {sizes[0]}")
    diags = []
    for n in sizes:
        diags.append(_section_count(handle, n, cfg.rank_tol))
        recent = [d.count for d in diags[-cfg.stability_required:]]
        if len(recent) == cfg.stability_required and len(set(recent)) == 1:
            return DimEstimate(recent[0], which, diags)
    raise NotStabilized(
        f"{which} counts {[d.count for d in diags]} did not stabilize over sizes {list(sizes)}",
        [d.count for d in diags])


def kernel_dim(handle, cfg=None):
    """Stabilized ``dim ker`` of a half-line compression handle."""
    return _dimension(handle, cfg, "kernel")


def cokernel_dim(handle, cfg=None):
    """Stabilized ``dim coker``, i.e. the kernel dimension of the adjoint."""
    return _dimension(handle.adjoint(), cfg, "cokernel")


@dataclass
class OracleResult:
    kernel: DimEstimate
    cokernel: DimEstimate
    note: str = P_INDEPENDENCE_NOTE

    @property
    def index(self):
        return self.kernel.dim - self.cokernel.dim

    @property
    def kernel_dim(self):
        return self.kernel.dim

    @property
    def cokernel_dim(self):
        return self.cokernel.dim


def oracle_index(handle, cfg=None):
    """``dim ker - dim coker`` from finite sections; see :class:`OracleResult`."""
    return OracleResult(kernel_dim(handle, cfg), cokernel_dim(handle, cfg))


def diagnostics_csv(result, out=None):
    """Write per-size singular value diagnostics as CSV; returns the text if ``out`` is None."""
    buf = out if out is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["which", "size", "rows", "cols", "sigma_max", "count", "smallest"])
    for est in (result.kernel, result.cokernel):
        for d in est.diagnostics:
            writer.writerow([est.which, d.size, d.rows, d.cols, repr(d.sigma_max), d.count,
                             " ".join(repr(float(x)) for x in d.tail)])
    if out is None:
        return buf.getvalue()
    return None
