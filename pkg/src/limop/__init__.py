"""Fredholm indices of band operators via limit operators and symbol windings."""

from .band_ops import (BlockBandOperator, HalfLineCompression, block_interleave, compose,
                       minus_compression, plus_compression, rect_truncate, truncate)
from .coefficients import Constant, FiniteSupport, Periodic, Stabilizing
from .discretization import (DiscretizationConfig, Modulated, OneSidedExponential,
                             SymmetricExponential, Tabulated, approx_defect,
                             discretize_convolution, gamma_convolution, gamma_multiplication)
from .exceptions import (CurveUnderResolved, InternalDisagreement, LimopError, NotElliptic,
                         NotFredholm, NotStabilized, RootOnCircle, SpecError, TailNotDecayed,
                         TailTooFat, UnsupportedCoefficientClass)
from .index_engine import IndexReport, index_of, toeplitz_index, wiener_hopf_index
from .limit_ops import certify_invertibility, limit_spectrum
from .oracle import OracleConfig, cokernel_dim, kernel_dim, oracle_index
from .symbols import (CurveSamplePolicy, LaurentSymbol, det_symbol, evaluate, winding_argument,
                      winding_continuous, winding_roots)

__version__ = "0.1.0"

_ESTIMATORS = ("ConvolutionDiscretizer", "FiniteSectionOracle", "LimitOperatorIndex")


def __getattr__(name):
    # scikit-learn is slow to import; load the estimators on first use
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module 'limop' has no attribute {name!r}")
