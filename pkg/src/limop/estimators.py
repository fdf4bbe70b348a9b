"""Estimator-style wrappers around the functional API.

``fit`` takes an operator-like object instead of a data matrix; fitted
results live in trailing-underscore attributes as usual.
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .band_ops import BlockBandOperator, HalfLineCompression
from .discretization import ConvolutionKernel, DiscretizationConfig, discretize_convolution
from .index_engine import index_of
from .limit_ops import DEFAULT_FLOOR
from .oracle import OracleConfig, oracle_index
from .symbols import CurveSamplePolicy


def _check_operator(op):
    if not isinstance(op, BlockBandOperator):
        raise TypeError(f"expected a BlockBandOperator, got {type(op).__name__}")
    return op


class LimitOperatorIndex(BaseEstimator):
    """Fredholm index of a band operator by the limit operator method.

    Parameters
    ----------
    floor : float
        Invertibility floor for limit operator symbols.
    initial_points, max_refinements, min_modulus, max_arg_step
        Curve sampling policy for the winding numbers.
    run_oracle : bool
        Also validate both half-line indices by finite sections.
    oracle_sizes : tuple of int
    rank_tol : float
    """

    def __init__(self, floor=DEFAULT_FLOOR, initial_points=64, max_refinements=20,
                 min_modulus=1e-6, max_arg_step=0.7853981633974483, run_oracle=False,
                 oracle_sizes=(64, 128, 256, 512), rank_tol=1e-8):
        self.floor = floor
        self.initial_points = initial_points
        self.max_refinements = max_refinements
        self.min_modulus = min_modulus
        self.max_arg_step = max_arg_step
        self.run_oracle = run_oracle
        self.oracle_sizes = oracle_sizes
        self.rank_tol = rank_tol

    def _policy(self):
        return CurveSamplePolicy(self.initial_points, self.max_refinements, self.min_modulus,
                                 self.max_arg_step)

    def fit(self, X, y=None):
        op = _check_operator(X)
        report = index_of(op, self._policy(), OracleConfig(tuple(self.oracle_sizes), self.rank_tol),
                          run_oracle=self.run_oracle, floor=self.floor)
        self.report_ = report
        self.index_ = report.ind
        self.plus_index_ = report.ind_plus
        self.minus_index_ = report.ind_minus
        self.margin_ = report.margin
        return self

    def predict(self, X=None):
        """Fitted index; with ``X`` given, refit on it first."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "report_")
        return self.index_


class FiniteSectionOracle(BaseEstimator):
    """Kernel and cokernel dimensions of a half-line compression from finite sections."""

    def __init__(self, sizes=(64, 128, 256, 512), rank_tol=1e-8, stability_required=3):
        self.sizes = sizes
        self.rank_tol = rank_tol
        self.stability_required = stability_required

    def fit(self, X, y=None):
        if isinstance(X, BlockBandOperator):
            X = HalfLineCompression(X, "plus")
        if not isinstance(X, HalfLineCompression):
            raise TypeError(f"expected a half-line handle, got {type(X).__name__}")
        result = oracle_index(X, OracleConfig(tuple(self.sizes), self.rank_tol,
                                              self.stability_required))
        self.result_ = result
        self.kernel_dim_ = result.kernel_dim
        self.cokernel_dim_ = result.cokernel_dim
        self.index_ = result.index
        self.diagnostics_ = result.kernel.diagnostics + result.cokernel.diagnostics
        return self

    def predict(self, X=None):
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "result_")
        return self.index_


class ConvolutionDiscretizer(BaseEstimator, TransformerMixin):
    """Cell-average discretization of ``identity_offset * I + convolution by k``."""

    def __init__(self, cells_per_unit=8, band_cut=None, quadrature_order=8, defect_target=1e-6,
                 identity_offset=1.0):
        self.cells_per_unit = cells_per_unit
        self.band_cut = band_cut
        self.quadrature_order = quadrature_order
        self.defect_target = defect_target
        self.identity_offset = identity_offset

    def _config(self):
        return DiscretizationConfig(self.cells_per_unit, self.band_cut, self.quadrature_order,
                                    self.defect_target)

    def fit(self, X, y=None):
        if not isinstance(X, ConvolutionKernel):
            raise TypeError(f"expected a ConvolutionKernel, got {type(X).__name__}")
        disc = discretize_convolution(X, self._config())
        self.band_cut_ = disc.band_cut
        self.dropped_mass_ = disc.dropped_mass
        self.defect_ = disc.defect
        self.operator_ = disc.operator.with_identity_offset(self.identity_offset)
        return self

    def transform(self, X=None):
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "operator_")
        return self.operator_
