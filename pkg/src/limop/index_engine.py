"""Plus-, minus- and Fredholm indices of band operators via limit operators.

For ``A = lambda I + sum_k D_k V_k`` with eventually periodic diagonals:

1. every limit operator is checked for invertibility (Laurent criterion);
2. ``ind_+ A`` is the block Toeplitz index of any plus member, grouped
   over one period; every member is evaluated and must agree;
3. ``ind_- A`` is obtained the same way after the reflection
   ``n -> -1 - n``, which carries ``P + QAQ`` onto a plus compression;
4. ``ind A = ind_+ A + ind_- A``.

A Toeplitz operator ``T(a)`` on the half-line has index ``-wind(det a)``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .band_ops import minus_compression, plus_compression
from .exceptions import (InternalDisagreement, NotElliptic, NotFredholm, NotStabilized,
                         RootOnCircle)
from .limit_ops import DEFAULT_FLOOR, certify_invertibility, limit_spectrum, periodic_symbol
from .oracle import P_INDEPENDENCE_NOTE, OracleConfig, oracle_index
from .symbols import (MAX_ROOT_DEGREE, CurveSamplePolicy, LaurentSymbol, det_symbol,
                      winding_argument, winding_continuous, winding_roots)


class ToeplitzIndex(int):
    """Integer index carrying the determinant margin and the recipe used."""

    def __new__(cls, value, margin, recipe):
        obj = super().__new__(cls, value)
        obj.margin = margin
        obj.recipe = recipe
        return obj


def toeplitz_index(sym, policy=None, normalize=False):
    """Fredholm index of the half-line block Toeplitz operator ``T(sym)``.

    Parameters
    ----------
    sym : LaurentSymbol
    policy : CurveSamplePolicy, optional
    normalize : bool
        Divide the determinant by its largest coefficient before applying
        the ellipticity floor.  Useful for large grouped symbols whose
        determinant is a product of many moderate singular values.

    Returns
    -------
    ToeplitzIndex
        ``-wind(det sym)``; the argument count is cross-checked against
        root counting whenever the determinant degree allows.

    Raises
    ------
    NotFredholm
        If the determinant vanishes on, or too near, the unit circle.
    InternalDisagreement
        If the two winding routes disagree.
    """
    policy = policy or CurveSamplePolicy()
    det = det_symbol(sym)
    if normalize:
        scale = float(np.max(np.abs(det.coefficients)))
        if scale > 0:
            det = LaurentSymbol(det.coefficients / scale, det.lower)
    try:
        wind = winding_argument(det, policy)
    except NotElliptic as exc:
        raise NotFredholm(f"det symbol not elliptic: {exc}", margin=exc.margin) from exc
    recipe = "argument"
    if det.lower + det.upper <= MAX_ROOT_DEGREE:
        try:
            by_roots = winding_roots(det)
        except RootOnCircle as exc:
            raise NotFredholm(f"det symbol has a zero on the circle: {exc}",
                              margin=wind.margin) from exc
        if by_roots != wind.number:
            raise InternalDisagreement(
                f"argument winding {wind.number} != root-count winding {by_roots}")
        recipe = "argument+roots"
    return ToeplitzIndex(-wind.number, wind.margin, recipe)


def member_index(member, policy=None):
    """Half-line index of one shift-periodic limit operator.

    Plus members give ``ind(P B P + Q)``; minus members give
    ``ind(P + Q B Q)`` computed on the reflected operator.
    """
    op = member.operator if member.side == "plus" else member.operator.reflected()
    return toeplitz_index(periodic_symbol(op, member.period), policy, normalize=True)


@dataclass
class IndexReport:
    """Outcome of :func:`index_of`.

    ``per_limit_op`` has one row per limit operator with its label, the
    defining shift class, its invertibility margin and the half-line index
    it yields.  ``oracle_check`` holds finite-section counts when requested.
    """

    fredholm: bool
    margin: float
    ind_plus: int
    ind_minus: int
    ind: int
    per_limit_op: list = field(default_factory=list)
    oracle_check: dict = None
    provenance: dict = field(default_factory=dict)
    p_note: str = P_INDEPENDENCE_NOTE

    @property
    def agrees(self):
        return self.oracle_check is None or bool(self.oracle_check.get("agree"))

    def to_dict(self):
        out = asdict(self)
        out["margin"] = float(self.margin)
        return out


def _half_index(verdicts, side, policy):
    rows, values = [], set()
    for v in verdicts:
        if v.member.side != side:
            continue
        idx = member_index(v.member, policy)
        values.add(int(idx))
        rows.append({"member": v.member.label, "witness": v.member.witness, "side": side,
                     "margin": float(v.margin), f"ind_{side}": int(idx),
                     "det_margin": float(idx.margin)})
    if len(values) != 1:
        raise InternalDisagreement(f"{side} members give different indices: {sorted(values)}")
    return values.pop(), rows


def _oracle_record(op, ind_plus, ind_minus, cfg):
    plus = oracle_index(plus_compression(op), cfg)
    minus = oracle_index(minus_compression(op), cfg)
    record = {
        "ind_plus": plus.index, "ind_minus": minus.index, "ind": plus.index + minus.index,
        "dims_plus": [plus.kernel_dim, plus.cokernel_dim],
        "dims_minus": [minus.kernel_dim, minus.cokernel_dim],
        "agree_plus": plus.index == ind_plus, "agree_minus": minus.index == ind_minus,
        "sizes": list((cfg or OracleConfig()).effective_sizes()),
        "note": P_INDEPENDENCE_NOTE,
    }
    record["agree"] = record["agree_plus"] and record["agree_minus"]
    return record


def index_of(op, policy=None, oracle=None, run_oracle=False, floor=DEFAULT_FLOOR):
    """Fredholm verdict and ``ind``, ``ind_+``, ``ind_-`` of a band operator.

    Parameters
    ----------
    op : BlockBandOperator
    policy : CurveSamplePolicy, optional
    oracle : OracleConfig, optional
    run_oracle : bool
        Also count kernels and cokernels of both compressions by finite
        sections.  Non-stabilized counts are recorded, not raised.
    floor : float
        Invertibility floor for the limit operator symbols.

    Raises
    ------
    NotFredholm
        When some limit operator is not invertible; ``exc.member`` names the
        first failing member and ``exc.certificate`` holds all verdicts.
    """
    cert = certify_invertibility(limit_spectrum(op), floor)
    if not cert.invertible:
        bad = min(cert.failures(), key=lambda v: v.margin)
        exc = NotFredholm(
            f"limit operator {bad.member.label} ({bad.member.witness}) is not invertible: "
            f"min singular value of its symbol {bad.margin:.3e} <= {floor:.1e}",
            member=bad.member.label, margin=bad.margin)
        exc.certificate = cert
        raise exc
    ind_plus, rows_plus = _half_index(cert.verdicts, "plus", policy)
    ind_minus, rows_minus = _half_index(cert.verdicts, "minus", policy)
    report = IndexReport(
        fredholm=True, margin=cert.uniform_margin, ind_plus=ind_plus, ind_minus=ind_minus,
        ind=ind_plus + ind_minus, per_limit_op=rows_plus + rows_minus,
        provenance={
            "fredholm": "Laurent criterion on every limit operator (min singular value of "
                        "the period-grouped symbol over the unit circle)",
            "ind_plus": "-winding(det) of the period-grouped symbol of every plus member",
            "ind_minus": "same recipe after the reflection n -> -1 - n, every minus member",
            "ind": "ind_plus + ind_minus",
        })
    if run_oracle:
        try:
            report.oracle_check = _oracle_record(op, ind_plus, ind_minus, oracle)
            report.provenance["oracle"] = "finite-section singular value counts (p = 2)"
        except (NotStabilized, ValueError) as exc:
            report.oracle_check = {"agree": False, "error": f"{type(exc).__name__}: {exc}",
                                   "note": P_INDEPENDENCE_NOTE}
    return report


def kernel_symbol_samples(kernel, policy=None, tail_bound=1e-3):
    from .discretization import kernel_symbol_curve

    return kernel_symbol_curve(kernel, policy, tail_bound)


def wiener_hopf_index(kernel, policy=None, tail_bound=1e-3):
    """Index of ``I + W(k)`` on the half-line: ``-wind(1 + k^)`` over the compactified line.

    Raises
    ------
    NotFredholm
        If ``1 + k^`` comes closer to 0 than the policy floor.
    """
    policy = policy or CurveSamplePolicy()
    try:
        _, values = kernel_symbol_samples(kernel, policy, tail_bound)
        wind = winding_continuous(values, tail_bound, policy.min_modulus,
                                  max_arg_step=policy.max_arg_step)
    except NotElliptic as exc:
        raise NotFredholm(f"1 + k^ not elliptic: {exc}", margin=exc.margin) from exc
    return -wind
