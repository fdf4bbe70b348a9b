"""Operator spec files: YAML documents describing one operator.

Layout::

    schema_version: 1
    toeplitz | operator | convolution: ...   # exactly one
    oracle: {enabled, sizes, rank_tol, stability_required}
    policy: {initial_points, max_refinements, min_modulus, max_arg_step}
    output: {report, curve, samples}

Complex numbers are ``[re, im]`` pairs.  A d x d matrix is a row-major
list of ``d`` rows of pairs; a single pair is accepted for d = 1.

Coefficient literals (``kind`` selects the fields)::

    {kind: constant, value: M}
    {kind: periodic, values: [M, ...]}
    {kind: stabilizing, value_minus: M, value_plus: M, profile: step, width: 1, center: 0}
    {kind: finite_support, start: n, values: [M, ...]}
    {kind: sum, terms: [C, ...]}
    {kind: product, factors: [C, ...]}
    {kind: interleaved, factor: d, parts: [{coefficient: C or null, row: i, col: j}, ...]}

Kernel literals::

    {family: exponential_onesided | exponential_symmetric, alpha: z, rate: x}
    {family: modulated, base: K, frequency: x}
    {family: table, grid: [x, ...], values: [z, ...]}

Errors are :class:`SpecError` carrying the 1-based source line.
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from . import coefficients as cf
from .band_ops import BlockBandOperator
from .discretization import (DiscretizationConfig, Modulated, OneSidedExponential,
                             SymmetricExponential, Tabulated)
from .exceptions import SpecError
from .oracle import OracleConfig
from .symbols import CurveSamplePolicy, LaurentSymbol

SCHEMA_VERSION = 1
OPERATOR_SECTIONS = ("toeplitz", "operator", "convolution")
TOP_LEVEL = ("schema_version", "oracle", "policy", "output") + OPERATOR_SECTIONS


class _Map(dict):
    line = None
    key_lines = None


class _List(list):
    line = None
    item_lines = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    out = _Map()
    out.line = node.start_mark.line + 1
    out.key_lines = {}
    loader.flatten_mapping(node)
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in out:
            raise SpecError(f"duplicate key {key!r}", key_node.start_mark.line + 1)
        out[key] = loader.construct_object(value_node, deep=True)
        out.key_lines[key] = value_node.start_mark.line + 1
    return out


def _construct_sequence(loader, node):
    out = _List(loader.construct_object(child, deep=True) for child in node.value)
    out.line = node.start_mark.line + 1
    out.item_lines = [child.start_mark.line + 1 for child in node.value]
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_sequence)


class _Ctx:
    """Path bookkeeping so every error points at a line."""

    def __init__(self, path=None):
        self.path = path

    def fail(self, msg, line):
        raise SpecError(msg, line, self.path)


def _line_of(parent, key):
    if isinstance(parent, _Map) and parent.key_lines and key in parent.key_lines:
        return parent.key_lines[key]
    if isinstance(parent, _List) and parent.item_lines and isinstance(key, int):
        return parent.item_lines[key]
    return getattr(parent, "line", None)


def _get(ctx, mapping, key, required=True, default=None):
    if key in mapping:
        return mapping[key]
    if required:
        ctx.fail(f"missing field {key!r}", getattr(mapping, "line", None))
    return default


def _expect_map(ctx, value, what, line):
    if not isinstance(value, dict):
        ctx.fail(f"{what} must be a mapping", line)
    return value


def _expect_list(ctx, value, what, line, nonempty=True):
    if not isinstance(value, list) or (nonempty and not value):
        ctx.fail(f"{what} must be a non-empty list", line)
    return value


def _check_keys(ctx, mapping, allowed, what):
    extra = sorted(set(mapping) - set(allowed), key=str)
    if extra:
        ctx.fail(f"unknown field {extra[0]!r} in {what}", _line_of(mapping, extra[0]))


def _number(ctx, value, what, line, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        ctx.fail(f"{what} must be a number", line)
    if kind is int:
        if float(value) != int(value):
            ctx.fail(f"{what} must be an integer", line)
        return int(value)
    return float(value)


def _complex(ctx, value, what, line):
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(float(value[0]), float(value[1]))
    ctx.fail(f"{what} must be a [re, im] pair", line)


def _matrix(ctx, value, what, line, dim=None):
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        mat = np.array([[_complex(ctx, value, what, line)]])
    else:
        rows = _expect_list(ctx, value, what, line)
        if all(isinstance(v, (int, float)) for v in rows):
            ctx.fail(f"{what} must be a [re, im] pair or a list of rows of pairs", line)
        mat = []
        for i, row in enumerate(rows):
            row_line = _line_of(rows, i)
            row = _expect_list(ctx, row, f"{what} row {i}", row_line)
            mat.append([_complex(ctx, z, f"{what}[{i}][{j}]", row_line) for j, z in enumerate(row)])
        if len({len(r) for r in mat}) != 1 or len(mat[0]) != len(mat):
            ctx.fail(f"{what} must be square", line)
        mat = np.array(mat, dtype=complex)
    if dim is not None and mat.shape[0] != dim:
        ctx.fail(f"{what} is {mat.shape[0]}x{mat.shape[0]}, expected {dim}x{dim}", line)
    return mat


def _matrices(ctx, value, what, line, dim):
    items = _expect_list(ctx, value, what, line)
    return [_matrix(ctx, m, f"{what}[{i}]", _line_of(items, i), dim) for i, m in enumerate(items)]


_COEF_FIELDS = {
    "constant": ("value",),
    "periodic": ("values",),
    "stabilizing": ("value_minus", "value_plus", "profile", "width", "center"),
    "finite_support": ("start", "values"),
    "sum": ("terms",),
    "product": ("factors",),
    "interleaved": ("factor", "parts"),
}


def parse_coefficient(ctx, node, line, dim):
    node = _expect_map(ctx, node, "coefficient", line)
    kind = _get(ctx, node, "kind")
    if kind not in _COEF_FIELDS:
        ctx.fail(f"unknown coefficient kind {kind!r}", _line_of(node, "kind"))
    _check_keys(ctx, node, ("kind",) + _COEF_FIELDS[kind], f"{kind} coefficient")

    def at(key):
        return _line_of(node, key)

    try:
        if kind == "constant":
            return cf.Constant(_matrix(ctx, _get(ctx, node, "value"), "value", at("value"), dim))
        if kind == "periodic":
            return cf.Periodic(_matrices(ctx, _get(ctx, node, "values"), "values", at("values"), dim))
        if kind == "stabilizing":
            return cf.Stabilizing(
                _matrix(ctx, _get(ctx, node, "value_minus"), "value_minus", at("value_minus"), dim),
                _matrix(ctx, _get(ctx, node, "value_plus"), "value_plus", at("value_plus"), dim),
                _get(ctx, node, "profile", False, "step"),
                _number(ctx, _get(ctx, node, "width", False, 1), "width", at("width"), int),
                _number(ctx, _get(ctx, node, "center", False, 0), "center", at("center"), int))
        if kind == "finite_support":
            return cf.FiniteSupport(
                _number(ctx, _get(ctx, node, "start"), "start", at("start"), int),
                _matrices(ctx, _get(ctx, node, "values"), "values", at("values"), dim))
        if kind in ("sum", "product"):
            key = "terms" if kind == "sum" else "factors"
            items = _expect_list(ctx, _get(ctx, node, key), key, at(key))
            children = [parse_coefficient(ctx, c, _line_of(items, i), dim)
                        for i, c in enumerate(items)]
            return cf.Sum(children) if kind == "sum" else cf.Product(children)
        factor = _number(ctx, _get(ctx, node, "factor"), "factor", at("factor"), int)
        items = _expect_list(ctx, _get(ctx, node, "parts"), "parts", at("parts"))
        parts = []
        for i, part in enumerate(items):
            pl = _line_of(items, i)
            part = _expect_map(ctx, part, "interleaved part", pl)
            _check_keys(ctx, part, ("coefficient", "row", "col"), "interleaved part")
            child = part.get("coefficient")
            child = None if child is None else parse_coefficient(
                ctx, child, _line_of(part, "coefficient"), None)
            parts.append((child, _number(ctx, _get(ctx, part, "row"), "row", pl, int),
                          _number(ctx, _get(ctx, part, "col"), "col", pl, int)))
        return cf.Interleaved(factor, parts)
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        ctx.fail(f"invalid {kind} coefficient: {exc}", line)


def parse_operator(ctx, node, line):
    node = _expect_map(ctx, node, "operator", line)
    _check_keys(ctx, node, ("block_dim", "identity_offset", "diagonals"), "operator")
    dim = _number(ctx, _get(ctx, node, "block_dim", False, 1), "block_dim",
                  _line_of(node, "block_dim"), int)
    if dim < 1:
        ctx.fail("block_dim must be positive", _line_of(node, "block_dim"))
    offset = _complex(ctx, _get(ctx, node, "identity_offset", False, [0.0, 0.0]),
                      "identity_offset", _line_of(node, "identity_offset"))
    diags = {}
    items = _get(ctx, node, "diagonals", False, _List())
    items = _expect_list(ctx, items, "diagonals", _line_of(node, "diagonals"), nonempty=False)
    for i, item in enumerate(items):
        il = _line_of(items, i)
        item = _expect_map(ctx, item, "diagonal", il)
        _check_keys(ctx, item, ("offset", "coefficient"), "diagonal")
        k = _number(ctx, _get(ctx, item, "offset"), "offset", _line_of(item, "offset"), int)
        if k in diags:
            ctx.fail(f"diagonal {k} given twice", il)
        diags[k] = parse_coefficient(ctx, _get(ctx, item, "coefficient"),
                                     _line_of(item, "coefficient"), dim)
    return BlockBandOperator(dim, diags, offset)


def parse_symbol(ctx, node, line):
    node = _expect_map(ctx, node, "toeplitz", line)
    _check_keys(ctx, node, ("block_dim", "coefficients"), "toeplitz")
    dim = _number(ctx, _get(ctx, node, "block_dim", False, 1), "block_dim",
                  _line_of(node, "block_dim"), int)
    items = _expect_list(ctx, _get(ctx, node, "coefficients"), "coefficients",
                         _line_of(node, "coefficients"))
    coefs = {}
    for i, item in enumerate(items):
        il = _line_of(items, i)
        item = _expect_map(ctx, item, "symbol coefficient", il)
        _check_keys(ctx, item, ("power", "value"), "symbol coefficient")
        k = _number(ctx, _get(ctx, item, "power"), "power", _line_of(item, "power"), int)
        if k in coefs:
            ctx.fail(f"power {k} given twice", il)
        coefs[k] = _matrix(ctx, _get(ctx, item, "value"), "value", _line_of(item, "value"), dim)
    return LaurentSymbol.from_dict(coefs, dim)


_KERNEL_FIELDS = {
    "exponential_onesided": ("alpha", "rate"),
    "exponential_symmetric": ("alpha", "rate"),
    "modulated": ("base", "frequency"),
    "table": ("grid", "values"),
}


def parse_kernel(ctx, node, line):
    node = _expect_map(ctx, node, "kernel", line)
    family = _get(ctx, node, "family")
    if family not in _KERNEL_FIELDS:
        ctx.fail(f"unknown kernel family {family!r}", _line_of(node, "family"))
    _check_keys(ctx, node, ("family",) + _KERNEL_FIELDS[family], f"{family} kernel")
    try:
        if family in ("exponential_onesided", "exponential_symmetric"):
            cls = OneSidedExponential if family == "exponential_onesided" else SymmetricExponential
            return cls(_complex(ctx, _get(ctx, node, "alpha"), "alpha", _line_of(node, "alpha")),
                       _number(ctx, _get(ctx, node, "rate"), "rate", _line_of(node, "rate")))
        if family == "modulated":
            return Modulated(parse_kernel(ctx, _get(ctx, node, "base"), _line_of(node, "base")),
                             _number(ctx, _get(ctx, node, "frequency"), "frequency",
                                     _line_of(node, "frequency")))
        grid = _expect_list(ctx, _get(ctx, node, "grid"), "grid", _line_of(node, "grid"))
        vals = _expect_list(ctx, _get(ctx, node, "values"), "values", _line_of(node, "values"))
        return Tabulated([_number(ctx, x, "grid point", _line_of(grid, i)) for i, x in enumerate(grid)],
                         [_complex(ctx, z, "value", _line_of(vals, i)) for i, z in enumerate(vals)])
    except SpecError:
        raise
    except ValueError as exc:
        ctx.fail(f"invalid {family} kernel: {exc}", line)


@dataclass
class ConvolutionSpec:
    kernel: object
    config: DiscretizationConfig
    identity_offset: complex = 1.0


def parse_convolution(ctx, node, line):
    node = _expect_map(ctx, node, "convolution", line)
    _check_keys(ctx, node, ("kernel", "config", "identity_offset"), "convolution")
    kernel = parse_kernel(ctx, _get(ctx, node, "kernel"), _line_of(node, "kernel"))
    cfg_node = _expect_map(ctx, _get(ctx, node, "config", False, _Map()), "config",
                           _line_of(node, "config"))
    _check_keys(ctx, cfg_node, ("cells_per_unit", "band_cut", "quadrature_order",
                                "defect_target"), "config")
    kwargs = {}
    for key, kind in (("cells_per_unit", int), ("band_cut", int), ("quadrature_order", int),
                      ("defect_target", float)):
        if cfg_node.get(key) is not None:
            kwargs[key] = _number(ctx, cfg_node[key], key, _line_of(cfg_node, key), kind)
    try:
        cfg = DiscretizationConfig(**kwargs)
    except ValueError as exc:
        ctx.fail(str(exc), _line_of(node, "config"))
    offset = _complex(ctx, _get(ctx, node, "identity_offset", False, [1.0, 0.0]),
                      "identity_offset", _line_of(node, "identity_offset"))
    if offset == 0:
        ctx.fail("identity_offset must be nonzero", _line_of(node, "identity_offset"))
    return ConvolutionSpec(kernel, cfg, offset)


@dataclass
class OperatorSpec:
    """Parsed spec file; ``kind`` is one of ``toeplitz``, ``operator``, ``convolution``."""

    kind: str
    target: object
    oracle: OracleConfig = field(default_factory=OracleConfig)
    run_oracle: bool = True
    policy: CurveSamplePolicy = field(default_factory=CurveSamplePolicy)
    output: dict = field(default_factory=dict)
    path: str = None
    oracle_sizes_given: bool = False


def _parse_section(ctx, doc, key, cls, fields):
    node = doc.get(key)
    if node is None:
        return cls(), {}
    node = _expect_map(ctx, node, key, _line_of(doc, key))
    extra = {k: node[k] for k in node if k not in fields}
    kwargs = {}
    for name, kind in fields.items():
        if name in node and node[name] is not None:
            if kind is tuple:
                items = _expect_list(ctx, node[name], name, _line_of(node, name))
                kwargs[name] = tuple(_number(ctx, v, name, _line_of(items, i), int)
                                     for i, v in enumerate(items))
            else:
                kwargs[name] = _number(ctx, node[name], name, _line_of(node, name), kind)
    try:
        return cls(**kwargs), extra
    except ValueError as exc:
        ctx.fail(str(exc), _line_of(doc, key))


def parse_spec(text, path=None):
    """Parse spec text into an :class:`OperatorSpec`."""
    ctx = _Ctx(path)
    try:
        doc = yaml.load(text, Loader=_Loader)
    except SpecError as exc:
        raise SpecError(str(exc).split(": ", 1)[-1], exc.line, path) from None
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        ctx.fail(f"YAML syntax error: {exc.problem}", mark.line + 1 if mark else None)
    if not isinstance(doc, dict):
        ctx.fail("spec must be a mapping at top level", 1)
    _check_keys(ctx, doc, TOP_LEVEL, "spec")
    version = _get(ctx, doc, "schema_version")
    if version != SCHEMA_VERSION:
        ctx.fail(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
                 _line_of(doc, "schema_version"))
    present = [k for k in OPERATOR_SECTIONS if k in doc]
    if len(present) != 1:
        ctx.fail(f"need exactly one of {', '.join(OPERATOR_SECTIONS)}; found {present or 'none'}",
                 doc.line)
    kind = present[0]
    parser = {"toeplitz": parse_symbol, "operator": parse_operator,
              "convolution": parse_convolution}[kind]
    target = parser(ctx, doc[kind], _line_of(doc, kind))
    oracle, extra = _parse_section(ctx, doc, "oracle", OracleConfig,
                                   {"sizes": tuple, "rank_tol": float, "stability_required": int})
    _check_keys(ctx, extra, ("enabled",), "oracle")
    run_oracle = extra.get("enabled", True)
    if not isinstance(run_oracle, bool):
        ctx.fail("oracle.enabled must be true or false", _line_of(doc["oracle"], "enabled"))
    policy, extra = _parse_section(ctx, doc, "policy", CurveSamplePolicy,
                                   {"initial_points": int, "max_refinements": int,
                                    "min_modulus": float, "max_arg_step": float})
    _check_keys(ctx, extra, (), "policy")
    output = _expect_map(ctx, doc.get("output") or _Map(), "output", _line_of(doc, "output"))
    _check_keys(ctx, output, ("report", "curve", "samples"), "output")
    if "samples" in output:
        _number(ctx, output["samples"], "samples", _line_of(output, "samples"), int)
    sizes_given = isinstance(doc.get("oracle"), dict) and "sizes" in doc["oracle"]
    return OperatorSpec(kind, target, oracle, run_oracle, policy, dict(output), path, sizes_given)


def load_spec(path):
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc.strerror}", None, path) from None
    except UnicodeDecodeError:
        raise SpecError("spec is not valid UTF-8", None, path) from None
    return parse_spec(text, path)


# -- serialization ---------------------------------------------------------

def _pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _mat(m):
    return [[_pair(z) for z in row] for row in np.asarray(m)]


def dump_coefficient(coef):
    if isinstance(coef, cf.Constant):
        return {"kind": "constant", "value": _mat(coef.value)}
    if isinstance(coef, cf.Periodic):
        return {"kind": "periodic", "values": [_mat(m) for m in coef.values_]}
    if isinstance(coef, cf.Stabilizing):
        return {"kind": "stabilizing", "value_minus": _mat(coef.value_minus),
                "value_plus": _mat(coef.value_plus), "profile": coef.profile,
                "width": coef.width, "center": coef.center}
    if isinstance(coef, cf.FiniteSupport):
        return {"kind": "finite_support", "start": coef.start,
                "values": [_mat(m) for m in coef.values_]}
    if isinstance(coef, cf.Sum):
        return {"kind": "sum", "terms": [dump_coefficient(t) for t in coef.terms]}
    if isinstance(coef, cf.Product):
        return {"kind": "product", "factors": [dump_coefficient(f) for f in coef.factors]}
    if isinstance(coef, cf.Interleaved):
        return {"kind": "interleaved", "factor": coef.factor,
                "parts": [{"coefficient": None if c is None else dump_coefficient(c),
                           "row": row, "col": col} for c, row, col in coef.parts]}
    raise TypeError(f"cannot serialize coefficient kind {type(coef).__name__}")


def dump_operator(op):
    return {"block_dim": op.block_dim, "identity_offset": _pair(op.identity_offset),
            "diagonals": [{"offset": int(k), "coefficient": dump_coefficient(c)}
                          for k, c in sorted(op.diagonals.items())]}


def dump_symbol(sym):
    return {"block_dim": sym.block_dim,
            "coefficients": [{"power": int(k), "value": _mat(a)} for k, a in sym.items()]}


def dump_kernel(kernel):
    if isinstance(kernel, (OneSidedExponential, SymmetricExponential)):
        return {"family": kernel.family, "alpha": _pair(kernel.alpha), "rate": float(kernel.rate)}
    if isinstance(kernel, Modulated):
        return {"family": "modulated", "base": dump_kernel(kernel.base),
                "frequency": float(kernel.frequency)}
    if isinstance(kernel, Tabulated):
        return {"family": "table", "grid": [float(x) for x in kernel.grid],
                "values": [_pair(z) for z in kernel.values]}
    raise TypeError(f"cannot serialize kernel {type(kernel).__name__}")


def dump_spec(target, oracle=None, output=None):
    """YAML text for a symbol, operator or :class:`ConvolutionSpec`."""
    doc = {"schema_version": SCHEMA_VERSION}
    if isinstance(target, LaurentSymbol):
        doc["toeplitz"] = dump_symbol(target)
    elif isinstance(target, BlockBandOperator):
        doc["operator"] = dump_operator(target)
    elif isinstance(target, ConvolutionSpec):
        cfg = target.config
        doc["convolution"] = {
            "kernel": dump_kernel(target.kernel), "identity_offset": _pair(target.identity_offset),
            "config": {"cells_per_unit": cfg.cells_per_unit, "band_cut": cfg.band_cut,
                       "quadrature_order": cfg.quadrature_order,
                       "defect_target": float(cfg.defect_target)}}
    else:
        raise TypeError(f"cannot serialize {type(target).__name__}")
    if oracle is not None:
        doc["oracle"] = oracle
    if output is not None:
        doc["output"] = output
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
