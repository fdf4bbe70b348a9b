import numpy as np
import pytest

from helpers import random_fredholm_operator
from limop import coefficients as cf
from limop.band_ops import BlockBandOperator, compose, windows_equal
from limop.exceptions import UnsupportedCoefficientClass
from limop.limit_ops import (certify_invertibility, limit_spectrum, min_singular_value,
                             periodic_symbol, shift_period)
from limop.symbols import LaurentSymbol

W = np.arange(-10, 11)


def single(op):
    return limit_spectrum(op).plus[0].operator, limit_spectrum(op).minus[0].operator


def test_compact_part_vanishes():
    op = BlockBandOperator(1, {0: cf.FiniteSupport(-2, [1.0, 2.0, 3.0]),
                               2: cf.FiniteSupport(0, [5.0])}, 1.0)
    spec = limit_spectrum(op)
    assert len(spec.plus) == len(spec.minus) == 1
    for m in spec.members():
        assert windows_equal(m.operator, BlockBandOperator.identity(1))


def test_stabilizing_limits():
    sm, sp = np.array([[1.0, 2.0], [0, 3.0]]), np.array([[-1.0, 0], [4.0, 1.0]])
    op = BlockBandOperator(2, {0: cf.Stabilizing(sm, sp, "cubic", 3, 2)}, 1.0)
    plus, minus = single(op)
    assert windows_equal(plus, BlockBandOperator(2, {0: cf.Constant(sp)}, 1.0))
    assert windows_equal(minus, BlockBandOperator(2, {0: cf.Constant(sm)}, 1.0))
    assert plus.identity_offset == 1.0


def test_periodic_translates():
    op = BlockBandOperator(1, {1: cf.Periodic([2.0, -3.0]), 0: cf.FiniteSupport(0, [7.0])}, 1.0)
    spec = limit_spectrum(op)
    assert len(spec.plus) == 2 and len(spec.minus) == 2
    firsts = sorted(float(m.operator.diagonals[1].values([0])[0, 0, 0].real) for m in spec.plus)
    assert firsts == [-3.0, 2.0]


@pytest.mark.parametrize("seed", range(6))
def test_members_are_window_limits(seed):
    rng = np.random.default_rng(seed)
    op = random_fredholm_operator(rng)
    spec = limit_spectrum(op)
    lo, hi = op.transient_window()
    for m in spec.members():
        assert all(isinstance(c, (cf.Constant, cf.Periodic)) for c in m.operator.diagonals.values())
        q = m.period
        sign = 1 if m.side == "plus" else -1
        base = hi + 20 if m.side == "plus" else lo - 20
        for extra in (0, 5):
            h = base + sign * extra * q
            h += (m.residue - h) % q
            assert np.array_equal(op.shifted(h).window(W, W), m.operator.window(W, W)), m.witness


def test_shift_periodic_operator_is_its_own_translates():
    op = BlockBandOperator(1, {0: cf.Periodic([1.0, 2.0, 3.0]), -1: cf.Constant(0.5)}, 2.0)
    spec = limit_spectrum(op)
    assert shift_period(op) == 3
    for m in spec.members():
        assert windows_equal(m.operator, op.shifted(m.residue))


def test_limit_map_is_multiplicative():
    rng = np.random.default_rng(4)
    a, b = random_fredholm_operator(rng), random_fredholm_operator(rng)
    while a.block_dim != b.block_dim:
        b = random_fredholm_operator(rng)
    sa, sb, sab = limit_spectrum(a), limit_spectrum(b), limit_spectrum(compose(a, b))
    for side in ("plus", "minus"):
        ma, mb, mab = getattr(sa, side), getattr(sb, side), getattr(sab, side)
        for m in mab:
            prod = compose(ma[m.residue % len(ma)].operator, mb[m.residue % len(mb)].operator)
            assert np.allclose(prod.window(W, W), m.operator.window(W, W), atol=1e-12)


def test_unsupported_kind():
    class Weird(cf.Coefficient):
        kind = "weird"
        block_dim = 1

        def values(self, ns):
            return np.cos(np.asarray(ns, dtype=float) ** 2)[:, None, None]

    op = BlockBandOperator(1, {0: cf.Sum((cf.Constant(1.0), Weird()))})
    with pytest.raises(UnsupportedCoefficientClass):
        limit_spectrum(op)


def test_certificate_examples():
    eye = certify_invertibility(limit_spectrum(BlockBandOperator.identity(1)))
    assert eye.invertible and eye.uniform_margin == pytest.approx(1.0)
    half = BlockBandOperator(1, {1: cf.Constant(0.5)}, 1.0)
    cert = certify_invertibility(limit_spectrum(half))
    assert cert.invertible and cert.uniform_margin == pytest.approx(0.5, rel=1e-8)
    assert cert.uniform_inverse_bound == pytest.approx(2.0, rel=1e-8)
    # the bi-infinite shift is invertible although its symbol winds
    v1 = certify_invertibility(limit_spectrum(BlockBandOperator.shift(1)))
    assert v1.invertible and v1.uniform_margin == pytest.approx(1.0)
    bad = BlockBandOperator(1, {1: cf.Stabilizing(0.0, -1.0)}, 1.0)
    cert = certify_invertibility(limit_spectrum(bad))
    assert not cert.invertible
    assert [v.member.side for v in cert.failures()] == ["plus"]


def test_periodic_symbol_gives_block_toeplitz_compression():
    rng = np.random.default_rng(8)
    vals = rng.standard_normal((3, 5))
    op = BlockBandOperator(1, {k - 2: cf.Periodic(list(vals[:, k])) for k in range(5)}, 1.0)
    sym = periodic_symbol(op)
    assert sym.block_dim == 3
    n = 6
    toe = np.zeros((3 * n, 3 * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            toe[3 * i:3 * i + 3, 3 * j:3 * j + 3] = sym.coefficient(i - j)
    assert np.array_equal(op.window(np.arange(3 * n), np.arange(3 * n)), toe)
    with pytest.raises(ValueError):
        periodic_symbol(op, 2)


def test_min_singular_value_scalar():
    sym = LaurentSymbol.from_dict({0: 1.0, 1: 0.5})
    assert min_singular_value(sym) == pytest.approx(0.5, rel=1e-9)
