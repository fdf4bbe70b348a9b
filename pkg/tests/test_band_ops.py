import numpy as np
import pytest

from helpers import crandn, random_coefficient
from limop import coefficients as cf
from limop.band_ops import (BlockBandOperator, block_interleave, compose, minus_compression,
                            plus_compression, rect_truncate, truncate, windows_equal)
from limop.symbols import LaurentSymbol

R = 12
AXIS = np.arange(-R, R + 1)


def random_op(rng, d=2, width=2, scale=1.0):
    diags = {k: random_coefficient(rng, d, scale, period=int(rng.integers(1, 4)))
             for k in range(-width, width + 1) if rng.random() < 0.8}
    return BlockBandOperator(d, diags, complex(rng.standard_normal()))


def interleaved_window(op, rows, cols):
    d = op.block_dim
    out = np.zeros((len(rows), len(cols)), dtype=complex)
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            out[a, b] = op.entry(i // d, j // d)[i % d, j % d]
    return out


# -- coefficients ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(8))
def test_coefficient_asymptotics_match_values(seed):
    rng = np.random.default_rng(seed)
    coef = random_coefficient(rng, 2, 1.0, period=int(rng.integers(2, 4)))
    a = coef.asymptotics()
    far = np.arange(a.hi, a.hi + 3 * a.period)
    assert np.array_equal(coef.values(far), a.plus[far % a.period])
    near = np.arange(a.lo - 3 * a.period, a.lo)
    assert np.array_equal(coef.values(near), a.minus[near % a.period])


@pytest.mark.parametrize("seed", range(6))
def test_coefficient_shift_and_reflection(seed):
    rng = np.random.default_rng(seed)
    coef = random_coefficient(rng, 1, 1.0, period=3)
    ns = np.arange(-15, 15)
    for h in (-4, 0, 5):
        assert np.array_equal(coef.shifted(h).values(ns), coef.values(ns + h))
    assert np.array_equal(coef.reflected().values(ns), coef.values(-1 - ns))


def test_stabilizing_exact_limits():
    for profile in ("step", "linear", "cubic"):
        c = cf.Stabilizing(2.0, -3.0, profile, width=3, center=1)
        assert np.all(c.values(np.arange(-10, -1))[:, 0, 0] == 2.0)
        assert np.all(c.values(np.arange(4, 12))[:, 0, 0] == -3.0)
    with pytest.raises(ValueError):
        cf.Stabilizing(1.0, 2.0, "sigmoid")


def test_periodic_entries_alternate():
    A, B = np.array([[1.0, 2.0], [0, 1]]), np.array([[0, 1.0], [3.0, 0]])
    op = BlockBandOperator(2, {0: cf.Periodic([A, B])})
    for m in range(-3, 4):
        assert np.array_equal(op.entry(2 * m, 2 * m), A)
        assert np.array_equal(op.entry(2 * m + 1, 2 * m + 1), B)


def test_folding_helpers():
    p = cf.Periodic([1.0, 2.0])
    q = cf.Periodic([1.0, 2.0, 3.0])
    s = cf.add(p, q)
    assert isinstance(s, cf.Periodic) and s.period == 6
    ns = np.arange(-7, 7)
    assert np.array_equal(s.values(ns), p.values(ns) + q.values(ns))
    assert isinstance(cf.periodic_or_constant(np.ones((4, 1, 1))), cf.Constant)
    prod = cf.multiply(cf.FiniteSupport(0, [2.0, 3.0]), cf.Constant(2.0))
    assert np.array_equal(prod.values(ns), 2 * cf.FiniteSupport(0, [2.0, 3.0]).values(ns))


# -- entries and algebra -----------------------------------------------------

def test_entry_examples():
    eye = BlockBandOperator.identity(3)
    assert np.array_equal(eye.entry(4, 4), np.eye(3))
    v1 = BlockBandOperator.shift(1, 2)
    assert np.array_equal(v1.entry(5, 4), np.eye(2))
    assert not np.any(v1.entry(4, 5))


def test_compose_examples():
    v1, vm1 = BlockBandOperator.shift(1), BlockBandOperator.shift(-1)
    assert windows_equal(compose(v1, vm1), BlockBandOperator.identity(1))
    rng = np.random.default_rng(0)
    b = random_op(rng)
    lam = 2.5 - 1j
    assert windows_equal(compose(BlockBandOperator.identity(2, lam), b), b * lam, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_compose_matches_dense_product(seed):
    rng = np.random.default_rng(seed)
    a, b = random_op(rng), random_op(rng)
    ab = compose(a, b)
    assert ab.bandwidth <= a.bandwidth + b.bandwidth
    rows = np.arange(-20, 21)
    inner = np.arange(-20 - b.bandwidth - a.bandwidth, 21 + a.bandwidth + b.bandwidth)
    dense = a.window(rows, inner) @ b.window(inner, rows)
    got = ab.window(rows, rows)
    assert np.max(np.abs(got - dense)) <= 1e-12 * max(1.0, np.max(np.abs(dense)))


@pytest.mark.parametrize("h", [-7, -1, 0, 3, 11])
def test_shift_covariance(h):
    rng = np.random.default_rng(h + 20)
    op = random_op(rng)
    shifted = compose(compose(BlockBandOperator.shift(-h, 2), op), BlockBandOperator.shift(h, 2))
    assert np.array_equal(op.shifted(h).window(AXIS, AXIS), op.window(AXIS + h, AXIS + h))
    assert np.allclose(shifted.window(AXIS, AXIS), op.window(AXIS + h, AXIS + h), atol=1e-14)


def test_reflection():
    rng = np.random.default_rng(3)
    op = random_op(rng)
    ref = op.reflected()
    assert np.array_equal(ref.block_window(AXIS, AXIS), op.block_window(-1 - AXIS, -1 - AXIS))


def test_laurent_operator_from_symbol():
    sym = LaurentSymbol.from_dict({-1: 2.0, 0: 1.0, 1: 3.0})
    op = BlockBandOperator.laurent(sym)
    assert op.entry(5, 4)[0, 0] == 3.0 and op.entry(4, 5)[0, 0] == 2.0


# -- compressions and truncations -------------------------------------------

def test_plus_compression_examples():
    eye = plus_compression(BlockBandOperator.identity(2))
    assert np.array_equal(eye.window(AXIS, AXIS), np.eye(2 * len(AXIS)))
    t = plus_compression(BlockBandOperator.shift(1)).half_window(6, 6)
    assert np.array_equal(t, np.eye(6, k=-1))
    fs = BlockBandOperator(1, {0: cf.FiniteSupport(2, [0.5, -0.3]), 1: cf.FiniteSupport(-1, [4.0])},
                           1.0)
    diff = plus_compression(fs).window(AXIS, AXIS) - np.eye(len(AXIS))
    assert np.count_nonzero(diff) == 2


@pytest.mark.parametrize("seed", range(4))
def test_compressions_act_as_identity_off_their_half(seed):
    rng = np.random.default_rng(seed)
    op = random_op(rng)
    for handle, keep in ((plus_compression(op), AXIS >= 0), (minus_compression(op), AXIS < 0)):
        full = handle.window(AXIS, AXIS)
        dense = op.window(AXIS, AXIS)
        mask = np.repeat(keep, 2)
        assert np.array_equal(full[np.ix_(mask, mask)], dense[np.ix_(mask, mask)])
        assert np.array_equal(full[np.ix_(~mask, ~mask)], np.eye(int((~mask).sum())))
        assert not np.any(full[np.ix_(mask, ~mask)]) and not np.any(full[np.ix_(~mask, mask)])
        # compressing the compression again changes nothing
        again = np.eye(len(full), dtype=complex)
        again[np.ix_(mask, mask)] = full[np.ix_(mask, mask)]
        assert np.array_equal(again, full)


def test_minus_half_window_is_reflection():
    rng = np.random.default_rng(9)
    op = random_op(rng)
    m = minus_compression(op)
    n = np.arange(8)
    assert np.array_equal(m.half_window(8, 8), op.window(-1 - n, -1 - n))


@pytest.mark.parametrize("seed", range(4))
def test_index_splitting_is_finite_rank(seed):
    rng = np.random.default_rng(seed)
    op = random_op(rng, d=1)
    w = op.bandwidth
    P, M = plus_compression(op).window(AXIS, AXIS), minus_compression(op).window(AXIS, AXIS)
    diff = op.window(AXIS, AXIS) - P @ M
    rows, cols = np.nonzero(np.abs(diff) > 1e-12)
    assert np.all(np.abs(AXIS[rows]) <= w) and np.all(np.abs(AXIS[cols]) <= w)


def test_rect_truncate_examples():
    eye = rect_truncate(plus_compression(BlockBandOperator.identity(1)), 3, 1)
    assert eye.matrix.shape == (5, 4)
    assert np.array_equal(eye.matrix, np.eye(5, 4))
    v1 = rect_truncate(plus_compression(BlockBandOperator.shift(1)), 3, 1)
    assert np.array_equal(v1.matrix, np.eye(5, 4, k=-1))
    with pytest.raises(ValueError):
        rect_truncate(plus_compression(BlockBandOperator.shift(2)), 3, 1)


def test_rect_truncate_column_sums():
    rng = np.random.default_rng(5)
    op = random_op(rng, d=2)
    h = plus_compression(op)
    n, w = 10, op.bandwidth
    tr = rect_truncate(h, n, w)
    direct = np.zeros(2 * (n + 1))
    for j in range(n + 1):
        for i in range(n + w + 1):
            direct[2 * j: 2 * j + 2] += np.abs(h.entry(i, j)).sum(axis=0)
    assert np.allclose(np.abs(tr.matrix).sum(axis=0), direct)
    # no mass outside the row window
    tall = h.half_window(n + w + 10, n + 1)
    assert not np.any(tall[2 * (n + w + 1):])


def test_truncate_shapes():
    op = BlockBandOperator.shift(1, 3)
    tr = truncate(op, (-2, 3), (0, 4))
    assert tr.matrix.shape == (15, 12)


# -- interleaving ------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4])
def test_interleave_shift(d):
    j = block_interleave(BlockBandOperator.shift(1, d))
    assert windows_equal(j, BlockBandOperator.shift(d, 1))
    assert windows_equal(block_interleave(BlockBandOperator.identity(d)),
                         BlockBandOperator.identity(1))


@pytest.mark.parametrize("d", [2, 3])
def test_interleave_windows_and_homomorphism(d):
    rng = np.random.default_rng(d)
    a, b = random_op(rng, d=d), random_op(rng, d=d)
    ja = block_interleave(a)
    assert ja.bandwidth <= (a.bandwidth + 1) * d
    ax = np.arange(-3 * d * 3, 3 * d * 3)
    assert np.array_equal(ja.window(ax, ax), interleaved_window(a, ax, ax))
    lhs = block_interleave(compose(a, b)).window(ax, ax)
    rhs = compose(ja, block_interleave(b)).window(ax, ax)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_interleave_constant_matrix_symbol():
    rng = np.random.default_rng(11)
    blocks = {k: crandn(rng, 2, 2) for k in (-1, 0, 1)}
    op = BlockBandOperator(2, {k: cf.Constant(v) for k, v in blocks.items()})
    j = block_interleave(op)
    assert all(isinstance(c, (cf.Constant, cf.Periodic)) for c in j.diagonals.values())
