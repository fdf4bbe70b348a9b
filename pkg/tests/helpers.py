"""Random test objects shared by the test modules."""

import numpy as np

from limop import coefficients as cf
from limop.band_ops import BlockBandOperator
from limop.exceptions import LimopError
from limop.limit_ops import certify_invertibility, limit_spectrum, periodic_symbol
from limop.symbols import LaurentSymbol, det_symbol

# roots this far from the circle give kernel vectors decaying at least like 0.8^n
ROOT_GAP = (0.8, 1.25)
# grouped symbols decay per period, so members need a wider gap
MEMBER_GAP = (0.55, 1 / 0.55)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def min_modulus(sym, n=4096):
    theta = 2 * np.pi * np.arange(n) / n
    vals = sym.at_angles(theta)
    if sym.block_dim == 1:
        return float(np.min(np.abs(vals[:, 0, 0])))
    return float(np.min(np.linalg.svd(vals, compute_uv=False)[:, -1]))


def random_coefficient_symbol(rng, max_band=6, floor=0.1):
    """Raw random Laurent coefficients, rejected until ``min |a| > floor``."""
    while True:
        m, s = rng.integers(0, max_band + 1, size=2)
        coef = crandn(rng, m + s + 1)
        sym = LaurentSymbol(coef[:, None, None], int(m))
        if min_modulus(sym) > floor:
            return sym


def random_root_symbol(rng, max_degree=6):
    """Scalar symbol ``c t^{-m} prod (t - r_j)`` with roots kept off an annulus around the circle."""
    degree = int(rng.integers(0, max_degree + 1))
    roots = []
    for _ in range(degree):
        if rng.random() < 0.5:
            radius = rng.uniform(0.1, ROOT_GAP[0])
        else:
            radius = rng.uniform(ROOT_GAP[1], 3.0)
        roots.append(radius * np.exp(2j * np.pi * rng.random()))
    poly = np.poly(roots)[::-1] if roots else np.array([1.0 + 0j])
    poly = poly * np.exp(2j * np.pi * rng.random()) / np.max(np.abs(poly))
    m = int(rng.integers(0, degree + 1))
    return LaurentSymbol(poly[:, None, None], m)


def det_roots_clear(sym, gap=ROOT_GAP):
    det = det_symbol(sym)
    c = det.coefficients[:, 0, 0]
    nz = np.flatnonzero(np.abs(c) > 1e-12 * np.max(np.abs(c)))
    c = c[nz[0]: nz[-1] + 1]
    roots = np.roots(c[::-1]) if len(c) > 1 else np.zeros(0)
    mod = np.abs(roots)
    return not np.any((mod > gap[0]) & (mod < gap[1]))


def random_block_symbol(rng, max_dim=3, max_band=2):
    """Random block symbol whose determinant has no roots near the circle."""
    while True:
        d = int(rng.integers(2, max_dim + 1))
        m, s = (int(v) for v in rng.integers(0, max_band + 1, size=2))
        coefs = {k: crandn(rng, d, d) * rng.uniform(0.2, 1.0) for k in range(-m, s + 1)}
        # random monomial twists make nonzero partial indices likely
        twist = LaurentSymbol.diag(*(LaurentSymbol.monomial(int(k))
                                     for k in rng.integers(-1, 2, size=d)))
        sym = LaurentSymbol.from_dict(coefs, d) * twist
        if det_roots_clear(sym) and min_modulus(sym) > 0.05:
            return sym


def _random_matrix(rng, d, scale):
    return crandn(rng, d, d) * scale / np.sqrt(2 * d)


def random_coefficient(rng, d, scale, period=2):
    """One diagonal mixing stabilizing, periodic and finitely supported parts."""
    kinds = rng.choice(["stabilizing", "periodic", "finite", "mixed"])
    profile = str(rng.choice(["step", "linear", "cubic"]))
    stab = cf.Stabilizing(_random_matrix(rng, d, scale), _random_matrix(rng, d, scale), profile,
                          int(rng.integers(1, 4)), int(rng.integers(-4, 5)))
    per = cf.Periodic([_random_matrix(rng, d, scale) for _ in range(period)])
    fin = cf.FiniteSupport(int(rng.integers(-6, 4)),
                           [_random_matrix(rng, d, scale) for _ in range(int(rng.integers(1, 5)))])
    if kinds == "stabilizing":
        return cf.Sum((stab, fin))
    if kinds == "periodic":
        return cf.Sum((per, fin))
    if kinds == "finite":
        return fin
    return cf.Sum((stab, per, fin))


def member_symbols_clear(op):
    for member in limit_spectrum(op).members():
        base = member.operator if member.side == "plus" else member.operator.reflected()
        if not det_roots_clear(periodic_symbol(base, member.period), MEMBER_GAP):
            return False
    return True


def random_fredholm_operator(rng, min_margin=0.05):
    """``I + K`` with mixed diagonals, certified Fredholm and oracle friendly."""
    while True:
        d = int(rng.choice([1, 1, 2]))
        offsets = rng.choice([-2, -1, 0, 1, 2], size=int(rng.integers(1, 4)), replace=False)
        period = int(rng.integers(2, 4))
        diags = {int(k): random_coefficient(rng, d, rng.uniform(0.5, 2.5), period)
                 for k in offsets}
        op = BlockBandOperator(d, diags, 1.0)
        try:
            cert = certify_invertibility(limit_spectrum(op))
        except LimopError:
            continue
        if cert.invertible and cert.uniform_margin > min_margin and member_symbols_clear(op):
            return op
