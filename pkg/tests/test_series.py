import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnlab.sequences import DoubleIndexSeq
from mnlab.series import (
    AtomSpec,
    PowerSeries,
    SignPattern,
    atom_center,
    atom_centers,
    atom_function,
    atom_threshold,
    cauchy_product,
    derivative,
    evaluate_on_circle,
    floor_e,
    lacunary_series,
    min_separation,
    primitive,
    rademacher_combination,
)
from mnlab.weights import StandardWeight, TabulatedWeight

W0 = StandardWeight(0.0)

coeff_lists = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=40
)


# -- evaluation --------------------------------------------------------------------


def test_constant_samples():
    s = evaluate_on_circle(PowerSeries.constant(1.0), 0.5, 8)
    assert np.allclose(s.values, 1.0, atol=1e-12)


def test_monomial_rotation():
    s = evaluate_on_circle(PowerSeries.monomial(1), 0.5, 4)
    assert np.allclose(s.values, [0.5, 0.5j, -0.5, -0.5j], atol=1e-12)


def test_geometric_sum_at_zero_angle():
    f = PowerSeries.geometric(64)
    s = evaluate_on_circle(f, 0.9, 256)
    assert abs(s.values[0] - (1 - 0.9**65) / 0.1) < 1e-9


def test_evaluation_rejects_bad_radius():
    with pytest.raises(ValueError):
        evaluate_on_circle(PowerSeries.constant(1), 1.5, 8)
    with pytest.raises(ValueError):
        evaluate_on_circle(PowerSeries.constant(1), -0.1, 8)


def test_evaluation_at_origin_is_constant_term():
    f = PowerSeries([2 - 1j, 3, 4])
    assert f(0) == 2 - 1j


def test_folded_samples_match_pointwise_evaluation():
    rng = np.random.default_rng(1)
    f = PowerSeries(rng.standard_normal(50) + 1j * rng.standard_normal(50))
    s = evaluate_on_circle(f, 0.8, 16)
    assert np.allclose(s.values, f(0.8 * np.exp(1j * s.thetas)), rtol=1e-10, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(coeff_lists, st.floats(0.0, 1.0))
def test_parseval_exactness(c, r):
    f = PowerSeries(c)
    n = 2 * f.degree + 1
    s = evaluate_on_circle(f, r, n)
    quad = np.mean(np.abs(s.values) ** 2)
    exact = np.sum(np.abs(f.coeffs) ** 2 * r ** (2 * np.arange(f.degree + 1)))
    assert abs(quad - exact) <= 1e-10 * max(exact, 1e-300) + 1e-300


# -- calculus ------------------------------------------------------------------------


def test_derivative_examples():
    assert np.allclose(derivative(PowerSeries.monomial(3), 1).coeffs, [0, 0, 3])
    assert derivative(PowerSeries.constant(1), 1).is_zero()
    d2 = derivative(PowerSeries.geometric(10), 2)
    m = np.arange(9)
    assert np.array_equal(d2.coeffs.real, (m + 2) * (m + 1))


def test_derivative_rejects_negative_order():
    with pytest.raises(ValueError):
        derivative(PowerSeries.constant(1), -1)


def test_primitive_examples():
    assert np.allclose(primitive(PowerSeries.constant(1)).coeffs, [0, 1])
    n = 5
    p = primitive(PowerSeries.monomial(n))
    assert p.coeffs[n + 1] == 1 / (n + 1) and np.count_nonzero(p.coeffs) == 1
    assert np.allclose(primitive(PowerSeries([0, 2, 3])).coeffs, [0, 0, 1, 1])


@given(coeff_lists)
def test_primitive_of_derivative_drops_constant(c):
    f = PowerSeries(c)
    back = primitive(derivative(f, 1)).coeffs
    expect = f.coeffs.copy()
    expect[0] = 0
    n = max(back.size, expect.size)
    back = np.pad(back, (0, n - back.size))
    expect = np.pad(expect, (0, n - expect.size))
    assert np.allclose(back, expect, rtol=1e-14, atol=1e-14)


@given(coeff_lists)
def test_derivative_of_primitive_is_identity(c):
    f = PowerSeries(c)
    assert np.allclose(derivative(primitive(f), 1).coeffs, f.coeffs, rtol=1e-14, atol=1e-14)


# -- products ------------------------------------------------------------------------


def test_cauchy_product_examples():
    assert np.allclose(cauchy_product(PowerSeries([1, 1]), PowerSeries([1, -1]), 2).coeffs, [1, 0, -1])
    g = PowerSeries.geometric(3)
    assert np.allclose(cauchy_product(g, g, 2).coeffs, [1, 2, 3])
    g = PowerSeries.geometric(128)
    assert np.array_equal(cauchy_product(g, g, 128).coeffs.real, np.arange(1, 130))


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists)
def test_cauchy_product_commutes_and_matches_samples(a, b):
    f, g = PowerSeries(a), PowerSeries(b)
    fg, gf = cauchy_product(f, g), cauchy_product(g, f)
    assert np.allclose(fg.coeffs, gf.coeffs, rtol=1e-12, atol=1e-9)
    n = 2 * fg.degree + 2
    prod = evaluate_on_circle(f, 0.9, n).values * evaluate_on_circle(g, 0.9, n).values
    scale = max(1.0, np.abs(prod).max())
    assert np.allclose(evaluate_on_circle(fg, 0.9, n).values, prod, rtol=1e-9, atol=1e-9 * scale)


def test_large_product_uses_fft_path_exactly_enough():
    g = PowerSeries.geometric(3000)
    c = cauchy_product(g, g, 3000).coeffs.real
    assert np.allclose(c, np.arange(1, 3002), rtol=1e-9)


# -- lacunary series -------------------------------------------------------------------


def test_lacunary_examples():
    f = lacunary_series(0, 3)
    assert np.allclose(f.coeffs, [0, 1, 1, 0, 1])
    g = lacunary_series(4, 9)
    assert abs(np.sqrt(np.sum(np.abs(g.coeffs) ** 2)) - 3.0) < 1e-12
    idx = np.flatnonzero(g.coeffs)
    assert np.all(idx[1:] / idx[:-1] == 2)


def test_lacunary_budget():
    with pytest.raises(ValueError):
        lacunary_series(20, 10, max_degree=2**20)
    with pytest.raises(ValueError):
        lacunary_series(0, 3, coeffs=[1, 2])


def test_floor_e_convention():
    assert floor_e(3.0) == 3
    assert floor_e(3.7) == 3
    assert floor_e(1 / (1 - 0.9)) == 10
    assert floor_e(1 / (0.95 - 0.9)) == 20


# -- atoms -------------------------------------------------------------------------------


def test_atom_at_origin_is_constant():
    spec = AtomSpec(0.0, 10.0, 2.0, 2.0, W0)
    f = atom_function(spec)
    assert f.degree == 0
    assert abs(f.coeffs[0] - W0.tail(0.0) ** (-1 / 2)) < 1e-12


def test_atom_binomial_coefficients():
    spec = AtomSpec(0.5, 3.0, 2.0, 2.0, W0, normalize=False)
    f = atom_function(spec, 30, check_threshold=False)
    m = np.arange(31)
    expect = (m + 2) * (m + 1) / 2 * 0.5**m
    assert np.allclose(f.coeffs.real, expect, rtol=1e-13)


def test_atom_matches_kernel_formula():
    spec = AtomSpec(0.9, 5.0, 2.0, 2.0, W0)
    f = atom_function(spec, 512, check_threshold=False)
    direct = spec.scale() * (1 - 0.9 * 0.9) ** -5
    assert abs(f(0.9) - direct) < 1e-9 * abs(direct)


def test_atom_threshold_is_enforced():
    thr = atom_threshold(W0, 2.0, 2.0)
    with pytest.raises(ValueError):
        atom_function(AtomSpec(0.5, thr, 2.0, 2.0, W0))
    atom_function(AtomSpec(0.5, thr + 0.5, 2.0, 2.0, W0))


def test_atom_threshold_constant_multiple_invariance():
    a = atom_threshold(W0, 1.0, 2.0)
    b = atom_threshold(TabulatedWeight(((0.0, 3.0), (1.0, 3.0))), 1.0, 2.0)
    assert abs(a - b) < 1e-6


def test_center_grid_is_separated():
    seps = [min_separation(c for _, _, c in atom_centers(2, j_max)) for j_max in range(2, 7)]
    assert min(seps) > 0.05
    # the closest pair sits in the first rings, so the minimum never moves
    assert max(seps) - min(seps) < 1e-12


def test_center_position():
    c = atom_center(2, 1, 0)
    assert abs(abs(c) - 0.25) < 1e-15
    assert abs(np.angle(c) - 2 * math.pi * 0.5 / 8) < 1e-15


# -- Rademacher combinations --------------------------------------------------------------


def _ring_atoms(K, j, M, idx=None):
    n = K ** (j + 2)
    return [AtomSpec(atom_center(K, j, l), M, 2.0, 2.0, W0, (j, l)) for l in (range(n) if idx is None else idx)]


class _Coeffs:
    def __init__(self, values):
        self.values = values

    def __getitem__(self, idx):
        return self.values[idx]

    def indices(self):
        return set(self.values)


class _Signs:
    def __init__(self, values):
        self.values = values

    def __getitem__(self, idx):
        return self.values[idx]

    def indices(self):
        return set(self.values)


def test_single_atom_combination():
    M = atom_threshold(W0, 2.0, 2.0) + 1
    spec = AtomSpec(0.3, M, 2.0, 2.0, W0, (1, 0))
    f = rademacher_combination([spec], _Coeffs({(1, 0): 1.0}), _Signs({(1, 0): 1}))
    assert np.allclose(f.coeffs, atom_function(spec).coeffs, rtol=1e-15)


def test_cancelling_pair():
    M = atom_threshold(W0, 2.0, 2.0) + 1
    a = AtomSpec(0.3, M, 2.0, 2.0, W0, (1, 0))
    b = AtomSpec(0.3, M, 2.0, 2.0, W0, (1, 1))
    f = rademacher_combination([a, b], _Coeffs({(1, 0): 0.7, (1, 1): 0.7}), _Signs({(1, 0): 1, (1, 1): -1}))
    assert f.is_zero()


def test_ring_combination_at_origin():
    K, j = 2, 2
    M = atom_threshold(W0, 2.0, 2.0) + 1
    atoms = _ring_atoms(K, j, M)
    n = K ** (j + 2)
    signs = SignPattern.random([K**3, n], seed=7)
    # coefficients vanish on ring 1, so only the j = 2 atoms contribute
    a = DoubleIndexSeq(K, (np.zeros(K**3), np.ones(n)))
    ring1 = _ring_atoms(K, 1, M)
    f = rademacher_combination(ring1 + atoms, a, signs)
    expect = sum(signs[(j, l)] * atom_function(atoms[l]).coeffs[0] for l in range(n))
    assert abs(f(0) - expect) < 1e-12


def test_mismatched_indices_rejected():
    M = atom_threshold(W0, 2.0, 2.0) + 1
    spec = AtomSpec(0.3, M, 2.0, 2.0, W0, (1, 0))
    with pytest.raises(ValueError):
        rademacher_combination([spec], _Coeffs({(1, 1): 1.0}), _Signs({(1, 0): 1}))


def test_sign_pattern_is_seeded():
    a = SignPattern.random([8, 16], seed=3)
    b = SignPattern.random([8, 16], seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a.rows, b.rows))
    assert set(np.concatenate(a.rows).tolist()) <= {-1, 1}
