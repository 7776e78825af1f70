import math

import numpy as np
import pytest
from scipy.integrate import quad

from krylov.operators import (
    WeightSequence,
    convolution_coefficient,
    make_bilateral_weighted_shift,
    make_dense_operator,
    make_fourier_convolution,
    make_left_shift,
    make_masked_multiplication,
    make_multiplication,
    make_right_shift,
    make_volterra,
    make_weighted_right_shift,
)
from krylov.spaces import basis_vector, vector

RECIP5 = WeightSequence.reciprocal(5.0)


def zoo():
    return [
        make_multiplication(RECIP5, 60),
        make_masked_multiplication(RECIP5, {3, 6, 9}, 60),
        make_right_shift(40),
        make_left_shift(40),
        make_weighted_right_shift(RECIP5, 60),
        make_bilateral_weighted_shift(RECIP5, 41),
        make_volterra(128),
        make_fourier_convolution(8),
        make_dense_operator([[1.0, np.cos(0.7)], [0.0, np.sin(0.7)]]),
    ]


@pytest.fixture(params=range(9), ids=lambda i: zoo()[i].name)
def operator(request):
    return zoo()[request.param]


def random_pair(space, rng):
    u = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    v = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return u, v


def test_adjoint_pairing(operator, rng):
    space = operator.space
    for _ in range(100):
        u, v = random_pair(space, rng)
        lhs = space.inner(u, operator.apply_values(v))
        rhs = space.inner(operator.adjoint_values(u), v)
        assert abs(lhs - rhs) <= 1e-10 * space.norm(u) * space.norm(v)


def test_linearity(operator, rng):
    space = operator.space
    for _ in range(20):
        u, v = random_pair(space, rng)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        beta = complex(rng.standard_normal(), rng.standard_normal())
        for action in (operator.apply_values, operator.adjoint_values):
            lhs = action(alpha * u + beta * v)
            rhs = alpha * action(u) + beta * action(v)
            scale = space.norm(lhs) + space.norm(u) + space.norm(v)
            assert space.norm(lhs - rhs) <= 1e-12 * scale


def test_self_adjoint_flag_means_equal_actions(operator, rng):
    if not operator.metadata.is_self_adjoint:
        pytest.skip("not flagged self-adjoint")
    space = operator.space
    for _ in range(10):
        u, _ = random_pair(space, rng)
        diff = operator.apply_values(u) - operator.adjoint_values(u)
        assert space.norm(diff) <= 1e-12 * space.norm(u)


# -- multiplication ----------------------------------------------------------

def test_multiplication_scales_first_basis_vector():
    op = make_multiplication(RECIP5, 30)
    out = op.apply(basis_vector(op.space, 1))
    assert out.values[0] == pytest.approx(0.2)
    assert np.count_nonzero(out.values) == 1


def test_multiplication_unit_weights_is_identity(rng):
    op = make_multiplication(WeightSequence.explicit(np.ones(25)), 25)
    u = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    assert np.allclose(op.apply_values(u), u)


def test_multiplication_norm_is_sup_of_weights():
    op = make_multiplication(RECIP5, 100)
    assert op.metadata.operator_norm == pytest.approx(0.2)
    assert op.metadata.is_self_adjoint and op.metadata.is_normal


def test_multiplication_rejects_nonpositive_dimension():
    with pytest.raises(ValueError):
        make_multiplication(RECIP5, 0)


# -- masked multiplication ---------------------------------------------------

def test_masked_multiplication_kills_masked_modes():
    op = make_masked_multiplication(RECIP5, {3, 6, 9}, 30)
    assert op.apply(basis_vector(op.space, 3)).norm() == 0.0
    out = op.apply(basis_vector(op.space, 4))
    assert out.values[3] == pytest.approx(1 / 20)
    assert op.metadata.kernel_indices == frozenset({3, 6, 9})


def test_masked_multiplication_empty_mask_matches_plain(rng):
    masked = make_masked_multiplication(RECIP5, set(), 30)
    plain = make_multiplication(RECIP5, 30)
    u = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    assert np.array_equal(masked.apply_values(u), plain.apply_values(u))


def test_masked_multiplication_rejects_out_of_range_index():
    with pytest.raises(ValueError):
        make_masked_multiplication(RECIP5, {0}, 30)
    with pytest.raises(ValueError):
        make_masked_multiplication(RECIP5, {31}, 30)


# -- shifts -------------------------------------------------------------------

def test_right_shift_moves_basis_up():
    op = make_right_shift(10)
    out = op.apply(basis_vector(op.space, 1))
    assert out.values[1] == 1.0 and abs(out.values).sum() == 1.0


def test_left_shift_kernel_vector():
    op = make_left_shift(10)
    assert op.apply(basis_vector(op.space, 1)).norm() == 0.0
    assert op.metadata.kernel_indices == frozenset({1})


def test_left_inverts_right_inside_truncation(rng):
    d = 12
    right, left = make_right_shift(d), make_left_shift(d)
    v = np.zeros(d, dtype=complex)
    v[: d - 1] = rng.standard_normal(d - 1)
    assert np.allclose(left.apply_values(right.apply_values(v)), v, atol=1e-15)


def test_weighted_right_shift_action_and_norm():
    op = make_weighted_right_shift(RECIP5, 30)
    out = op.apply(basis_vector(op.space, 1))
    assert out.values[1] == pytest.approx(0.2)
    assert op.metadata.operator_norm == pytest.approx(0.2)
    assert op.apply(vector(op.space, np.zeros(30))).norm() == 0.0


def test_weighted_shift_factorization_away_from_edge():
    # adjoint-after-forward acts as multiplication by the squared weights
    d = 30
    op = make_weighted_right_shift(RECIP5, d)
    w = RECIP5.first(d - 1)
    for n in range(1, d - 1):
        e = basis_vector(op.space, n)
        back = op.adjoint_apply(op.apply(e))
        assert abs(back.values[n - 1] - w[n - 1] ** 2) <= 1e-12
        assert np.abs(np.delete(back.values, n - 1)).max() <= 1e-15


def test_weighted_right_shift_rejects_nondecreasing_weights():
    with pytest.raises(ValueError):
        make_weighted_right_shift(WeightSequence.explicit([0.5, 0.5, 0.1]), 4)


# -- bilateral shift ----------------------------------------------------------

def test_bilateral_shift_moves_modes_with_absolute_value_weights():
    op = make_bilateral_weighted_shift(RECIP5, 21)
    space = op.space
    out = op.apply(basis_vector(space, 0))
    assert out.values[space.slot_of(1)] == pytest.approx(0.2)  # sigma_0 = 1/5
    out = op.apply(basis_vector(space, -1))
    assert out.values[space.slot_of(0)] == pytest.approx(0.1)  # sigma_1 = 1/10


def test_bilateral_shift_rejects_even_dimension():
    with pytest.raises(ValueError):
        make_bilateral_weighted_shift(RECIP5, 20)


def test_bilateral_factorizations():
    # adjoint(forward(e_n)) multiplies by sigma_{|n|}^2 whenever mode n+1
    # stays inside the window; forward(adjoint(e_m)) by sigma_{|m-1|}^2.
    op = make_bilateral_weighted_shift(RECIP5, 21)
    space = op.space
    half = 10
    sigma = RECIP5.first(half + 1)
    for n in range(-half, half):
        e = basis_vector(space, n)
        out = op.adjoint_apply(op.apply(e))
        assert out.values[space.slot_of(n)] == pytest.approx(sigma[abs(n)] ** 2)
    for m in range(-half + 1, half + 1):
        e = basis_vector(space, m)
        out = op.apply(op.adjoint_apply(e))
        assert out.values[space.slot_of(m)] == pytest.approx(sigma[abs(m - 1)] ** 2)


# -- Volterra ------------------------------------------------------------------

def test_volterra_integrates_constants_exactly():
    op = make_volterra(64)
    out = op.apply(vector(op.space, np.ones(64)))
    assert np.allclose(out.values.real, op.space.grid, atol=1e-15)


def test_volterra_integrates_linear_function():
    op = make_volterra(2048)
    x = op.space.grid
    out = op.apply(vector(op.space, x))
    assert np.abs(out.values.real - x**2 / 2).max() <= 1e-12  # trapezoid-exact


def test_volterra_rejects_coarse_grids():
    with pytest.raises(ValueError):
        make_volterra(15)


@pytest.mark.parametrize("f", [
    lambda x: np.ones_like(x),
    lambda x: x,
    lambda x: x**2,
    lambda x: np.cos(3 * x),
    lambda x: np.exp(x),
])
def test_volterra_plus_adjoint_is_rank_one_projection(f):
    # quadratic form of V + V* against the squared mean, O(M^-2) accurate
    m = 2048
    op = make_volterra(m)
    space = op.space
    fv = f(space.grid).astype(complex)
    form = space.inner(fv, op.apply_values(fv) + op.adjoint_values(fv)).real
    target = abs(space.inner(np.ones(m, dtype=complex), fv)) ** 2
    fmax = np.abs(fv).max()
    assert abs(form - target) <= 3.0 / m**2 * (1.0 + fmax**2)


def test_volterra_singular_triple():
    m = 2048
    op = make_volterra(m)
    x = op.space.grid
    phi0 = np.sqrt(2) * np.cos(np.pi * x / 2)
    psi0 = np.sqrt(2) * np.sin(np.pi * x / 2)
    val = op.space.inner(psi0.astype(complex), op.apply_values(phi0.astype(complex)))
    assert abs(val.real - 2 / np.pi) <= 5.0 / m**2 and abs(val.imag) == 0.0


def test_volterra_power_formula():
    # n-fold application against direct quadrature of the closed-form kernel
    m = 2048
    op = make_volterra(m)
    x = op.space.grid
    probe = np.r_[np.arange(0, m, 8), m - 1]
    v = np.ones(m, dtype=complex)
    for n in range(1, 6):
        v = op.apply_values(v)
        for i in probe:
            y = x[: i + 1]
            closed = np.trapezoid((x[i] - y) ** (n - 1) / math.factorial(n - 1), y)
            assert abs(v[i].real - closed) <= 1e-6


# -- Fourier-coefficient convolution -------------------------------------------

def test_convolution_kernel_mode_is_annihilated():
    op = make_fourier_convolution(6)
    assert op.apply(basis_vector(op.space, 0)).norm() == 0.0
    assert op.metadata.kernel_indices == frozenset({0})
    assert op.metadata.is_normal and not op.metadata.is_self_adjoint


def test_convolution_first_mode_multiplier():
    op = make_fourier_convolution(6)
    out = op.apply(basis_vector(op.space, 1))
    expected = 1 / (1 + 4j * np.pi - 3 * np.pi**2)
    assert out.values[op.space.slot_of(1)] == pytest.approx(expected)


def test_convolution_moduli_are_even_in_mode_number():
    for n in range(1, 11):
        assert abs(convolution_coefficient(n)) == pytest.approx(
            abs(convolution_coefficient(-n)))


def test_convolution_coefficients_match_kernel_integrals():
    # independent oracle: Fourier integrals of the closed-form kernel function
    def kernel(x):
        return (math.e * math.sin(math.pi * x) / ((1 + math.e) * math.pi * math.exp(x))
                - 1 / (1 + math.pi**2))

    for n in (0, 1, -1, 2, 5):
        re = quad(lambda x: kernel(x) * math.cos(2 * math.pi * n * x), 0, 1, limit=200)[0]
        im = quad(lambda x: -kernel(x) * math.sin(2 * math.pi * n * x), 0, 1, limit=200)[0]
        assert abs(complex(re, im) - convolution_coefficient(n)) <= 1e-12


# -- dense wrapper --------------------------------------------------------------

def test_dense_operator_adjoint_and_metadata(rng):
    mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    op = make_dense_operator(mat)
    u, v = rng.standard_normal(4) + 0j, rng.standard_normal(4) + 0j
    lhs = op.space.inner(u, op.apply_values(v))
    rhs = op.space.inner(op.adjoint_values(u), v)
    assert abs(lhs - rhs) <= 1e-12
    herm = mat + mat.conj().T
    assert make_dense_operator(herm).metadata.is_self_adjoint


def test_dense_operator_rejects_non_square():
    with pytest.raises(ValueError):
        make_dense_operator(np.ones((2, 3)))


# -- left shift orbit density (series identity) ---------------------------------

@pytest.mark.parametrize("k", [1, 3, 5])
def test_left_shift_orbit_series_identity(k):
    # factorial-coefficient datum: k! L^k g approaches the first basis vector,
    # with squared distance equal to the tail series of squared factorial ratios
    d = 64
    op = make_left_shift(d)
    fact = np.cumprod(np.r_[1.0, np.arange(1.0, d)])
    g = vector(op.space, 1.0 / fact)
    v = g
    for _ in range(k):
        v = op.apply(v)
    shifted = math.factorial(k) * v.values
    shifted[0] -= 1.0
    computed = float(np.linalg.norm(shifted) ** 2)
    series = sum((math.factorial(k) / math.factorial(n + k)) ** 2
                 for n in range(1, 200))
    assert abs(computed - series) <= 1e-12


# -- weight sequences ------------------------------------------------------------

def test_reciprocal_weights_values():
    w = WeightSequence.reciprocal(5.0).first(4)
    assert np.allclose(w, [1 / 5, 1 / 10, 1 / 15, 1 / 20])


def test_explicit_weights_run_out():
    ws = WeightSequence.explicit([0.3, 0.2, 0.1])
    with pytest.raises(ValueError):
        ws.first(4)


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        WeightSequence.explicit([0.3, 0.0])
    with pytest.raises(ValueError):
        WeightSequence.reciprocal(0.0)
