import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inflowqw.errors import ConfigError, NumericError
from inflowqw.model import ModelConfig, evolve
from inflowqw.reduced import (
    Epsilon,
    ReducedState,
    b_vector,
    class_weights,
    iterate,
    nu_marked,
    reduced_series,
    reduced_step,
    spectral_radius,
    stationary_state,
    t_matrix,
    unnormalized_step,
    unperturbed_matrix,
)


def test_epsilon_from_n():
    e = Epsilon.from_n(100)
    assert float(e) == pytest.approx(math.sqrt(0.02), rel=1e-15)
    assert e.value**2 * e.n_vertices == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ConfigError):
        Epsilon.from_n(2)
    with pytest.raises(ConfigError):
        Epsilon.from_value(0.9)


def test_t_matrix_n100():
    tm = t_matrix(Epsilon.from_n(100))
    assert tm[0, 1] == pytest.approx(-0.98, abs=1e-15)
    assert tm[1, 0] == pytest.approx(-0.98, abs=1e-15)
    assert tm[2, 2] == pytest.approx(0.96, abs=1e-15)
    assert tm[0, 2] == pytest.approx(math.sqrt(0.04 * 0.98), abs=1e-15)
    assert tm[0, 2] == pytest.approx(0.19799, abs=1e-5)


@given(st.floats(0.0, math.sqrt(2 / 3)))
def test_t_matrix_zero_entries(e):
    tm = t_matrix(e)
    assert tm[1, 2] == 0 and tm[0, 0] == 0 and tm[1, 1] == 0 and tm[2, 0] == 0


def test_unperturbed_matrix_spectrum():
    t0 = unperturbed_matrix()
    np.testing.assert_array_equal(t0, [[0, -1, 0], [-1, 0, 0], [0, 0, 1]])
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(t0)), [-1, 1, 1], atol=1e-15)


def test_b_vector_values():
    np.testing.assert_array_equal(b_vector(0.0), [0.0, 0.0, 2.0])
    b = b_vector(Epsilon.from_n(100))
    assert b[0] == pytest.approx(math.sqrt(0.02) * math.sqrt(1.98), rel=1e-15)
    assert b[0] == pytest.approx(0.198997, abs=1e-6)
    assert b[2] == pytest.approx(math.sqrt(4 - 0.12 + 0.0008), rel=1e-15)
    assert b[2] == pytest.approx(1.969975, abs=1e-6)


@given(st.floats(0.0, math.sqrt(2 / 3)))
def test_b_vector_antisymmetric_pair(e):
    b = b_vector(e)
    assert b[0] == -b[1]


def test_first_reduced_step_matches_simulator():
    eps = Epsilon.from_n(100)
    s1 = reduced_step(ReducedState(np.zeros(3)), eps)
    assert s1.time == 1
    np.testing.assert_array_equal(s1.alpha, b_vector(eps))
    assert s1.alpha[0] / math.sqrt(99) == pytest.approx(0.02, abs=1e-16)


def test_unnormalized_from_rest():
    n = 17
    assert unnormalized_step(0, 0, 0, n) == pytest.approx((2 / n, -2 / n, 2 / n))
    with pytest.raises(ConfigError):
        unnormalized_step(0, 0, 0, 2)


@pytest.mark.parametrize("n", [3, 10, 250])
def test_conjugation_identity(n):
    w = class_weights(n)
    rng = np.random.default_rng(n)
    eps = Epsilon.from_n(n)
    for _ in range(5):
        alpha = rng.normal(size=3)
        raw = unnormalized_step(*(alpha / w), n)
        np.testing.assert_allclose(w * np.array(raw), reduced_step(ReducedState(alpha), eps).alpha,
                                   atol=1e-12)


@pytest.mark.parametrize("n", [3, 10, 100])
def test_matches_full_simulator(n):
    t_max = 3 * n
    full = evolve(ModelConfig(n, 0, t_max))
    red = reduced_series(n, t_max)
    for col in ("a", "b", "c"):
        np.testing.assert_allclose(getattr(red, col), getattr(full, col), atol=1e-10, rtol=0)
    np.testing.assert_allclose(red.nu_marked, full.nu_marked, atol=1e-10, equal_nan=True)
    # norm bridging: |alpha_t|^2 equals the summed vertex weights
    np.testing.assert_allclose(red.norm_kn**2, full.norm_kn**2, rtol=1e-10, atol=1e-10)


def test_ten_steps_n100():
    full = evolve(ModelConfig(100, 0, 10))
    alpha = iterate(Epsilon.from_n(100), 10)
    np.testing.assert_allclose(alpha, full.alpha(), atol=1e-12)


def test_reduced_states_are_real():
    assert iterate(0.3, 50).dtype == np.float64


@pytest.mark.parametrize("n", [3, 4, 10, 100, 10_000])
def test_fixed_point_residual(n):
    eps = Epsilon.from_n(n)
    a = stationary_state(eps).alpha
    res = np.linalg.norm(t_matrix(eps) @ a + b_vector(eps) - a)
    assert res < 1e-12 * max(1.0, np.linalg.norm(a))


def test_fixed_point_against_long_iteration():
    # 10^6 affine steps via powers of the augmented 4x4 map
    eps = Epsilon.from_n(100)
    aug = np.eye(4)
    aug[:3, :3] = t_matrix(eps)
    aug[:3, 3] = b_vector(eps)
    far = np.linalg.matrix_power(aug, 10**6) @ np.array([0, 0, 0, 1.0])
    np.testing.assert_allclose(far[:3], stationary_state(eps).alpha, atol=1e-10)


def test_stationary_state_closed_form():
    # the fixed point is (sqrt(2 - eps^2)/eps) [1, -1, 0]
    for n in (3, 10, 100, 10_000):
        e = Epsilon.from_n(n).value
        expected = math.sqrt(2 - e * e) / e * np.array([1.0, -1.0, 0.0])
        np.testing.assert_allclose(stationary_state(e).alpha, expected, atol=1e-9 * expected[0])


def test_scaled_fixed_point_limit():
    vals = [e * stationary_state(e).alpha for e in (1e-2, 1e-3, 1e-4)]
    target = np.array([math.sqrt(2), -math.sqrt(2), 0.0])
    errs = [np.linalg.norm(v - target) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-7


def test_no_fixed_point_at_zero():
    with pytest.raises(NumericError, match="unperturbed"):
        stationary_state(0.0)


@settings(max_examples=60)
@given(st.floats(1e-4, math.sqrt(2 / 3)))
def test_spectral_radius_below_one(e):
    assert spectral_radius(e) < 1.0


def test_nu_marked_examples():
    eps = Epsilon.from_n(100)
    b = b_vector(eps)
    assert nu_marked(ReducedState(b)) == pytest.approx(0.0396 / 3.96, abs=1e-15)
    assert nu_marked(ReducedState(np.array([-2.5, 0.0, 0.0]))) == 1.0
    with pytest.raises(NumericError):
        nu_marked(ReducedState(np.zeros(3)))


@pytest.mark.parametrize("n", [3, 10, 100, 1000, 10**6])
def test_stationary_marked_probability_is_half(n):
    assert nu_marked(stationary_state(Epsilon.from_n(n))) == pytest.approx(0.5, abs=1e-12)


def test_reduced_series_layout():
    s = reduced_series(10, 5)
    assert s.method == "reduced" and len(s) == 6
    assert np.isnan(s.nu_marked[0])
    np.testing.assert_allclose(s.nu_marked[1:] + 9 * s.nu_unmarked[1:], 1.0, atol=1e-14)
