import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from esavcpd.linalg3 import SMALL_ANGLE, rot_exp_apply, skew


def series(m, v, terms=30):
    out = np.array(v, dtype=float)
    term = out.copy()
    for k in range(1, terms + 1):
        term = m @ term / k
        out = out + term
    return out


vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3).map(np.array)


def test_skew_examples():
    npt.assert_array_equal(skew([0, 0, 1]) @ [1, 0, 0], [0, -1, 0])
    npt.assert_array_equal(skew([1, 2, 3]), [[0, 3, -2], [-3, 0, 1], [2, -1, 0]])
    npt.assert_array_equal(skew([0, 0, 0]), np.zeros((3, 3)))


@given(vec, vec)
def test_skew_is_cross_product_and_antisymmetric(b, v):
    m = skew(b)
    npt.assert_array_equal(m.T, -m)
    npt.assert_allclose(m @ v, np.cross(v, b), atol=1e-13)


def test_rotation_examples():
    v = np.array([0.3, -1.2, 2.0])
    npt.assert_array_equal(rot_exp_apply([0, 0, 0], 3.7, v), v)
    b = np.array([0.0, 0.0, 1.0])
    oracle = series(np.pi / 2 * skew(b), [1, 0, 0])
    npt.assert_allclose(oracle, [0, -1, 0], atol=1e-15)
    npt.assert_allclose(rot_exp_apply(b, np.pi / 2, [1, 0, 0]), oracle, atol=1e-15)


@settings(max_examples=300)
@given(vec, st.floats(-10, 10), vec)
def test_rotation_preserves_norm(b, t, v):
    got = rot_exp_apply(b, t, v)
    assert abs(np.linalg.norm(got) - np.linalg.norm(v)) <= 1e-14 * max(1.0, np.linalg.norm(v))


@settings(max_examples=200)
@given(vec, st.floats(-5, 5), st.floats(-5, 5), vec)
def test_group_property(b, t1, t2, v):
    two = rot_exp_apply(b, t2, rot_exp_apply(b, t1, v))
    npt.assert_allclose(two, rot_exp_apply(b, t1 + t2, v), atol=1e-12 * max(1.0, np.linalg.norm(v)))


@settings(max_examples=200)
@given(vec, st.floats(-3, 3), vec)
def test_derivative_matches_linear_ode(b, t, v):
    d = 1e-7
    fd = (rot_exp_apply(b, t + d, v) - rot_exp_apply(b, t, v)) / d
    exact = skew(b) @ rot_exp_apply(b, t, v)
    scale = max(1.0, np.linalg.norm(b) ** 2 * np.linalg.norm(v))
    assert np.max(np.abs(fd - exact)) <= 1e-6 * scale


def test_agrees_with_series_oracle(rng):
    worst = 0.0
    for _ in range(2000):
        b = rng.normal(size=3)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        t = rng.uniform(-5, 5) / np.linalg.norm(b)
        worst = max(worst, np.max(np.abs(rot_exp_apply(b, t, v) - series(t * skew(b), v))))
    assert worst <= 1e-12


@pytest.mark.parametrize("angle", [SMALL_ANGLE * 0.5, SMALL_ANGLE * 0.999, SMALL_ANGLE * 1.001, 1e-6, 1e-3])
def test_small_angle_branch_is_accurate(angle):
    b = np.array([0.2, -0.5, 0.8])
    t = angle / np.linalg.norm(b)
    v = np.array([1.0, 2.0, -0.5])
    npt.assert_allclose(rot_exp_apply(b, t, v), expm(t * skew(b)) @ v, rtol=0, atol=1e-15)
