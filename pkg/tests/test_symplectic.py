import math

import numpy as np
import pytest

from gausschain.errors import ValidationError
from gausschain.sampling import random_orthogonal_symplectic, random_state, random_symplectic
from gausschain.symplectic import (
    euler_decompose,
    is_symplectic,
    rotation,
    squeezer,
    squeezer_angled,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_inverse,
    two_mode_squeezer,
    williamson,
)

SQRT2 = math.sqrt(2.0)


def test_symplectic_form_structure():
    for n in (1, 2, 3):
        sig = symplectic_form(n)
        assert np.array_equal(sig, -sig.T)
        assert np.array_equal(sig @ sig, -np.eye(2 * n))


def test_symplectic_form_rejects_bad_mode_counts():
    with pytest.raises(ValidationError):
        symplectic_form(0)
    with pytest.raises(ValidationError):
        symplectic_form(9)  # above the supported cap


def test_rotation_spot_values():
    assert np.array_equal(rotation(0.0), np.eye(2))
    np.testing.assert_allclose(rotation(math.pi / 2), [[0, 1], [-1, 0]], atol=1e-15)
    quarter = rotation(math.pi / 4)
    np.testing.assert_allclose(np.abs(quarter), np.full((2, 2), 1 / SQRT2), atol=1e-15)
    sig = symplectic_form(1)
    np.testing.assert_allclose(quarter.T @ sig @ quarter, sig, atol=1e-15)


def test_rotation_additivity(rng):
    for _ in range(50):
        a, b = rng.uniform(-10, 10, size=2)
        np.testing.assert_allclose(rotation(a) @ rotation(b), rotation(a + b), atol=1e-12)


def test_rotation_rejects_non_finite():
    with pytest.raises(ValidationError):
        rotation(math.inf)


def test_squeezer_spot_values():
    assert np.array_equal(squeezer(1.0), np.eye(2))
    s2 = squeezer(2.0)
    np.testing.assert_allclose(np.diag(s2), [SQRT2 + 1, SQRT2 - 1], rtol=1e-15)
    assert abs(np.linalg.det(s2) - 1.0) < 1e-15
    s5 = squeezer(5.0)
    sig = symplectic_form(1)
    np.testing.assert_allclose(s5.T @ sig @ s5, sig, atol=1e-14)


def test_squeezer_rejects_gain_below_one():
    with pytest.raises(ValidationError):
        squeezer(0.5)


def test_squeezer_angled():
    np.testing.assert_allclose(squeezer_angled(3.0, 0.0), squeezer(3.0), atol=1e-15)
    np.testing.assert_allclose(squeezer_angled(1.0, 0.7), np.eye(2), atol=1e-15)
    # a quarter-turn angle swaps the squeezed and stretched quadratures
    np.testing.assert_allclose(
        squeezer_angled(2.0, math.pi / 2), np.diag([SQRT2 - 1, SQRT2 + 1]), atol=1e-14
    )


def test_symplectic_inverse_matches_numpy(rng):
    m = random_symplectic(rng, 2)
    np.testing.assert_allclose(symplectic_inverse(m), np.linalg.inv(m), atol=1e-10)


def test_euler_identity():
    factors = euler_decompose(np.eye(2))
    np.testing.assert_allclose(factors.squeeze, [1.0])
    np.testing.assert_allclose(factors.reconstruct(), np.eye(2), atol=1e-14)


def test_euler_pure_squeezer():
    factors = euler_decompose(squeezer(2.0))
    np.testing.assert_allclose(factors.squeeze, [SQRT2 + 1], rtol=1e-12)
    np.testing.assert_allclose(factors.reconstruct(), squeezer(2.0), atol=1e-13)


def test_euler_composite_round_trip():
    m = rotation(0.3) @ squeezer(3.0) @ rotation(1.1)
    factors = euler_decompose(m)
    assert np.linalg.norm(factors.reconstruct() - m) <= 1e-10 * np.linalg.norm(m)


@pytest.mark.parametrize("n", [1, 2])
def test_euler_factor_properties(rng, n):
    sig = symplectic_form(n)
    for _ in range(20):
        m = random_symplectic(rng, n)
        f = euler_decompose(m)
        for b in (f.passive_left, f.passive_right):
            np.testing.assert_allclose(b.T @ b, np.eye(2 * n), atol=1e-12)
            np.testing.assert_allclose(b.T @ sig @ b, sig, atol=1e-12)
        assert np.all(f.squeeze >= 1.0 - 1e-12)
        assert np.all(np.diff(f.squeeze) <= 1e-12)  # sorted descending
        assert np.linalg.norm(f.reconstruct() - m) <= 1e-10 * np.linalg.norm(m)


def test_euler_handles_pure_rotations(rng):
    # every singular value is 1: the degenerate pairing branch
    for n in (1, 2):
        m = random_orthogonal_symplectic(rng, n)
        f = euler_decompose(m)
        np.testing.assert_allclose(f.squeeze, np.ones(n), atol=1e-12)
        np.testing.assert_allclose(f.reconstruct(), m, atol=1e-12)


def test_euler_rejects_non_symplectic():
    with pytest.raises(ValidationError):
        euler_decompose(np.diag([2.0, 1.0]))


def test_williamson_vacuum():
    form = williamson(0.5 * np.eye(4))
    np.testing.assert_allclose(form.eigenvalues, [0.5, 0.5])
    assert is_symplectic(form.transform, tol=1e-12)


def test_williamson_squeezed_vacuum():
    gamma = np.diag([1.0, 0.25])
    form = williamson(gamma)
    np.testing.assert_allclose(form.eigenvalues, [0.5], rtol=1e-12)
    np.testing.assert_allclose(np.abs(form.transform), np.diag([1 / SQRT2, SQRT2]), atol=1e-12)
    np.testing.assert_allclose(form.transform.T @ gamma @ form.transform, 0.5 * np.eye(2), atol=1e-12)


def test_williamson_construct_then_recover(rng):
    m0 = random_symplectic(rng, 2)
    gamma = 0.8 * (m0.T @ m0)
    form = williamson(0.5 * (gamma + gamma.T))
    np.testing.assert_allclose(form.eigenvalues, [0.8, 0.8], atol=1e-9)


@pytest.mark.parametrize("n", [1, 2])
def test_williamson_diagonalizes_random_covariances(rng, n):
    for _ in range(20):
        cov = random_state(rng, n).cov
        form = williamson(cov)
        diag = form.transform.T @ cov @ form.transform
        assert np.linalg.norm(diag - form.diagonal) <= 1e-9 * np.linalg.norm(cov)
        assert np.all(form.eigenvalues > 0)
        assert np.all(np.diff(form.eigenvalues) <= 1e-12)


def test_physical_covariances_have_spectrum_above_half(rng):
    for _ in range(30):
        cov = random_state(rng, 2).cov
        assert symplectic_eigenvalues(cov)[-1] >= 0.5 - 1e-10


def test_williamson_rejects_bad_input():
    with pytest.raises(ValidationError):
        williamson(np.diag([1.0, -1.0]))
    with pytest.raises(ValidationError):
        williamson(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_two_mode_squeezer_is_symplectic():
    assert is_symplectic(two_mode_squeezer(1.3), tol=1e-12)
