"""Tests for Fourier fields, the free propagator and region coefficients."""

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.geodesics import TorusPoint
from src.core.spectral import (
    BallRegion,
    FourierField2D,
    SquareRegion,
    ball_coefficient_table,
    ball_indicator_coeff,
    helmholtz_residual,
    make_region,
    norm_on_ball,
    phase_turns,
    propagate,
    propagation_defect_check,
    region_gram_matrix,
)
from src.utils.validators import ValidationError

PERIOD = 1.0 / (2.0 * math.pi)


def ball_coefficient_by_quadrature(eps, m1, m2):
    # imaginary part vanishes by symmetry of the ball
    value, _ = integrate.dblquad(
        lambda y, x: math.cos(2 * math.pi * (m1 * x + m2 * y)),
        -eps,
        eps,
        lambda x: -math.sqrt(max(eps * eps - x * x, 0.0)),
        lambda x: math.sqrt(max(eps * eps - x * x, 0.0)),
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return value


def norm_on_grid(u, eps, resolution=2048):
    """Masked Riemann sum of |u|^2 over B(0, eps) on a uniform grid."""
    half = int(math.ceil(eps * resolution)) + 1
    x = np.arange(-half, half + 1) / resolution
    ex = np.exp(2j * math.pi * np.outer(u.axis, x))
    values = ex.T @ u.coeffs @ ex
    mask = np.hypot(x[:, None], x[None, :]) <= eps
    return float(np.sum(np.abs(values[mask]) ** 2)) / resolution**2


class TestFourierField:
    def test_shape_validated(self):
        with pytest.raises(ValidationError):
            FourierField2D(2, np.zeros((3, 3)))

    def test_modes_lexicographic(self):
        u = FourierField2D.zeros(1)
        assert u.modes.tolist()[:3] == [[-1, -1], [-1, 0], [-1, 1]]

    def test_coefficients_immutable(self):
        u = FourierField2D.single_mode(2, (1, -1))
        with pytest.raises(ValueError):
            u.coeffs[0, 0] = 1.0

    def test_mode_outside_cutoff(self):
        with pytest.raises(ValidationError):
            FourierField2D.from_modes(1, {(2, 0): 1.0})
        assert FourierField2D.zeros(1).coefficient((5, 5)) == 0j

    def test_arithmetic(self):
        u = FourierField2D.single_mode(1, (1, 0), 2.0)
        v = FourierField2D.single_mode(1, (0, 1), 1j)
        w = 0.5 * (u + v) - v
        assert w.coefficient((1, 0)) == 1.0
        assert w.coefficient((0, 1)) == -0.5j

    def test_mixed_cutoff_rejected(self):
        with pytest.raises(ValidationError):
            FourierField2D.zeros(1) + FourierField2D.zeros(2)

    def test_rows(self, rng):
        u = FourierField2D.random(2, rng)
        v = FourierField2D.from_rows(u.to_rows(), cutoff=2)
        assert np.array_equal(u.coeffs, v.coeffs)

    def test_projection(self, rng):
        u = FourierField2D.random(3, rng)
        pieces = sum(
            (u.project(N) for N in range(19)),
            FourierField2D.zeros(3),
        )
        assert np.allclose(pieces.coeffs, u.coeffs)
        assert set(np.flatnonzero(u.project(5).coeffs.ravel())) == set(
            np.flatnonzero(u.k_sq.ravel() == 5)
        )

    def test_random_normalized(self, rng):
        u = FourierField2D.random(4, rng, max_norm_sq=10, normalize=True)
        assert u.norm() == pytest.approx(1.0)
        assert np.all(u.coeffs[u.k_sq > 10] == 0)


class TestPropagate:
    def test_zero_time_is_identity(self, rng):
        u = FourierField2D.random(5, rng)
        assert np.array_equal(propagate(u, 0.0).coeffs, u.coeffs)

    def test_full_period(self, rng):
        for _ in range(1000):
            u = FourierField2D.random(int(rng.integers(1, 17)), rng, normalize=True)
            moved = propagate(u, PERIOD)
            assert np.max(np.abs(moved.coeffs - u.coeffs)) <= 1e-13

    def test_unitary(self, rng):
        for _ in range(200):
            u = FourierField2D.random(int(rng.integers(1, 17)), rng, normalize=True)
            t = rng.uniform(-10.0, 10.0)
            assert abs(propagate(u, t).norm() - u.norm()) <= 1e-13

    def test_group_law(self, rng):
        for _ in range(200):
            u = FourierField2D.random(int(rng.integers(1, 17)), rng, normalize=True)
            t, s = rng.integers(-(2**20), 2**20, size=2) / 2.0**21
            composed = propagate(propagate(u, s), t)
            direct = propagate(u, t + s)
            assert np.max(np.abs(composed.coeffs - direct.coeffs)) <= 1e-13

    def test_quarter_turn_of_unit_mode(self):
        u = FourierField2D.single_mode(2, (1, 1))
        moved = propagate(u, 1.0 / (4.0 * math.pi))
        assert abs(moved.coefficient((1, 1)) - 1.0) <= 1e-13

    def test_phase_turns_range(self):
        turns = phase_turns(np.arange(0, 1000), 123.456)
        assert np.all((turns >= 0.0) & (turns < 1.0))


class TestHelmholtz:
    def test_on_shell_mode(self):
        u = FourierField2D.single_mode(1, (1, 0))
        assert helmholtz_residual(u, 1.0 / (2.0 * math.pi)).norm() <= 1e-14

    def test_constant_mode(self):
        u = FourierField2D.single_mode(1, (0, 0), 3.0)
        assert helmholtz_residual(u, 0.3).coefficient((0, 0)) == -3.0

    def test_against_direct_sum(self, rng):
        u = FourierField2D.random(4, rng)
        h = 0.1
        expected = math.sqrt(
            sum(
                abs((4 * math.pi**2 * h * h * (kx * kx + ky * ky) - 1) * u.coefficient((kx, ky)))
                ** 2
                for kx, ky in u.modes
            )
        )
        assert helmholtz_residual(u, h).norm() == pytest.approx(expected, rel=1e-12)

    def test_defect_at_zero_time(self, rng):
        check = propagation_defect_check(FourierField2D.random(3, rng), 0.05, 0.0)
        assert check.lhs == 0.0 and check.rhs == 0.0 and check.passed

    def test_defect_on_shell(self):
        u = FourierField2D.single_mode(5, (3, 4))
        check = propagation_defect_check(u, 1.0 / (10.0 * math.pi), 0.7)
        assert check.passed
        assert check.lhs <= 1e-12

    def test_defect_random(self, rng):
        for _ in range(1000):
            u = FourierField2D.random(int(rng.integers(1, 9)), rng, normalize=True)
            h = rng.uniform(0.01, 0.5)
            t = rng.uniform(-2.0, 2.0)
            check = propagation_defect_check(u, h, t)
            assert check.passed
            assert check.to_dict()["pass"] is True


class TestBallCoefficients:
    def test_zero_mode(self):
        assert ball_indicator_coeff(0.3, (0, 0)) == pytest.approx(math.pi * 0.09, rel=1e-15)

    @pytest.mark.parametrize("eps, m", [(0.2, (1, 0)), (0.1, (3, 4)), (0.25, (-2, 7))])
    def test_examples_against_quadrature(self, eps, m):
        assert ball_indicator_coeff(eps, m) == pytest.approx(
            ball_coefficient_by_quadrature(eps, *m), abs=1e-8
        )

    def test_unit_mode_value(self):
        assert ball_indicator_coeff(0.2, (1, 0)) == pytest.approx(0.102, abs=1e-3)

    def test_random_against_quadrature(self, rng):
        for _ in range(30):
            eps = rng.uniform(0.05, 0.45)
            m = tuple(int(v) for v in rng.integers(-20, 21, size=2))
            assert ball_indicator_coeff(eps, m) == pytest.approx(
                ball_coefficient_by_quadrature(eps, *m), abs=1e-8
            )

    def test_even_and_bounded(self):
        table = ball_coefficient_table(0.15, 6)
        values = {(row["m1"], row["m2"]): row["coeff"] for row in table}
        assert len(table) == 13 * 13
        for (m1, m2), value in values.items():
            assert value == values[(-m1, -m2)]
            assert abs(value) <= math.pi * 0.15**2 + 1e-15

    def test_decay(self):
        eps = 0.1
        for radius in (100, 150, 400):
            for m in [(radius, 0), (radius, 7), (radius // 2, radius)]:
                norm = math.hypot(*m)
                assert abs(ball_indicator_coeff(eps, m)) <= math.sqrt(eps) * norm**-1.5

    def test_square_against_quadrature(self):
        value, _ = integrate.dblquad(
            lambda y, x: math.cos(2 * math.pi * (2 * x + 3 * y)),
            -0.1,
            0.1,
            -0.1,
            0.1,
        )
        square = SquareRegion(0.2)
        assert square.coefficients(np.array([2]), np.array([3]))[0].real == pytest.approx(
            value, abs=1e-10
        )

    def test_unknown_region(self):
        with pytest.raises(ValidationError):
            make_region("disc", 0.1)


class TestNormOnBall:
    def test_constant_mode(self):
        u = FourierField2D.single_mode(2, (0, 0), 2.0)
        assert norm_on_ball(u, BallRegion(0.2)) == pytest.approx(4 * math.pi * 0.04)

    def test_single_mode_any_frequency(self):
        u = FourierField2D.single_mode(4, (3, -4))
        assert norm_on_ball(u, BallRegion(0.1)) == pytest.approx(math.pi * 0.01)

    def test_bounds_and_monotonicity(self, rng):
        for _ in range(50):
            u = FourierField2D.random(4, rng)
            small = norm_on_ball(u, BallRegion(0.1))
            large = norm_on_ball(u, BallRegion(0.3))
            assert 0.0 <= small <= large + 1e-12
            assert large <= u.norm_sq() + 1e-12

    def test_against_grid(self, rng):
        u = FourierField2D.random(4, rng)
        exact = norm_on_ball(u, BallRegion(0.25))
        assert norm_on_grid(u, 0.25) == pytest.approx(exact, rel=1e-3)

    def test_translated_ball(self, rng):
        u = FourierField2D.random(3, rng)
        center = TorusPoint(0.3, 0.6)
        shifted = u.with_coeffs(
            u.coeffs * np.exp(2j * math.pi * (u.modes @ [center.x, center.y])).reshape(7, 7)
        )
        # u(x + c) restricted to B(0, r) equals u restricted to B(c, r)
        assert norm_on_ball(u, BallRegion(0.2, center)) == pytest.approx(
            norm_on_ball(shifted, BallRegion(0.2)), rel=1e-12
        )

    def test_gram_is_hermitian(self):
        modes = np.array([[0, 0], [1, 2], [-3, 1]])
        gram = region_gram_matrix(modes, BallRegion(0.2, TorusPoint(0.1, 0.7)))
        assert np.allclose(gram, gram.conj().T)
