"""Tests for eps-rational directions, rational approximation and sums of two squares."""

import math

import numpy as np
import pytest

from src.core.lattice import (
    AngularWindow,
    PrimitiveDirection,
    UnitDirection,
    angular_windows,
    best_rational_approx,
    circular_distance,
    classify_direction,
    continued_fraction_convergents,
    divisor_count,
    enumerate_eps_rational,
    irrational_mask,
    normalize_angle,
    r2_count,
    r2_divisor_formula,
)
from src.utils.validators import ValidationError


def brute_force_rational(eps):
    bound = 32.0 / eps**2
    radius = int(math.sqrt(bound)) + 1
    return {
        (a, b)
        for a in range(-radius, radius + 1)
        for b in range(-radius, radius + 1)
        if (a, b) != (0, 0) and a * a + b * b < bound and math.gcd(abs(a), abs(b)) == 1
    }


class TestEnumerateEpsRational:
    @pytest.mark.parametrize("eps, expected", [(6.0, 0), (2.0, 16), (1.0, 64)])
    def test_counts(self, eps, expected):
        assert enumerate_eps_rational(eps).cardinality == expected

    def test_norms_at_unit_scale(self):
        norms = {d.length_sq for d in enumerate_eps_rational(1.0).directions}
        assert norms == {1, 2, 5, 10, 13, 17, 25, 26, 29}

    @pytest.mark.parametrize("eps", [1.0, 0.5, 0.3])
    def test_matches_brute_force(self, eps):
        found = {(d.a, d.b) for d in enumerate_eps_rational(eps).directions}
        assert found == brute_force_rational(eps)

    def test_sorted_by_angle(self):
        angles = enumerate_eps_rational(0.4).angles
        assert np.all(np.diff(angles) > 0)
        assert angles[0] >= 0.0 and angles[-1] < 2 * math.pi

    def test_dihedral_symmetry(self):
        found = {(d.a, d.b) for d in enumerate_eps_rational(0.5).directions}
        for a, b in found:
            for image in [(-a, b), (a, -b), (b, a), (-b, -a)]:
                assert image in found

    def test_cardinality_growth(self):
        scales = [1.0, 0.5, 0.25, 0.125]
        weighted = [enumerate_eps_rational(e).cardinality * e * e for e in scales]
        assert max(weighted) / min(weighted) <= 4.0

    @pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
    def test_invalid_eps(self, eps):
        with pytest.raises(ValidationError):
            enumerate_eps_rational(eps)


class TestDirections:
    def test_non_primitive_rejected(self):
        with pytest.raises(ValidationError):
            PrimitiveDirection(2, 4)

    def test_from_vector_reduces(self):
        assert PrimitiveDirection.from_vector(6, -9) == PrimitiveDirection(2, -3)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValidationError):
            PrimitiveDirection.from_vector(0, 0)
        with pytest.raises(ValidationError):
            UnitDirection.from_vector(0.0, 0.0)

    def test_angle_range(self):
        assert PrimitiveDirection(0, -1).angle == pytest.approx(1.5 * math.pi)
        assert normalize_angle(-1e-20) == 0.0
        assert circular_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)


class TestClassifyDirection:
    def test_axis_is_rational(self):
        result = classify_direction(UnitDirection(0.0), 1.0)
        assert result.rational
        assert (result.matched.a, result.matched.b) == (1, 0)
        assert result.gap == 0.0

    def test_diagonal_is_rational(self):
        result = classify_direction(UnitDirection(math.pi / 4), 0.5)
        assert result.kind == "rational"
        assert (result.matched.a, result.matched.b) == (1, 1)

    def test_generic_direction_matches_definition(self, rng):
        eps, C = 0.1, 25.0
        rational_set = enumerate_eps_rational(eps)
        for angle in rng.uniform(0.0, 2 * math.pi, size=200):
            violated = [
                d
                for d in rational_set.directions
                if circular_distance(angle, d.angle) < eps / (C * d.length)
            ]
            result = classify_direction(UnitDirection(angle), eps, C, rational_set)
            assert result.rational == bool(violated)
            if violated:
                assert result.matched.length_sq == min(d.length_sq for d in violated)

    def test_scale_invariant(self):
        first = classify_direction(UnitDirection.from_vector(3.0, 4.0), 0.3)
        second = classify_direction(UnitDirection.from_vector(6.0, 8.0), 0.3)
        assert first.rational == second.rational
        assert first.matched == second.matched

    def test_large_eps_everything_irrational(self):
        assert not classify_direction(UnitDirection(0.0), 6.0).rational

    def test_mask_agrees_with_scalar(self, rng):
        angles = rng.uniform(0.0, 2 * math.pi, size=300)
        mask = irrational_mask(angles, 0.2, 25.0)
        expected = [not classify_direction(UnitDirection(a), 0.2).rational for a in angles]
        assert mask.tolist() == expected


class TestRationalApproximation:
    @pytest.mark.parametrize(
        "alpha, n_max, expected",
        [
            (0.5, 10, (2, 1)),
            (math.sqrt(2) - 1, 5, (5, 2)),
            (0.3, 3, (3, 1)),
        ],
    )
    def test_examples(self, alpha, n_max, expected):
        result = best_rational_approx(alpha, n_max)
        assert (result.n, result.m) == expected
        assert result.err == pytest.approx(abs(result.n * alpha - result.m))

    def test_error_value(self):
        result = best_rational_approx(math.sqrt(2) - 1, 5)
        assert result.err == pytest.approx(0.0711, abs=1e-4)

    def test_pigeonhole_bound(self, rng):
        for alpha in rng.uniform(1e-6, 1 - 1e-6, size=500):
            for n_max in (1, 7, 64, 1000):
                assert best_rational_approx(alpha, n_max).err <= 1.0 / (n_max + 1) + 1e-15

    @pytest.mark.parametrize(
        "alpha", [math.sqrt(2) - 1, (math.sqrt(5) - 1) / 2, math.pi - 3, math.e - 2]
    )
    @pytest.mark.parametrize("n_max", [10, 100, 1000])
    def test_best_denominator_is_a_convergent(self, alpha, n_max):
        denominators = [q for _, q in continued_fraction_convergents(alpha)]
        expected = max(q for q in denominators if q <= n_max)
        assert best_rational_approx(alpha, n_max).n == expected

    def test_agrees_with_direct_search(self, rng):
        for alpha in rng.uniform(1e-3, 1 - 1e-3, size=200):
            n = np.arange(1, 301)
            errors = np.abs(n * alpha - np.rint(n * alpha))
            result = best_rational_approx(alpha, 300)
            assert result.err == pytest.approx(errors.min(), abs=1e-12)
            assert result.n == int(np.flatnonzero(errors <= result.err + 1e-12)[0]) + 1

    def test_large_n_max(self):
        alpha = (math.sqrt(5) - 1) / 2
        result = best_rational_approx(alpha, 10**12)
        assert result.n <= 10**12
        assert result.err <= 1.0 / (10**12 + 1) + 1e-15

    def test_convergents_of_rational_terminate(self):
        assert continued_fraction_convergents(0.5) == [(0, 1), (1, 2)]

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_alpha_outside_unit_interval(self, alpha):
        with pytest.raises(ValidationError):
            best_rational_approx(alpha, 10)


class TestSumsOfTwoSquares:
    @pytest.mark.parametrize("N, expected", [(0, 1), (1, 4), (2, 4), (3, 0), (5, 8), (25, 12)])
    def test_examples(self, N, expected):
        assert r2_count(N) == expected

    def test_representations_listed(self):
        count, reps = r2_count(5, with_representations=True)
        assert count == 8
        assert all(p * p + q * q == 5 for p, q in reps)
        assert reps == sorted(reps)

    def test_divisor_formula(self):
        for N in range(1, 10001):
            count = r2_count(N)
            assert count == r2_divisor_formula(N)
            assert count <= 4 * divisor_count(N)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            r2_count(-1)


class TestAngularWindows:
    @pytest.mark.parametrize("eps", [1.0, 0.5, 0.2, 0.1])
    def test_disjoint(self, eps):
        report = angular_windows(eps, exhaustive=True)
        assert report.disjoint
        assert report.min_separation > 0.0

    def test_adjacent_sweep_agrees(self):
        exhaustive = angular_windows(0.3, exhaustive=True)
        adjacent = angular_windows(0.3, exhaustive=False)
        assert adjacent.disjoint == exhaustive.disjoint
        assert adjacent.min_separation == pytest.approx(exhaustive.min_separation)

    @pytest.mark.parametrize("eps, denominator", [(1.0, 0.5), (0.5, 2.0), (0.3, 6.0), (0.3, 24.0)])
    def test_exhaustive_matches_every_pair(self, eps, denominator):
        report = angular_windows(eps, denominator, exhaustive=True)
        windows = report.windows
        expected = {
            frozenset((windows[i].center, windows[j].center))
            for i in range(len(windows))
            for j in range(i + 1, len(windows))
            if windows[i].overlaps(windows[j])
        }
        assert {frozenset(pair) for pair in report.overlaps} == expected
        assert len(report.overlaps) == len(expected)
        separations = [
            circular_distance(a.center.angle, b.center.angle) - (a.half_width + b.half_width)
            for i, a in enumerate(windows)
            for b in windows[i + 1 :]
        ]
        assert report.min_separation == pytest.approx(min(separations), abs=1e-15)

    def test_touching_windows_do_not_overlap(self):
        east = AngularWindow(PrimitiveDirection(1, 0), math.pi / 4)
        north = AngularWindow(PrimitiveDirection(0, 1), math.pi / 4)
        assert not east.overlaps(north)

    def test_wide_windows_overlap(self):
        assert not angular_windows(1.0, denominator=0.5).disjoint

    def test_window_overlap_predicate(self):
        east = AngularWindow(PrimitiveDirection(1, 0), 0.1)
        north = AngularWindow(PrimitiveDirection(0, 1), 0.1)
        assert not east.overlaps(north)
        assert east.contains(0.05)
        assert east.contains(2 * math.pi - 0.05)

    def test_no_directions(self):
        with pytest.raises(ValidationError):
            angular_windows(6.0)
