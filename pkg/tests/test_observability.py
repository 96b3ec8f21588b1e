"""Tests for eigenspace Gramians, observability constants and the 1-D extremal problems."""

import math

import numpy as np
import pytest

from src.core.observability import (
    PERIOD,
    EigenspaceBasis,
    FrequencySet,
    Interval1D,
    eigenspace_gramian,
    fit_line,
    helmholtz_1d_constant,
    helmholtz_strip_constant,
    interval_gram_matrix,
    min_eigenvalue,
    nazarov_ratio,
    nazarov_study,
    nonempty_levels,
    observability_constant,
    observation_integral,
    scaling_study,
    verify_inequality_samples,
)
from src.core.spectral import BallRegion, FourierField2D, norm_on_ball, propagate
from src.numerics.eigen import inverse_iteration_min
from src.utils.error_handlers import EmptyEigenspaceError, FitError
from src.utils.validators import ValidationError


class TestGramian:
    def test_zero_level(self):
        gramian = eigenspace_gramian(0, 0.3)
        assert gramian.entries.shape == (1, 1)
        assert gramian.entries[0, 0] == pytest.approx(math.pi * 0.09)

    def test_unit_level(self):
        gramian = eigenspace_gramian(1, 0.2)
        assert gramian.rank == 4
        assert np.allclose(gramian.entries, gramian.entries.T)
        assert np.allclose(np.diag(gramian.entries), math.pi * 0.04)
        assert gramian.basis.modes == ((-1, 0), (0, -1), (0, 1), (1, 0))

    def test_empty_level(self):
        with pytest.raises(EmptyEigenspaceError):
            eigenspace_gramian(3, 0.2)
        with pytest.raises(EmptyEigenspaceError):
            EigenspaceBasis.from_N(7)

    def test_positive_semidefinite(self):
        for eps in (0.1, 0.2, 0.3):
            for N in nonempty_levels(50):
                gramian = eigenspace_gramian(N, eps)
                assert min_eigenvalue(gramian) >= -1e-12 * math.pi * eps * eps
                assert gramian.trace == pytest.approx(gramian.rank * math.pi * eps * eps)

    def test_inverse_iteration_cross_check(self):
        eps = 0.2
        for N in nonempty_levels(50):
            gramian = eigenspace_gramian(N, eps)
            assert inverse_iteration_min(gramian.entries) == pytest.approx(
                min_eigenvalue(gramian), abs=1e-10 * math.pi * eps * eps
            )

    def test_rows(self):
        rows = eigenspace_gramian(1, 0.2).to_rows()
        assert len(rows) == 16
        assert {"i", "j", "k1", "k2", "l1", "l2", "re", "im"} <= set(rows[0])

    def test_invalid_radius(self):
        with pytest.raises(ValidationError):
            eigenspace_gramian(1, 0.5)


class TestObservabilityConstant:
    def test_constant_mode_only(self):
        report = observability_constant(0.25, 0)
        assert report.constant == pytest.approx(2.0 / 0.25**2, rel=1e-12)
        assert report.argmin_N == 0

    def test_rows_cover_nonempty_levels(self):
        report = observability_constant(0.25, 50)
        assert [row.N for row in report.rows] == nonempty_levels(50)
        assert math.isfinite(report.constant)
        assert report.constant >= 32.0 - 1e-9

    def test_monotone_in_radius(self):
        assert observability_constant(0.1, 50).constant >= observability_constant(0.2, 50).constant

    def test_monotone_in_truncation(self):
        assert observability_constant(0.2, 50).constant >= observability_constant(0.2, 25).constant

    def test_square_is_harder_than_ball(self):
        square = observability_constant(0.2, 25, region="square").constant
        ball = observability_constant(0.2, 25, region="ball").constant
        assert square >= ball

    def test_workers_do_not_change_result(self):
        serial = observability_constant(0.2, 40, workers=1)
        threaded = observability_constant(0.2, 40, workers=4)
        assert serial.to_dict() == threaded.to_dict()

    def test_minimizer_attains_constant(self):
        report = observability_constant(0.2, 25)
        minimizer = FourierField2D(5, report.minimizer)
        assert minimizer.norm() == pytest.approx(1.0)
        ratio = norm_on_ball(minimizer, BallRegion(0.2)) / minimizer.norm_sq()
        assert ratio == pytest.approx(report.lambda_min, rel=1e-9)


class TestObservationIntegral:
    def test_single_mode(self):
        u = FourierField2D.single_mode(3, (2, -1), 2.0)
        value = observation_integral(u, BallRegion(0.15), 64)
        assert value == pytest.approx(PERIOD * 4.0 * math.pi * 0.15**2)

    def test_matches_propagated_norms(self, rng):
        u = FourierField2D.random(2, rng)
        region = BallRegion(0.2)
        Q = 64
        explicit = PERIOD * np.mean(
            [norm_on_ball(propagate(u, j * PERIOD / Q), region) for j in range(Q)]
        )
        assert observation_integral(u, region, Q) == pytest.approx(explicit, rel=1e-10)

    def test_too_few_nodes(self, rng):
        u = FourierField2D.random(6, rng)
        with pytest.raises(ValidationError):
            observation_integral(u, BallRegion(0.2), 32)
        with pytest.raises(ValidationError):
            observation_integral(u, BallRegion(0.2), 64)


class TestVerifyInequality:
    def test_small_truncation(self):
        report = verify_inequality_samples(0.2, N_max=25, n_samples=100, seed=1)
        assert report.passed
        assert report.max_ratio <= 1.0 + 1e-6
        assert report.max_cross_term <= 1e-8
        assert report.sharpness == pytest.approx(1.0, abs=1e-6)

    def test_default_truncation(self):
        report = verify_inequality_samples(0.2, N_max=50, n_samples=10, seed=2)
        assert report.passed
        assert report.to_dict()["pass"] is True

    def test_quadrature_must_resolve_truncation(self):
        with pytest.raises(ValidationError):
            verify_inequality_samples(0.2, N_max=50, n_samples=1, quad_points=100)


class TestNazarov:
    def test_single_frequency(self):
        arc = Interval1D.centered(0.3)
        assert nazarov_ratio(FrequencySet((5,)), arc) == pytest.approx(1.0 / 0.3, rel=1e-12)

    def test_two_frequencies(self):
        arc = Interval1D.from_endpoints(-0.25, 0.25)
        expected = 1.0 / (0.5 - 1.0 / math.pi)
        assert nazarov_ratio(FrequencySet((0, 1)), arc) == pytest.approx(expected, rel=1e-10)

    def test_agrees_with_closed_form_gram(self):
        arc = Interval1D.centered(0.2)
        for n in range(1, 5):
            frequencies = FrequencySet.consecutive(n)
            expected = 1.0 / min_eigenvalue(interval_gram_matrix(frequencies.frequencies, arc))
            assert nazarov_ratio(frequencies, arc) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize(
        "frequencies, measure",
        [((0, 50), 0.9), ((0, 100), 0.6), ((0, 3, 80), 0.5), ((-40, 0, 41, 90), 0.7)],
    )
    def test_widely_spaced_frequencies(self, frequencies, measure):
        arc = Interval1D.centered(measure, center=0.1)
        expected = 1.0 / np.linalg.eigvalsh(interval_gram_matrix(frequencies, arc))[0]
        assert nazarov_ratio(FrequencySet(frequencies), arc) == pytest.approx(expected, rel=1e-9)

    def test_orthogonal_pair_on_wide_arc(self):
        # sinc(50 * 0.9) vanishes, so the Gram matrix is 0.9 * identity
        ratio = nazarov_ratio(FrequencySet((0, 50)), Interval1D.centered(0.9))
        assert ratio == pytest.approx(1.0 / 0.9, rel=1e-10)

    def test_shrinking_arc_increases_ratio(self):
        S = FrequencySet.consecutive(5)
        ratios = [nazarov_ratio(S, Interval1D.centered(m)) for m in (0.4, 0.2, 0.1)]
        assert ratios[0] < ratios[1] < ratios[2]

    def test_translation_invariant(self):
        S = FrequencySet((0, 2, 3))
        centered = nazarov_ratio(S, Interval1D.centered(0.15))
        shifted = nazarov_ratio(S, Interval1D.centered(0.15, center=0.3))
        assert shifted == pytest.approx(centered, rel=1e-8)

    def test_frequency_shift_invariant(self):
        arc = Interval1D.centered(0.25)
        base = nazarov_ratio(FrequencySet((0, 1, 4)), arc)
        assert nazarov_ratio(FrequencySet((10, 11, 14)), arc) == pytest.approx(base, rel=1e-8)

    def test_study(self):
        study = nazarov_study(range(1, 9), 0.1)
        assert study.increasing
        increments = [row["increment"] for row in study.rows[1:]]
        assert all(math.isfinite(step) for step in increments)
        assert max(increments) <= math.log(study.C_hat / 0.1) + 1e-12
        assert study.slope > 0.0

    def test_repeated_frequencies_rejected(self):
        with pytest.raises(ValidationError):
            FrequencySet((1, 1))

    def test_arc_geometry(self):
        arc = Interval1D.from_endpoints(0.9, 0.1)
        assert arc.measure == pytest.approx(0.2)
        assert arc.center == pytest.approx(0.0, abs=1e-15)
        assert arc.contains(Interval1D.centered(0.1))
        assert not arc.contains(Interval1D.centered(0.1, center=0.2))


class TestHelmholtz:
    def test_no_mode_on_shell(self):
        assert helmholtz_1d_constant(0.1, 0.05, 1.0, 200) == 0.0

    def test_on_shell_mode(self):
        eps, h, k0 = 0.1, 0.05, 3
        z = 4 * math.pi**2 * h * h * k0 * k0
        constant = helmholtz_1d_constant(eps, h, z, 50)
        # v = e_{k0}: ||v||^2 = 1, ||v||^2 on the interval = 2 eps, no Helmholtz penalty
        assert constant >= eps**3 / (2 * eps) * (1 - 1e-9)
        assert constant / eps**2 <= 10.0

    @pytest.mark.parametrize("eps, h, k0", [(0.1, 0.05, 3), (0.2, 0.05, 2), (0.2, 0.02, 5)])
    def test_nondecreasing_in_cutoff(self, eps, h, k0):
        z = 4 * math.pi**2 * h * h * k0 * k0
        constants = [helmholtz_1d_constant(eps, h, z, K) for K in (50, 100, 200)]
        assert constants[0] > 0.0
        for smaller, larger in zip(constants, constants[1:]):
            assert smaller <= larger * (1 + 1e-8)

    @pytest.mark.parametrize("eps", [0.1, 0.2])
    def test_negative_spectral_parameter(self, eps):
        constant = helmholtz_1d_constant(eps, 0.05, -1.0, 50)
        assert 0.0 <= constant <= 2 * eps**2

    def test_elliptic_regime(self):
        eps, h = 0.1, 2.0
        constant = helmholtz_1d_constant(eps, h, 1.0, 20)
        assert 0.0 < constant <= 2 * eps**2

    def test_oracle_on_random_vectors(self, rng):
        eps, h, K = 0.1, 0.05, 20
        z = 4 * math.pi**2 * h * h * 4
        constant = helmholtz_1d_constant(eps, h, z, K)
        k = np.arange(-K, K + 1)
        penalty = 4.0 / h**4 * (4 * math.pi**2 * h * h * k * k - z) ** 2
        gram = interval_gram_matrix(k, Interval1D.centered(2 * eps))
        for _ in range(500):
            v = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
            lhs = np.sum(np.abs(v) ** 2)
            rhs = constant / eps**3 * np.real(np.vdot(v, gram @ v)) + np.sum(
                penalty * np.abs(v) ** 2
            )
            assert lhs <= rhs * (1 + 1e-9)

    def test_strip(self):
        result = helmholtz_strip_constant(0.1, 0.05, K=50, Ky=6)
        assert len(result.rows) == 7
        assert result.constant == max(row["constant"] for row in result.rows)
        assert result.rows[0]["z"] == 1.0


class TestScaling:
    def test_fit_requires_two_points(self):
        with pytest.raises(FitError):
            fit_line("law", [1.0], [2.0])
        with pytest.raises(FitError):
            fit_line("law", [1.0, 1.0], [2.0, 3.0])

    def test_fit_exact_line(self):
        fit = fit_line("law", [0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.residual == pytest.approx(0.0, abs=1e-12)

    def test_study(self):
        study = scaling_study([0.3, 0.25, 0.2, 0.15], N_max=25)
        assert study.monotone
        assert [row["eps"] for row in study.rows] == [0.3, 0.25, 0.2, 0.15]
        for row in study.rows:
            assert row["constant"] >= row["lower_bound"] * (1 - 1e-9)
        laws = {fit.law: fit for fit in study.fits}
        assert laws["loglog_C_vs_log"].slope > 0.0

    @pytest.mark.parametrize(
        "eps_list", [[0.45, 0.42, 0.4, 0.38], [0.45, 0.42, 0.4, 0.3], [0.45, 1 / math.e, 0.3, 0.2]]
    )
    def test_study_with_wide_radii(self, eps_list):
        study = scaling_study(eps_list, N_max=10)
        laws = {fit.law: fit for fit in study.fits}
        assert set(laws) == {"loglog_C_vs_log_over_loglog", "loglog_C_vs_log"}
        assert study.unavailable_fits == {}
        expected_points = 3 if 1 / math.e in eps_list else 4
        assert laws["loglog_C_vs_log_over_loglog"].n_points == expected_points

    def test_needs_four_radii(self):
        with pytest.raises(ValidationError):
            scaling_study([0.3, 0.2, 0.1], N_max=10)
