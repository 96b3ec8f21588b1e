"""Run the full-size numerical acceptance checks and print a summary table.

The unit tests exercise the same operations on smaller inputs; this script runs
the sizes quoted in the README (5000 hitting samples, N_max = 100 scaling
sweep, ...) and takes a few minutes.

Usage:
    python scripts/run_acceptance.py [--only NAME ...]
"""

import math
import sys
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import click
import numpy as np
from rich.console import Console
from rich.table import Table
from scipy import integrate

from src.core.geodesics import TorusPoint, first_hit_time, verify_hitting_bound
from src.core.lattice import (
    UnitDirection,
    angular_windows,
    divisor_count,
    enumerate_eps_rational,
    r2_count,
    r2_divisor_formula,
)
from src.core.observability import (
    FrequencySet,
    Interval1D,
    helmholtz_1d_constant,
    interval_gram_matrix,
    nazarov_ratio,
    nazarov_study,
    scaling_study,
    verify_inequality_samples,
)
from src.core.spectral import (
    FourierField2D,
    HelmholtzParams,
    ball_indicator_coeff,
    propagate,
    propagation_defect_check,
)

console = Console()
PERIOD = 1.0 / (2.0 * math.pi)


def check_census():
    counts = {eps: enumerate_eps_rational(eps).cardinality for eps in (6.0, 2.0, 1.0)}
    return counts == {6.0: 0, 2.0: 16, 1.0: 64}, f"counts {list(counts.values())}"


def check_windows():
    separations = {}
    for eps in (1.0, 0.5, 0.2, 0.1, 0.05):
        report = angular_windows(eps, exhaustive=True)
        if not report.disjoint:
            return False, f"{len(report.overlaps)} overlaps at eps={eps}"
        separations[eps] = report.min_separation
    return True, f"min separation at eps=0.05: {separations[0.05]:.3e}"


def _sampled_hit(x, xi, r, horizon, step):
    times = step * np.arange(int(horizon / step) + 1)
    dx, dy = xi.vector
    px = (x.x + times * dx) % 1.0
    py = (x.y + times * dy) % 1.0
    inside = np.flatnonzero(np.hypot(np.minimum(px, 1 - px), np.minimum(py, 1 - py)) <= r - 1e-12)
    return None if inside.size == 0 else float(times[inside[0]])


def check_hitting():
    details = []
    for eps in (0.2, 0.1):
        report = verify_hitting_bound(eps, C=25.0, n_points=100, n_dirs=50, seed=2024, workers=4)
        if not report.passed:
            return False, f"eps={eps}: {len(report.counterexamples)} counterexamples"
        details.append(f"eps={eps}: max {report.max_hit:.2f} <= {report.bound:.2f}")

    rng = np.random.default_rng(99)
    for _ in range(1000):
        x = TorusPoint(*rng.random(2))
        xi = UnitDirection(rng.uniform(0.0, 2 * math.pi))
        r, horizon = rng.uniform(0.05, 0.2), 5.0
        step = r / 10.0
        record = first_hit_time(x, xi, r, horizon)
        sampled = _sampled_hit(x, xi, r, horizon, step)
        if record.hit_time is None:
            if sampled is not None:
                return False, "oracle hit where the exact solver missed"
        elif sampled is not None and not (
            record.hit_time - 1e-9 <= sampled <= record.hit_time + step + 1e-9
        ):
            return False, f"oracle {sampled:.6f} vs exact {record.hit_time:.6f}"
    return True, "; ".join(details)


def check_propagator():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        u = FourierField2D.random(int(rng.integers(1, 17)), rng, normalize=True)
        t, s = rng.integers(-(2**20), 2**20, size=2) / 2.0**21
        worst = max(
            worst,
            abs(propagate(u, t).norm() - 1.0),
            float(np.max(np.abs((propagate(propagate(u, s), t) - propagate(u, t + s)).coeffs))),
            float(np.max(np.abs((propagate(u, PERIOD) - u).coeffs))),
        )
    return worst <= 1e-13, f"worst error {worst:.2e}"


def check_ball_coefficients():
    # rotating m onto an axis leaves a 1-D oscillatory integral over the chord lengths
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        eps = rng.uniform(0.05, 0.45)
        while True:
            m = rng.integers(-30, 31, size=2)
            if math.hypot(*m) <= 30:
                break
        value, _ = integrate.quad(
            lambda x: 2.0 * math.sqrt(max(eps * eps - x * x, 0.0)),
            -eps,
            eps,
            weight="cos",
            wvar=2 * math.pi * math.hypot(*m),
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        worst = max(worst, abs(ball_indicator_coeff(eps, (int(m[0]), int(m[1]))) - value))
    return worst <= 1e-8, f"worst |closed form - quadrature| {worst:.2e}"



def check_inequality():
    report = verify_inequality_samples(0.2, N_max=50, n_samples=100, seed=11)
    detail = (
        f"C={report.constant:.4f}, sharpness={report.sharpness:.8f}, "
        f"max cross term {report.max_cross_term:.1e}"
    )
    return report.passed, detail


def check_scaling():
    study = scaling_study([0.3, 0.25, 0.2, 0.15, 0.1], N_max=100, workers=4)
    finite = all(math.isfinite(row["constant"]) for row in study.rows)
    bounded = all(row["constant"] >= 2.0 / row["eps"] ** 2 * (1 - 1e-9) for row in study.rows)
    constants = ", ".join(f"{row['constant']:.3g}" for row in study.rows)
    return finite and bounded and study.monotone, f"constants [{constants}]"


def check_nazarov():
    single = nazarov_ratio(FrequencySet((4,)), Interval1D.centered(0.3))
    pair = nazarov_ratio(FrequencySet((0, 1)), Interval1D.centered(0.5))
    study = nazarov_study(range(1, 9), 0.1)
    ok = (
        math.isclose(single, 1.0 / 0.3, rel_tol=1e-12)
        and math.isclose(pair, 1.0 / (0.5 - 1.0 / math.pi), rel_tol=1e-10)
        and study.increasing
        and all(
            row["increment"] <= math.log(study.C_hat / 0.1) + 1e-12 for row in study.rows[1:]
        )
    )
    return ok, f"C_hat={study.C_hat:.4f}, ratio(8)={study.rows[-1]['ratio']:.4e}"


def _rayleigh_oracle(eps, h, z, K, rng, draws=4000):
    k = np.arange(-K, K + 1)
    penalty = 4.0 / h**4 * HelmholtzParams(h, z).multiplier(k * k) ** 2
    gram = interval_gram_matrix(k, Interval1D.centered(2.0 * eps))
    support = np.flatnonzero(penalty < 1.0)
    if support.size == 0:
        return 0.0
    best = 0.0
    for _ in range(draws):
        v = np.zeros(k.size, dtype=complex)
        v[support] = rng.standard_normal(support.size) + 1j * rng.standard_normal(support.size)
        gain = np.sum((1.0 - penalty) * np.abs(v) ** 2)
        best = max(best, gain / np.real(np.vdot(v, gram @ v)))
    return eps**3 * best


def check_helmholtz():
    rng = np.random.default_rng(3)
    for eps in (0.1, 0.2):
        constant = helmholtz_1d_constant(eps, 0.05, -1.0, 200)
        if constant > 2 * eps**2:
            return False, f"z=-1, eps={eps}: c*={constant:.3e}"
    scaled = []
    for eps in (0.1, 0.2, 0.3):
        for h in (0.05, 0.02):
            constant = helmholtz_1d_constant(eps, h, 1.0, 200)
            oracle = _rayleigh_oracle(eps, h, 1.0, 200, rng)
            if constant < oracle * (1 - 1e-9) or constant > max(oracle * 1.05, oracle + 1e-15):
                return False, f"eps={eps}, h={h}: c*={constant:.4e}, oracle {oracle:.4e}"
            scaled.append(constant / eps**2)
    spread = max(scaled) / min(scaled) if min(scaled) > 0 else (1.0 if max(scaled) == 0 else math.inf)
    return spread <= 10.0, f"c*/eps^2 range [{min(scaled):.3g}, {max(scaled):.3g}]"


def check_r2():
    for N in range(1, 10001):
        count = r2_count(N)
        if count != r2_divisor_formula(N) or count > 4 * divisor_count(N):
            return False, f"mismatch at N={N}"
    return True, "N <= 10^4"


def check_defect():
    rng = np.random.default_rng(13)
    for _ in range(1000):
        u = FourierField2D.random(int(rng.integers(1, 9)), rng, normalize=True)
        check = propagation_defect_check(u, rng.uniform(0.01, 0.5), rng.uniform(-2.0, 2.0))
        if not check.passed:
            return False, f"lhs {check.lhs:.3e} > rhs {check.rhs:.3e}"
    return True, "1000 random (u, h, t)"


CHECKS = {
    "census": check_census,
    "windows": check_windows,
    "hitting": check_hitting,
    "propagator": check_propagator,
    "ball-coeff": check_ball_coefficients,
    "inequality": check_inequality,
    "scaling": check_scaling,
    "nazarov": check_nazarov,
    "helmholtz": check_helmholtz,
    "r2": check_r2,
    "defect": check_defect,
}


@click.command()
@click.option("--only", multiple=True, type=click.Choice(list(CHECKS)), help="Run selected checks")
def main(only):
    """Run the acceptance checks."""
    console.print("\n[bold cyan]Torus observability acceptance checks[/bold cyan]\n")

    table = Table(title="Acceptance", show_header=True, header_style="bold cyan")
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Seconds", justify="right", style="yellow")
    table.add_column("Detail")

    failures = 0
    for name in only or CHECKS:
        console.print(f"Running {name}...")
        start = time.perf_counter()
        try:
            passed, detail = CHECKS[name]()
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        failures += not passed
        table.add_row(
            name,
            "[green]✓ pass[/green]" if passed else "[red]✗ fail[/red]",
            f"{elapsed:.1f}",
            detail,
        )

    console.print()
    console.print(table)
    if failures:
        console.print(f"\n[red]{failures} check(s) failed[/red]\n")
        sys.exit(1)
    console.print("\n[bold green]All checks passed[/bold green]\n")


if __name__ == "__main__":
    main()
