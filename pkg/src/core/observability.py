"""Eigenspace Gramians and observability constants for exp(i t Laplacian) on the torus.

Over one full period T = 1/(2*pi) the cross terms between distinct eigenspaces
integrate to zero, so for u0 truncated to |k|^2 <= N_max

    int_0^T ||exp(i t Lap) u0||^2_region dt = T * sum_N <G_N c_N, c_N>

and the sharp truncated constant is 2*pi / min_N lambda_min(G_N).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .lattice import r2_representations
from .spectral import (
    FourierField2D,
    HelmholtzParams,
    Region,
    make_region,
    region_gram_matrix,
)
from ..numerics.eigen import jacobi_eigh, jacobi_singular_values, pencil_threshold
from ..utils.config import get_config
from ..utils.error_handlers import EmptyEigenspaceError, FitError
from ..utils.logger import get_logger
from ..utils.validators import (
    ValidationError,
    validate_ball_radius,
    validate_eps_list,
    validate_frequency_set,
    validate_open_unit,
    validate_positive,
    validate_positive_int,
    validate_real,
)

PERIOD = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class EigenspaceBasis:
    """Modes k with |k|^2 = N, lexicographically ordered."""

    N: int
    modes: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_N(cls, N: int) -> "EigenspaceBasis":
        N = validate_positive_int(N, "N", minimum=0)
        modes = tuple(r2_representations(N))
        if not modes:
            raise EmptyEigenspaceError(N)
        return cls(N=N, modes=modes)

    @property
    def rank(self) -> int:
        return len(self.modes)

    @property
    def eigenvalue(self) -> float:
        """lambda^2 = 4*pi^2*N."""
        return 4.0 * math.pi**2 * self.N

    def as_array(self) -> np.ndarray:
        return np.array(self.modes, dtype=int).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class GramianMatrix:
    """G[k, l] = <1_region e_l, e_k> over one eigenspace."""

    entries: np.ndarray
    eps: float
    basis: EigenspaceBasis
    region: str = "ball"

    @property
    def rank(self) -> int:
        return self.basis.rank

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def to_rows(self) -> List[Dict[str, Union[int, float]]]:
        rows = []
        for i, k in enumerate(self.basis.modes):
            for j, l in enumerate(self.basis.modes):
                value = self.entries[i, j]
                rows.append(
                    {
                        "i": i,
                        "j": j,
                        "k1": k[0],
                        "k2": k[1],
                        "l1": l[0],
                        "l2": l[1],
                        "re": float(np.real(value)),
                        "im": float(np.imag(value)),
                    }
                )
        return rows


@dataclass(frozen=True)
class ObservabilityRow:
    N: int
    rank: int
    lambda_min: float

    def to_dict(self) -> Dict[str, Union[int, float]]:
        return {"N": self.N, "rank": self.rank, "lambda_min": self.lambda_min}


@dataclass
class FitRecord:
    """Least-squares line y = slope * x + intercept, residual = RMS error."""

    law: str
    slope: float
    intercept: float
    residual: float
    n_points: int

    def to_dict(self) -> Dict[str, Union[str, float, int]]:
        return {
            "law": self.law,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "n_points": self.n_points,
        }


@dataclass
class ObservabilityReport:
    """Per-eigenspace minimal eigenvalues and the truncated constant 2*pi / min lambda_min."""

    eps: float
    N_max: int
    region: str
    rows: List[ObservabilityRow]
    constant: float
    argmin_N: int
    minimizer: np.ndarray
    fit: Optional[FitRecord] = None

    @property
    def lambda_min(self) -> float:
        return min(row.lambda_min for row in self.rows)

    def to_rows(self) -> List[Dict[str, Union[int, float]]]:
        return [row.to_dict() for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "N_max": self.N_max,
            "region": self.region,
            "constant": self.constant,
            "argmin_N": self.argmin_N,
            "lambda_min": self.lambda_min,
            "rows": self.to_rows(),
            "fit": None if self.fit is None else self.fit.to_dict(),
        }


@dataclass
class InequalityReport:
    """Sampled check of ||u0||^2 <= constant * int_0^T ||exp(i t Lap) u0||^2_region dt."""

    eps: float
    N_max: int
    region: str
    constant: float
    n_samples: int
    seed: int
    quad_points: int
    min_ratio: float = math.inf
    max_ratio: float = 0.0
    max_cross_term: float = 0.0
    sharpness: Optional[float] = None
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "N_max": self.N_max,
            "region": self.region,
            "constant": self.constant,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "quad_points": self.quad_points,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "max_cross_term": self.max_cross_term,
            "sharpness": self.sharpness,
            "pass": self.passed,
            "failures": self.failures,
        }


def _resolve_region(region: Union[str, Region], eps: float) -> Region:
    if isinstance(region, str):
        return make_region(region, eps)
    if region.eps != eps:
        raise ValidationError(f"region radius {region.eps} does not match eps={eps}")
    return region


def eigenspace_gramian(N: int, eps: float, region: Union[str, Region] = "ball") -> GramianMatrix:
    """
    Gramian of the region indicator over the eigenspace |k|^2 = N.

    Raises:
        EmptyEigenspaceError: If N is not a sum of two squares
    """
    eps = validate_ball_radius(eps)
    basis = EigenspaceBasis.from_N(N)
    region = _resolve_region(region, eps)
    entries = region_gram_matrix(basis.as_array(), region)
    if not np.any(np.imag(entries)):
        entries = np.real(entries)
    return GramianMatrix(entries=entries, eps=eps, basis=basis, region=region.kind)


def _solver_settings() -> Tuple[float, int]:
    config = get_config()
    return config.get("eigen.tolerance", 1e-12), config.get("eigen.max_sweeps", 50)


def min_eigenpair(G: Union[GramianMatrix, np.ndarray]) -> Tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector (cyclic Jacobi)."""
    entries = G.entries if isinstance(G, GramianMatrix) else G
    tol, max_sweeps = _solver_settings()
    decomposition = jacobi_eigh(entries, tol=tol, max_sweeps=max_sweeps)
    return decomposition.min_eigenvalue, decomposition.min_eigenvector


def min_eigenvalue(G: Union[GramianMatrix, np.ndarray]) -> float:
    """
    Smallest eigenvalue of a Hermitian matrix (cyclic Jacobi, relative tolerance 1e-12).

    Raises:
        NumericalFailureError: If the sweeps do not converge
    """
    return min_eigenpair(G)[0]


def _eigenspace_row(N: int, eps: float, region: Region):
    gramian = eigenspace_gramian(N, eps, region)
    value, vector = min_eigenpair(gramian)
    get_logger().debug(f"N={N}: rank {gramian.rank}, lambda_min={value:.6e}")
    return ObservabilityRow(N=N, rank=gramian.rank, lambda_min=value), gramian.basis, vector


def nonempty_levels(N_max: int) -> List[int]:
    """All N <= N_max that are sums of two squares."""
    return [N for N in range(N_max + 1) if r2_representations(N)]


def observability_constant(
    eps: float,
    N_max: int,
    region: Union[str, Region] = "ball",
    workers: Optional[int] = None,
) -> ObservabilityReport:
    """
    Sharp observability constant on span{e_k : |k|^2 <= N_max}.

    Eigenspaces are solved independently (optionally in a thread pool) and
    assembled in ascending N.

    Args:
        eps: Region radius in (0, 1/2)
        N_max: Largest eigenvalue index kept
        region: "ball", "square" or a region instance
        workers: Thread pool size

    Returns:
        ObservabilityReport; constant is inf if some Gramian is singular
    """
    eps = validate_ball_radius(eps)
    N_max = validate_positive_int(N_max, "N_max", minimum=0)
    region = _resolve_region(region, eps)
    workers = validate_positive_int(
        get_config().get("processing.workers", 1) if workers is None else workers, "workers"
    )
    logger = get_logger()

    levels = nonempty_levels(N_max)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda N: _eigenspace_row(N, eps, region), levels))

    rows = [row for row, _, _ in results]
    position = min(range(len(rows)), key=lambda i: (rows[i].lambda_min, rows[i].N))
    worst_row, worst_basis, worst_vector = results[position]

    minimizer = FourierField2D.from_modes(
        math.isqrt(N_max),
        {mode: c for mode, c in zip(worst_basis.modes, worst_vector)},
    )

    if worst_row.lambda_min <= 0.0:
        logger.warning(
            f"Gramian for N={worst_row.N} is singular at eps={eps} "
            f"(lambda_min={worst_row.lambda_min:.3e}); constant is infinite"
        )
        constant = math.inf
    else:
        constant = 2.0 * math.pi / worst_row.lambda_min

    logger.info(
        f"Observability constant ({region.kind}, eps={eps}, N_max={N_max}): "
        f"{constant:.6e}, attained at N={worst_row.N}"
    )
    return ObservabilityReport(
        eps=eps,
        N_max=N_max,
        region=region.kind,
        rows=rows,
        constant=constant,
        argmin_N=worst_row.N,
        minimizer=minimizer.coeffs,
    )


def _truncated_modes(N_max: int) -> np.ndarray:
    modes = [mode for N in nonempty_levels(N_max) for mode in r2_representations(N)]
    return np.array(sorted(modes), dtype=int).reshape(-1, 2)


def _quadrature_phases(k_sq: np.ndarray, quad_points: int) -> np.ndarray:
    """exp(-4*pi^2*i*|k|^2*t_j) at t_j = j*T/Q, phases reduced in exact integer arithmetic."""
    j = np.arange(quad_points, dtype=np.int64)
    turns = np.mod(np.outer(j, k_sq.astype(np.int64)), quad_points) / quad_points
    return np.exp(-2j * math.pi * turns)


def _integrand(amplitudes: np.ndarray, phases: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """||exp(i t_j Lap) u||^2_region at each quadrature node."""
    states = phases * amplitudes[None, :]
    return np.real(np.sum(np.conj(states) * (states @ gram.T), axis=1))


def _check_quadrature(quad_points: int, N_max: int) -> int:
    minimum = get_config().get("observability.min_quad_points", 64)
    quad_points = validate_positive_int(quad_points, "quad_points", minimum=minimum)
    if quad_points <= 2 * N_max:
        raise ValidationError(
            f"quad_points={quad_points} must exceed 2*N_max={2 * N_max} for an exact time integral"
        )
    return quad_points


def observation_integral(
    u: FourierField2D, region: Region, quad_points: Optional[int] = None
) -> float:
    """
    int_0^{1/(2 pi)} ||exp(i t Lap) u||^2_region dt by the periodic trapezoid rule.

    The integrand is a trigonometric polynomial in 2*pi*t of degree max|k|^2,
    so the rule is exact once quad_points exceeds twice that degree.
    """
    modes, amplitudes = u.support()
    if amplitudes.size == 0:
        return 0.0
    k_sq = np.sum(modes * modes, axis=1)
    if quad_points is None:
        quad_points = get_config().get("observability.quad_points", 256)
    quad_points = _check_quadrature(quad_points, int(k_sq.max()))
    phases = _quadrature_phases(k_sq, quad_points)
    gram = region_gram_matrix(modes, region)
    return PERIOD * float(np.mean(_integrand(amplitudes, phases, gram)))


def _serialize_sample(modes: np.ndarray, amplitudes: np.ndarray) -> List[Dict[str, float]]:
    return [
        {"kx": int(k[0]), "ky": int(k[1]), "re": float(c.real), "im": float(c.imag)}
        for k, c in zip(modes, amplitudes)
    ]


def verify_inequality_samples(
    eps: float,
    N_max: Optional[int] = None,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    quad_points: Optional[int] = None,
    region: Union[str, Region] = "ball",
) -> InequalityReport:
    """
    Check the truncated observability inequality on seeded random states.

    For every sample u0 (complex Gaussian on |k|^2 <= N_max):
      * ||u0||^2 <= constant * integral * (1 + slack)
      * for N != M the period-averaged mixed product of Pi_N u0 and Pi_M u0
        over the region vanishes relative to ||Pi_N u0|| ||Pi_M u0||
    and the minimizing eigenvector of the argmin eigenspace must attain the
    constant. Violations are collected as serialized failures, not raised.
    """
    config = get_config()
    logger = get_logger()
    eps = validate_ball_radius(eps)
    N_max = validate_positive_int(
        config.get("observability.N_max", 50) if N_max is None else N_max, "N_max", minimum=0
    )
    n_samples = validate_positive_int(
        config.get("observability.n_samples", 100) if n_samples is None else n_samples,
        "n_samples",
    )
    seed = validate_positive_int(
        config.get("processing.seed", 0) if seed is None else seed, "seed", minimum=0
    )
    quad_points = _check_quadrature(
        config.get("observability.quad_points", 256) if quad_points is None else quad_points,
        N_max,
    )
    slack = config.get("observability.inequality_slack", 1e-6)
    cross_rtol = config.get("observability.cross_term_rtol", 1e-8)
    region = _resolve_region(region, eps)

    report_const = observability_constant(eps, N_max, region)
    report = InequalityReport(
        eps=eps,
        N_max=N_max,
        region=region.kind,
        constant=report_const.constant,
        n_samples=n_samples,
        seed=seed,
        quad_points=quad_points,
    )

    modes = _truncated_modes(N_max)
    k_sq = np.sum(modes * modes, axis=1)
    gram = region_gram_matrix(modes, region)
    phases = _quadrature_phases(k_sq, quad_points)

    levels = np.unique(k_sq)
    blocks = (k_sq[:, None] == levels[None, :]).astype(float)
    # quadrature average of exp(2*pi*i (|k|^2 - |l|^2) s) over s_j = j/Q
    averaged = gram * (np.conj(phases).T @ phases) / quad_points
    off_block = ~np.eye(levels.size, dtype=bool)

    rng = np.random.default_rng(seed)
    for index in range(n_samples):
        amplitudes = rng.standard_normal(len(modes)) + 1j * rng.standard_normal(len(modes))
        norm_sq = float(np.sum(np.abs(amplitudes) ** 2))
        integral = PERIOD * float(np.mean(_integrand(amplitudes, phases, gram)))
        ratio = norm_sq / (report.constant * integral) if integral > 0 else math.inf
        report.min_ratio = min(report.min_ratio, ratio)
        report.max_ratio = max(report.max_ratio, ratio)

        mixed = blocks.T @ (np.conj(amplitudes)[:, None] * averaged * amplitudes[None, :]) @ blocks
        level_norms = np.sqrt(blocks.T @ np.abs(amplitudes) ** 2)
        scale = np.outer(level_norms, level_norms)
        cross = float(np.max(np.abs(mixed)[off_block] / scale[off_block])) if levels.size > 1 else 0.0
        report.max_cross_term = max(report.max_cross_term, cross)

        failed = []
        if norm_sq > report.constant * integral * (1.0 + slack):
            failed.append("inequality")
        if cross > cross_rtol:
            failed.append("cross_terms")
        if failed:
            report.failures.append(
                {
                    "sample": index,
                    "checks": failed,
                    "norm_sq": norm_sq,
                    "integral": integral,
                    "cross_term": cross,
                    "u0": _serialize_sample(modes, amplitudes),
                }
            )

    if math.isfinite(report.constant):
        minimizer = FourierField2D(math.isqrt(N_max), report_const.minimizer)
        integral = observation_integral(minimizer, region, quad_points)
        report.sharpness = report.constant * integral / minimizer.norm_sq()
        if abs(report.sharpness - 1.0) > slack:
            report.failures.append(
                {"sample": "minimizer", "checks": ["sharpness"], "sharpness": report.sharpness}
            )

    if report.passed:
        logger.info(
            f"Observability inequality holds on {n_samples} samples "
            f"(ratio range [{report.min_ratio:.4f}, {report.max_ratio:.4f}])"
        )
    else:
        logger.warning(f"Observability inequality: {len(report.failures)} failing samples")
    return report


# --- one-dimensional extremal problems ---------------------------------------


@dataclass(frozen=True)
class FrequencySet:
    """Distinct integer frequencies, ascending."""

    frequencies: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(validate_frequency_set(self.frequencies)))

    @classmethod
    def consecutive(cls, n: int) -> "FrequencySet":
        return cls(tuple(range(validate_positive_int(n, "n"))))

    def __len__(self) -> int:
        return len(self.frequencies)


@dataclass(frozen=True)
class Interval1D:
    """Arc of the unit circle given by its midpoint, reduced into (-1/2, 1/2], and measure."""

    center: float
    measure: float

    def __post_init__(self):
        mid = validate_real(self.center, "center") % 1.0
        object.__setattr__(self, "center", mid - 1.0 if mid > 0.5 else mid)
        object.__setattr__(self, "measure", validate_open_unit(self.measure, "measure"))

    @classmethod
    def from_endpoints(cls, a: float, b: float) -> "Interval1D":
        """The arc running counterclockwise from a to b."""
        a, b = validate_real(a, "a"), validate_real(b, "b")
        measure = (b - a) % 1.0
        return cls(a + 0.5 * measure, measure)

    @classmethod
    def centered(cls, measure: float, center: float = 0.0) -> "Interval1D":
        return cls(center, measure)

    @property
    def start(self) -> float:
        return (self.center - 0.5 * self.measure) % 1.0

    @property
    def end(self) -> float:
        return (self.center + 0.5 * self.measure) % 1.0

    def contains(self, interval: "Interval1D") -> bool:
        """True if the other arc lies inside this one."""
        offset = abs(interval.center - self.center) % 1.0
        offset = min(offset, 1.0 - offset)
        return offset + 0.5 * interval.measure <= 0.5 * self.measure


def interval_gram_matrix(frequencies: Sequence[int], interval: Interval1D) -> np.ndarray:
    """G[j, k] = integral over the arc of exp(2*pi*i (f_k - f_j) x) dx."""
    freqs = np.asarray(frequencies, dtype=float)
    d = freqs[None, :] - freqs[:, None]
    values = interval.measure * np.sinc(d * interval.measure)
    if interval.center == 0.0:
        return values
    return values * np.exp(2j * math.pi * d * interval.center)


def _arc_sample_matrix(frequencies: Sequence[int], interval: Interval1D) -> np.ndarray:
    """
    B with B^H B equal to the arc Gram matrix: rows are sqrt(w_j) exp(2*pi*i f x_j)
    at Gauss-Legendre nodes on the arc.

    The products exp(2*pi*i (f_k - f_j) x) oscillate with angular frequency
    pi * span * |E| on the reference interval, so the node count grows with the
    frequency span as well as with the number of frequencies.
    """
    freqs = np.asarray(frequencies, dtype=float)
    span = float(freqs.max() - freqs.min())
    n_nodes = max(
        int(get_config().get("observability.nazarov.quad_nodes", 64)),
        4 * len(frequencies),
        2 * math.ceil(math.pi * span * interval.measure) + 32,
    )
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * interval.measure
    x = interval.center + half * nodes
    return np.sqrt(half * weights)[:, None] * np.exp(2j * math.pi * x[:, None] * freqs[None, :])



def nazarov_ratio(S: FrequencySet, E: Interval1D) -> float:
    """
    sup ||p||^2 / ||p||^2_E over trigonometric polynomials with frequencies in S,
    i.e. 1 / lambda_min of the arc Gram matrix.

    lambda_min is taken as sigma_min^2 of a square-root factor of the Gram
    matrix, which keeps relative accuracy when lambda_min is near machine
    precision (n = 8 on an arc of length 0.1 sits around 1e-16).
    """
    sigma = jacobi_singular_values(_arc_sample_matrix(S.frequencies, E))[0]
    smallest = sigma * sigma
    if smallest <= 0.0:
        get_logger().warning(
            f"arc Gram matrix for n={len(S)}, |E|={E.measure} is numerically singular"
        )
        return math.inf
    return 1.0 / smallest


@dataclass
class NazarovStudy:
    measure: float
    rows: List[Dict[str, float]]
    C_hat: float
    slope: float
    increasing: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "measure": self.measure,
            "C_hat": self.C_hat,
            "slope": self.slope,
            "increasing": self.increasing,
            "rows": self.rows,
        }


def nazarov_study(
    n_values: Optional[Iterable[int]] = None,
    measure: Optional[float] = None,
    center: float = 0.0,
) -> NazarovStudy:
    """
    Ratios for S = {0, ..., n-1} on one arc, with the log increments between
    consecutive n, the constant C_hat = |E| * exp(max increment) bounding every
    increment by log(C_hat/|E|), and the least-squares slope of log ratio in n.
    """
    config = get_config()
    if n_values is None:
        n_values = config.get("observability.nazarov.n_values", [1, 2, 3, 4, 5, 6, 7, 8])
    n_values = [validate_positive_int(n, "n") for n in n_values]
    measure = validate_open_unit(
        config.get("observability.nazarov.measure", 0.1) if measure is None else measure,
        "measure",
    )
    if len(n_values) < 2:
        raise ValidationError("nazarov study needs at least two values of n")
    arc = Interval1D.centered(measure, center)

    rows = []
    previous = None
    for n in sorted(n_values):
        ratio = nazarov_ratio(FrequencySet.consecutive(n), arc)
        log_ratio = math.log(ratio)
        increment = None if previous is None else log_ratio - previous
        rows.append({"n": n, "ratio": ratio, "log_ratio": log_ratio, "increment": increment})
        previous = log_ratio

    increments = [row["increment"] for row in rows[1:]]
    C_hat = measure * math.exp(max(increments))
    fit = stats.linregress([row["n"] for row in rows], [row["log_ratio"] for row in rows])
    return NazarovStudy(
        measure=measure,
        rows=rows,
        C_hat=C_hat,
        slope=float(fit.slope),
        increasing=all(step > 0.0 for step in increments),
    )


def helmholtz_1d_constant(eps: float, h: float, z: float, K: int) -> float:
    """
    Smallest c with ||v||^2 <= c eps^-3 ||v||^2_(-eps, eps) + 4 h^-4 ||(-h^2 d^2 - z) v||^2
    on span{exp(2*pi*i k x) : |k| <= K}.

    With D = diag(4 h^-4 (4 pi^2 h^2 k^2 - z)^2) and M the Gram matrix of the
    interval, c = eps^3 * max(0, top of the pencil (I - D, M)).

    Raises:
        ConditioningError: If M is numerically singular on the modes where D < 1
    """
    eps = validate_ball_radius(eps)
    params = HelmholtzParams(h, z)
    K = validate_positive_int(K, "K")
    config = get_config()

    k = np.arange(-K, K + 1, dtype=float)
    penalty = 4.0 / params.h**4 * params.multiplier(k * k) ** 2
    interval = Interval1D.centered(2.0 * eps)
    gram = interval_gram_matrix(k, interval)

    threshold = pencil_threshold(
        1.0 - penalty,
        gram,
        congruence_tol=config.get("eigen.pencil.congruence_tolerance", 1e-12),
        rtol=config.get("eigen.pencil.bisection_rtol", 1e-10),
        max_expansions=config.get("eigen.pencil.max_expansions", 200),
    )
    get_logger().debug(
        f"helmholtz 1d: eps={eps}, h={params.h}, z={params.z}, K={K}, "
        f"{int(np.sum(penalty < 1.0))} near-shell modes, threshold={threshold:.6e}"
    )
    return eps**3 * threshold


@dataclass
class StripResult:
    eps: float
    h: float
    constant: float
    argmax_k: int
    rows: List[Dict[str, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "h": self.h,
            "constant": self.constant,
            "argmax_k": self.argmax_k,
            "rows": self.rows,
        }


def helmholtz_strip_constant(
    eps: float, h: float, K: Optional[int] = None, Ky: Optional[int] = None
) -> StripResult:
    """
    Observability constant for -h^2 Lap - 1 on the strip (-eps, eps) x T^1.

    Expanding in the y frequency k reduces the strip to 1-D problems with
    z_k = 1 - 4 pi^2 h^2 k^2; the strip constant is their maximum.
    """
    config = get_config()
    K = config.get("observability.helmholtz.K", 200) if K is None else K
    Ky = validate_positive_int(
        config.get("observability.helmholtz.Ky", 40) if Ky is None else Ky, "Ky", minimum=0
    )
    h = validate_positive(h, "h")
    rows = []
    for k in range(Ky + 1):
        z = 1.0 - 4.0 * math.pi**2 * h * h * k * k
        rows.append({"k": k, "z": z, "constant": helmholtz_1d_constant(eps, h, z, K)})
    best = max(rows, key=lambda row: (row["constant"], -row["k"]))
    return StripResult(eps=eps, h=h, constant=best["constant"], argmax_k=best["k"], rows=rows)


# --- scaling -----------------------------------------------------------------


@dataclass
class ScalingStudy:
    N_max: int
    region: str
    rows: List[Dict[str, float]]
    fits: List[FitRecord]
    monotone: bool
    unavailable_fits: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N_max": self.N_max,
            "region": self.region,
            "monotone": self.monotone,
            "rows": self.rows,
            "fits": [fit.to_dict() for fit in self.fits],
            "unavailable_fits": self.unavailable_fits,
        }


def fit_line(law: str, x: Sequence[float], y: Sequence[float]) -> FitRecord:
    """
    Least-squares line through (x, y).

    Raises:
        FitError: With fewer than two points or zero variance in x
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0.0:
        raise FitError(
            f"cannot fit '{law}': {x.size} points with x range {np.ptp(x) if x.size else 0.0}"
        )
    if not np.all(np.isfinite(y)):
        raise FitError(f"cannot fit '{law}': non-finite values {y.tolist()}")
    result = stats.linregress(x, y)
    residual = float(np.sqrt(np.mean((y - (result.slope * x + result.intercept)) ** 2)))
    return FitRecord(
        law=law,
        slope=float(result.slope),
        intercept=float(result.intercept),
        residual=residual,
        n_points=int(x.size),
    )


def scaling_study(
    eps_list: Optional[Iterable[float]] = None,
    N_max: Optional[int] = None,
    region: str = "ball",
    workers: Optional[int] = None,
) -> ScalingStudy:
    """
    Observability constants across eps, with log log C fitted against
    log(1/eps) / log log(1/eps) (every eps except 1/e, where it is undefined)
    and against log(1/eps). Both fits are reported; neither is asserted. A fit
    that cannot be made is listed under unavailable_fits with its reason.
    """
    config = get_config()
    eps_list = validate_eps_list(
        config.get("observability.scaling.eps_list") if eps_list is None else eps_list
    )
    N_max = config.get("observability.scaling.N_max", 100) if N_max is None else N_max

    reports = [observability_constant(eps, N_max, region, workers) for eps in eps_list]
    rows = [
        {
            "eps": r.eps,
            "inv_eps": 1.0 / r.eps,
            "constant": r.constant,
            "lower_bound": 2.0 * math.pi / make_region(region, r.eps).area,
            "argmin_N": r.argmin_N,
        }
        for r in reports
    ]

    by_eps = sorted(rows, key=lambda row: row["eps"])
    monotone = all(a["constant"] >= b["constant"] for a, b in zip(by_eps, by_eps[1:]))
    if not monotone:
        get_logger().warning(f"constants are not monotone in eps at N_max={N_max}")

    y = [math.log(math.log(row["constant"])) for row in rows]
    log_inv = [math.log(1.0 / row["eps"]) for row in rows]
    # log log(1/eps) vanishes at eps = 1/e; radii within rounding of it are left out
    defined = [i for i, value in enumerate(log_inv) if abs(math.log(value)) > 1e-9]
    candidates = [
        (
            "loglog_C_vs_log_over_loglog",
            [log_inv[i] / math.log(log_inv[i]) for i in defined],
            [y[i] for i in defined],
        ),
        ("loglog_C_vs_log", log_inv, y),
    ]
    fits, unavailable = [], {}
    for law, x_values, y_values in candidates:
        try:
            fits.append(fit_line(law, x_values, y_values))
        except FitError as e:
            get_logger().warning(f"Scaling fit unavailable: {e}")
            unavailable[law] = str(e)
    return ScalingStudy(
        N_max=int(N_max),
        region=reports[0].region,
        rows=rows,
        fits=fits,
        monotone=monotone,
        unavailable_fits=unavailable,
    )
