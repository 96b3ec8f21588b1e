"""Straight-line flow on the unit torus and exact first-hitting times into small balls.

Times are measured at unit speed: the flow is x + t*xi (mod 1).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from rich.progress import Progress

from .lattice import PrimitiveDirection, UnitDirection, enumerate_eps_rational, irrational_mask
from ..utils.config import get_config
from ..utils.error_handlers import FalsifiedAssertionError
from ..utils.logger import get_logger
from ..utils.validators import (
    ValidationError,
    validate_ball_radius,
    validate_positive,
    validate_positive_int,
    validate_real,
)

# the four rows nearest the line cover every ball it can meet
ROW_OFFSETS = np.array([-1, 0, 1, 2])


def _reduce(value: float) -> float:
    reduced = value % 1.0
    # tiny negatives round up to exactly 1.0
    return 0.0 if reduced >= 1.0 else reduced


@dataclass(frozen=True)
class TorusPoint:
    """A point of the unit torus, coordinates reduced into [0, 1)."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", _reduce(validate_real(self.x, "x")))
        object.__setattr__(self, "y", _reduce(validate_real(self.y, "y")))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def __sub__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(self.x - other.x, self.y - other.y)


ORIGIN = TorusPoint(0.0, 0.0)


def torus_distance(p: TorusPoint, q: TorusPoint) -> float:
    dx = abs(p.x - q.x)
    dy = abs(p.y - q.y)
    return math.hypot(min(dx, 1.0 - dx), min(dy, 1.0 - dy))


@dataclass(frozen=True)
class HittingRecord:
    """First entry of the flow into a ball, or its absence up to the horizon."""

    start: TorusPoint
    direction: UnitDirection
    radius: float
    horizon: float
    hit_time: Optional[float] = None
    exit_time: Optional[float] = None
    center: TorusPoint = ORIGIN

    @property
    def hit(self) -> bool:
        return self.hit_time is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.start.x,
            "y": self.start.y,
            "angle": self.direction.angle,
            "radius": self.radius,
            "horizon": self.horizon,
            "center": [self.center.x, self.center.y],
            "hit_time": self.hit_time,
            "exit_time": self.exit_time,
        }


@dataclass
class HittingBoundReport:
    """Outcome of a sampled check of the control-time bound C'/eps."""

    eps: float
    C: float
    C_prime: float
    bound: float
    horizon: float
    seed: int
    n_samples: int = 0
    n_rejected: int = 0
    max_hit: float = 0.0
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples and self.max_hit <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "C": self.C,
            "C_prime": self.C_prime,
            "bound": self.bound,
            "horizon": self.horizon,
            "seed": self.seed,
            "max_hit": self.max_hit,
            "n_samples": self.n_samples,
            "n_rejected": self.n_rejected,
            "pass": self.passed,
            "counterexamples": self.counterexamples,
        }


@dataclass
class SectionReport:
    """Intersections of a closed geodesic through the origin with {x = 0}."""

    eta: PrimitiveDirection
    points: List[TorusPoint]
    max_gap: float
    degenerate: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eta": [self.eta.a, self.eta.b],
            "points": [[p.x, p.y] for p in self.points],
            "n": len(self.points),
            "max_gap": self.max_gap,
            "degenerate": self.degenerate,
        }


def flow_position(x: TorusPoint, xi: UnitDirection, t: float) -> TorusPoint:
    """Return (x + t*xi) mod 1."""
    t = validate_real(t, "t")
    dx, dy = xi.vector
    return TorusPoint(x.x + t * dx, x.y + t * dy)


def first_hit_time(
    x: TorusPoint,
    xi: UnitDirection,
    r: float,
    horizon: float,
    center: Optional[TorusPoint] = None,
) -> HittingRecord:
    """
    Exact first time the flow from x enters the closed ball B(center, r).

    The torus ball lifts to the discs of radius r about the integer translates
    of the centre. Working along the dominant axis of xi, every integer column
    crossed by the segment [0, horizon] contributes the few rows close enough
    to the line, and each candidate disc is entered at the smaller root of
    |p + t*xi - m|^2 = r^2.

    Args:
        x: Start point
        xi: Direction of motion
        r: Ball radius, 0 < r < 1/2
        horizon: Largest admissible time
        center: Ball centre (origin by default)

    Returns:
        HittingRecord, with hit_time None if the ball is not reached by horizon
    """
    r = validate_ball_radius(r, "r")
    horizon = validate_positive(horizon, "horizon")
    center = ORIGIN if center is None else center

    p = (x - center).as_array()
    d = np.array(xi.vector)
    # dominant axis first, so columns are crossed at most once per unit time
    axes = [0, 1] if abs(d[0]) >= abs(d[1]) else [1, 0]
    p, d = p[axes], d[axes]

    end = p[0] + horizon * d[0]
    columns = np.arange(
        math.floor(min(p[0], end) - r), math.ceil(max(p[0], end) + r) + 1, dtype=float
    )
    line_rows = p[1] + (columns - p[0]) / d[0] * d[1]
    rows = np.floor(line_rows)[:, None] + ROW_OFFSETS[None, :]
    cols = np.broadcast_to(columns[:, None], rows.shape)

    qx = p[0] - cols.ravel()
    qy = p[1] - rows.ravel()
    b = qx * d[0] + qy * d[1]
    c = qx * qx + qy * qy - r * r
    disc = b * b - c

    record = dict(start=x, direction=xi, radius=r, horizon=horizon, center=center)
    meets = disc >= 0.0
    if not meets.any():
        return HittingRecord(**record)

    root = np.sqrt(disc[meets])
    t_in = -b[meets] - root
    t_out = -b[meets] + root
    valid = (t_out >= 0.0) & (t_in <= horizon)
    if not valid.any():
        return HittingRecord(**record)

    entry = np.maximum(t_in[valid], 0.0)
    first = int(np.argmin(entry))
    return HittingRecord(
        **record, hit_time=float(entry[first]), exit_time=float(t_out[valid][first])
    )


def _sample_directions(
    rng: np.random.Generator,
    n_dirs: int,
    eps: float,
    C: float,
    max_draws: int,
):
    """Draw uniform angles, keeping the first n_dirs irrational ones in draw order."""
    rational_set = enumerate_eps_rational(eps)
    accepted: List[float] = []
    rejected = 0
    drawn = 0
    batch = max(64, 2 * n_dirs)
    while len(accepted) < n_dirs:
        if drawn >= max_draws:
            raise ValidationError(
                f"only {len(accepted)} of {n_dirs} irrational directions found in "
                f"{drawn} draws at eps={eps}, C={C}"
            )
        angles = rng.uniform(0.0, 2.0 * math.pi, size=min(batch, max_draws - drawn))
        drawn += angles.size
        mask = irrational_mask(angles, eps, C, rational_set)
        for angle, keep in zip(angles, mask):
            if len(accepted) == n_dirs:
                break
            if keep:
                accepted.append(float(angle))
            else:
                rejected += 1
    return [UnitDirection(a) for a in accepted], rejected


def verify_hitting_bound(
    eps: float,
    C: Optional[float] = None,
    n_points: Optional[int] = None,
    n_dirs: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    show_progress: bool = False,
) -> HittingBoundReport:
    """
    Sample start points and irrational directions, and check that every first
    hit of B(0, eps/3) happens by C'/eps with C' = 3*sqrt(2)*max(C, 12).

    Hit times are computed up to twice the bound, so a violation shows up as a
    late hit rather than a timeout. Misses and late hits are recorded as
    counterexamples; the report never raises on falsification.

    Args:
        eps: Scale parameter (eps/3 must be a valid ball radius)
        C: Window constant of the classification
        n_points: Number of start points
        n_dirs: Number of irrational directions
        seed: Seed of the PCG64 generator
        workers: Thread pool size (per direction)
        show_progress: Display a rich progress bar

    Returns:
        HittingBoundReport
    """
    config = get_config()
    logger = get_logger()

    validate_ball_radius(validate_positive(eps, "eps") / 3.0, "eps/3")
    C = validate_positive(config.get("geodesics.C", 25.0) if C is None else C, "C")
    n_points = validate_positive_int(
        config.get("geodesics.n_points", 100) if n_points is None else n_points, "n_points"
    )
    n_dirs = validate_positive_int(
        config.get("geodesics.n_dirs", 50) if n_dirs is None else n_dirs, "n_dirs"
    )
    seed = validate_positive_int(
        config.get("processing.seed", 0) if seed is None else seed, "seed", minimum=0
    )
    workers = validate_positive_int(
        config.get("processing.workers", 1) if workers is None else workers, "workers"
    )

    C_prime = 3.0 * math.sqrt(2.0) * max(C, 12.0)
    bound = C_prime / eps
    horizon = config.get("geodesics.horizon_factor", 2.0) * bound
    radius = eps / 3.0

    rng = np.random.default_rng(seed)
    starts = [TorusPoint(px, py) for px, py in rng.random((n_points, 2))]
    directions, rejected = _sample_directions(
        rng, n_dirs, eps, C, int(config.get("geodesics.max_direction_draws", 100000))
    )

    report = HittingBoundReport(
        eps=eps, C=C, C_prime=C_prime, bound=bound, horizon=horizon, seed=seed,
        n_rejected=rejected,
    )
    logger.info(
        f"Hitting bound: eps={eps}, C={C}, bound={bound:.4f}, "
        f"{n_points} points x {n_dirs} directions ({rejected} rational draws rejected)"
    )

    def run_direction(xi: UnitDirection) -> List[HittingRecord]:
        return [first_hit_time(x, xi, radius, horizon) for x in starts]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_direction, xi) for xi in directions]
        if show_progress:
            with Progress() as progress:
                task = progress.add_task("[cyan]Hitting times...", total=len(futures))
                for future in futures:
                    future.result()
                    progress.update(task, advance=1)
        per_direction = [future.result() for future in futures]

    for records in per_direction:
        for record in records:
            report.n_samples += 1
            if record.hit_time is not None:
                report.max_hit = max(report.max_hit, record.hit_time)
            if record.hit_time is None or record.hit_time > bound:
                report.counterexamples.append(record.to_dict())

    if report.passed:
        logger.info(f"Hitting bound holds: max hit {report.max_hit:.4f} <= {bound:.4f}")
    else:
        logger.warning(
            f"Hitting bound falsified at eps={eps}: "
            f"{len(report.counterexamples)} counterexamples"
        )
    return report


def closed_geodesic_sections(eta: PrimitiveDirection) -> SectionReport:
    """
    Points where the closed geodesic through the origin in direction eta
    crosses the circle {x = 0}.

    For eta = (a, b) with n = |a| >= 1 the crossings happen at t = j*L/n and
    must be exactly {(0, k/n) : 0 <= k < n}, with maximal gap 1/n.

    Raises:
        FalsifiedAssertionError: If a crossing is off the circle or the
            crossings are not the n equally spaced points
    """
    n = abs(eta.a)
    if n == 0:
        return SectionReport(eta=eta, points=[ORIGIN], max_gap=1.0, degenerate=True)

    xi = eta.as_unit()
    period = eta.length
    tolerance = 1e-9
    points = []
    for j in range(n):
        q = flow_position(ORIGIN, xi, j * period / n)
        offset = min(q.x, 1.0 - q.x)
        k = round(q.y * n) % n
        if offset > tolerance or abs(q.y * n - round(q.y * n)) > tolerance * n:
            raise FalsifiedAssertionError(
                f"crossing {j} of geodesic {eta.a, eta.b} is not a section point",
                evidence={"j": j, "x": q.x, "y": q.y, "n": n},
            )
        points.append((k, TorusPoint(0.0, k / n)))

    ks = sorted(k for k, _ in points)
    if ks != list(range(n)):
        raise FalsifiedAssertionError(
            f"geodesic {eta.a, eta.b} meets the section in {ks}, expected 0..{n - 1}",
            evidence={"k": ks, "n": n},
        )

    section = [p for _, p in sorted(points, key=lambda item: item[0])]
    ys = np.array([p.y for p in section])
    gaps = np.diff(np.append(ys, ys[0] + 1.0))
    return SectionReport(eta=eta, points=section, max_gap=float(gaps.max()))
