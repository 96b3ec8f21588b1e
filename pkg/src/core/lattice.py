"""Number-theoretic core: eps-rational directions, rational approximation,
sums of two squares and angular partition windows."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..utils.logger import get_logger
from ..utils.validators import (
    ValidationError,
    validate_eps,
    validate_lattice_vector,
    validate_open_unit,
    validate_positive,
    validate_positive_int,
    validate_real,
)

TWO_PI = 2.0 * math.pi
RATIONAL_BOUND = 32.0


def normalize_angle(angle: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Reduce angles into [0, 2*pi)."""
    reduced = np.mod(angle, TWO_PI)
    # np.mod can round a tiny negative input up to exactly 2*pi
    reduced = np.where(reduced >= TWO_PI, 0.0, reduced)
    if np.ndim(reduced) == 0:
        return float(reduced)
    return reduced


def circular_distance(
    alpha: Union[float, np.ndarray], beta: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """Circular metric min(|d|, 2*pi - |d|) between angles."""
    delta = np.mod(np.abs(np.asarray(alpha) - np.asarray(beta)), TWO_PI)
    distance = np.minimum(delta, TWO_PI - delta)
    if np.ndim(distance) == 0:
        return float(distance)
    return distance


@dataclass(frozen=True)
class PrimitiveDirection:
    """A primitive lattice direction (a, b) with gcd(|a|, |b|) = 1."""

    a: int
    b: int

    def __post_init__(self):
        a, b = validate_lattice_vector(self.a, self.b)
        if math.gcd(abs(a), abs(b)) != 1:
            raise ValidationError(f"({a}, {b}) is not primitive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_vector(cls, a: int, b: int) -> "PrimitiveDirection":
        """Primitive representative of the positive ray through (a, b)."""
        a, b = validate_lattice_vector(a, b)
        g = math.gcd(abs(a), abs(b))
        return cls(a // g, b // g)

    @property
    def length_sq(self) -> int:
        return self.a * self.a + self.b * self.b

    @property
    def length(self) -> float:
        return math.sqrt(self.length_sq)

    @property
    def angle(self) -> float:
        return normalize_angle(math.atan2(self.b, self.a))

    def as_unit(self) -> "UnitDirection":
        return UnitDirection(self.angle)

    def to_row(self) -> Dict[str, Union[int, float]]:
        return {"a": self.a, "b": self.b, "L2": self.length_sq, "angle": self.angle}


@dataclass(frozen=True)
class UnitDirection:
    """A direction on the unit circle, stored by its angle in [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", normalize_angle(validate_real(self.angle, "angle")))

    @classmethod
    def from_vector(cls, x: float, y: float) -> "UnitDirection":
        """Direction of a non-zero vector; positive rescaling gives the same result."""
        if x == 0 and y == 0:
            raise ValidationError("zero vector has no direction")
        return cls(math.atan2(y, x))

    @property
    def vector(self) -> Tuple[float, float]:
        return math.cos(self.angle), math.sin(self.angle)


@dataclass(frozen=True)
class EpsRationalSet:
    """All eps-rational directions, sorted by angle."""

    eps: float
    directions: Tuple[PrimitiveDirection, ...]

    @property
    def cardinality(self) -> int:
        return len(self.directions)

    @cached_property
    def angles(self) -> np.ndarray:
        return np.array([d.angle for d in self.directions], dtype=float)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([d.length for d in self.directions], dtype=float)

    def to_rows(self) -> List[Dict[str, Union[int, float]]]:
        return [d.to_row() for d in self.directions]

    def __len__(self) -> int:
        return self.cardinality


@dataclass(frozen=True)
class DirectionClass:
    """Outcome of classify_direction."""

    direction: UnitDirection
    eps: float
    C: float
    rational: bool
    matched: Optional[PrimitiveDirection] = None
    gap: Optional[float] = None
    margin: float = math.inf

    @property
    def kind(self) -> str:
        return "rational" if self.rational else "irrational"

    def to_dict(self) -> Dict:
        return {
            "angle": self.direction.angle,
            "eps": self.eps,
            "C": self.C,
            "kind": self.kind,
            "matched": None if self.matched is None else [self.matched.a, self.matched.b],
            "gap": self.gap,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class AngularWindow:
    """Support arc |arg xi - arg eta| < half_width of a rational cutoff."""

    center: PrimitiveDirection
    half_width: float

    def __post_init__(self):
        validate_positive(self.half_width, "half_width")

    def contains(self, angle: float) -> bool:
        return circular_distance(angle, self.center.angle) < self.half_width

    def overlaps(self, other: "AngularWindow") -> bool:
        # open arcs
        gap = circular_distance(self.center.angle, other.center.angle)
        return gap < self.half_width + other.half_width


@dataclass
class WindowReport:
    """Angular windows for one eps with the pairwise disjointness verdict."""

    eps: float
    denominator: float
    windows: List[AngularWindow]
    overlaps: List[Tuple[PrimitiveDirection, PrimitiveDirection]] = field(default_factory=list)
    min_separation: float = math.inf

    @property
    def disjoint(self) -> bool:
        return not self.overlaps

    def to_rows(self) -> List[Dict]:
        return [
            {
                "a": w.center.a,
                "b": w.center.b,
                "L2": w.center.length_sq,
                "angle": w.center.angle,
                "half_width": w.half_width,
            }
            for w in self.windows
        ]


class RationalApproximation(NamedTuple):
    n: int
    m: int
    err: float


def enumerate_eps_rational(eps: float) -> EpsRationalSet:
    """
    Enumerate the primitive directions (a, b) with a^2 + b^2 < 32/eps^2.

    Args:
        eps: Scale parameter

    Returns:
        EpsRationalSet sorted by angle (empty when eps >= sqrt(32))
    """
    eps = validate_eps(eps)
    bound = RATIONAL_BOUND / (eps * eps)
    radius = int(math.isqrt(int(math.floor(bound)))) + 1

    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    a, b = a.ravel(), b.ravel()
    norm_sq = a * a + b * b
    mask = (norm_sq > 0) & (norm_sq * eps * eps < RATIONAL_BOUND)
    mask &= np.gcd(a, b) == 1
    a, b = a[mask], b[mask]

    angles = normalize_angle(np.arctan2(b, a).astype(float)) if a.size else np.zeros(0)
    order = np.argsort(angles, kind="stable")
    directions = tuple(PrimitiveDirection(int(a[i]), int(b[i])) for i in order)

    get_logger().debug(f"eps={eps}: {len(directions)} eps-rational directions")
    return EpsRationalSet(eps=eps, directions=directions)


def _classification_inputs(eps: float, C: float, rational_set: Optional[EpsRationalSet]):
    eps = validate_eps(eps)
    C = validate_positive(C, "C")
    if rational_set is None or rational_set.eps != eps:
        rational_set = enumerate_eps_rational(eps)
    return eps, C, rational_set


def classify_direction(
    xi: UnitDirection,
    eps: float,
    C: float = 25.0,
    rational_set: Optional[EpsRationalSet] = None,
) -> DirectionClass:
    """
    Classify a unit direction as rational or irrational at scale eps.

    xi is irrational iff its circular distance to every eps-rational eta is at
    least eps / (C * L_eta). A rational verdict reports the violating eta of
    smallest L_eta (ties: smallest angle) and its angular gap.

    Args:
        xi: Direction to classify
        eps: Scale parameter
        C: Window constant
        rational_set: Precomputed enumerate_eps_rational(eps), reused if given

    Returns:
        DirectionClass
    """
    eps, C, rational_set = _classification_inputs(eps, C, rational_set)
    if rational_set.cardinality == 0:
        return DirectionClass(direction=xi, eps=eps, C=C, rational=False)

    distances = circular_distance(xi.angle, rational_set.angles)
    thresholds = eps / (C * rational_set.lengths)
    slack = distances - thresholds
    violating = np.flatnonzero(slack < 0.0)

    if violating.size == 0:
        return DirectionClass(
            direction=xi, eps=eps, C=C, rational=False, margin=float(slack.min())
        )

    lengths_sq = np.array([rational_set.directions[i].length_sq for i in violating])
    order = np.lexsort((rational_set.angles[violating], lengths_sq))
    best = int(violating[order[0]])
    return DirectionClass(
        direction=xi,
        eps=eps,
        C=C,
        rational=True,
        matched=rational_set.directions[best],
        gap=float(distances[best]),
        margin=float(slack.min()),
    )


def irrational_mask(
    angles: np.ndarray,
    eps: float,
    C: float = 25.0,
    rational_set: Optional[EpsRationalSet] = None,
) -> np.ndarray:
    """Vectorized classify_direction: True where the angle is irrational."""
    eps, C, rational_set = _classification_inputs(eps, C, rational_set)
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if rational_set.cardinality == 0:
        return np.ones(angles.shape, dtype=bool)
    distances = circular_distance(angles[:, None], rational_set.angles[None, :])
    thresholds = eps / (C * rational_set.lengths)
    return np.all(distances >= thresholds[None, :], axis=1)


def best_rational_approx(alpha: float, n_max: int) -> RationalApproximation:
    """
    Minimize |n*alpha - m| over 1 <= n <= n_max and integers m.

    The minimizing n is a continued fraction denominator, so only convergents
    up to n_max are examined. Ties go to the smallest n. By the pigeonhole
    principle the error is at most 1/(n_max + 1).
    """
    alpha = validate_open_unit(alpha, "alpha")
    n_max = validate_positive_int(n_max, "n_max")

    exact = Fraction(alpha)
    best: Optional[RationalApproximation] = None
    best_err = None
    for _, q in _convergents(exact):
        if q > n_max:
            break
        m = round(q * exact)
        err = abs(q * exact - m)
        if best_err is None or err < best_err:
            best_err = err
            best = RationalApproximation(n=q, m=int(m), err=float(err))
    return best


def _convergents(x: Fraction) -> Iterator[Tuple[int, int]]:
    """Exact convergents (p, q) of x, ending when the expansion terminates."""
    p_prev, p = 1, math.floor(x)
    q_prev, q = 0, 1
    yield p, q
    x -= math.floor(x)
    while x != 0:
        x = 1 / x
        coeff = math.floor(x)
        x -= coeff
        p_prev, p = p, coeff * p + p_prev
        q_prev, q = q, coeff * q + q_prev
        yield p, q


def continued_fraction_convergents(alpha: float, n_terms: int = 20) -> List[Tuple[int, int]]:
    """
    Convergents p/q of the continued fraction of alpha, as (p, q) pairs.

    The expansion uses the exact rational value of the float alpha, so it
    terminates for rationals and is free of rounding drift.
    """
    validate_real(alpha, "alpha")
    n_terms = validate_positive_int(n_terms, "n_terms")
    return list(itertools.islice(_convergents(Fraction(alpha)), n_terms))


def r2_representations(N: int) -> List[Tuple[int, int]]:
    """All (p, q) with p^2 + q^2 = N, lexicographically ordered."""
    N = validate_positive_int(N, "N", minimum=0)
    reps = []
    root = math.isqrt(N)
    for p in range(-root, root + 1):
        rest = N - p * p
        q = math.isqrt(rest)
        if q * q == rest:
            reps.append((p, -q))
            if q:
                reps.append((p, q))
    return sorted(reps)


def r2_count(
    N: int, with_representations: bool = False
) -> Union[int, Tuple[int, List[Tuple[int, int]]]]:
    """
    Number of ordered representations of N as a sum of two integer squares.

    This is the multiplicity of the torus Laplacian eigenvalue 4*pi^2*N.

    Args:
        N: Non-negative integer
        with_representations: Also return the explicit (p, q) list

    Returns:
        The count, or (count, representations)
    """
    reps = r2_representations(N)
    if with_representations:
        return len(reps), reps
    return len(reps)


def _divisors(N: int) -> List[int]:
    small = [d for d in range(1, math.isqrt(N) + 1) if N % d == 0]
    large = [N // d for d in reversed(small) if d * d != N]
    return small + large


def divisor_count(N: int) -> int:
    """Number of positive divisors d(N)."""
    N = validate_positive_int(N, "N")
    return len(_divisors(N))


def r2_divisor_formula(N: int) -> int:
    """r2(N) = 4 (d1(N) - d3(N)), d1/d3 counting divisors = 1/3 mod 4."""
    N = validate_positive_int(N, "N")
    divisors = _divisors(N)
    d1 = sum(1 for d in divisors if d % 4 == 1)
    d3 = sum(1 for d in divisors if d % 4 == 3)
    return 4 * (d1 - d3)


def angular_windows(
    eps: float, denominator: float = 24.0, exhaustive: bool = False
) -> WindowReport:
    """
    Build the support windows eps/(denominator * L_eta) and check disjointness.

    Windows are centred arcs narrower than pi. The default check compares
    angularly adjacent windows only. ``exhaustive=True`` covers every pair: it
    walks offsets 1, 2, ... along the sorted circle and stops once the smallest
    forward gap exceeds twice the widest half-width, after which no remaining
    pair can overlap or lower the minimum separation.

    Raises:
        ValidationError: If there are no eps-rational directions
    """
    eps = validate_eps(eps)
    denominator = validate_positive(denominator, "denominator")
    rational_set = enumerate_eps_rational(eps)
    if rational_set.cardinality == 0:
        raise ValidationError(f"eps={eps} has no eps-rational directions")

    half_widths = eps / (denominator * rational_set.lengths)
    windows = [
        AngularWindow(center=d, half_width=float(w))
        for d, w in zip(rational_set.directions, half_widths)
    ]
    angles = rational_set.angles
    n = len(windows)
    reach = 2.0 * float(half_widths.max())

    overlaps = []
    min_separation = math.inf
    for offset in range(1, (n // 2 if exhaustive else min(n // 2, 1)) + 1):
        i_idx = np.arange(n // 2 if 2 * offset == n else n)
        j_idx = (i_idx + offset) % n
        forward = np.mod(angles[j_idx] - angles[i_idx], TWO_PI)
        separation = circular_distance(angles[i_idx], angles[j_idx]) - (
            half_widths[i_idx] + half_widths[j_idx]
        )
        min_separation = min(min_separation, float(separation.min()))
        for k in np.flatnonzero(separation < 0.0):
            overlaps.append((windows[i_idx[k]].center, windows[j_idx[k]].center))
        # forward gaps grow with the offset, so later pairs are separated by at least this
        bound = float(forward.min()) - reach
        if bound >= 0.0 and bound >= min_separation:
            break

    report = WindowReport(
        eps=eps,
        denominator=denominator,
        windows=windows,
        overlaps=overlaps,
        min_separation=min_separation,
    )
    logger = get_logger()
    if report.disjoint:
        logger.debug(f"eps={eps}: {n} windows pairwise disjoint")
    else:
        logger.warning(f"eps={eps}: {len(overlaps)} overlapping window pairs")
    return report
