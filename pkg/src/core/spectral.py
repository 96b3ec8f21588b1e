"""Exact Fourier representation of states on the unit torus.

Modes are the characters e_k(x) = exp(2*pi*i k.x), k in Z^2, orthonormal on
[0,1)^2, with -Laplacian eigenvalue 4*pi^2*|k|^2. Fields carry every mode with
|k|_inf <= K, stored in lexicographic (kx, ky) order.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .geodesics import ORIGIN, TorusPoint
from ..numerics.bessel import bessel_j1
from ..utils.config import get_config
from ..utils.validators import (
    ValidationError,
    validate_ball_radius,
    validate_int,
    validate_positive,
    validate_positive_int,
    validate_real,
)

Mode = Tuple[int, int]

TWO_PI_HI = 2.0 * math.pi
TWO_PI_LO = 2.4492935982947064e-16  # 2*pi - TWO_PI_HI
_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_product(a, b):
    """p + err == a * b exactly (Veltkamp/Dekker)."""
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def phase_turns(k_sq: np.ndarray, t: float) -> np.ndarray:
    """
    Fractional part of 2*pi*t*|k|^2, in turns.

    The product is carried in double-double arithmetic so that full periods
    t = j/(2*pi) land on whole turns up to the rounding of t itself.
    """
    tau_hi, tau_lo = _two_product(t, TWO_PI_HI)
    tau_lo += t * TWO_PI_LO
    n = np.asarray(k_sq, dtype=float)
    p_hi, p_lo = _two_product(n, tau_hi)
    p_lo = p_lo + n * tau_lo
    turns = (p_hi - np.floor(p_hi)) + p_lo
    turns = turns - np.floor(turns)
    # a tiny negative remainder rounds up to exactly one turn
    return np.where(turns >= 1.0, 0.0, turns)


@dataclass(frozen=True, eq=False)
class FourierField2D:
    """Immutable trigonometric polynomial with modes |k|_inf <= cutoff."""

    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        K = validate_positive_int(self.cutoff, "cutoff", minimum=0)
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (2 * K + 1, 2 * K + 1):
            raise ValidationError(
                f"coefficient array of shape {coeffs.shape} does not match cutoff {K}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "cutoff", K)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, cutoff: int) -> "FourierField2D":
        size = 2 * validate_positive_int(cutoff, "cutoff", minimum=0) + 1
        return cls(cutoff, np.zeros((size, size), dtype=complex))

    @classmethod
    def from_modes(cls, cutoff: int, amplitudes: Mapping[Mode, complex]) -> "FourierField2D":
        """Build a field from a {(kx, ky): amplitude} mapping."""
        size = 2 * validate_positive_int(cutoff, "cutoff", minimum=0) + 1
        coeffs = np.zeros((size, size), dtype=complex)
        for (kx, ky), amplitude in amplitudes.items():
            kx, ky = validate_int(kx, "kx"), validate_int(ky, "ky")
            if max(abs(kx), abs(ky)) > cutoff:
                raise ValidationError(f"mode {(kx, ky)} lies outside cutoff {cutoff}")
            coeffs[kx + cutoff, ky + cutoff] = amplitude
        return cls(cutoff, coeffs)

    @classmethod
    def single_mode(cls, cutoff: int, mode: Mode, amplitude: complex = 1.0) -> "FourierField2D":
        return cls.from_modes(cutoff, {mode: amplitude})

    @classmethod
    def random(
        cls,
        cutoff: int,
        rng: np.random.Generator,
        max_norm_sq: Optional[int] = None,
        normalize: bool = False,
    ) -> "FourierField2D":
        """
        Complex Gaussian coefficients on every mode (or on |k|^2 <= max_norm_sq).
        """
        field = cls.zeros(cutoff)
        shape = field.coeffs.shape
        coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if max_norm_sq is not None:
            coeffs = np.where(field.k_sq <= max_norm_sq, coeffs, 0.0)
        if normalize:
            norm = np.linalg.norm(coeffs)
            if norm > 0:
                coeffs = coeffs / norm
        return cls(cutoff, coeffs)

    @cached_property
    def axis(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    @cached_property
    def modes(self) -> np.ndarray:
        """(n, 2) array of all modes in lexicographic order."""
        kx, ky = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.column_stack([kx.ravel(), ky.ravel()])

    @cached_property
    def k_sq(self) -> np.ndarray:
        kx, ky = np.meshgrid(self.axis, self.axis, indexing="ij")
        return kx * kx + ky * ky

    def coefficient(self, mode: Mode) -> complex:
        kx, ky = mode
        if max(abs(kx), abs(ky)) > self.cutoff:
            return 0j
        return complex(self.coeffs[kx + self.cutoff, ky + self.cutoff])

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """Modes with non-zero amplitude and their amplitudes, in lexicographic order."""
        flat = self.coeffs.ravel()
        idx = np.flatnonzero(flat)
        return self.modes[idx], flat[idx]

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def norm(self) -> float:
        """L2 norm on the torus (Parseval)."""
        return float(np.linalg.norm(self.coeffs))

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierField2D":
        return FourierField2D(self.cutoff, coeffs)

    def project(self, N: int) -> "FourierField2D":
        """Component in the eigenspace |k|^2 = N."""
        return self.with_coeffs(np.where(self.k_sq == N, self.coeffs, 0.0))

    def _check_compatible(self, other: "FourierField2D"):
        if not isinstance(other, FourierField2D):
            return NotImplemented
        if other.cutoff != self.cutoff:
            raise ValidationError(
                f"mixed cutoffs {self.cutoff} and {other.cutoff}; resize explicitly"
            )
        return None

    def __add__(self, other: "FourierField2D") -> "FourierField2D":
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField2D") -> "FourierField2D":
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "FourierField2D":
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_coeffs(scalar * self.coeffs)

    __rmul__ = __mul__

    def to_rows(self, include_zero: bool = False) -> List[Dict[str, Union[int, float]]]:
        """Rows (kx, ky, re, im), lexicographic; zero amplitudes skipped by default."""
        rows = []
        for (kx, ky), c in zip(self.modes, self.coeffs.ravel()):
            if c == 0 and not include_zero:
                continue
            rows.append({"kx": int(kx), "ky": int(ky), "re": c.real, "im": c.imag})
        return rows

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping], cutoff: Optional[int] = None) -> "FourierField2D":
        rows = list(rows)
        if cutoff is None:
            cutoff = max((max(abs(int(r["kx"])), abs(int(r["ky"]))) for r in rows), default=0)
        amplitudes = {
            (int(r["kx"]), int(r["ky"])): complex(float(r["re"]), float(r["im"])) for r in rows
        }
        return cls.from_modes(cutoff, amplitudes)


@dataclass(frozen=True)
class HelmholtzParams:
    """Semiclassical parameter h and spectral parameter z of -h^2*Laplacian - z."""

    h: float
    z: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "h", validate_positive(self.h, "h"))
        object.__setattr__(self, "z", validate_real(self.z, "z"))

    def multiplier(self, k_sq: np.ndarray) -> np.ndarray:
        """Symbol 4*pi^2*h^2*|k|^2 - z of the Helmholtz operator."""
        return 4.0 * math.pi**2 * self.h**2 * np.asarray(k_sq, dtype=float) - self.z


def ball_coefficients(eps: float, mx: np.ndarray, my: np.ndarray) -> np.ndarray:
    """Vectorized integral of exp(-2*pi*i m.x) over B(0, eps); real and even in m."""
    radius = np.hypot(np.asarray(mx, dtype=float), np.asarray(my, dtype=float))
    series_cutoff = get_config().get("spectral.bessel.series_cutoff", 12.0)
    values = np.full(radius.shape, math.pi * eps * eps)
    nonzero = radius > 0.0
    r = radius[nonzero]
    values[nonzero] = eps * bessel_j1(2.0 * math.pi * eps * r, series_cutoff) / r
    return values


def square_coefficients(eps: float, mx: np.ndarray, my: np.ndarray) -> np.ndarray:
    """Integral of exp(-2*pi*i m.x) over the square [-eps/2, eps/2]^2."""
    mx = np.asarray(mx, dtype=float)
    my = np.asarray(my, dtype=float)
    return eps * np.sinc(eps * mx) * eps * np.sinc(eps * my)


def ball_indicator_coeff(eps: float, m: Mode) -> float:
    """
    Fourier coefficient of the indicator of B(0, eps) at m.

    Equals pi*eps^2 at m = 0 and eps*J1(2*pi*eps*|m|)/|m| otherwise.
    """
    eps = validate_ball_radius(eps)
    mx, my = validate_int(m[0], "m[0]"), validate_int(m[1], "m[1]")
    return float(ball_coefficients(eps, np.array([mx]), np.array([my]))[0])


def ball_coefficient_table(eps: float, M: int) -> List[Dict[str, Union[int, float]]]:
    """All ball coefficients with |m|_inf <= M, lexicographic."""
    eps = validate_ball_radius(eps)
    M = validate_positive_int(M, "M", minimum=0)
    axis = np.arange(-M, M + 1)
    mx, my = np.meshgrid(axis, axis, indexing="ij")
    values = ball_coefficients(eps, mx.ravel(), my.ravel())
    return [
        {"m1": int(a), "m2": int(b), "coeff": float(v)}
        for a, b, v in zip(mx.ravel(), my.ravel(), values)
    ]


@dataclass(frozen=True)
class BallRegion:
    """The ball B(center, eps) on the unit torus."""

    eps: float
    center: TorusPoint = ORIGIN

    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "eps", validate_ball_radius(self.eps))

    @property
    def area(self) -> float:
        return math.pi * self.eps * self.eps

    def coefficients(self, mx: np.ndarray, my: np.ndarray) -> np.ndarray:
        values = ball_coefficients(self.eps, mx, my)
        return _translate(values, mx, my, self.center)


@dataclass(frozen=True)
class SquareRegion:
    """The square center + [-eps/2, eps/2]^2, inscribed in B(center, eps)."""

    eps: float
    center: TorusPoint = ORIGIN

    kind = "square"

    def __post_init__(self):
        object.__setattr__(self, "eps", validate_ball_radius(self.eps))

    @property
    def area(self) -> float:
        return self.eps * self.eps

    def coefficients(self, mx: np.ndarray, my: np.ndarray) -> np.ndarray:
        values = square_coefficients(self.eps, mx, my)
        return _translate(values, mx, my, self.center)


Region = Union[BallRegion, SquareRegion]


def make_region(kind: str, eps: float, center: TorusPoint = ORIGIN) -> Region:
    if kind == "ball":
        return BallRegion(eps, center)
    if kind == "square":
        return SquareRegion(eps, center)
    raise ValidationError(f"unknown region {kind!r}; expected 'ball' or 'square'")


def _translate(values: np.ndarray, mx, my, center: TorusPoint) -> np.ndarray:
    if center == ORIGIN:
        return values.astype(complex)
    shift = np.asarray(mx) * center.x + np.asarray(my) * center.y
    return values * np.exp(-2j * math.pi * shift)


def region_gram_matrix(modes: np.ndarray, region: Region) -> np.ndarray:
    """
    W[j, l] = <1_region e_l, e_j> for the given (n, 2) mode list.

    Hermitian; real symmetric when the region is centred at the origin.
    """
    modes = np.asarray(modes, dtype=int).reshape(-1, 2)
    diff = modes[:, None, :] - modes[None, :, :]
    return region.coefficients(diff[..., 0], diff[..., 1])


def norm_on_ball(u: FourierField2D, region: Region) -> float:
    """
    Squared L2 norm of u over the region, sum_{k,l} conj(c_k) c_l <1 e_l, e_k>.

    Terms are summed in lexicographic mode order, so the result is bit-stable.
    """
    modes, amplitudes = u.support()
    if amplitudes.size == 0:
        return 0.0
    gram = region_gram_matrix(modes, region)
    value = float(np.real(np.vdot(amplitudes, gram @ amplitudes)))
    return max(value, 0.0)


def propagate(u: FourierField2D, t: float) -> FourierField2D:
    """
    Free Schrodinger propagator exp(i t Laplacian): mode k picks up the phase
    exp(-4*pi^2*i*|k|^2*t). Exactly unitary and 1/(2*pi)-periodic.
    """
    t = validate_real(t, "t")
    turns = phase_turns(u.k_sq, t)
    return u.with_coeffs(u.coeffs * np.exp(-2j * math.pi * turns))


def helmholtz_residual(u: FourierField2D, h: float) -> FourierField2D:
    """(-h^2*Laplacian - 1) u, the diagonal multiplier 4*pi^2*h^2*|k|^2 - 1."""
    params = HelmholtzParams(h, 1.0)
    return u.with_coeffs(params.multiplier(u.k_sq) * u.coeffs)


class DefectCheck(NamedTuple):
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self) -> Dict[str, Union[float, bool]]:
        return {"lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


def propagation_defect_check(u: FourierField2D, h: float, t: float) -> DefectCheck:
    """
    Compare ||exp(i t (-h^2 Lap - 1)/h) u - u|| with (|t|/h) ||(-h^2 Lap - 1) u||.

    Per mode |exp(i theta) - 1| = 2|sin(theta/2)| <= |theta|, evaluated without
    cancellation.
    """
    params = HelmholtzParams(h, 1.0)
    t = validate_real(t, "t")
    symbol = params.multiplier(u.k_sq)
    theta = t * symbol / params.h
    weights = np.abs(u.coeffs)
    lhs = float(np.linalg.norm(2.0 * np.abs(np.sin(0.5 * theta)) * weights))
    rhs = abs(t) / params.h * helmholtz_residual(u, params.h).norm()
    slack = get_config().get("spectral.defect_slack", 1e-12)
    return DefectCheck(lhs=lhs, rhs=rhs, passed=lhs <= rhs + slack)
