"""Bessel function of the first kind, order one.

The domain is split at ``series_cutoff`` (12 by default). Below it the
ascending power series

    J1(x) = sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)

is summed to full double precision; above it the Hankel asymptotic expansion

    J1(x) ~ sqrt(2/(pi x)) * (P(x) cos(x - 3pi/4) - Q(x) sin(x - 3pi/4))

is summed up to its smallest term, which is below 1e-10 for x >= 12.
"""

from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

SERIES_TERMS = 40
HANKEL_MAX_TERMS = 60
THREE_PI_OVER_4 = 0.75 * np.pi


def _ascending_series(x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half.copy()
    total = term.copy()
    half_sq = half * half
    for k in range(1, SERIES_TERMS):
        term = -term * half_sq / (k * (k + 1))
        total += term
    return total


def _hankel_asymptotic(x: np.ndarray) -> np.ndarray:
    mu = 4.0  # 4 nu^2 for nu = 1
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    previous = np.abs(term)
    active = np.ones(x.shape, dtype=bool)

    for k in range(1, HANKEL_MAX_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        magnitude = np.abs(term)
        # stop each element at its smallest term
        active &= magnitude < previous
        if not active.any():
            break
        contribution = np.where(active, term, 0.0)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * contribution
        else:
            p += sign * contribution
        previous = np.where(active, magnitude, previous)

    chi = x - THREE_PI_OVER_4
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j1(x: ArrayLike, series_cutoff: float = 12.0) -> ArrayLike:
    """
    Evaluate J1 elementwise.

    Args:
        x: Scalar or array argument
        series_cutoff: Switch point between series and asymptotic expansion

    Returns:
        J1(x) with the same shape as x (a float for scalar input)
    """
    scalar = np.ndim(x) == 0
    values = np.atleast_1d(np.asarray(x, dtype=float))
    sign = np.sign(values)
    magnitude = np.abs(values)

    result = np.zeros_like(magnitude)
    small = magnitude <= series_cutoff
    if small.any():
        result[small] = _ascending_series(magnitude[small])
    if (~small).any():
        result[~small] = _hankel_asymptotic(magnitude[~small])

    result *= sign  # J1 is odd
    if scalar:
        return float(result[0])
    return result.reshape(np.shape(x))
