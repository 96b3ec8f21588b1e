"""Input validation utilities for the torus observability laboratory."""

import math
import numbers
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from .error_handlers import LaboratoryError


class ValidationError(LaboratoryError):
    """Custom exception for validation errors (invalid arguments)."""

    pass


def _finite(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value}")
    return value


def validate_eps(eps: float, name: str = "eps") -> float:
    """
    Validate a positive finite scale parameter.

    Args:
        eps: Candidate value
        name: Parameter name used in the error message

    Returns:
        eps as float

    Raises:
        ValidationError: If eps is non-finite or not positive
    """
    eps = _finite(eps, name)
    if eps <= 0.0:
        raise ValidationError(f"{name} must be positive, got {eps}")
    return eps


def validate_ball_radius(eps: float, name: str = "eps") -> float:
    """
    Validate a ball radius on the unit torus, which must lie in (0, 1/2).

    Raises:
        ValidationError: If the ball would wrap onto itself
    """
    eps = validate_eps(eps, name)
    if eps >= 0.5:
        raise ValidationError(f"{name} must be < 1/2 (ball wraps onto itself), got {eps}")
    return eps


def validate_int(value: int, name: str) -> int:
    """
    Validate an integer parameter (numpy integers and integral floats accepted).

    Raises:
        ValidationError: If value is not integral
    """
    if isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ValidationError(f"{name} must be an integer, got {value!r}")


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    """
    Validate an integer parameter with a lower bound.

    Raises:
        ValidationError: If value is not an integer or is below minimum
    """
    value = validate_int(value, name)
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


def validate_positive(value: float, name: str) -> float:
    """Validate a strictly positive finite real."""
    value = _finite(value, name)
    if value <= 0.0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def validate_real(value: float, name: str) -> float:
    """Validate a finite real."""
    return _finite(value, name)


def validate_open_unit(value: float, name: str) -> float:
    """Validate a real in the open interval (0, 1)."""
    value = _finite(value, name)
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name} must lie in (0, 1), got {value}")
    return value


def validate_frequency_set(frequencies: Iterable[int]) -> List[int]:
    """
    Validate a set of distinct integer frequencies.

    Returns:
        Frequencies sorted ascending

    Raises:
        ValidationError: If empty or containing repeats
    """
    values = [validate_int(k, "frequency") for k in frequencies]
    if not values:
        raise ValidationError("frequency set must contain at least one frequency")
    if len(set(values)) != len(values):
        raise ValidationError(f"frequencies must be distinct, got {values}")
    return sorted(values)


def validate_eps_list(eps_list: Iterable[float], minimum_count: int = 4) -> List[float]:
    """
    Validate a list of ball radii for scaling studies.

    Raises:
        ValidationError: If fewer than minimum_count values or any radius is invalid
    """
    values = [validate_ball_radius(e) for e in eps_list]
    if len(values) < minimum_count:
        raise ValidationError(
            f"eps_list needs at least {minimum_count} values, got {len(values)}"
        )
    return values


def validate_lattice_vector(a: int, b: int) -> Tuple[int, int]:
    """Validate a non-zero integer pair."""
    a = validate_int(a, "a")
    b = validate_int(b, "b")
    if a == 0 and b == 0:
        raise ValidationError("direction (0, 0) is not a direction")
    return a, b


def validate_output_path(output_path: str) -> Path:
    """
    Validate output file path.

    Args:
        output_path: Path to output file

    Returns:
        Path object

    Raises:
        ValidationError: If path is invalid
    """
    path = Path(output_path)

    if not path.parent.exists():
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except Exception as e:
            raise ValidationError(f"Cannot create output directory: {e}")

    try:
        test_file = path.parent / ".write_test"
        test_file.touch()
        test_file.unlink()
    except Exception as e:
        raise ValidationError(f"Cannot write to output location: {e}")

    return path


def validate_choice(value: Optional[str], name: str, choices: Tuple[str, ...]) -> str:
    """Validate a string against a fixed set of choices."""
    if value not in choices:
        raise ValidationError(f"{name} must be one of {choices}, got {value!r}")
    return value
