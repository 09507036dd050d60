"""Utility functions for number formatting, parsing and polynomial algebra."""

import math
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as P


def format_float(value: float) -> str:
    """
    Format a float with the shortest representation that round-trips.

    Args:
        value: The number to format

    Returns:
        The shortest round-trip string (at most 17 significant digits)

    Examples:
        >>> format_float(0.1)
        '0.1'
        >>> format_float(2.0)
        '2.0'
    """
    return repr(float(value))


def round_significant(value: float, digits: int = 15) -> float | None:
    """
    Round a float to a number of significant digits for JSON output.

    Args:
        value: The number to round
        digits: Significant digits to keep

    Returns:
        The rounded float, or None when value is not finite

    Examples:
        >>> round_significant(1/3, 4)
        0.3333
        >>> round_significant(float('nan')) is None
        True
    """
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.{digits}g}")


def jsonable(obj: Any, digits: int = 15) -> Any:
    """
    Convert nested results into JSON-ready values with rounded floats.

    Complex numbers become [re, im] pairs; numpy scalars and arrays become
    plain Python values.

    Args:
        obj: The object to convert
        digits: Significant digits kept for every float

    Returns:
        A structure of dicts, lists, strings, ints, floats and None
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_significant(obj.real, digits), round_significant(obj.imag, digits)]
    if isinstance(obj, (float, np.floating)):
        return round_significant(obj, digits)
    return obj


def parse_complex(value: Any) -> complex:
    """
    Parse a complex number from a config value.

    Accepts plain numbers, [re, im] pairs and Python-style strings.

    Args:
        value: The raw value

    Returns:
        The parsed complex number

    Raises:
        ValueError: If the value cannot be read as a finite complex number

    Examples:
        >>> parse_complex([1, -2])
        (1-2j)
        >>> parse_complex("0.5+1j")
        (0.5+1j)
        >>> parse_complex(3)
        (3+0j)
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        result = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if isinstance(re, bool) or isinstance(im, bool):
            raise ValueError(f"expected [re, im], got {value!r}")
        result = complex(float(re), float(im))
    elif isinstance(value, str):
        result = complex(value.replace(" ", "").replace("i", "j"))
    else:
        raise ValueError(f"expected a number, [re, im] or string, got {value!r}")
    if not (math.isfinite(result.real) and math.isfinite(result.imag)):
        raise ValueError(f"complex value must be finite, got {value!r}")
    return result


def trim_coefficients(coeffs: Sequence[complex], tol: float = 0.0) -> np.ndarray:
    """
    Drop trailing (highest-degree) coefficients whose magnitude is <= tol.

    Args:
        coeffs: Ascending-degree coefficients
        tol: Magnitude treated as zero

    Returns:
        Complex array with at least one entry

    Examples:
        >>> trim_coefficients([1, 2, 0, 0]).tolist()
        [(1+0j), (2+0j)]
    """
    arr = np.asarray(coeffs, dtype=complex)
    if arr.size == 0:
        return np.zeros(1, dtype=complex)
    nonzero = np.nonzero(np.abs(arr) > tol)[0]
    if nonzero.size == 0:
        return np.zeros(1, dtype=complex)
    return arr[: nonzero[-1] + 1]


def homogenized_compose(
    coeffs: Sequence[complex],
    num: Sequence[complex],
    den: Sequence[complex],
    degree: int,
) -> np.ndarray:
    """
    Compose a polynomial with a rational function and clear denominators.

    Returns the coefficients of sum_k c_k num^k den^(degree-k), which equals
    p(num/den) * den^degree for degree >= deg p.

    Args:
        coeffs: Ascending coefficients c_k of p
        num: Ascending coefficients of the numerator
        den: Ascending coefficients of the denominator
        degree: Homogenization degree (at least deg p)

    Returns:
        Ascending complex coefficients

    Examples:
        >>> homogenized_compose([0, 1], [0, 1], [1], 1).tolist()
        [0j, (1+0j)]
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if degree < len(coeffs) - 1:
        raise ValueError("homogenization degree below polynomial degree")
    total = np.zeros(1, dtype=complex)
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        term = P.polymul(P.polypow(num, k), P.polypow(den, degree - k))
        total = P.polyadd(total, c * term)
    return np.asarray(total, dtype=complex)


def real_quadratic_modulus(alpha: complex, beta: complex) -> np.ndarray:
    """
    Ascending coefficients of |alpha*x + beta|^2 as a real polynomial in x.

    Args:
        alpha: Coefficient of x
        beta: Constant term

    Returns:
        Real array [|beta|^2, 2 Re(alpha conj(beta)), |alpha|^2]

    Examples:
        >>> real_quadratic_modulus(1, 1j).tolist()
        [1.0, 0.0, 1.0]
    """
    return np.array([
        abs(beta) ** 2,
        2.0 * (alpha * np.conj(beta)).real,
        abs(alpha) ** 2,
    ])
