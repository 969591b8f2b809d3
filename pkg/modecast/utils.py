import numpy as np
import pandas as pd

from modecast.exceptions import DimensionError

_MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(seed, index=0):
    """Derives a 64-bit sub-seed from a master seed and a stream index.

    Args:
        seed (int): The master seed. Negative values are taken modulo 2**64.
        index (int): Index of the derived stream. Defaults to 0.

    Returns:
        int: An unsigned 64-bit integer.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _as_float_array(values, name='values'):
    """Converts ``values`` to a one-dimensional float array, rejecting non-finite entries."""
    array = np.asarray(values, dtype=float)
    if array.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must contain only finite values")
    return array


def _values_of(series):
    """Returns the value array of a TimeSeries or an array-like."""
    return np.asarray(getattr(series, 'values', series), dtype=float)


def _check_same_length(first, second, first_name='predicted', second_name='observed'):
    if len(first) != len(second):
        raise DimensionError(f"{first_name} has length {len(first)} but {second_name} has length {len(second)}")


def _to_coordinate(value, name, limit):
    """Attempts to convert a latitude or longitude to a float inside [-limit, limit]."""
    try:
        coordinate = float(value)
    except (ValueError, TypeError):
        raise ValueError(f'{name} values must be in decimal degrees. {value} cannot be converted to a float.')
    if pd.isnull(coordinate) or not -limit <= coordinate <= limit:
        raise ValueError(f'{name} {value} is outside [-{limit}, {limit}]')
    return coordinate


def _validate_coordinates(latitude, longitude):
    """Returns the (latitude, longitude) pair as floats after range validation."""
    return _to_coordinate(latitude, 'Latitude', 90), _to_coordinate(longitude, 'Longitude', 180)
