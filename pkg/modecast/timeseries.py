import numpy as np
import pandas as pd

from modecast.exceptions import (
    InvalidOrderError,
    InvalidSeedError,
    NoOverlapError
)
from modecast.utils import _as_float_array

EPOCH = pd.Timestamp('1970-01-01')


def _to_day(date):
    """Converts a date-like value to an integer day offset from the epoch."""
    return int((pd.Timestamp(date).normalize() - EPOCH).days)


def _to_date(day):
    return (EPOCH + pd.Timedelta(days=int(day))).date()


class TimeSeries(object):
    def __init__(self, start_date, values, name=None):
        """Create TimeSeries

        A daily, gap-free sequence of finite values. Dates are kept as an integer day
        offset from the epoch and all date arithmetic happens on those offsets.

        Args:
            start_date (str, datetime.date, pd.Timestamp, int): Date of the first value. An integer
                is taken as a day offset from 1970-01-01.
            values (array-like): One finite value per day.
            name (str, optional): Identifier of the series.
        """
        if isinstance(start_date, (int, np.integer)):
            self.start_day = int(start_date)
        else:
            self.start_day = _to_day(start_date)
        values = _as_float_array(values, name=f"TimeSeries '{name}' values")
        if len(values) == 0:
            raise ValueError('TimeSeries values must not be empty')
        values.setflags(write=False)
        self.values = values
        self.name = name

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return False
        if self.start_day != other.start_day or self.name != other.name:
            return False
        return np.array_equal(self.values, other.values)

    def __repr__(self):
        return (f"<TimeSeries '{self.name}' ({self.start_date} .. {self.end_date}, "
                f"{len(self)} values)>")

    @property
    def start_date(self):
        return _to_date(self.start_day)

    @property
    def end_day(self):
        """Day offset of the last value (inclusive)."""
        return self.start_day + len(self) - 1

    @property
    def end_date(self):
        return _to_date(self.end_day)

    @property
    def dates(self):
        """DatetimeIndex with one entry per value."""
        return pd.date_range(EPOCH + pd.Timedelta(days=self.start_day), periods=len(self), freq='D')

    def with_values(self, values, name=None, start_day=None):
        """Returns a new TimeSeries sharing this series' dates unless ``start_day`` is given."""
        return TimeSeries(self.start_day if start_day is None else start_day,
                          values,
                          name=self.name if name is None else name)

    def between(self, first_day, last_day):
        """Returns the sub-series covering the day offsets ``first_day`` to ``last_day`` inclusive."""
        if first_day < self.start_day or last_day > self.end_day or first_day > last_day:
            raise NoOverlapError(f"Days {first_day}..{last_day} are outside '{self.name}'")
        offset = first_day - self.start_day
        return self.with_values(self.values[offset:offset + last_day - first_day + 1], start_day=first_day)

    def to_series(self):
        """Returns the values as a pandas Series indexed by date."""
        return pd.Series(np.array(self.values), index=self.dates, name=self.name)

    @classmethod
    def from_series(cls, series, name=None):
        """Builds a TimeSeries from a date-indexed pandas Series.

        The index must be daily and contiguous.
        """
        index = pd.DatetimeIndex(series.index)
        expected = pd.date_range(index[0], periods=len(index), freq='D')
        if not index.equals(expected):
            raise ValueError('Series index must be daily with no gaps')
        return cls(index[0], series.to_numpy(dtype=float), name=name if name is not None else series.name)


def difference(x, d):
    """Returns the d-th order difference of a series.

    Args:
        x (TimeSeries): Series to difference.
        d (int): Non-negative differencing order, smaller than the series length.

    Returns:
        TimeSeries: Series shorter by ``d`` values, starting ``d`` days later.
    """
    if d < 0 or d >= len(x):
        raise InvalidOrderError(f"Differencing order {d} is invalid for a series of length {len(x)}")
    if d == 0:
        return x
    return x.with_values(np.diff(x.values, n=d), start_day=x.start_day + d)


def integrate(dx, d, heads):
    """Inverts :func:`difference` given the first ``d`` values of the original series.

    Args:
        dx (TimeSeries): A d-times differenced series.
        d (int): Differencing order to undo.
        heads (sequence[float]): The first ``d`` values of the undifferenced series.

    Returns:
        TimeSeries: Series longer by ``d`` values, starting ``d`` days earlier.
    """
    heads = np.asarray(heads, dtype=float)
    if d < 0 or len(heads) != d:
        raise InvalidSeedError(f"Integrating order {d} needs {d} seed value(s), got {len(heads)}")
    if d == 0:
        return dx
    values = np.asarray(dx.values, dtype=float)
    for level in range(d - 1, -1, -1):
        seed = np.diff(heads, n=level)[0]
        values = np.concatenate([[seed], seed + np.cumsum(values)])
    return dx.with_values(values, start_day=dx.start_day - d)


def align(series):
    """Trims every series to the common overlapping date range.

    Args:
        series (list[TimeSeries]): Series to align.

    Returns:
        list[TimeSeries]: Series sharing the same start date and length, in input order.
    """
    if not series:
        raise NoOverlapError('No series to align')
    first_day = max(s.start_day for s in series)
    last_day = min(s.end_day for s in series)
    if first_day > last_day:
        names = ', '.join(str(s.name) for s in series)
        raise NoOverlapError(f"Series {names} share no common dates")
    return [s if (s.start_day == first_day and s.end_day == last_day) else s.between(first_day, last_day)
            for s in series]
