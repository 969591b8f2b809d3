import warnings

import numpy as np

from modecast.config import config
from modecast.exceptions import (
    AlignmentError,
    ClampedValuesWarning,
    DayRangeError,
    EmptyInputError,
    NegativeCountsWarning,
    TooShortError
)
from modecast.graph import SpectralFilter, _filter_rows, gft
from modecast.panel import CASES_VARIABLE
from modecast.timeseries import align
from modecast.utils import _check_same_length, _values_of


class ErrorSeries(object):
    def __init__(self, city_id, errors, threshold, significant_days):
        """Create ErrorSeries

        Args:
            city_id (str): City the errors belong to.
            errors (TimeSeries): Relative model error per day.
            threshold (float): Mean plus a multiple of the sample standard deviation of the errors.
            significant_days (set[int]): 1-based positions in ``errors`` whose value exceeds the threshold.
        """
        self.city_id = city_id
        self.errors = errors
        self.threshold = float(threshold)
        self.significant_days = set(significant_days)

    def __repr__(self):
        return (f"<ErrorSeries '{self.city_id}' ({len(self.errors)} days, threshold={self.threshold:.4g}, "
                f"{len(self.significant_days)} significant)>")


class AnomalyReport(object):
    def __init__(self, city_id, accentuated, threshold, anomalous_days, num_days, first_day,
                 match_fraction=0.0, negative_days=0, significant_days=None, matched_days=None):
        """Create AnomalyReport

        Days are numbered from 1 over the date range shared by every city of the panel.

        Args:
            city_id (str): City the report belongs to.
            accentuated (TimeSeries): Accentuated daily variation, days 2 .. ``num_days``.
            threshold (float): Threshold over the accentuated variation.
            anomalous_days (set[int]): Days whose accentuated variation exceeds the threshold.
            num_days (int): Number of days in the shared date range.
            first_day (int): Day offset of day 1.
            match_fraction (float): Share of eligible significant-error days matched by an anomaly.
            negative_days (int): Number of days with a negative observed count.
            significant_days (set[int], optional): Days with a significant model error.
            matched_days (set[int], optional): Significant-error days adjacent to an anomaly.
        """
        self.city_id = city_id
        self.accentuated = accentuated
        self.threshold = float(threshold)
        self.anomalous_days = set(anomalous_days)
        self.num_days = int(num_days)
        self.first_day = int(first_day)
        self.match_fraction = float(match_fraction)
        self.negative_days = int(negative_days)
        self.significant_days = set(significant_days or ())
        self.matched_days = set(matched_days or ())

    def __repr__(self):
        return (f"<AnomalyReport '{self.city_id}' ({len(self.anomalous_days)} anomalous of {self.num_days} days, "
                f"match_fraction={self.match_fraction:.4f})>")

    @property
    def eligible_days(self):
        """Significant-error days with a neighbour on each side."""
        return {t for t in self.significant_days if 1 < t < self.num_days}

    def day_offset(self, t):
        """Day offset of the 1-based day ``t``."""
        return self.first_day + t - 1


def model_errors(observed, predicted, error_cap=None):
    """Relative model error ``|1 - c / c_hat|`` per day.

    A zero prediction yields ``error_cap`` unless the observation is zero too, in which case
    the error is 0.

    Args:
        observed (sequence[float]): Observed counts ``c``.
        predicted (sequence[float]): Predicted counts ``c_hat``, same length.
        error_cap (float, optional): Error assigned to a zero prediction. Defaults to the
            ``error_cap`` config option.

    Returns:
        np.ndarray: The errors.
    """
    return _relative_change(_values_of(observed), _values_of(predicted), error_cap, 'observed', 'predicted')


def daily_variation(cases, error_cap=None):
    """Daily variation ``|1 - c_t / c_{t-1}|`` for every day after the first.

    A zero previous count yields 0 when the current count is zero too and ``error_cap`` otherwise.

    Args:
        cases (sequence[float]): At least two daily counts.
        error_cap (float, optional): Variation assigned after a zero count.

    Returns:
        np.ndarray: One variation per day after the first.
    """
    values = _values_of(cases)
    if len(values) < 2:
        raise TooShortError(f'Daily variation needs at least 2 values, got {len(values)}')
    return _relative_change(values[1:], values[:-1], error_cap, 'current', 'previous')


def _relative_change(numerator, denominator, error_cap, numerator_name, denominator_name):
    _check_same_length(numerator, denominator, numerator_name, denominator_name)
    error_cap = float(config._resolve('error_cap', error_cap))
    zero = denominator == 0
    safe = np.where(zero, 1.0, denominator)
    changes = np.abs(1 - numerator / safe)
    return np.where(zero, np.where(numerator == 0, 0.0, error_cap), changes)


def threshold(values, multiplier=None):
    """Mean plus ``multiplier`` sample standard deviations.

    Args:
        values (sequence[float]): Non-empty values.
        multiplier (float, optional): Defaults to the ``threshold_multiplier`` config option.

    Returns:
        float: The threshold. A single value has a standard deviation of 0.
    """
    values = _values_of(values)
    if len(values) == 0:
        raise EmptyInputError('Cannot compute a threshold over no values')
    multiplier = float(config._resolve('threshold_multiplier', multiplier))
    spread = np.std(values, ddof=1) if len(values) > 1 else 0.0
    return float(np.mean(values) + multiplier * spread)


def _days_above(values, limit):
    """1-based positions whose value exceeds ``limit``."""
    return {int(k) + 1 for k in np.flatnonzero(values > limit)}


def error_series(city_id, observed, predicted, multiplier=None, error_cap=None):
    """Builds the ErrorSeries of a city from observed and predicted counts.

    Args:
        city_id (str): City identifier.
        observed (TimeSeries): Observed counts.
        predicted (TimeSeries): Predicted counts; trimmed with ``observed`` to their common dates.
        multiplier (float, optional): Threshold multiplier.
        error_cap (float, optional): Error assigned to a zero prediction.

    Returns:
        ErrorSeries: Errors, threshold and significant days.
    """
    observed, predicted = align([observed, predicted])
    multiplier = float(config._resolve('threshold_multiplier', multiplier))
    errors = model_errors(observed, predicted, error_cap)
    limit = threshold(errors, multiplier)
    return ErrorSeries(city_id,
                       observed.with_values(errors, name=f'{city_id}_errors'),
                       limit,
                       _days_above(errors, limit))


def _case_matrix(panel, g):
    if list(g.node_ids) != list(panel.city_ids):
        raise AlignmentError('Graph nodes must match the panel cities in the same order')
    first_day, last_day = panel.overlap()
    rows = [city.cases.between(first_day, last_day).values for city in panel]
    return np.column_stack(rows), first_day


def detect_anomalies(panel, g, filter=None, multiplier=None, error_cap=None):
    """Detects anomalous daily variations with a spectral accentuator.

    For every day, the daily variations of all cities form a graph signal whose high graph
    frequencies are accentuated. Each city's accentuated variation is thresholded like the
    model errors.

    Args:
        panel (PanelDataset): Case data; only the dates shared by every city are used.
        g (CityGraph): Graph whose node order matches the panel city order.
        filter (SpectralFilter, optional): An accentuator. Defaults to one with the
            ``filter_alpha`` config option.
        multiplier (float, optional): Threshold multiplier.
        error_cap (float, optional): Variation assigned after a zero count.

    Returns:
        dict[str -> AnomalyReport]: One report per city, in panel order.
    """
    filter = filter or SpectralFilter.accentuate()
    if filter.kind != 'accentuate':
        raise ValueError(f"Anomaly detection needs an accentuate filter, got '{filter.kind}'")
    multiplier = float(config._resolve('threshold_multiplier', multiplier))
    cases, first_day = _case_matrix(panel, g)
    num_days = cases.shape[0]
    if num_days < 2:
        raise TooShortError(f'Anomaly detection needs at least 2 shared days, got {num_days}')

    variations = np.column_stack([daily_variation(cases[:, i], error_cap) for i in range(len(g))])
    accentuated = _filter_rows(g, variations, filter)

    reports = {}
    for i, city in enumerate(panel):
        negative_days = int(np.sum(cases[:, i] < 0))
        if negative_days:
            warnings.warn(NegativeCountsWarning().get_warning_message(city.city_id, negative_days),
                          NegativeCountsWarning)
        values = accentuated[:, i]
        limit = threshold(values, multiplier)
        # position k of the variation belongs to day k + 2
        anomalous = {day + 1 for day in _days_above(values, limit)}
        reports[city.city_id] = AnomalyReport(city.city_id,
                                              city.cases.with_values(values, name=f'{city.city_id}_accentuated',
                                                                     start_day=first_day + 1),
                                              limit,
                                              anomalous,
                                              num_days,
                                              first_day,
                                              negative_days=negative_days)
    return reports


def _matched_days(ce, ca, nc):
    if nc < 1:
        raise DayRangeError(f'Number of days must be at least 1, got {nc}')
    for name, days in (('CE', ce), ('CA', ca)):
        outside = sorted(t for t in days if not 1 <= t <= nc)
        if outside:
            raise DayRangeError(f"{name} day(s) {', '.join(map(str, outside))} outside 1..{nc}")
    anomalies = set(ca)
    eligible = {t for t in ce if 1 < t < nc}
    return eligible, {t for t in eligible if anomalies & {t - 1, t, t + 1}}


def match_errors_anomalies(ce, ca, nc):
    """Share of significant-error days that sit next to an anomalous day.

    A day ``t`` of ``ce`` with ``1 < t < nc`` is matched when ``t - 1``, ``t`` or ``t + 1``
    belongs to ``ca``.

    Args:
        ce (set[int]): Days with a significant model error.
        ca (set[int]): Days with an anomalous variation.
        nc (int): Number of days; every day must lie in ``1 .. nc``.

    Returns:
        float: Matched over eligible days, 0 when no day is eligible.
    """
    eligible, matched = _matched_days(ce, ca, nc)
    if not eligible:
        return 0.0
    return len(matched) / len(eligible)


def compare(report, errors):
    """Matches a city's significant model errors against its anomalous days.

    Args:
        report (AnomalyReport): Output of :func:`detect_anomalies` for the city.
        errors (ErrorSeries): Model errors of the same city. Days outside the report's date
            range are ignored.

    Returns:
        AnomalyReport: A copy of ``report`` with the significant, matched days and the match fraction.
    """
    significant = set()
    for t in errors.significant_days:
        day = errors.errors.start_day + t - 1 - report.first_day + 1
        if 1 <= day <= report.num_days:
            significant.add(day)
    eligible, matched = _matched_days(significant, report.anomalous_days, report.num_days)
    return AnomalyReport(report.city_id,
                         report.accentuated,
                         report.threshold,
                         report.anomalous_days,
                         report.num_days,
                         report.first_day,
                         match_fraction=len(matched) / len(eligible) if eligible else 0.0,
                         negative_days=report.negative_days,
                         significant_days=significant,
                         matched_days=matched)


def band_energy(g, signal, cutoff=None):
    """Energy of the graph Fourier coefficients above the low-pass cutoff.

    Args:
        g (CityGraph): Graph providing the spectrum.
        signal (GraphSignal or array-like): One value per node.
        cutoff (float, optional): Kept fraction of the spectrum.

    Returns:
        float: Sum of the squared coefficients that a low-pass filter with ``cutoff`` removes.
    """
    kept = SpectralFilter.lowpass(cutoff).num_kept(len(g))
    coefficients = gft(g, signal).values
    return float(np.sum(coefficients[kept:] ** 2))


def normalize_cases(panel, g, cutoff=None):
    """Low-pass filters the cross-city case counts of every day.

    Filtered counts below zero are clamped to zero; the number of clamped values is stored in
    the ``clamped_values`` metadata entry of the returned panel. Days outside the date range
    shared by every city keep their values.

    Args:
        panel (PanelDataset): Case data.
        g (CityGraph): Graph whose node order matches the panel city order.
        cutoff (float, optional): Kept fraction of the spectrum. Defaults to the ``lowpass_cutoff``
            config option.

    Returns:
        PanelDataset: The panel with normalized case counts.
    """
    lowpass = SpectralFilter.lowpass(cutoff)
    cases, first_day = _case_matrix(panel, g)
    filtered = _filter_rows(g, cases, lowpass)
    clamped = int(np.sum(filtered < -1e-9))
    if clamped:
        warnings.warn(ClampedValuesWarning().get_warning_message(clamped), ClampedValuesWarning)
    filtered = np.maximum(filtered, 0.0)

    cities = []
    for i, city in enumerate(panel):
        values = np.array(city.cases.values, dtype=float)
        offset = first_day - city.cases.start_day
        values[offset:offset + len(filtered)] = filtered[:, i]
        cities.append(city.replace(CASES_VARIABLE, city.cases.with_values(values)))
    return panel.replace_cities(cities, metadata={'clamped_values': clamped})
