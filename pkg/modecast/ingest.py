import logging
import os

import numpy as np
import pandas as pd

from modecast.arimax import forecast, select_order
from modecast.config import config
from modecast.exceptions import (
    AlignmentError,
    DateOrderError,
    ImputationError,
    InvalidLagError,
    ParseError,
    UnknownCityError
)
from modecast.panel import (
    CASES_VARIABLE,
    METEOROLOGICAL_VARIABLES,
    MOBILITY_VARIABLES,
    CityRecord,
    PanelDataset
)
from modecast.timeseries import TimeSeries, _to_day

logger = logging.getLogger(__name__)

CASES_COLUMNS = ('date', 'city_id', CASES_VARIABLE)
METEOROLOGICAL_COLUMNS = ('date', 'city_id') + METEOROLOGICAL_VARIABLES
MOBILITY_COLUMNS = ('date', 'city_id') + MOBILITY_VARIABLES
COORDINATE_COLUMNS = ('city_id', 'lat', 'lon')
MANIFEST_PATH_KEYS = ('cases_path', 'meteo_path', 'mobility_path', 'coords_path')


class DatasetManifest(object):
    def __init__(self, cases_path, coords_path, meteo_path=None, mobility_path=None,
                 date_format='%Y-%m-%d', lag_days=None, options=None):
        """Create DatasetManifest

        Args:
            cases_path (str): CSV with columns ``date,city_id,new_cases``.
            coords_path (str): CSV with columns ``city_id,lat,lon``.
            meteo_path (str, optional): CSV with the meteorological columns.
            mobility_path (str, optional): CSV with the mobility columns.
            date_format (str): strftime pattern of the date columns. Defaults to ISO-8601.
            lag_days (int, optional): Days by which exogenous values lead the cases. Defaults to
                the ``lag_days`` config option.
            options (dict, optional): Further run settings named like config options.
        """
        self.cases_path = cases_path
        self.coords_path = coords_path
        self.meteo_path = meteo_path
        self.mobility_path = mobility_path
        self.date_format = date_format
        self.lag_days = int(config._resolve('lag_days', lag_days))
        if self.lag_days < 0:
            raise InvalidLagError(f'lag_days must be non-negative, got {self.lag_days}')
        self.options = dict(options or {})

    def __repr__(self):
        return f"<DatasetManifest cases='{self.cases_path}' (lag {self.lag_days} days)>"


class GapReport(object):
    def __init__(self, city_id, variable, gap_start, gap_end, imputation_method='pending'):
        """Create GapReport

        Args:
            city_id (str): City with the missing stretch.
            variable (str): Variable with the missing stretch.
            gap_start (int): 0-based index of the first missing day in the city's series.
            gap_end (int): 0-based index of the last missing day, inclusive.
            imputation_method (str): How the gap was filled; ``pending`` until imputed.
        """
        if gap_start > gap_end or gap_start < 0:
            raise ValueError(f'Invalid gap bounds {gap_start}..{gap_end}')
        self.city_id = city_id
        self.variable = variable
        self.gap_start = int(gap_start)
        self.gap_end = int(gap_end)
        self.imputation_method = imputation_method

    def __eq__(self, other):
        return isinstance(other, GapReport) and vars(self) == vars(other)

    def __repr__(self):
        return (f"<GapReport '{self.city_id}'.{self.variable} days {self.gap_start}..{self.gap_end} "
                f"({self.imputation_method})>")

    def __len__(self):
        return self.gap_end - self.gap_start + 1

    def with_method(self, imputation_method):
        return GapReport(self.city_id, self.variable, self.gap_start, self.gap_end, imputation_method)


def read_manifest(path):
    """Reads a ``key = value`` manifest file.

    Blank lines and lines starting with ``#`` are ignored. Relative paths are resolved against
    the manifest's directory. Keys other than the four paths, ``date_format`` and ``lag_days``
    must be config option names and are kept as run options.

    Args:
        path (str): Location of the manifest.

    Returns:
        DatasetManifest: The parsed manifest.
    """
    base = os.path.dirname(os.path.abspath(path))
    entries = {}
    number = 0
    with open(path, 'r') as file:
        for number, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ParseError(path, number, f"expected 'key = value', got '{line}'")
            key, value = (part.strip() for part in line.split('=', 1))
            if key in MANIFEST_PATH_KEYS:
                value = os.path.join(base, value)
            elif key not in ('date_format', 'lag_days') and key not in config._data:
                raise ParseError(path, number, f"unknown key '{key}'")
            entries[key] = value
    if 'cases_path' not in entries or 'coords_path' not in entries:
        raise ParseError(path, number, 'cases_path and coords_path are required')
    options = {key: value for key, value in entries.items()
               if key not in MANIFEST_PATH_KEYS and key not in ('date_format', 'lag_days')}
    return DatasetManifest(entries['cases_path'],
                           entries['coords_path'],
                           meteo_path=entries.get('meteo_path'),
                           mobility_path=entries.get('mobility_path'),
                           date_format=entries.get('date_format', '%Y-%m-%d'),
                           lag_days=int(entries['lag_days']) if 'lag_days' in entries else None,
                           options=options)


def _read_csv(path, columns):
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ParseError(path, 1, f"missing column(s) {', '.join(missing)}")
    return frame[list(columns)]


def _parse_numbers(frame, columns, path):
    """Parses numeric columns; blank cells become NaN."""
    parsed = {}
    for column in columns:
        raw = frame[column].str.strip()
        values = pd.to_numeric(raw.replace('', np.nan), errors='coerce')
        bad = (values.isna() & (raw != '')) | (~np.isfinite(values.fillna(0.0)))
        if bad.any():
            idx = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(path, idx + 2, f"invalid {column} value '{frame[column].iloc[idx]}'")
        parsed[column] = values.to_numpy(dtype=float)
    return parsed


def _parse_dates(frame, path, date_format):
    dates = pd.to_datetime(frame['date'].str.strip(), format=date_format, errors='coerce')
    if dates.isna().any():
        idx = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise ParseError(path, idx + 2, f"invalid date '{frame['date'].iloc[idx]}'")
    return np.array([_to_day(date) for date in dates], dtype=int)


def _read_daily(path, columns, date_format, known_cities):
    """Returns {city_id: (days, {column: values})} in file order."""
    frame = _read_csv(path, columns)
    days = _parse_dates(frame, path, date_format)
    values = _parse_numbers(frame, columns[2:], path)
    city_ids = frame['city_id'].str.strip().to_numpy()
    by_city = {}
    for idx, city_id in enumerate(city_ids):
        if city_id == '':
            raise ParseError(path, idx + 2, 'empty city_id')
        if known_cities is not None and city_id not in known_cities:
            raise UnknownCityError(city_id, path)
        by_city.setdefault(city_id, []).append(idx)
    result = {}
    for city_id, rows in by_city.items():
        city_days = days[rows]
        steps = np.diff(city_days)
        if np.any(steps <= 0):
            position = rows[int(np.flatnonzero(steps <= 0)[0]) + 1]
            raise DateOrderError(f"{path}, line {position + 2}: dates of city '{city_id}' are not strictly increasing")
        result[city_id] = (city_days, {column: values[column][rows] for column in columns[2:]})
    return result


def _read_coordinates(path):
    frame = _read_csv(path, COORDINATE_COLUMNS)
    coordinates = {}
    for idx, row in enumerate(frame.itertuples(index=False)):
        city_id = row.city_id.strip()
        try:
            coordinates[city_id] = (float(row.lat), float(row.lon))
        except ValueError:
            raise ParseError(path, idx + 2, f"invalid coordinates '{row.lat}', '{row.lon}'")
        if not np.all(np.isfinite(coordinates[city_id])):
            raise ParseError(path, idx + 2, f"invalid coordinates '{row.lat}', '{row.lon}'")
    return coordinates


def _reindex(days, values, first_day, last_day):
    series = pd.Series(values, index=days)
    return series.reindex(np.arange(first_day, last_day + 1)).to_numpy(dtype=float)


def _gaps_of(values):
    """(start, end) index pairs of every run of NaN values."""
    missing = np.concatenate([[False], np.isnan(values), [False]]).astype(int)
    edges = np.diff(missing)
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1))


def _placeholder_fill(values):
    return pd.Series(values).ffill().bfill().to_numpy(dtype=float)


def load_panel(manifest):
    """Loads the case, meteorological, mobility and coordinate files of a dataset.

    Each city's series start at its first date with a positive case count (its first date when
    it has none) and end at the last date of the cases file. Missing days and blank cells are
    reported as gaps and filled with a placeholder until :func:`impute_gaps` replaces them.
    A variable a city has no value for at all is left out of that city's record.

    Args:
        manifest (DatasetManifest): Locations and format of the files.

    Returns:
        (PanelDataset, list[GapReport]): The panel, ordered by city id, and its gaps.
    """
    cases = _read_daily(manifest.cases_path, CASES_COLUMNS, manifest.date_format, None)
    coordinates = _read_coordinates(manifest.coords_path)
    for city_id in coordinates:
        if city_id not in cases:
            raise UnknownCityError(city_id, manifest.coords_path)
    secondary = {}
    for path, columns in ((manifest.meteo_path, METEOROLOGICAL_COLUMNS),
                          (manifest.mobility_path, MOBILITY_COLUMNS)):
        if path:
            secondary[columns] = _read_daily(path, columns, manifest.date_format, set(cases))

    last_day = max(days[-1] for days, _ in cases.values())
    cities, gaps = [], []
    for city_id in sorted(cases):
        if city_id not in coordinates:
            raise ParseError(manifest.coords_path, len(coordinates) + 1, f"no coordinates for city '{city_id}'")
        days, values = cases[city_id]
        positive = np.flatnonzero(values[CASES_VARIABLE] > 0)
        first_day = int(days[positive[0]] if len(positive) else days[0])

        columns = {CASES_VARIABLE: _reindex(days, values[CASES_VARIABLE], first_day, last_day)}
        for source in secondary.values():
            if city_id not in source:
                continue
            source_days, source_values = source[city_id]
            for variable, column in source_values.items():
                reindexed = _reindex(source_days, column, first_day, last_day)
                if not np.all(np.isnan(reindexed)):
                    columns[variable] = reindexed

        series = {}
        for variable, column in columns.items():
            for start, end in _gaps_of(column):
                gaps.append(GapReport(city_id, variable, start, end))
            series[variable] = TimeSeries(first_day, _placeholder_fill(column), name=variable)
        cities.append(CityRecord(city_id, *coordinates[city_id],
                                 cases=series.pop(CASES_VARIABLE),
                                 meteorological={k: v for k, v in series.items() if k in METEOROLOGICAL_VARIABLES},
                                 mobility={k: v for k, v in series.items() if k in MOBILITY_VARIABLES}))
    logger.info('Loaded %d cities with %d gap(s) from %s', len(cities), len(gaps), manifest.cases_path)
    return PanelDataset(cities, metadata={'gaps': gaps}), gaps


def impute_gaps(panel, gaps, min_history=None, bounds=None):
    """Fills gaps with ARIMA forecasts trained on the days before each gap.

    Gaps of one series are filled from the earliest on, so a later gap's history includes the
    values imputed for earlier ones. Non-gap values are left untouched.

    Args:
        panel (PanelDataset): Panel with placeholder-filled gaps.
        gaps (list[GapReport]): Gaps to fill.
        min_history (int, optional): Minimum number of days before a gap. Defaults to the
            ``min_history`` config option.
        bounds (ArimaxOrder, optional): Upper bounds of the order search.

    Returns:
        PanelDataset: The imputed panel. Its ``gaps`` metadata entry lists the gaps with the
        order used for each one.
    """
    if not gaps:
        return panel
    min_history = int(config._resolve('min_history', min_history))
    filled = {}
    reports = []
    for gap in sorted(gaps, key=lambda gap: (gap.city_id, gap.variable, gap.gap_start)):
        key = (gap.city_id, gap.variable)
        series = filled[key] if key in filled else panel[gap.city_id].series(gap.variable)
        if gap.gap_end >= len(series):
            raise ImputationError(gap, f'gap ends after the series ({len(series)} days)')
        if gap.gap_start < min_history:
            raise ImputationError(gap, f'needs {min_history} training days, has {gap.gap_start}')
        history = series.with_values(series.values[:gap.gap_start])
        try:
            model = select_order(history, [], bounds)
        except Exception as error:
            raise ImputationError(gap, str(error)) from error
        values = np.array(series.values, dtype=float)
        values[gap.gap_start:gap.gap_end + 1] = forecast(model, history, len(gap)).values
        filled[key] = series.with_values(values)
        method = f'arima({model.order.p},{model.order.d},{model.order.q})'
        logger.info("Imputed '%s'.%s days %d..%d with %s", gap.city_id, gap.variable, gap.gap_start, gap.gap_end,
                    method)
        reports.append(gap.with_method(method))

    cities = []
    for city in panel:
        for (city_id, variable), series in filled.items():
            if city_id == city.city_id:
                city = city.replace(variable, series)
        cities.append(city)
    return panel.replace_cities(cities, metadata={'gaps': reports})


def apply_lag(cases, exog, lag_days=None):
    """Pairs day-t cases with the exogenous values of day ``t - lag_days``.

    Args:
        cases (TimeSeries): Daily cases.
        exog (list[TimeSeries]): Exogenous series aligned with ``cases``.
        lag_days (int, optional): Lead of the exogenous values. Defaults to the ``lag_days``
            config option.

    Returns:
        (TimeSeries, list[TimeSeries]): Series shorter by ``lag_days`` values, sharing the dates
        of the retained cases.
    """
    lag_days = int(config._resolve('lag_days', lag_days))
    if lag_days < 0 or lag_days >= len(cases):
        raise InvalidLagError(f'A lag of {lag_days} days is invalid for {len(cases)} values')
    for series in exog:
        if series.start_day != cases.start_day or len(series) != len(cases):
            raise AlignmentError(f"Series '{series.name}' is not aligned with '{cases.name}'")
    if lag_days == 0:
        return cases, list(exog)
    start_day = cases.start_day + lag_days
    lagged = [series.with_values(series.values[:len(series) - lag_days], start_day=start_day) for series in exog]
    return cases.with_values(cases.values[lag_days:], start_day=start_day), lagged
