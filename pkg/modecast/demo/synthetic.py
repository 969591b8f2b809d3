import os

import numpy as np
import pandas as pd

from modecast.panel import (
    CASES_VARIABLE,
    METEOROLOGICAL_VARIABLES,
    MOBILITY_VARIABLES,
    CityRecord,
    PanelDataset
)
from modecast.serialize import FLOAT_FORMAT, write_cases
from modecast.timeseries import TimeSeries

SYNTHETIC_CITIES = (
    ('city_a', -15.78, -47.93),
    ('city_b', -16.68, -49.25),
    ('city_c', -19.92, -43.94),
    ('city_d', -22.91, -43.17),
    ('city_e', -23.55, -46.63),
    ('city_f', -25.43, -49.27),
    ('city_g', -12.97, -38.50),
    ('city_h', -8.05, -34.88),
)


def _cycle(t, period, phase=0.0):
    return np.sin(2 * np.pi * t / period + phase)


def load_synthetic_panel(num_cities=5, num_days=90, spike_city=0, spike_day=45, spike_factor=10.0, seed=0,
                         start_date='2020-04-01', spike_stride=3):
    """Load a synthetic panel of smoothly growing case counts with planted spikes.

    Args:
        num_cities (int, optional): Number of cities, at most 8. Defaults to 5.
        num_days (int, optional): Number of days per city. Defaults to 90.
        spike_city (int or str, optional): Index of the city receiving the spike, ``'all'`` to
            spike every city, or None for no spike. Defaults to 0.
        spike_day (int, optional): 0-based day index of the spike. With ``spike_city='all'`` the
            i-th city is spiked on day ``spike_day + i * spike_stride``. Defaults to 45.
        spike_factor (float, optional): Multiplier applied to the case count of the spike day.
            Defaults to 10.
        seed (int, optional): Seed of the small multiplicative noise. Defaults to 0.
        start_date (str, optional): First date of every series. Defaults to ``2020-04-01``.
        spike_stride (int, optional): Gap in days between the spikes of consecutive cities.
            Defaults to 3.

    Returns:
        PanelDataset: The panel. Its ``spikes`` metadata entry maps city ids to spike day indices.
    """
    if not 2 <= num_cities <= len(SYNTHETIC_CITIES):
        raise ValueError(f'num_cities must be between 2 and {len(SYNTHETIC_CITIES)}')
    if spike_city == 'all' and not 0 <= spike_day + (num_cities - 1) * spike_stride < num_days:
        raise ValueError(f'Spikes of {num_cities} cities from day {spike_day} do not fit in {num_days} days')
    rng = np.random.default_rng(seed)
    t = np.arange(num_days)
    cities, spikes = [], {}
    for i, (city_id, lat, lon) in enumerate(SYNTHETIC_CITIES[:num_cities]):
        base = 80.0 + 20.0 * i
        cases = base * np.exp(0.01 * t) * (1 + 0.05 * _cycle(t, 7, i)) * (1 + 0.01 * rng.standard_normal(num_days))
        if spike_city == 'all':
            day = spike_day + i * spike_stride
            cases[day] *= spike_factor
            spikes[city_id] = [day]
        elif spike_city is not None and i == spike_city:
            cases[spike_day] *= spike_factor
            spikes[city_id] = [spike_day]
        meteorological = {
            'rain_mm': np.abs(5 + 4 * _cycle(t, 11, i) + rng.standard_normal(num_days)),
            'max_temp_c': 30 + 3 * _cycle(t, 60, i) + 0.5 * rng.standard_normal(num_days),
            'min_temp_c': 20 + 3 * _cycle(t, 60, i) + 0.5 * rng.standard_normal(num_days),
            'humidity_pct': 70 + 10 * _cycle(t, 23, i) + rng.standard_normal(num_days),
        }
        mobility = {name: -20 + 10 * _cycle(t, 7, k) + rng.standard_normal(num_days)
                    for k, name in enumerate(MOBILITY_VARIABLES)}
        cities.append(CityRecord(city_id, lat, lon,
                                 TimeSeries(start_date, np.round(cases), name=CASES_VARIABLE),
                                 {name: TimeSeries(start_date, values, name=name)
                                  for name, values in meteorological.items()},
                                 {name: TimeSeries(start_date, values, name=name)
                                  for name, values in mobility.items()}))
    return PanelDataset(cities, metadata={'spikes': spikes})


# (name, periods in days, case response per period)
_MULTISCALE_DRIVERS = (
    ('rr', (4, 12, 40), (6.0, -6.0, 4.0)),
    ('max_temp_c', (6, 25, 80), (-4.0, 5.0, 6.0)),
)


def make_multiscale_instance(num_days=150, lag_days=5, noise=2.0, seed=0, start_date='2020-03-01'):
    """Make a case series driven by two lagged exogenous drivers acting at several time scales.

    Each driver is the sum of a fast, a medium and a slow cycle with random phases. Cases follow
    a linear trend plus every cycle scaled by its own coefficient, signs differing across scales,
    so a single coefficient per driver cannot reproduce them. Drivers lead the cases by
    ``lag_days`` days and carry a little measurement noise; cases carry white noise.

    Args:
        num_days (int, optional): Length of every series. Defaults to 150.
        lag_days (int, optional): Lead of the drivers. Defaults to 5.
        noise (float, optional): Standard deviation of the case noise. Defaults to 2.
        seed (int, optional): Seed of the phases and the noise. Defaults to 0.
        start_date (str, optional): First date. Defaults to ``2020-03-01``.

    Returns:
        (TimeSeries, list[TimeSeries]): The cases and the unlagged drivers, all aligned.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(num_days + lag_days)
    response = np.zeros(num_days)
    drivers = []
    for name, periods, weights in _MULTISCALE_DRIVERS:
        cycles = [_cycle(t, period, rng.uniform(0, 2 * np.pi)) for period in periods]
        for weight, cycle in zip(weights, cycles):
            response += weight * cycle[:num_days]
        values = np.sum(cycles, axis=0) + 0.02 * rng.standard_normal(len(t))
        drivers.append(TimeSeries(start_date, values[lag_days:], name=name))
    cases = 50 + 0.2 * t[lag_days:] + response + noise * rng.standard_normal(num_days)
    return TimeSeries(start_date, cases, name=CASES_VARIABLE), drivers


def _daily_frame(panel, variables, blanks):
    frames = []
    for city in panel:
        present = [name for name in variables if name in city.exogenous]
        if not present:
            continue
        frame = pd.DataFrame({'date': city.cases.dates.strftime('%Y-%m-%d'), 'city_id': city.city_id})
        for name in variables:
            values = np.array(city.exogenous[name].values, dtype=float) if name in present \
                else np.full(len(city.cases), np.nan)
            start, end = blanks.get((city.city_id, name), (0, -1))
            values[start:end + 1] = np.nan
            frame[name] = values
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else None


def write_synthetic_dataset(directory, panel=None, blanks=None, lag_days=None):
    """Write a panel as a dataset of CSV files with a manifest.

    Args:
        directory (str): Output directory.
        panel (PanelDataset, optional): Panel to write. Defaults to :func:`load_synthetic_panel`.
        blanks (dict[(str, str) -> (int, int)], optional): Day index ranges, inclusive, left blank
            per (city id, exogenous variable).
        lag_days (int, optional): ``lag_days`` entry of the manifest; omitted when None.

    Returns:
        str: Path of the manifest file.
    """
    panel = panel or load_synthetic_panel()
    blanks = blanks or {}
    os.makedirs(directory, exist_ok=True)
    write_cases(panel, os.path.join(directory, 'cases.csv'))
    pd.DataFrame(panel.coordinates(), columns=['city_id', 'lat', 'lon']) \
        .to_csv(os.path.join(directory, 'coords.csv'), index=False)

    lines = ['cases_path = cases.csv', 'coords_path = coords.csv']
    for key, file_name, variables in (('meteo_path', 'meteo.csv', METEOROLOGICAL_VARIABLES),
                                      ('mobility_path', 'mobility.csv', MOBILITY_VARIABLES)):
        frame = _daily_frame(panel, variables, blanks)
        if frame is not None:
            frame.to_csv(os.path.join(directory, file_name), index=False, float_format=FLOAT_FORMAT)
            lines.append(f'{key} = {file_name}')
    if lag_days is not None:
        lines.append(f'lag_days = {lag_days}')

    path = os.path.join(directory, 'manifest.txt')
    with open(path, 'w') as file:
        file.write('\n'.join(lines) + '\n')
    return path
