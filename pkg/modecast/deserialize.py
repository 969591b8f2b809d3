import os

import numpy as np
import pandas as pd

from modecast.arimax import ArimaxModel, ArimaxOrder
from modecast.exceptions import ParseError
from modecast.serialize import MODEL_KEYS
from modecast.timeseries import TimeSeries


def _floats(text):
    return [float(part) for part in text.split(',') if part.strip()]


def read_model(path):
    """Reads a model record written by :func:`modecast.serialize.write_model`.

    Args:
        path (str): Location of the record.

    Returns:
        ArimaxModel: The model.
    """
    assert os.path.exists(path), '"{}" does not exist'.format(path)
    entries = {}
    with open(path, 'r') as file:
        for number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            if '=' not in line:
                raise ParseError(path, number, "expected 'key = value'")
            key, value = (part.strip() for part in line.split('=', 1))
            entries[key] = value
    missing = [key for key in MODEL_KEYS if key not in entries]
    if missing:
        raise ParseError(path, len(entries), f"missing key(s) {', '.join(missing)}")
    try:
        return ArimaxModel(ArimaxOrder.from_string(entries['order']),
                           float(entries['eta']),
                           phi=_floats(entries['phi']),
                           theta=_floats(entries['theta']),
                           zeta=_floats(entries['zeta']),
                           sigma2=float(entries['sigma2']),
                           log_likelihood=float(entries['log_likelihood']),
                           aicc=float(entries['aicc']),
                           heads=_floats(entries['heads']),
                           nobs=int(entries['nobs']),
                           exog_names=[name for name in entries['exog_names'].split(',') if name])
    except ValueError as error:
        raise ParseError(path, 0, str(error)) from error


def read_level_orders(directory, city_id, num_levels):
    """Reads the per-level orders of a city from saved model records.

    Args:
        directory (str): Directory holding ``{city_id}_level_{j}.model`` records.
        city_id (str): City identifier.
        num_levels (int): Number of levels, IMFs plus the residual.

    Returns:
        list[ArimaxOrder]: One order per level.
    """
    return [read_model(os.path.join(directory, f'{city_id}_level_{j}.model')).order
            for j in range(1, num_levels + 1)]


def read_predictions(path):
    """Reads a prediction table.

    Args:
        path (str): CSV with ``date``, ``observed`` and ``predicted`` columns.

    Returns:
        (TimeSeries, TimeSeries): The observed and the predicted series.
    """
    frame = pd.read_csv(path)
    for column in ('date', 'observed', 'predicted'):
        if column not in frame.columns:
            raise ParseError(path, 1, f"missing column '{column}'")
    if frame.empty:
        raise ParseError(path, 2, 'no predictions')
    dates = pd.to_datetime(frame['date'], format='%Y-%m-%d')
    if not np.all(np.diff(dates.to_numpy()).astype('timedelta64[D]').astype(int) == 1):
        raise ParseError(path, 2, 'dates must be consecutive days')
    start = dates.iloc[0]
    return (TimeSeries(start, frame['observed'].to_numpy(dtype=float), name='observed'),
            TimeSeries(start, frame['predicted'].to_numpy(dtype=float), name='predicted'))
