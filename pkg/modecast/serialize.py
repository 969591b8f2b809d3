import os

import numpy as np
import pandas as pd

from modecast.panel import CASES_VARIABLE

FLOAT_FORMAT = '%.12g'
MODEL_KEYS = ('order', 'eta', 'phi', 'theta', 'zeta', 'sigma2', 'log_likelihood', 'aicc', 'nobs', 'heads',
              'exog_names')


def _write_frame(frame, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def _join(values):
    return ','.join(repr(float(value)) for value in values)


def model_to_dict(model):
    """Creates a text description of a fitted ARIMAX model.

    Args:
        model (ArimaxModel): The model to describe.

    Returns:
        dict: Value strings keyed like ``MODEL_KEYS``. Floats keep their full precision.
    """
    return {'order': ','.join(str(part) for part in model.order.as_tuple()),
            'eta': repr(model.eta),
            'phi': _join(model.phi),
            'theta': _join(model.theta),
            'zeta': _join(model.zeta),
            'sigma2': repr(model.sigma2),
            'log_likelihood': repr(model.log_likelihood),
            'aicc': repr(model.aicc),
            'nobs': str(model.nobs),
            'heads': _join(model.heads),
            'exog_names': ','.join(model.exog_names)}


def write_model(model, path):
    """Writes a model record as ``key = value`` lines."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as file:
        for key, value in model_to_dict(model).items():
            file.write(f'{key} = {value}\n')
    return path


def write_decomposition(decomposition, path):
    """Writes ``date, imf_1 .. imf_s, residual`` to a CSV file."""
    return _write_frame(decomposition.to_frame(), path)


def write_plot_data(decomposition, directory, prefix):
    """Writes one gnuplot data file per component.

    Each file holds a comment header and ``date value`` lines, readable with
    ``set xdata time; set timefmt '%Y-%m-%d'``.

    Args:
        decomposition (Decomposition): Components to write.
        directory (str): Output directory.
        prefix (str): File name prefix.

    Returns:
        list[str]: The written paths, IMFs first and the residual last.
    """
    os.makedirs(directory, exist_ok=True)
    frame = decomposition.to_frame()
    paths = []
    for column in frame.columns[1:]:
        path = os.path.join(directory, f'{prefix}_{column}.dat')
        with open(path, 'w') as file:
            file.write(f'# {decomposition.source_name} {column}\n# date value\n')
            for date, value in zip(frame['date'], frame[column]):
                file.write(f'{date} {FLOAT_FORMAT % value}\n')
        paths.append(path)
    return paths


def write_predictions(frame, path):
    """Writes a prediction table with ``date, observed, predicted`` and optional level columns."""
    return _write_frame(frame, path)


def write_metrics(me, rmse, mae, path, **extra):
    """Writes a metrics block as ``key = value`` lines; ``extra`` entries come first."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as file:
        for key, value in extra.items():
            file.write(f'{key} = {value}\n')
        for key, value in (('me', me), ('rmse', rmse), ('mae', mae)):
            file.write(f'{key} = {FLOAT_FORMAT % value}\n')
    return path


def write_summary(rows, path):
    """Writes the per-city summary table (city_id, method, order, me, rmse, mae)."""
    frame = pd.DataFrame(rows, columns=['city_id', 'method', 'order', 'me', 'rmse', 'mae'])
    return _write_frame(frame, path)


def write_graph(g, directory):
    """Writes ``edges.csv`` (id_i, id_j, w_ij) and ``spectrum.csv`` (index, eigenvalue)."""
    edges = pd.DataFrame(list(g.edges()), columns=['id_i', 'id_j', 'w_ij'])
    spectrum = pd.DataFrame({'index': np.arange(1, len(g) + 1), 'eigenvalue': g.eigenvalues})
    return (_write_frame(edges, os.path.join(directory, 'edges.csv')),
            _write_frame(spectrum, os.path.join(directory, 'spectrum.csv')))


def anomaly_to_frame(report, errors=None):
    """Tabulates an anomaly report day by day.

    Args:
        report (AnomalyReport): Report, with its significant and matched days if compared.
        errors (ErrorSeries, optional): Model errors; days without an error get an empty ``e``.

    Returns:
        pd.DataFrame: Columns ``city_id, day, date, e, r, in_CE, in_CA, matched``. ``r`` is empty on day 1.
    """
    days = np.arange(1, report.num_days + 1)
    offsets = report.first_day + days - 1
    r = np.concatenate([[np.nan], np.asarray(report.accentuated.values)])
    e = np.full(report.num_days, np.nan)
    if errors is not None:
        positions = offsets - errors.errors.start_day
        inside = (positions >= 0) & (positions < len(errors.errors))
        e[inside] = np.asarray(errors.errors.values)[positions[inside]]
    dates = pd.to_datetime(offsets, unit='D').strftime('%Y-%m-%d')
    return pd.DataFrame({'city_id': report.city_id,
                         'day': days,
                         'date': dates,
                         'e': e,
                         'r': r,
                         'in_CE': [int(t in report.significant_days) for t in days],
                         'in_CA': [int(t in report.anomalous_days) for t in days],
                         'matched': [int(t in report.matched_days) for t in days]})


def write_anomaly_report(report, path, errors=None):
    return _write_frame(anomaly_to_frame(report, errors), path)


def write_anomaly_summary(reports, path):
    """Writes match fractions per city followed by a ``mean`` row over the cities."""
    rows = [{'city_id': report.city_id,
             'match_fraction': report.match_fraction,
             'eligible': len(report.eligible_days),
             'matched': len(report.matched_days),
             'anomalous': len(report.anomalous_days),
             'note': '' if report.eligible_days else 'eligible=0'}
            for report in reports]
    frame = pd.DataFrame(rows, columns=['city_id', 'match_fraction', 'eligible', 'matched', 'anomalous', 'note'])
    mean = float(frame['match_fraction'].mean()) if len(frame) else 0.0
    frame.loc[len(frame)] = ['mean', mean, int(frame['eligible'].sum()), int(frame['matched'].sum()),
                             int(frame['anomalous'].sum()), '']
    return _write_frame(frame, path)


def write_screening(results, path):
    """Writes ``variable, rho, p_value, selected`` rows; an empty list writes the header only."""
    frame = pd.DataFrame([result.to_dict() for result in results], columns=['variable', 'rho', 'p_value', 'selected'])
    frame['selected'] = frame['selected'].map({True: 'true', False: 'false'})
    return _write_frame(frame, path)


def write_cases(panel, path):
    """Writes the case counts of a panel in the ``date,city_id,new_cases`` schema."""
    frames = []
    for city in panel:
        frames.append(pd.DataFrame({'date': city.cases.dates.strftime('%Y-%m-%d'),
                                    'city_id': city.city_id,
                                    CASES_VARIABLE: city.cases.values}))
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=['date', 'city_id',
                                                                                    CASES_VARIABLE])
    return _write_frame(frame, path)


def write_table(frame, path):
    """Writes any diagnostic table with the shared float format."""
    return _write_frame(frame, path)
