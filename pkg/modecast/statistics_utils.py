import warnings

import numpy as np
import pandas as pd
from scipy.special import betainc
from scipy.stats import rankdata
from sklearn.metrics import mean_absolute_error, mean_squared_error

from modecast.config import config
from modecast.exceptions import (
    DimensionError,
    InvalidDegreesOfFreedomError,
    TooShortError,
    UndefinedCorrelationError,
    UndefinedCorrelationWarning
)
from modecast.panel import CASES_VARIABLE
from modecast.utils import _check_same_length, _values_of


class CorrelationResult(object):
    def __init__(self, variable_name, rho, p_value, n_samples, selected, defined=True):
        """Create CorrelationResult

        Args:
            variable_name (str): Name of the candidate variable.
            rho (float): Spearman correlation with the cases, in [-1, 1].
            p_value (float): Two-sided p-value, in [0, 1].
            n_samples (int): Number of paired samples.
            selected (bool): Whether the variable passed the screening rule.
            defined (bool): False when the correlation is undefined (zero variance); such
                results carry ``rho = 0`` and ``p_value = 1``.
        """
        self.variable_name = variable_name
        self.rho = float(rho)
        self.p_value = float(p_value)
        self.n_samples = int(n_samples)
        self.selected = bool(selected)
        self.defined = bool(defined)

    def __eq__(self, other):
        return isinstance(other, CorrelationResult) and vars(self) == vars(other)

    def __repr__(self):
        flag = '' if self.defined else ', undefined'
        return (f"<CorrelationResult '{self.variable_name}' (rho={self.rho:.4f}, p={self.p_value:.4g}, "
                f"selected={self.selected}{flag})>")

    def to_dict(self):
        return {'variable': self.variable_name,
                'rho': self.rho,
                'p_value': self.p_value,
                'selected': self.selected}


def student_t_sf(t, df):
    """Upper-tail probability of Student's t distribution.

    Uses the regularized incomplete beta function:
    ``sf(t) = I_{df / (df + t^2)}(df / 2, 1 / 2) / 2`` for ``t >= 0``.

    Args:
        t (float): Statistic value.
        df (int): Degrees of freedom, at least 1.

    Returns:
        float: ``P(T > t)``.
    """
    if df < 1:
        raise InvalidDegreesOfFreedomError(f'Degrees of freedom must be at least 1, got {df}')
    if np.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(tail if t >= 0 else 1.0 - tail)


def _spearman_from_rank_differences(x, y):
    """Rank-difference form ``1 - 6 sum(D^2) / (n^3 - n)``; exact only without ties."""
    differences = rankdata(x) - rankdata(y)
    n = len(differences)
    return 1 - 6 * np.sum(differences ** 2) / (n ** 3 - n)


def spearman(x, y):
    """Spearman rank correlation with a two-sided significance level.

    Ties receive mid-ranks and rho is the Pearson correlation of the ranks, which equals the
    rank-difference formula when there are no ties. The p-value uses the t approximation
    ``t = rho * sqrt((n - 2) / (1 - rho^2))`` with ``n - 2`` degrees of freedom.

    Args:
        x (sequence[float]): First sample.
        y (sequence[float]): Second sample, same length as ``x``, at least 3 values.

    Returns:
        (float, float): rho and its two-sided p-value.
    """
    x, y = _values_of(x), _values_of(y)
    _check_same_length(x, y, 'x', 'y')
    n = len(x)
    if n < 3:
        raise TooShortError(f'Spearman correlation needs at least 3 pairs, got {n}')
    rank_x, rank_y = rankdata(x), rankdata(y)
    if np.ptp(rank_x) == 0 or np.ptp(rank_y) == 0:
        raise UndefinedCorrelationError('Spearman correlation is undefined for a constant sample')
    rho = float(np.clip(np.corrcoef(rank_x, rank_y)[0, 1], -1.0, 1.0))
    if 1.0 - abs(rho) < 1e-12:
        return float(np.sign(rho)), 0.0
    t = rho * np.sqrt((n - 2) / (1 - rho ** 2))
    return rho, float(min(1.0, 2 * student_t_sf(abs(t), n - 2)))


def _is_selected(rho, p_value, threshold, alpha, strict):
    correlated = abs(rho) > threshold if strict else abs(rho) >= threshold
    return correlated and p_value <= alpha


def screen_variables(cases, candidates, threshold=None, alpha=None, strict=None):
    """Screens candidate exogenous series by Spearman correlation with the cases.

    Args:
        cases (TimeSeries): Daily cases.
        candidates (dict[str -> TimeSeries]): Candidate series aligned with ``cases``.
        threshold (float, optional): Minimum absolute correlation. Defaults to the
            ``correlation_threshold`` config option.
        alpha (float, optional): Significance level. Defaults to ``significance_level``.
        strict (bool, optional): Require ``|rho| > threshold`` instead of ``>=``. Defaults to
            ``strict_correlation``.

    Returns:
        list[CorrelationResult]: One result per candidate, in input order.
    """
    threshold = config._resolve('correlation_threshold', threshold)
    alpha = config._resolve('significance_level', alpha)
    strict = config._resolve('strict_correlation', strict)
    results = []
    for name, series in candidates.items():
        _check_same_length(series, cases, name, 'cases')
        try:
            rho, p_value = spearman(series, cases)
        except UndefinedCorrelationError:
            warnings.warn(UndefinedCorrelationWarning().get_warning_message(name), UndefinedCorrelationWarning)
            results.append(CorrelationResult(name, 0.0, 1.0, len(cases), False, defined=False))
            continue
        results.append(CorrelationResult(name, rho, p_value, len(cases),
                                         _is_selected(rho, p_value, threshold, alpha, strict)))
    return results


def metrics(predicted, observed):
    """Mean error, root mean square error and mean absolute error.

    Args:
        predicted (sequence[float]): Predicted values.
        observed (sequence[float]): Observed values, same length.

    Returns:
        (float, float, float): ME, RMSE and MAE, with ME = mean(predicted - observed).
    """
    predicted, observed = _values_of(predicted), _values_of(observed)
    _check_same_length(predicted, observed)
    if len(predicted) == 0:
        raise DimensionError('Metrics need at least one value')
    me = float(np.mean(predicted - observed))
    rmse = float(np.sqrt(mean_squared_error(observed, predicted)))
    mae = float(mean_absolute_error(observed, predicted))
    return me, rmse, mae


def relative_improvement(baseline, candidate):
    """Percentage by which ``candidate`` lowers the ``baseline`` error."""
    if baseline == 0:
        return 0.0
    return 100.0 * (baseline - candidate) / baseline


def describe_panel(panel):
    """Descriptive statistics per city and variable.

    Args:
        panel (PanelDataset): Data to describe.

    Returns:
        pd.DataFrame: One row per (city, variable) with ``count``, ``mean``, ``std``, ``min``,
        ``max``, ``first_date`` and ``first_case_date``.
    """
    rows = []
    for city in panel:
        positive = np.flatnonzero(city.cases.values > 0)
        first_case = city.cases.dates[positive[0]] if len(positive) else pd.NaT
        for variable, series in {CASES_VARIABLE: city.cases, **city.exogenous}.items():
            values = series.to_series().agg(['count', 'mean', 'std', 'min', 'max']).to_dict()
            rows.append({'city_id': city.city_id,
                         'variable': variable,
                         **values,
                         'first_date': series.start_date.isoformat(),
                         'first_case_date': first_case.strftime('%Y-%m-%d') if not pd.isnull(first_case) else ''})
    return pd.DataFrame(rows, columns=['city_id', 'variable', 'count', 'mean', 'std', 'min', 'max',
                                       'first_date', 'first_case_date'])
