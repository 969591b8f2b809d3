import logging
import warnings

import numpy as np
import scipy.optimize as opt
from scipy.signal import lfilter

from modecast.config import config
from modecast.exceptions import (
    ConvergenceWarning,
    DimensionError,
    NearUnitRootError,
    NonConvergenceError,
    SelectionError,
    TooShortError,
    UndefinedCriterionError
)
from modecast.timeseries import TimeSeries, integrate
from modecast.utils import _values_of

logger = logging.getLogger(__name__)

_SIGMA2_FLOOR = 1e-12
_MIN_ROOT_MODULUS = 1.01


class ArimaxOrder(object):
    def __init__(self, p=0, d=0, q=0, n=0):
        """Create ArimaxOrder

        Args:
            p (int): Number of autoregressive terms.
            d (int): Number of non-seasonal differences.
            q (int): Number of moving-average terms.
            n (int): Number of exogenous series.
        """
        for name, value in (('p', p), ('d', d), ('q', q), ('n', n)):
            if int(value) != value or value < 0:
                raise ValueError(f'Order component {name} must be a non-negative integer, got {value}')
        self.p, self.d, self.q, self.n = int(p), int(d), int(q), int(n)

    def __eq__(self, other):
        return isinstance(other, ArimaxOrder) and self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    def __repr__(self):
        return f'ARIMAX({self.p},{self.d},{self.q},{self.n})'

    def as_tuple(self):
        return (self.p, self.d, self.q, self.n)

    @property
    def num_parameters(self):
        """Number of estimated parameters, counting the constant and the innovation variance."""
        return self.p + self.q + self.n + 2

    @classmethod
    def from_string(cls, text, n=0):
        """Parses ``"p,d,q"`` or ``"p,d,q,n"``; a missing ``n`` takes the given default."""
        parts = [int(part) for part in text.replace('(', '').replace(')', '').split(',')]
        if len(parts) == 3:
            parts.append(n)
        if len(parts) != 4:
            raise ValueError(f"Cannot parse an order from '{text}'")
        return cls(*parts)

    @classmethod
    def default_bounds(cls, n=0):
        """Search bounds taken from the ``max_p``, ``max_d`` and ``max_q`` config options."""
        return cls(config.get_option('max_p'), config.get_option('max_d'), config.get_option('max_q'), n)


class ArimaxModel(object):
    def __init__(self, order, eta, phi=(), theta=(), zeta=(), sigma2=1.0,
                 log_likelihood=np.nan, aicc=np.nan, heads=(), nobs=0, exog_names=None):
        """Create ArimaxModel

        The observation equation of the d-times differenced series ``w`` is
        ``w_t = eta + sum(phi_i w_{t-i}) - sum(theta_j e_{t-j}) + sum(zeta_l u_{l,t}) + e_t``
        where ``u_l`` are the exogenous series differenced the same way.

        Args:
            order (ArimaxOrder): Model order.
            eta (float): Constant term.
            phi (sequence[float]): ``p`` autoregressive coefficients.
            theta (sequence[float]): ``q`` moving-average coefficients, subtracted in the equation.
            zeta (sequence[float]): ``n`` exogenous coefficients.
            sigma2 (float): Innovation variance.
            log_likelihood (float): Gaussian log-likelihood of the conditional fit.
            aicc (float): Corrected Akaike information criterion.
            heads (sequence[float]): The first ``d`` values of the fitted series.
            nobs (int): Number of innovations the likelihood was computed over.
            exog_names (list[str], optional): Names of the exogenous series.
        """
        self.order = order
        self.eta = float(eta)
        self.phi = np.asarray(phi, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.zeta = np.asarray(zeta, dtype=float)
        if (len(self.phi), len(self.theta), len(self.zeta)) != (order.p, order.q, order.n):
            raise DimensionError(f'Coefficient counts do not match {order}')
        self.heads = np.asarray(heads, dtype=float)
        if len(self.heads) != order.d:
            raise DimensionError(f'{order} needs {order.d} integration seed(s), got {len(self.heads)}')
        self.sigma2 = float(sigma2)
        self.log_likelihood = float(log_likelihood)
        self.aicc = float(aicc)
        self.nobs = int(nobs)
        self.exog_names = list(exog_names) if exog_names is not None else [f'x{l + 1}' for l in range(order.n)]

    def __eq__(self, other):
        if not isinstance(other, ArimaxModel) or self.order != other.order:
            return False
        return (self.eta == other.eta and
                np.array_equal(self.phi, other.phi) and
                np.array_equal(self.theta, other.theta) and
                np.array_equal(self.zeta, other.zeta) and
                np.array_equal(self.heads, other.heads) and
                self.sigma2 == other.sigma2)

    def __repr__(self):
        return f'<ArimaxModel {self.order} (sigma2={self.sigma2:.6g}, AICc={self.aicc:.6g})>'


def aicc(log_likelihood, k, nobs):
    """Corrected Akaike information criterion.

    Args:
        log_likelihood (float): Maximized log-likelihood.
        k (int): Number of estimated parameters.
        nobs (int): Number of observations; must exceed ``k + 1``.

    Returns:
        float: ``-2 log_likelihood + 2k + 2k(k + 1) / (nobs - k - 1)``.
    """
    if nobs <= k + 1:
        raise UndefinedCriterionError(f'AICc is undefined for {k} parameters and {nobs} observations')
    return -2 * log_likelihood + 2 * k + 2 * k * (k + 1) / (nobs - k - 1)


def _constrain(raw):
    """Maps unconstrained reals to coefficients of a polynomial ``1 - sum(c_j z^j)`` with all
    roots outside the unit circle, through partial autocorrelations in (-1, 1)."""
    partial = raw / np.sqrt(1 + raw ** 2)
    coefficients = np.zeros(0)
    for r in partial:
        coefficients = np.concatenate([coefficients - r * coefficients[::-1], [r]])
    return coefficients


def min_root_modulus(coefficients):
    """Smallest root modulus of ``1 - sum(c_j z^j)``; infinite when the polynomial is constant."""
    roots = np.roots(np.concatenate([-np.asarray(coefficients, dtype=float)[::-1], [1.0]]))
    return float(np.min(np.abs(roots))) if len(roots) else np.inf


def _check_roots(model):
    modulus = min(min_root_modulus(model.phi), min_root_modulus(model.theta))
    if modulus < _MIN_ROOT_MODULUS:
        raise NearUnitRootError(model.order, modulus)


def _exog_matrix(exog, d, length):
    if not exog:
        return np.zeros((length, 0))
    return np.column_stack([np.diff(series, n=d) if d else series for series in exog])


def _design(y, exog, order):
    """Returns the differenced target, its lag matrix and the differenced exogenous matrix."""
    w = np.diff(y, n=order.d) if order.d else np.array(y, dtype=float)
    padded = np.concatenate([np.full(order.p, w.mean()), w])
    lags = np.column_stack([padded[order.p - i:order.p - i + len(w)] for i in range(1, order.p + 1)]) \
        if order.p else np.zeros((len(w), 0))
    return w, lags, _exog_matrix(exog, order.d, len(w))


def _residuals(w, lags, u, eta, phi, theta, zeta):
    v = w - eta - lags @ phi - u @ zeta
    if len(theta) == 0:
        return v
    return lfilter([1.0], np.concatenate([[1.0], -theta]), v)


def _check_inputs(y, exog, order=None):
    y = _values_of(y)
    exog = [_values_of(series) for series in exog]
    for l, series in enumerate(exog):
        if len(series) != len(y):
            raise DimensionError(f'Exogenous series {l + 1} has length {len(series)}, expected {len(y)}')
    if order is not None and order.n != len(exog):
        raise DimensionError(f'{order} expects {order.n} exogenous series, got {len(exog)}')
    return y, exog


def _exog_names(exog):
    return [getattr(series, 'name', None) or f'x{l + 1}' for l, series in enumerate(exog)]


def _unpack(params, order):
    p, q = order.p, order.q
    return (params[0],
            _constrain(params[1:1 + p]),
            _constrain(params[1 + p:1 + p + q]),
            params[1 + p + q:])


def _initial_simplex(x0, w, u, order):
    steps = np.empty(len(x0))
    scale = np.std(w) or 1.0
    steps[0] = 0.1 * scale
    steps[1:1 + order.p + order.q] = 0.5
    for l in range(order.n):
        spread = np.std(u[:, l])
        steps[1 + order.p + order.q + l] = 0.1 * scale / spread if spread > 0 else 0.1
    return np.vstack([x0, x0 + np.diag(steps)])


def _estimate(y, exog, order, conditioning):
    """Minimizes the conditional sum of squares; returns (eta, phi, theta, zeta, css, nobs)."""
    w, lags, u = _design(y, exog, order)
    nobs = len(w) - conditioning
    regressors = np.column_stack([np.ones(len(w)), u])[conditioning:]
    coefficients = np.linalg.lstsq(regressors, w[conditioning:], rcond=None)[0]
    eta0, zeta0 = coefficients[0], coefficients[1:]

    if order.p == 0 and order.q == 0:
        e = _residuals(w, lags, u, eta0, np.zeros(0), np.zeros(0), zeta0)
        return eta0, np.zeros(0), np.zeros(0), zeta0, float(np.sum(e[conditioning:] ** 2)), nobs

    scale = nobs * (np.var(w) or 1.0)

    def objective(params):
        e = _residuals(w, lags, u, *_unpack(params, order))
        value = np.sum(e[conditioning:] ** 2) / scale
        return value if np.isfinite(value) else np.inf

    x0 = np.concatenate([[eta0], np.zeros(order.p + order.q), zeta0])
    tolerance = config.get_option('objective_tolerance')
    simplex = opt.minimize(objective, x0, method='Nelder-Mead',
                           options={'maxiter': config.get_option('simplex_iterations'),
                                    'initial_simplex': _initial_simplex(x0, w, u, order),
                                    'xatol': 1e-8,
                                    'fatol': tolerance * max(objective(x0), 1e-300)})
    polish = opt.minimize(objective, simplex.x, method='BFGS',
                          options={'maxiter': config.get_option('polish_iterations'), 'gtol': 1e-9})
    polished = polish.status in (0, 2) and np.isfinite(polish.fun)
    best = polish if polished and polish.fun <= simplex.fun else simplex
    if not np.isfinite(best.fun) or not (simplex.success or polished):
        raise NonConvergenceError(order, {'objective': best.fun * scale,
                                          'iterations': simplex.nit + polish.nit,
                                          'params': best.x,
                                          'message': polish.message})
    if not polished:
        warnings.warn(ConvergenceWarning().get_warning_message(order, polish.message), ConvergenceWarning)
    eta, phi, theta, zeta = _unpack(best.x, order)
    return eta, phi, theta, zeta, float(best.fun * scale), nobs


def _fit(y, exog, order, conditioning=0, names=None):
    y, exog = _check_inputs(y, exog, order)
    if len(y) <= order.p + order.q + order.n + order.d + 1 + conditioning:
        raise TooShortError(f'{order} needs more than {order.p + order.q + order.n + order.d + 1 + conditioning} '
                            f'observations, got {len(y)}')
    eta, phi, theta, zeta, css, nobs = _estimate(y, exog, order, conditioning)
    sigma2 = max(css / nobs, _SIGMA2_FLOOR * max(1.0, np.var(y)))
    log_likelihood = -nobs / 2 * (np.log(2 * np.pi * sigma2) + 1)
    try:
        criterion = aicc(log_likelihood, order.num_parameters, nobs)
    except UndefinedCriterionError:
        criterion = np.inf
    return ArimaxModel(order, eta, phi, theta, zeta,
                       sigma2=sigma2,
                       log_likelihood=log_likelihood,
                       aicc=criterion,
                       heads=y[:order.d],
                       nobs=nobs,
                       exog_names=names)


def fit(y, exog, order):
    """Fits an ARIMAX model by conditional sum of squares.

    Pre-sample observations of the differenced series are set to its mean and pre-sample
    innovations to zero. Autoregressive and moving-average coefficients are kept stationary
    and invertible. Models without ARMA terms are solved in closed form; the others use a
    Nelder-Mead search polished by BFGS.

    Args:
        y (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``y``.
        order (ArimaxOrder): Model order; ``order.n`` must equal ``len(exog)``.

    Returns:
        ArimaxModel: The fitted model.
    """
    return _fit(y, exog, order, names=_exog_names(exog))


def select_order(y, exog, bounds=None):
    """Selects the order with minimal AICc over a (p, d, q) grid.

    Every candidate is scored on the same effective sample: a candidate with ``d`` differences
    conditions on its first ``bounds.d - d`` innovations. Ties are broken by smaller ``p + q``,
    then smaller ``p``, then smaller ``d``. Fits whose autoregressive or moving-average
    polynomial has a root of modulus below 1.01 are discarded like failed fits.

    Args:
        y (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series; their count fixes ``n``.
        bounds (ArimaxOrder, optional): Inclusive upper bounds for p, d and q. Defaults to the
            ``max_p``, ``max_d`` and ``max_q`` config options.

    Returns:
        ArimaxModel: The selected fitted model.
    """
    bounds = bounds or ArimaxOrder.default_bounds()
    names = _exog_names(exog)
    y, exog = _check_inputs(y, exog)
    n = len(exog)
    best, best_key = None, None
    failures = {}
    for d in range(bounds.d + 1):
        for p in range(bounds.p + 1):
            for q in range(bounds.q + 1):
                order = ArimaxOrder(p, d, q, n)
                try:
                    model = _fit(y, exog, order, conditioning=bounds.d - d, names=names)
                    _check_roots(model)
                except (TooShortError, NonConvergenceError, NearUnitRootError, np.linalg.LinAlgError) as error:
                    logger.debug("Skipping %s: %s", order, error)
                    failures[order] = error
                    continue
                key = (model.aicc, p + q, p, d)
                if best is None or key < best_key:
                    best, best_key = model, key
    if best is None:
        raise SelectionError(failures)
    return best


def innovations(model, y, exog):
    """Returns the conditional innovations of ``model`` on the differenced data.

    Args:
        model (ArimaxModel): A fitted model.
        y (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``y``.

    Returns:
        TimeSeries: One innovation per differenced observation, dated like the differenced series.
    """
    values, exog_values = _check_inputs(y, exog, model.order)
    w, lags, u = _design(values, exog_values, model.order)
    e = _residuals(w, lags, u, model.eta, model.phi, model.theta, model.zeta)
    start_day = getattr(y, 'start_day', 0) + model.order.d
    return TimeSeries(start_day, e, name=f'{getattr(y, "name", None)}_innovations')


def fitted_values(model, y, exog):
    """One-step-ahead in-sample predictions on the original scale.

    Indices whose lag history is incomplete receive the constant plus the exogenous
    contribution. The first ``d`` indices, which have no differenced value, repeat the
    observed values.

    Args:
        model (ArimaxModel): A fitted model.
        y (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``y``.

    Returns:
        TimeSeries: Predictions with the same dates as ``y``.
    """
    values, exog_values = _check_inputs(y, exog, model.order)
    order = model.order
    w, lags, u = _design(values, exog_values, order)
    w_hat = w - _residuals(w, lags, u, model.eta, model.phi, model.theta, model.zeta)
    start = min(max(order.p, order.q), len(w))
    w_hat[:start] = model.eta + u[:start] @ model.zeta
    fitted = np.array(values, dtype=float)
    fitted[order.d:] = values[order.d:] - (w - w_hat)
    return y.with_values(fitted, name=f'{y.name}_fitted')


def forecast(model, y, steps, exog=None, future_exog=None):
    """Multi-step point forecasts continuing ``y``.

    Future innovations are zero; future values of the differenced series are built
    recursively and integrated back to the original scale.

    Args:
        model (ArimaxModel): A fitted model.
        y (TimeSeries): The history the model was fitted on.
        steps (int): Number of days to forecast.
        exog (list[TimeSeries], optional): Historical exogenous series.
        future_exog (list[sequence[float]], optional): ``steps`` future values per exogenous series.

    Returns:
        TimeSeries: Forecasts for the ``steps`` days following ``y``.
    """
    exog = exog or []
    future_exog = future_exog or []
    order = model.order
    if steps < 1:
        raise ValueError(f'Forecast horizon must be at least 1 day, got {steps}')
    if len(future_exog) != order.n or any(len(values) != steps for values in future_exog):
        raise DimensionError(f'{order} needs {order.n} future exogenous series of length {steps}')
    values, exog_values = _check_inputs(y, exog, order)
    w, lags, u = _design(values, exog_values, order)
    e = _residuals(w, lags, u, model.eta, model.phi, model.theta, model.zeta)

    extended = [np.concatenate([history, np.asarray(future, dtype=float)])
                for history, future in zip(exog_values, future_exog)]
    future_u = _exog_matrix(extended, order.d, len(w) + steps)[len(w):]

    history, errors, mean = list(w), list(e), w.mean()
    for h in range(steps):
        t = len(w) + h
        ar = sum(model.phi[i] * (history[t - 1 - i] if t - 1 - i >= 0 else mean) for i in range(order.p))
        ma = sum(model.theta[j] * (errors[t - 1 - j] if t - 1 - j >= 0 else 0.0) for j in range(order.q))
        history.append(model.eta + ar - ma + future_u[h] @ model.zeta)
        errors.append(0.0)

    differenced = TimeSeries(y.start_day + order.d, history, name=y.name)
    full = integrate(differenced, order.d, values[:order.d])
    return TimeSeries(y.end_day + 1, full.values[-steps:], name=f'{y.name}_forecast')
