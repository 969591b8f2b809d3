import logging

import numpy as np

from modecast.arimax import ArimaxOrder, fit, fitted_values, select_order
from modecast.eemd import EemdConfig, eemd
from modecast.exceptions import DimensionError, LevelFitError
from modecast.statistics_utils import metrics
from modecast.utils import splitmix64

logger = logging.getLogger(__name__)


class HybridConfig(object):
    def __init__(self, eemd=None, arimax_bounds=None, per_level_orders=None):
        """Create HybridConfig

        Args:
            eemd (EemdConfig, optional): Decomposition parameters. Defaults to the global config.
            arimax_bounds (ArimaxOrder, optional): Upper bounds of the per-level order search.
                Defaults to the ``max_p``, ``max_d`` and ``max_q`` config options.
            per_level_orders (list[ArimaxOrder], optional): One fixed order per level, ``num_imfs``
                IMF levels followed by the residual level. Skips the order search when given.
        """
        self.eemd = eemd or EemdConfig()
        self.arimax_bounds = arimax_bounds or ArimaxOrder.default_bounds()
        if per_level_orders is not None:
            per_level_orders = list(per_level_orders)
            if len(per_level_orders) != self.eemd.num_imfs + 1:
                raise ValueError(f'per_level_orders needs {self.eemd.num_imfs + 1} entries '
                                 f'({self.eemd.num_imfs} IMF levels and the residual), got {len(per_level_orders)}')
        self.per_level_orders = per_level_orders

    def __repr__(self):
        overrides = 'selected per level' if self.per_level_orders is None else \
            ', '.join(str(order) for order in self.per_level_orders)
        return f'<HybridConfig {self.eemd!r}, bounds {self.arimax_bounds}, orders: {overrides}>'


class HybridFit(object):
    def __init__(self, level_models, level_fitted, prediction, dependent_decomposition, exog_decompositions):
        """Create HybridFit

        Args:
            level_models (list[ArimaxModel]): One model per IMF level plus one for the residual.
            level_fitted (list[TimeSeries]): Fitted series of every level, in the same order.
            prediction (TimeSeries): Sum of the level fitted series.
            dependent_decomposition (Decomposition): EEMD of the dependent series.
            exog_decompositions (list[Decomposition]): EEMD of every exogenous series.
        """
        if len(level_models) != len(level_fitted):
            raise DimensionError('Every level needs both a model and a fitted series')
        for fitted in level_fitted:
            if len(fitted) != len(prediction):
                raise DimensionError('Level fitted series must share the prediction length')
        self.level_models = list(level_models)
        self.level_fitted = list(level_fitted)
        self.prediction = prediction
        self.dependent_decomposition = dependent_decomposition
        self.exog_decompositions = list(exog_decompositions)

    def __eq__(self, other):
        return (isinstance(other, HybridFit) and
                self.level_models == other.level_models and
                self.level_fitted == other.level_fitted and
                self.prediction == other.prediction)

    def __repr__(self):
        orders = ', '.join(str(model.order) for model in self.level_models)
        return f"<HybridFit of '{self.prediction.name}' ({orders})>"

    @property
    def orders(self):
        return [model.order for model in self.level_models]

    def to_frame(self, observed=None):
        """DataFrame with ``date``, ``observed`` (if given), ``predicted`` and one column per level."""
        frame = self.prediction.to_series().rename('predicted').to_frame()
        if observed is not None:
            frame.insert(0, 'observed', np.asarray(observed.values))
        num_imfs = len(self.level_fitted) - 1
        for j, fitted in enumerate(self.level_fitted, start=1):
            column = 'residual_level' if j == num_imfs + 1 else f'level_{j}'
            frame[column] = fitted.values
        frame.index = frame.index.strftime('%Y-%m-%d')
        return frame.rename_axis('date').reset_index()


def decompose_all(x, exog, cfg=None):
    """Decomposes the dependent series and every exogenous series with EEMD.

    The dependent series uses the sub-seed of stream 0 and exogenous series ``i`` (0-based)
    the sub-seed of stream ``i + 1``, both derived from ``cfg.rng_seed``.

    Args:
        x (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``x``.
        cfg (EemdConfig, optional): Decomposition parameters.

    Returns:
        (Decomposition, list[Decomposition]): The dependent and the exogenous decompositions.
    """
    cfg = cfg or EemdConfig()
    decompositions = []
    for index, series in enumerate([x] + list(exog)):
        if len(series) != len(x) or series.start_day != x.start_day:
            raise DimensionError(f"Series '{series.name}' is not aligned with '{x.name}'")
        try:
            decompositions.append(eemd(series, cfg.with_seed(splitmix64(cfg.rng_seed, index))))
        except ValueError as error:
            raise type(error)(f"Decomposing '{series.name}' failed: {error}") from error
    return decompositions[0], decompositions[1:]


def fit_level(j, dep, exogs, bounds=None, order=None):
    """Fits one decomposition level of the dependent series with ARIMAX.

    The same-level components of the exogenous decompositions are the regressors; level
    ``num_imfs + 1`` pairs the residuals.

    Args:
        j (int): Level index, 1-based.
        dep (Decomposition): Decomposition of the dependent series.
        exogs (list[Decomposition]): Decompositions of the exogenous series.
        bounds (ArimaxOrder, optional): Upper bounds of the order search.
        order (ArimaxOrder, optional): Fixed order; skips the search. Its ``n`` is replaced by
            the number of exogenous series.

    Returns:
        (ArimaxModel, TimeSeries): The model and its fitted level series.
    """
    target = dep.level(j)
    regressors = [decomposition.level(j) for decomposition in exogs]
    try:
        if order is None:
            model = select_order(target, regressors, bounds)
        else:
            model = fit(target, regressors, ArimaxOrder(order.p, order.d, order.q, len(regressors)))
        return model, fitted_values(model, target, regressors)
    except Exception as error:
        raise LevelFitError(j, error) from error


def fit_hybrid(x, exog, cfg=None):
    """Fits the EEMD-ARIMAX hybrid model.

    Decomposes every series, fits each IMF level and the residual level with ARIMAX on the
    same-level exogenous components, and sums the level fitted series into the prediction.

    Args:
        x (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``x``.
        cfg (HybridConfig, optional): Pipeline parameters.

    Returns:
        HybridFit: The level models, level fits and prediction.
    """
    cfg = cfg or HybridConfig()
    logger.info("Decomposing '%s' and %d exogenous series", x.name, len(exog))
    dep, exogs = decompose_all(x, exog, cfg.eemd)

    level_models, level_fitted = [], []
    for j in range(1, dep.num_imfs + 2):
        override = cfg.per_level_orders[j - 1] if cfg.per_level_orders else None
        model, fitted = fit_level(j, dep, exogs, cfg.arimax_bounds, order=override)
        logger.info("Level %d of '%s': %s, AICc %.4f", j, x.name, model.order, model.aicc)
        level_models.append(model)
        level_fitted.append(fitted)

    total = np.zeros(len(x))
    for fitted in level_fitted:
        total = total + fitted.values
    prediction = x.with_values(total, name=f'{x.name}_predicted')
    return HybridFit(level_models, level_fitted, prediction, dep, exogs)


def fit_direct(x, exog, bounds=None, order=None):
    """Fits a single ARIMAX model on the undecomposed series as a baseline.

    Args:
        x (TimeSeries): Dependent series.
        exog (list[TimeSeries]): Exogenous series aligned with ``x``.
        bounds (ArimaxOrder, optional): Upper bounds of the order search.
        order (ArimaxOrder, optional): Fixed order; skips the search.

    Returns:
        (ArimaxModel, TimeSeries): The model and its fitted series.
    """
    if order is None:
        model = select_order(x, exog, bounds)
    else:
        model = fit(x, exog, ArimaxOrder(order.p, order.d, order.q, len(exog)))
    logger.info("Direct fit of '%s': %s, AICc %.4f", x.name, model.order, model.aicc)
    return model, fitted_values(model, x, exog)


def evaluate(fit, observed):
    """Returns (ME, RMSE, MAE) of the hybrid prediction against the observed series."""
    return metrics(fit.prediction, observed)
