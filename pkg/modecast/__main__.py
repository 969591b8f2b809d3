import logging
import os
import sys

import click
import numpy as np
import pandas as pd

from modecast.anomaly import (
    band_energy,
    compare,
    detect_anomalies,
    error_series,
    normalize_cases
)
from modecast.arimax import ArimaxOrder
from modecast.config import CONFIG_DEFAULTS, config
from modecast.deserialize import read_level_orders, read_predictions
from modecast.eemd import EemdConfig, eemd
from modecast.graph import SpectralFilter, build_graph
from modecast.hybrid import HybridConfig, fit_direct, fit_hybrid
from modecast.ingest import apply_lag, impute_gaps, load_panel, read_manifest
from modecast.panel import PanelDataset
from modecast.serialize import (
    write_anomaly_report,
    write_anomaly_summary,
    write_cases,
    write_decomposition,
    write_graph,
    write_metrics,
    write_model,
    write_plot_data,
    write_predictions,
    write_screening,
    write_summary,
    write_table
)
from modecast.statistics_utils import describe_panel, metrics, screen_variables

logger = logging.getLogger(__name__)

METHODS = ('arimax', 'eemd-arimax')

# command-line flag -> config option
FLAG_OPTIONS = {
    'seed': 'rng_seed',
    'ensembles': 'num_ensembles',
    'noise_ratio': 'noise_ratio',
    'imfs': 'num_imfs',
    'sift_iterations': 'sift_iterations',
    'lag': 'lag_days',
    'alpha': 'filter_alpha',
    'cutoff': 'lowpass_cutoff',
    'weight_mode': 'weight_mode',
    'max_p': 'max_p',
    'max_d': 'max_d',
    'max_q': 'max_q',
}


def _cast_option(key, value):
    default = CONFIG_DEFAULTS[key]
    if isinstance(default, bool):
        if str(value).lower() not in ('true', 'false'):
            raise ValueError(f"Option '{key}' must be true or false, got '{value}'")
        return str(value).lower() == 'true'
    return type(default)(value)


class RunConfig(object):
    def __init__(self, manifest, output_dir, **flags):
        """Create RunConfig

        Every setting comes from the command-line flag when given, otherwise from the manifest,
        otherwise from the global config.

        Args:
            manifest (DatasetManifest): Dataset description and manifest options.
            output_dir (str): Directory receiving every artifact.
            flags (keywords): Command-line values keyed like ``FLAG_OPTIONS``; None means unset.
        """
        self.manifest = manifest
        self.output_dir = output_dir
        settings = {key: _cast_option(key, value) for key, value in manifest.options.items()}
        settings['lag_days'] = manifest.lag_days
        for flag, key in FLAG_OPTIONS.items():
            if flags.get(flag) is not None:
                settings[key] = _cast_option(key, flags[flag])
        self.settings = settings

        self.seed = self.get('rng_seed')
        self.lag_days = self.get('lag_days')
        self.filter_alpha = self.get('filter_alpha')
        self.lowpass_cutoff = self.get('lowpass_cutoff')
        self.weight_mode = self.get('weight_mode')
        self.eemd = EemdConfig(self.get('num_ensembles'), self.get('noise_ratio'), self.get('num_imfs'),
                               self.get('sift_iterations'), self.seed)
        self.arimax_bounds = ArimaxOrder(self.get('max_p'), self.get('max_d'), self.get('max_q'))

    def __repr__(self):
        return f"<RunConfig '{self.output_dir}' {self.eemd!r}, bounds {self.arimax_bounds}>"

    def get(self, key):
        """Returns a setting, falling back to the global config."""
        return self.settings[key] if key in self.settings else config.get_option(key)

    def path(self, *parts):
        return os.path.join(self.output_dir, *parts)


def run_options(function):
    """Adds the dataset and parameter options shared by every command."""
    options = [
        click.option('--manifest', 'manifest_path', required=True, type=click.Path(exists=True, dir_okay=False),
                     help='Dataset manifest (key = value file).'),
        click.option('--out', 'output_dir', default='modecast_output', show_default=True,
                     type=click.Path(file_okay=False), help='Output directory.'),
        click.option('--seed', type=int, help='Master seed of the EEMD noise.'),
        click.option('--ensembles', type=click.IntRange(min=1), help='EEMD ensemble size.'),
        click.option('--noise-ratio', type=float, help='EEMD noise to signal standard deviation ratio.'),
        click.option('--imfs', type=click.IntRange(min=1), help='Number of IMFs.'),
        click.option('--sift-iterations', type=click.IntRange(min=1), help='Envelope-mean removals per IMF.'),
        click.option('--lag', type=click.IntRange(min=0), help='Days by which exogenous values lead the cases.'),
        click.option('--alpha', type=click.FloatRange(min=0), help='Accentuator gain.'),
        click.option('--cutoff', type=float, help='Fraction of the graph spectrum kept by the low-pass filter.'),
        click.option('--weight-mode', type=click.Choice(['literal-distance', 'gaussian-kernel']),
                     help='Edge weights of the city graph.'),
        click.option('--max-p', type=click.IntRange(min=0), help='Largest autoregressive order searched.'),
        click.option('--max-d', type=click.IntRange(min=0), help='Largest differencing order searched.'),
        click.option('--max-q', type=click.IntRange(min=0), help='Largest moving-average order searched.'),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _run_config(manifest_path, output_dir, **flags):
    try:
        return RunConfig(read_manifest(manifest_path), output_dir, **flags)
    except (ValueError, KeyError) as error:
        raise click.ClickException(str(error))


def _report(failures):
    """Echoes one line per failed city and exits with status 1 when any city failed."""
    for city_id, error in failures.items():
        click.echo(f'{city_id}: {error}', err=True)
    if failures:
        sys.exit(1)


def _load(cfg):
    """Loads and imputes the panel; cities whose gaps cannot be imputed are left out."""
    try:
        panel, gaps = load_panel(cfg.manifest)
    except (ValueError, KeyError, OSError) as error:
        raise click.ClickException(str(error))
    failures, cities, imputed = {}, [], []
    for city in panel:
        city_gaps = [gap for gap in gaps if gap.city_id == city.city_id]
        if not city_gaps:
            cities.append(city)
            continue
        try:
            city_panel = impute_gaps(PanelDataset([city]), city_gaps)
        except ValueError as error:
            failures[city.city_id] = error
            continue
        cities.append(city_panel[city.city_id])
        imputed.extend(city_panel.metadata['gaps'])
    return panel.replace_cities(cities, metadata={'gaps': imputed}), failures


def _lagged(city, cfg):
    names = list(city.exogenous)
    cases, exog = apply_lag(city.cases, [city.exogenous[name] for name in names], cfg.lag_days)
    return cases, dict(zip(names, exog))


def _graph(panel, cfg):
    try:
        g = build_graph(panel.coordinates(), cfg.weight_mode)
    except ValueError as error:
        raise click.ClickException(str(error))
    write_graph(g, cfg.path('graph'))
    return g


@click.group()
@click.option('--verbose', is_flag=True, help='Log progress at INFO level.')
def cli(verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')


@click.command(name='correlate')
@run_options
def cmd_correlate(manifest_path, output_dir, **flags):
    """Screen exogenous variables by Spearman correlation with the cases."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    for city in panel:
        try:
            cases, candidates = _lagged(city, cfg)
            results = screen_variables(cases, candidates,
                                       cfg.get('correlation_threshold'),
                                       cfg.get('significance_level'),
                                       cfg.get('strict_correlation'))
        except (ValueError, RuntimeError) as error:
            failures[city.city_id] = error
            continue
        write_screening(results, cfg.path('correlation', f'{city.city_id}.csv'))
    _report(failures)


def _level_orders(city_id, cfg, fixed_order, orders_from):
    num_levels = cfg.eemd.num_imfs + 1
    if fixed_order:
        return [ArimaxOrder.from_string(fixed_order)] * num_levels
    if orders_from:
        return read_level_orders(orders_from, city_id, num_levels)
    return None


def _predict_city(city, cfg, method, fixed_order, orders_from):
    cases, candidates = _lagged(city, cfg)
    screening = screen_variables(cases, candidates,
                                 cfg.get('correlation_threshold'),
                                 cfg.get('significance_level'),
                                 cfg.get('strict_correlation'))
    exog = [candidates[result.variable_name] for result in screening if result.selected]
    logger.info("City '%s': %d exogenous variable(s) selected", city.city_id, len(exog))

    if method == 'arimax':
        order = ArimaxOrder.from_string(fixed_order) if fixed_order else None
        model, prediction = fit_direct(cases, exog, cfg.arimax_bounds, order=order)
        write_model(model, cfg.path('models', f'{city.city_id}_direct.model'))
        frame = pd.DataFrame({'date': cases.dates.strftime('%Y-%m-%d'),
                              'observed': cases.values,
                              'predicted': prediction.values})
        orders = str(model.order)
    else:
        hybrid_cfg = HybridConfig(cfg.eemd, cfg.arimax_bounds,
                                  _level_orders(city.city_id, cfg, fixed_order, orders_from))
        fit = fit_hybrid(cases, exog, hybrid_cfg)
        for j, model in enumerate(fit.level_models, start=1):
            write_model(model, cfg.path('models', f'{city.city_id}_level_{j}.model'))
        frame = fit.to_frame(observed=cases)
        prediction = fit.prediction
        orders = ';'.join(str(order) for order in fit.orders)

    me, rmse, mae = metrics(prediction, cases)
    write_predictions(frame, cfg.path('predictions', f'{city.city_id}.csv'))
    write_metrics(me, rmse, mae, cfg.path('predictions', f'{city.city_id}_metrics.txt'),
                  city_id=city.city_id, method=method, order=orders,
                  exogenous=','.join(exog_series.name for exog_series in exog))
    return {'city_id': city.city_id, 'method': method, 'order': orders, 'me': me, 'rmse': rmse, 'mae': mae}


@click.command(name='predict')
@run_options
@click.option('--method', type=click.Choice(METHODS), default='eemd-arimax', show_default=True,
              help='Plain ARIMAX or the EEMD-ARIMAX hybrid.')
@click.option('--fixed-order', help="Use this 'p,d,q' order instead of searching.")
@click.option('--orders-from', type=click.Path(exists=True, file_okay=False),
              help='Directory of saved level models whose orders are reused.')
def cmd_predict(manifest_path, output_dir, method, fixed_order, orders_from, **flags):
    """Fit ARIMAX or EEMD-ARIMAX per city and write predictions and a summary table."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    rows = []
    for city in panel:
        logger.info("Predicting '%s' with %s", city.city_id, method)
        try:
            rows.append(_predict_city(city, cfg, method, fixed_order, orders_from))
        except (ValueError, RuntimeError, OSError) as error:
            failures[city.city_id] = error
    write_summary(rows, cfg.path(f'summary_{method}.csv'))
    _report(failures)


@click.command(name='detect')
@run_options
@click.option('--predictions', 'predictions_dir', required=True, type=click.Path(exists=True, file_okay=False),
              help='Directory of prediction CSVs written by the predict command.')
def cmd_detect(manifest_path, output_dir, predictions_dir, **flags):
    """Match significant prediction errors with spectrally detected anomalies."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    g = _graph(panel, cfg)
    try:
        reports = detect_anomalies(panel, g, SpectralFilter.accentuate(cfg.filter_alpha),
                                   cfg.get('threshold_multiplier'), cfg.get('error_cap'))
    except ValueError as error:
        raise click.ClickException(str(error))

    compared = []
    for city_id, report in reports.items():
        path = os.path.join(predictions_dir, f'{city_id}.csv')
        if not os.path.exists(path):
            failures[city_id] = f'missing prediction file {path}'
            continue
        try:
            observed, predicted = read_predictions(path)
            errors = error_series(city_id, observed, predicted,
                                  cfg.get('threshold_multiplier'), cfg.get('error_cap'))
        except ValueError as error:
            failures[city_id] = error
            continue
        report = compare(report, errors)
        write_anomaly_report(report, cfg.path('anomalies', f'{city_id}.csv'), errors=errors)
        compared.append(report)

    write_anomaly_summary(compared, cfg.path('anomaly_summary.csv'))
    if compared:
        click.echo(f'mean match_fraction = {np.mean([report.match_fraction for report in compared]):.6f}')
    _report(failures)


@click.command(name='normalize')
@run_options
def cmd_normalize(manifest_path, output_dir, **flags):
    """Low-pass filter the cross-city case counts and write a normalized cases file."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    g = _graph(panel, cfg)
    try:
        normalized = normalize_cases(panel, g, cfg.lowpass_cutoff)
    except ValueError as error:
        raise click.ClickException(str(error))
    write_cases(normalized, cfg.path('normalized_cases.csv'))

    first_day, last_day = panel.overlap()
    before = [city.cases.between(first_day, last_day).values for city in panel]
    after = [city.cases.between(first_day, last_day).values for city in normalized]
    dates = panel.cities[0].cases.between(first_day, last_day).dates.strftime('%Y-%m-%d')
    energy = pd.DataFrame({'date': dates,
                           'band_energy_before': [band_energy(g, day, cfg.lowpass_cutoff)
                                                  for day in np.column_stack(before)],
                           'band_energy_after': [band_energy(g, day, cfg.lowpass_cutoff)
                                                 for day in np.column_stack(after)]})
    write_table(energy, cfg.path('band_energy.csv'))
    click.echo(f"clamped_values = {normalized.metadata.get('clamped_values', 0)}")
    _report(failures)


@click.command(name='decompose')
@run_options
@click.option('--city', 'city_id', required=True, help='City whose cases are decomposed.')
def cmd_decompose(manifest_path, output_dir, city_id, **flags):
    """Write the EEMD components of one city's cases as CSV and gnuplot data files."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    if city_id in failures:
        _report({city_id: failures[city_id]})
    if city_id not in panel.city_ids:
        raise click.ClickException(f"Unknown city '{city_id}'")
    try:
        decomposition = eemd(panel[city_id].cases, cfg.eemd)
    except ValueError as error:
        _report({city_id: error})
    write_decomposition(decomposition, cfg.path('decomposition', f'{city_id}.csv'))
    write_plot_data(decomposition, cfg.path('decomposition'), city_id)


@click.command(name='describe')
@run_options
def cmd_describe(manifest_path, output_dir, **flags):
    """Write descriptive statistics per city and variable."""
    cfg = _run_config(manifest_path, output_dir, **flags)
    panel, failures = _load(cfg)
    write_table(describe_panel(panel), cfg.path('describe.csv'))
    gaps = panel.metadata.get('gaps', [])
    write_table(pd.DataFrame([vars(gap) for gap in gaps],
                             columns=['city_id', 'variable', 'gap_start', 'gap_end', 'imputation_method']),
                cfg.path('gaps.csv'))
    _report(failures)


cli.add_command(cmd_correlate)
cli.add_command(cmd_predict)
cli.add_command(cmd_detect)
cli.add_command(cmd_normalize)
cli.add_command(cmd_decompose)
cli.add_command(cmd_describe)


if __name__ == "__main__":
    cli()
