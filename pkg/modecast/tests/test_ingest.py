import os

import numpy as np
import pytest

from modecast.arimax import ArimaxOrder
from modecast.demo import load_synthetic_panel, write_synthetic_dataset
from modecast.exceptions import (
    AlignmentError,
    DateOrderError,
    ImputationError,
    InvalidLagError,
    ParseError,
    UnknownCityError
)
from modecast.ingest import (
    DatasetManifest,
    GapReport,
    apply_lag,
    impute_gaps,
    load_panel,
    read_manifest
)
from modecast.panel import MOBILITY_VARIABLES
from modecast.tests.testing_utils import make_panel
from modecast.timeseries import TimeSeries

SMALL_BOUNDS = ArimaxOrder(1, 1, 1)


def _write(directory, name, text):
    path = os.path.join(str(directory), name)
    with open(path, 'w') as file:
        file.write(text)
    return path


def _manifest(directory, cases, coords='city_id,lat,lon\na,-8.0,-35.0\nb,-9.0,-36.0\n', meteo=None):
    cases_path = _write(directory, 'cases.csv', cases)
    coords_path = _write(directory, 'coords.csv', coords)
    meteo_path = _write(directory, 'meteo.csv', meteo) if meteo is not None else None
    return DatasetManifest(cases_path, coords_path, meteo_path=meteo_path)


def test_read_manifest(tmp_path):
    path = _write(tmp_path, 'manifest.txt',
                  '# dataset\n'
                  'cases_path = cases.csv\n'
                  '\n'
                  'coords_path = geo/coords.csv\n'
                  'lag_days = 3\n'
                  'date_format = %d/%m/%Y\n'
                  'num_ensembles = 20\n')
    manifest = read_manifest(path)
    assert manifest.cases_path == os.path.join(str(tmp_path), 'cases.csv')
    assert manifest.coords_path == os.path.join(str(tmp_path), 'geo', 'coords.csv')
    assert manifest.meteo_path is None
    assert manifest.lag_days == 3
    assert manifest.date_format == '%d/%m/%Y'
    assert manifest.options == {'num_ensembles': '20'}


def test_read_manifest_errors(tmp_path):
    path = _write(tmp_path, 'bad.txt', 'cases_path = cases.csv\nflavour = sour\n')
    with pytest.raises(ParseError, match="line 2: unknown key 'flavour'"):
        read_manifest(path)
    path = _write(tmp_path, 'incomplete.txt', 'cases_path = cases.csv\n')
    with pytest.raises(ParseError, match='coords_path are required'):
        read_manifest(path)
    path = _write(tmp_path, 'garbled.txt', 'cases_path cases.csv\n')
    with pytest.raises(ParseError, match="line 1: expected 'key = value'"):
        read_manifest(path)


def test_manifest_defaults():
    manifest = DatasetManifest('cases.csv', 'coords.csv')
    assert manifest.lag_days == 5
    assert manifest.options == {}
    with pytest.raises(InvalidLagError):
        DatasetManifest('cases.csv', 'coords.csv', lag_days=-1)


def test_load_panel_is_lossless(dataset):
    panel, gaps = load_panel(read_manifest(dataset))
    expected = load_synthetic_panel(num_cities=3, num_days=60, spike_city=0, spike_day=30, seed=1)
    assert gaps == []
    assert panel.metadata['gaps'] == []
    assert panel.city_ids == ['city_a', 'city_b', 'city_c']
    for city in expected:
        loaded = panel[city.city_id]
        assert loaded.cases == city.cases
        assert loaded.latitude == pytest.approx(city.latitude)
        assert list(loaded.exogenous) == list(city.exogenous)
        for name, series in city.exogenous.items():
            assert loaded.exogenous[name].start_day == series.start_day
            np.testing.assert_allclose(loaded.exogenous[name].values, series.values, rtol=1e-10)


def test_load_panel_reports_blank_week(tmp_path):
    panel = load_synthetic_panel(num_cities=2, num_days=50, spike_city=None)
    path = write_synthetic_dataset(str(tmp_path), panel, blanks={('city_b', 'rr'): (30, 36)})
    loaded, gaps = load_panel(read_manifest(path))
    assert gaps == [GapReport('city_b', 'rr', 30, 36)]
    assert len(gaps[0]) == 7
    assert gaps[0].imputation_method == 'pending'
    # placeholder fill repeats the last value before the gap
    rr = loaded['city_b'].mobility['rr'].values
    np.testing.assert_allclose(rr[30:37], rr[29])


def test_load_panel_starts_at_first_case(tmp_path):
    manifest = _manifest(tmp_path,
                         'date,city_id,new_cases\n'
                         '2020-05-01,a,0\n2020-05-02,a,0\n2020-05-03,a,4\n2020-05-04,a,6\n'
                         '2020-05-01,b,1\n2020-05-02,b,2\n2020-05-04,b,3\n',
                         meteo='date,city_id,rain_mm,max_temp_c,min_temp_c,humidity_pct\n'
                               '2020-05-03,a,1,30,20,70\n2020-05-04,a,2,31,,71\n')
    panel, gaps = load_panel(manifest)
    assert str(panel['a'].cases.start_date) == '2020-05-03'
    np.testing.assert_array_equal(panel['a'].cases.values, [4, 6])
    assert list(panel['a'].meteorological) == ['rain_mm', 'max_temp_c', 'min_temp_c', 'humidity_pct']
    assert panel['b'].meteorological == {}
    assert gaps == [GapReport('a', 'min_temp_c', 1, 1), GapReport('b', 'new_cases', 2, 2)]


def test_load_panel_date_order(tmp_path):
    manifest = _manifest(tmp_path,
                         'date,city_id,new_cases\n'
                         '2020-05-02,a,1\n2020-05-01,a,2\n2020-05-01,b,1\n')
    with pytest.raises(DateOrderError, match="line 3: dates of city 'a'"):
        load_panel(manifest)


def test_load_panel_parse_errors(tmp_path):
    manifest = _manifest(tmp_path, 'date,city_id,new_cases\n2020-05-01,a,1\n2020-05-01,b,abc\n')
    with pytest.raises(ParseError, match="line 3: invalid new_cases value 'abc'"):
        load_panel(manifest)
    manifest = _manifest(tmp_path, 'date,city_id,new_cases\n2020-13-01,a,1\n2020-05-01,b,1\n')
    with pytest.raises(ParseError, match="line 2: invalid date"):
        load_panel(manifest)
    manifest = _manifest(tmp_path, 'date,city,new_cases\n2020-05-01,a,1\n')
    with pytest.raises(ParseError, match='missing column\\(s\\) city_id'):
        load_panel(manifest)


def test_load_panel_unknown_cities(tmp_path):
    cases = 'date,city_id,new_cases\n2020-05-01,a,1\n2020-05-01,b,1\n'
    manifest = _manifest(tmp_path, cases,
                         meteo='date,city_id,rain_mm,max_temp_c,min_temp_c,humidity_pct\n2020-05-01,z,1,1,1,1\n')
    with pytest.raises(UnknownCityError, match="City 'z'"):
        load_panel(manifest)
    manifest = _manifest(tmp_path, cases, coords='city_id,lat,lon\na,0,0\nb,1,1\nc,2,2\n')
    with pytest.raises(UnknownCityError, match="City 'c'"):
        load_panel(manifest)
    manifest = _manifest(tmp_path, cases, coords='city_id,lat,lon\na,0,0\n')
    with pytest.raises(ParseError, match="no coordinates for city 'b'"):
        load_panel(manifest)


def test_gap_report():
    gap = GapReport('a', 'rr', 3, 5)
    assert len(gap) == 3
    assert gap.with_method('arima(1,0,0)') == GapReport('a', 'rr', 3, 5, 'arima(1,0,0)')
    with pytest.raises(ValueError, match='Invalid gap bounds 5..3'):
        GapReport('a', 'rr', 5, 3)


def test_impute_constant_history():
    panel = make_panel({'a': [5.0] * 30, 'b': [1.0] * 30})
    imputed = impute_gaps(panel, [GapReport('a', 'new_cases', 25, 27)], bounds=SMALL_BOUNDS)
    np.testing.assert_allclose(imputed['a'].cases.values, 5.0, atol=1e-6)
    assert imputed['b'] is panel['b']
    assert imputed.metadata['gaps'][0].imputation_method.startswith('arima(')


def test_impute_linear_trend():
    values = 2.0 * np.arange(30) + 10
    observed = values.copy()
    observed[25:28] = 0.0
    panel = make_panel({'a': observed})
    imputed = impute_gaps(panel, [GapReport('a', 'new_cases', 25, 27)], bounds=SMALL_BOUNDS)
    result = imputed['a'].cases.values
    np.testing.assert_allclose(result[25:28], values[25:28], rtol=0.05)
    np.testing.assert_array_equal(result[:25], observed[:25])
    np.testing.assert_array_equal(result[28:], observed[28:])
    assert imputed.metadata['gaps'] == [GapReport('a', 'new_cases', 25, 27, 'arima(0,1,0)')]


def test_impute_sequential_gaps_use_earlier_fills():
    panel = make_panel({'a': 2.0 * np.arange(40) + 1})
    gaps = [GapReport('a', 'new_cases', 33, 34), GapReport('a', 'new_cases', 22, 23)]
    imputed = impute_gaps(panel, gaps, bounds=SMALL_BOUNDS)
    np.testing.assert_allclose(imputed['a'].cases.values, 2.0 * np.arange(40) + 1, rtol=1e-6)
    assert [gap.gap_start for gap in imputed.metadata['gaps']] == [22, 33]


def test_impute_without_gaps_returns_panel():
    panel = make_panel({'a': [1.0, 2.0]})
    assert impute_gaps(panel, []) is panel


def test_impute_errors():
    panel = make_panel({'a': np.arange(30.0)})
    with pytest.raises(ImputationError, match='needs 20 training days, has 5'):
        impute_gaps(panel, [GapReport('a', 'new_cases', 5, 6)])
    with pytest.raises(ImputationError, match='ends after the series'):
        impute_gaps(panel, [GapReport('a', 'new_cases', 25, 30)])


def test_apply_lag():
    cases = TimeSeries('2020-05-01', np.arange(1.0, 11.0), name='new_cases')
    rr = TimeSeries('2020-05-01', np.arange(101.0, 111.0), name='rr')

    same_cases, same_exog = apply_lag(cases, [rr], 0)
    assert same_cases is cases and same_exog == [rr]

    lagged_cases, (lagged_rr,) = apply_lag(cases, [rr], 5)
    np.testing.assert_array_equal(lagged_cases.values, [6, 7, 8, 9, 10])
    np.testing.assert_array_equal(lagged_rr.values, [101, 102, 103, 104, 105])
    assert lagged_rr.start_day == lagged_cases.start_day == cases.start_day + 5
    assert lagged_rr.name == 'rr'

    assert len(apply_lag(cases, [])[0]) == 5


def test_apply_lag_errors():
    cases = TimeSeries('2020-05-01', np.arange(10.0), name='new_cases')
    with pytest.raises(InvalidLagError, match='A lag of 10 days is invalid for 10 values'):
        apply_lag(cases, [], 10)
    with pytest.raises(InvalidLagError):
        apply_lag(cases, [], -1)
    shifted = TimeSeries('2020-05-02', np.arange(10.0), name=MOBILITY_VARIABLES[0])
    with pytest.raises(AlignmentError, match="Series 'rr' is not aligned"):
        apply_lag(cases, [shifted], 2)
