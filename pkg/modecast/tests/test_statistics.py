import numpy as np
import pytest

from modecast.exceptions import (
    DimensionError,
    InvalidDegreesOfFreedomError,
    TooShortError,
    UndefinedCorrelationError,
    UndefinedCorrelationWarning
)
from modecast.statistics_utils import (
    CorrelationResult,
    _is_selected,
    _spearman_from_rank_differences,
    describe_panel,
    metrics,
    relative_improvement,
    screen_variables,
    spearman,
    student_t_sf
)
from modecast.tests.testing_utils import make_panel, permutation_p_values
from modecast.timeseries import TimeSeries


def test_student_t_sf():
    assert student_t_sf(0.0, 5) == pytest.approx(0.5)
    assert student_t_sf(np.inf, 3) == 0.0
    assert student_t_sf(2.0, 10) == pytest.approx(0.0367, abs=5e-4)
    assert student_t_sf(-2.0, 10) == pytest.approx(1 - student_t_sf(2.0, 10))
    # df = 1 is the Cauchy distribution
    assert student_t_sf(1.0, 1) == pytest.approx(0.25)
    with pytest.raises(InvalidDegreesOfFreedomError, match='at least 1, got 0'):
        student_t_sf(1.0, 0)


def test_spearman_examples():
    assert spearman([1, 2, 3], [2, 4, 6]) == (1.0, 0.0)
    assert spearman([1, 2, 3], [3, 2, 1]) == (-1.0, 0.0)
    rho, p_value = spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert rho == pytest.approx(0.8)
    assert 0 < p_value < 1


def test_spearman_matches_rank_difference_form(rng):
    for _ in range(10):
        x, y = rng.normal(size=30), rng.normal(size=30)
        rho, _ = spearman(x, y)
        assert rho == pytest.approx(_spearman_from_rank_differences(x, y))


def test_spearman_p_value_agrees_with_permutation_test(rng):
    for n in (7, 8, 9):
        for _ in range(4):
            x, y = rng.normal(size=n), rng.normal(size=n)
            y = y + rng.uniform(0, 2) * x
            _, p_value = spearman(x, y)
            strict, inclusive = permutation_p_values(x, y)
            assert strict - 0.02 <= p_value <= inclusive + 0.02


def test_spearman_ties_use_mid_ranks():
    rho, _ = spearman([1, 1, 2, 3], [1, 2, 3, 4])
    assert rho == pytest.approx(np.corrcoef([1.5, 1.5, 3, 4], [1, 2, 3, 4])[0, 1])


def test_spearman_errors():
    with pytest.raises(TooShortError, match='at least 3 pairs'):
        spearman([1, 2], [1, 2])
    with pytest.raises(DimensionError, match='x has length 3 but y has length 4'):
        spearman([1, 2, 3], [1, 2, 3, 4])
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 1, 1], [1, 2, 3])


def test_is_selected():
    assert _is_selected(0.3, 0.001, 0.3, 0.01, strict=False)
    assert not _is_selected(0.3, 0.001, 0.3, 0.01, strict=True)
    assert _is_selected(-0.5, 0.01, 0.3, 0.01, strict=False)
    assert not _is_selected(0.9, 0.02, 0.3, 0.01, strict=False)


def test_screen_variables(rng):
    cases = TimeSeries('2020-05-01', np.arange(1.0, 51.0) + rng.normal(size=50), name='new_cases')
    candidates = {'rr': cases.with_values(cases.values, name='rr'),
                  'gp': cases.with_values(-cases.values, name='gp'),
                  'rain_mm': cases.with_values(rng.normal(size=50), name='rain_mm')}
    results = screen_variables(cases, candidates)
    assert [result.variable_name for result in results] == ['rr', 'gp', 'rain_mm']
    assert results[0].rho == 1.0 and results[0].selected
    assert results[1].rho == -1.0 and results[1].selected
    assert results[2].n_samples == 50
    assert results[0].to_dict() == {'variable': 'rr', 'rho': 1.0, 'p_value': 0.0, 'selected': True}


def test_screen_variables_white_noise_unselected():
    cases = TimeSeries(0, np.random.default_rng(0).normal(size=200))
    unselected = 0
    for seed in range(1, 21):
        noise = TimeSeries(0, np.random.default_rng(seed).normal(size=200))
        unselected += not screen_variables(cases, {'noise': noise})[0].selected
    assert unselected >= 19


def test_screen_variables_undefined_correlation():
    cases = TimeSeries(0, [1.0, 3.0, 2.0, 5.0])
    with pytest.warns(UndefinedCorrelationWarning, match="'flat'"):
        results = screen_variables(cases, {'flat': TimeSeries(0, [2.0] * 4)})
    assert results == [CorrelationResult('flat', 0.0, 1.0, 4, False, defined=False)]
    assert screen_variables(cases, {}) == []


def test_screen_variables_length_mismatch():
    with pytest.raises(DimensionError, match='rr has length 2 but cases has length 3'):
        screen_variables(TimeSeries(0, [1.0, 2.0, 3.0]), {'rr': TimeSeries(0, [1.0, 2.0])})


def test_metrics():
    assert metrics([1, 2, 3], [1, 2, 3]) == (0.0, 0.0, 0.0)
    assert metrics([2, 0], [0, 2]) == (0.0, 2.0, 2.0)
    me, rmse, mae = metrics(np.arange(5.0) - 3, np.arange(5.0))
    assert (me, rmse, mae) == pytest.approx((-3.0, 3.0, 3.0))
    with pytest.raises(DimensionError, match='predicted has length 1 but observed has length 2'):
        metrics([1], [1, 2])
    with pytest.raises(DimensionError, match='at least one value'):
        metrics([], [])


def test_relative_improvement():
    assert relative_improvement(10.0, 8.0) == pytest.approx(20.0)
    assert relative_improvement(10.0, 12.0) == pytest.approx(-20.0)
    assert relative_improvement(0.0, 1.0) == 0.0


def test_describe_panel():
    panel = make_panel({'a': [0.0, 0, 2, 4], 'b': [1.0, 3, 5, 7]})
    frame = describe_panel(panel)
    assert list(frame.columns) == ['city_id', 'variable', 'count', 'mean', 'std', 'min', 'max',
                                   'first_date', 'first_case_date']
    assert list(frame['city_id']) == ['a', 'b']
    assert set(frame['variable']) == {'new_cases'}
    row = frame.iloc[0]
    assert row['count'] == 4
    assert row['mean'] == pytest.approx(1.5)
    assert row['max'] == 4
    assert row['first_date'] == '2020-05-01'
    assert row['first_case_date'] == '2020-05-03'
    assert frame.iloc[1]['first_case_date'] == '2020-05-01'


def test_describe_panel_no_cases():
    frame = describe_panel(make_panel({'a': [0.0, 0.0], 'b': [0.0, 1.0]}))
    assert frame.iloc[0]['first_case_date'] == ''
