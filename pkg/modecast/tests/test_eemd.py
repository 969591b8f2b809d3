import numpy as np
import pandas as pd
import pytest

from modecast.config import config
from modecast.eemd import (
    Decomposition,
    EemdConfig,
    eemd,
    emd,
    envelope,
    find_extrema,
    sift,
    spline_envelope
)
from modecast.exceptions import DegenerateEnvelopeError, TooShortError
from modecast.timeseries import TimeSeries


def test_find_extrema():
    maxima, minima = find_extrema([0, 1, 0, -1, 0])
    assert maxima == [(1, 1.0)]
    assert minima == [(3, -1.0)]


def test_find_extrema_of_a_sine():
    t = np.arange(100)
    maxima, minima = find_extrema(np.sin(2 * np.pi * t / 20))
    assert [i for i, _ in maxima] == [5, 25, 45, 65, 85]
    assert [i for i, _ in minima] == [15, 35, 55, 75, 95]
    # maxima and minima alternate
    indices = sorted([(i, 'max') for i, _ in maxima] + [(i, 'min') for i, _ in minima])
    assert all(first[1] != second[1] for first, second in zip(indices, indices[1:]))


def test_find_extrema_plateau():
    maxima, minima = find_extrema([0, 2, 2, 2, 0, 1])
    assert maxima == [(2, 2.0)]
    assert minima == [(4, 0.0)]


def test_find_extrema_monotone_and_boundaries():
    assert find_extrema(np.arange(10)) == ([], [])
    # boundary samples are never extrema
    assert find_extrema([5, 0, 5]) == ([], [(1, 0.0)])


def test_find_extrema_too_short():
    with pytest.raises(TooShortError, match='at least 3 values'):
        find_extrema([1, 2])


def test_spline_envelope_passes_through_knots():
    knots = [(2, 1.0), (5, 3.0), (8, 2.0)]
    result = spline_envelope(knots, 11, start_day=100)
    assert len(result) == 11
    assert result.start_day == 100
    for index, value in knots:
        assert result.values[index] == pytest.approx(value, abs=1e-12)


def test_spline_envelope_degenerate():
    with pytest.raises(DegenerateEnvelopeError, match='at least 2 extrema'):
        spline_envelope([(3, 1.0)], 10)


def test_envelope(two_tone_series):
    env = envelope(two_tone_series)
    np.testing.assert_allclose(env.mean.values, (env.upper.values + env.lower.values) / 2)
    maxima, minima = find_extrema(two_tone_series)
    for index, value in maxima:
        assert env.upper.values[index] == pytest.approx(value)
    for index, value in minima:
        assert env.lower.values[index] == pytest.approx(value)


def test_envelope_degenerate():
    with pytest.raises(DegenerateEnvelopeError):
        envelope(TimeSeries('2020-01-01', np.arange(20.0), name='ramp'))


def test_sift_without_oscillation_returns_zero_imf():
    ramp = TimeSeries('2020-01-01', np.arange(20.0) ** 2, name='ramp')
    imf, remainder = sift(ramp)
    np.testing.assert_array_equal(imf.values, np.zeros(20))
    np.testing.assert_array_equal(remainder.values, ramp.values)


def test_sift_is_complete(two_tone_series):
    imf, remainder = sift(two_tone_series, iterations=3)
    np.testing.assert_allclose(imf.values + remainder.values, two_tone_series.values, atol=1e-10)


def test_emd_completeness_on_random_signals(rng):
    for _ in range(20):
        n = int(rng.integers(50, 500))
        x = TimeSeries('2020-01-01', rng.normal(size=n).cumsum() + rng.normal(size=n), name='random')
        decomposition = emd(x, s=5)
        assert decomposition.num_imfs == 5
        assert np.max(np.abs(decomposition.reconstruct().values - x.values)) <= 1e-8


def _zero_crossing_rate(values):
    return np.mean(np.diff(np.sign(values)) != 0)


def test_imfs_are_ordered_by_frequency():
    rates = []
    for seed in range(10):
        noise = TimeSeries('2020-01-01', np.random.default_rng(seed).normal(size=400), name='noise')
        decomposition = emd(noise, s=3)
        rates.append([_zero_crossing_rate(imf.values[20:-20]) for imf in decomposition.imfs])
    rates = np.array(rates)
    assert np.all(np.diff(rates.mean(axis=0)) < 0)
    assert np.sum(np.all(np.diff(rates, axis=1) < 0, axis=1)) >= 9


def test_emd_separates_scales(two_tone_series):
    decomposition = emd(two_tone_series, s=3, sift_iterations=10)
    fast = decomposition.level(1).values
    # the first IMF carries the 6-day tone
    expected = 3 * np.sin(2 * np.pi * np.arange(120) / 6)
    inner = slice(12, -12)
    assert np.corrcoef(fast[inner], expected[inner])[0, 1] > 0.8


def test_emd_zero_fills_missing_imfs():
    line = TimeSeries('2020-01-01', 2 * np.arange(30.0) + 1, name='line')
    decomposition = emd(line, s=4)
    assert decomposition.num_imfs == 4
    for imf in decomposition.imfs:
        np.testing.assert_array_equal(imf.values, np.zeros(30))
    np.testing.assert_array_equal(decomposition.residual.values, line.values)


def test_emd_uses_config_default():
    config.set_option('num_imfs', 2)
    decomposition = emd(TimeSeries('2020-01-01', np.sin(np.arange(50.0)), name='sine'))
    assert decomposition.num_imfs == 2


def test_eemd_config():
    cfg = EemdConfig(num_ensembles=5, rng_seed=3)
    assert cfg.noise_ratio == 0.01
    assert cfg.num_imfs == 5
    assert cfg.with_seed(4) == EemdConfig(num_ensembles=5, rng_seed=4)
    with pytest.raises(ValueError, match='num_ensembles must be at least 1'):
        EemdConfig(num_ensembles=0)
    with pytest.raises(ValueError, match='noise_ratio must be positive'):
        EemdConfig(noise_ratio=0)


def test_eemd_reconstruction_bound(two_tone_series):
    cfg = EemdConfig(num_ensembles=50, noise_ratio=0.01, num_imfs=5, rng_seed=11)
    decomposition = eemd(two_tone_series, cfg)
    sigma = np.std(two_tone_series.values)
    bound = 6 * cfg.noise_ratio * sigma / np.sqrt(cfg.num_ensembles)
    assert np.max(np.abs(decomposition.reconstruct().values - two_tone_series.values)) <= bound


def test_eemd_is_deterministic(two_tone_series, small_eemd):
    first = eemd(two_tone_series, small_eemd)
    second = eemd(two_tone_series, small_eemd)
    assert first == second
    other = eemd(two_tone_series, small_eemd.with_seed(8))
    assert not np.array_equal(first.level(1).values, other.level(1).values)


def test_eemd_constant_series(small_eemd):
    constant = TimeSeries('2020-01-01', np.full(40, 7.0), name='flat')
    decomposition = eemd(constant, small_eemd)
    for imf in decomposition.imfs:
        np.testing.assert_array_equal(imf.values, np.zeros(40))
    np.testing.assert_allclose(decomposition.residual.values, 7.0)


def test_eemd_too_short(small_eemd):
    with pytest.raises(TooShortError, match="'tiny' has 2"):
        eemd(TimeSeries('2020-01-01', [1.0, 2.0], name='tiny'), small_eemd)


def test_decomposition_levels_and_frame(two_tone_series, small_eemd):
    decomposition = eemd(two_tone_series, small_eemd)
    assert decomposition.level(4) is decomposition.residual
    assert decomposition.level(1).name == 'two_tone_imf_1'
    with pytest.raises(IndexError):
        decomposition.level(5)
    frame = decomposition.to_frame()
    assert list(frame.columns) == ['date', 'imf_1', 'imf_2', 'imf_3', 'residual']
    assert frame['date'].iloc[0] == '2020-03-01'
    assert len(frame) == len(two_tone_series)


def test_decomposition_requires_aligned_components():
    residual = TimeSeries('2020-01-01', np.zeros(5))
    with pytest.raises(ValueError, match='share the residual date range'):
        Decomposition([TimeSeries('2020-01-02', np.zeros(5))], residual)
    assert isinstance(Decomposition([], residual).to_frame(), pd.DataFrame)
