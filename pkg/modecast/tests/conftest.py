import numpy as np
import pytest

from modecast.arimax import ArimaxOrder
from modecast.config import CONFIG_DEFAULTS, config
from modecast.demo import load_synthetic_panel, write_synthetic_dataset
from modecast.eemd import EemdConfig
from modecast.graph import CityGraph
from modecast.timeseries import TimeSeries


@pytest.fixture(autouse=True)
def restore_config():
    yield
    for key in CONFIG_DEFAULTS:
        config.reset_option(key)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


@pytest.fixture()
def two_tone_series():
    t = np.arange(120)
    values = 3 * np.sin(2 * np.pi * t / 6) + 10 * np.sin(2 * np.pi * t / 40) + 0.05 * t
    return TimeSeries('2020-03-01', values, name='two_tone')


@pytest.fixture()
def small_eemd():
    return EemdConfig(num_ensembles=10, noise_ratio=0.01, num_imfs=3, sift_iterations=1, rng_seed=7)


@pytest.fixture()
def small_bounds():
    return ArimaxOrder(1, 1, 1)


@pytest.fixture()
def two_node_graph():
    return CityGraph.from_weights(['a', 'b'], [[0.0, 3.0], [3.0, 0.0]])


@pytest.fixture()
def triangle_graph():
    return CityGraph.from_weights(['a', 'b', 'c'], np.ones((3, 3)) - np.eye(3))


@pytest.fixture()
def spike_panel():
    return load_synthetic_panel(num_cities=5, num_days=60, spike_city=0, spike_day=30, seed=3)


@pytest.fixture()
def dataset(tmp_path):
    panel = load_synthetic_panel(num_cities=3, num_days=60, spike_city=0, spike_day=30, seed=1)
    return write_synthetic_dataset(str(tmp_path / 'data'), panel)
