import numpy as np
import pytest

from modecast.config import config
from modecast.exceptions import DimensionError, DuplicateNodeError, GraphTooSmallError
from modecast.graph import (
    EARTH_RADIUS_KM,
    CityGraph,
    GraphSignal,
    SpectralFilter,
    apply_filter,
    build_graph,
    gft,
    haversine_km,
    igft
)
from modecast.tests.testing_utils import random_graph


def test_two_node_spectrum(two_node_graph):
    np.testing.assert_allclose(two_node_graph.eigenvalues, [0.0, 6.0], atol=1e-12)
    assert two_node_graph.lambda_max == pytest.approx(6.0)
    np.testing.assert_allclose(two_node_graph.laplacian, [[3, -3], [-3, 3]])
    assert list(two_node_graph.edges()) == [('a', 'b', 3.0)]


def test_triangle_spectrum(triangle_graph):
    np.testing.assert_allclose(triangle_graph.eigenvalues, [0.0, 3.0, 3.0], atol=1e-12)
    again = CityGraph(['a', 'b', 'c'], np.ones((3, 3)) - np.eye(3))
    np.testing.assert_array_equal(again.eigenvectors, triangle_graph.eigenvectors)


def test_eigenvectors_are_normalized(rng):
    g = random_graph(6, rng)
    assert np.all(np.diff(g.eigenvalues) >= -1e-12)
    np.testing.assert_allclose(g.eigenvectors.T @ g.eigenvectors, np.eye(6), atol=1e-10)
    for column in g.eigenvectors.T:
        pivot = np.flatnonzero(np.abs(column) > 1e-10)[0]
        assert column[pivot] > 0


def test_eigenvector_quadratic_form_is_its_eigenvalue(rng):
    for num_nodes in (3, 6, 10):
        g = random_graph(num_nodes, rng)
        for value, column in zip(g.eigenvalues, g.eigenvectors.T):
            assert column @ g.laplacian @ column == pytest.approx(value, abs=1e-8)


def test_accentuator_never_shrinks_coefficients(rng):
    for alpha in (0.0, 0.5, 1.0, 3.0):
        g = random_graph(6, rng)
        assert np.all(SpectralFilter.accentuate(alpha).gains(g) >= 1.0)
        x = rng.normal(size=6)
        before = np.abs(gft(g, x).values)
        after = np.abs(gft(g, apply_filter(g, x, SpectralFilter.accentuate(alpha))).values)
        assert np.all(after >= before - 1e-10)


def test_graph_arrays_are_read_only(two_node_graph):
    with pytest.raises(ValueError):
        two_node_graph.weights[0, 1] = 10.0
    with pytest.raises(ValueError):
        two_node_graph.eigenvectors[0, 0] = 1.0


def test_graph_validation():
    with pytest.raises(DuplicateNodeError, match='Duplicate node identifier'):
        CityGraph(['a', 'a'], np.zeros((2, 2)))
    with pytest.raises(GraphTooSmallError, match='at least 2 nodes'):
        CityGraph(['a'], np.zeros((1, 1)))
    with pytest.raises(DimensionError, match='expected \\(2, 2\\)'):
        CityGraph(['a', 'b'], np.zeros((3, 3)))
    with pytest.raises(ValueError, match='non-negative'):
        CityGraph(['a', 'b'], [[0, -1], [-1, 0]])
    with pytest.raises(ValueError, match='symmetric'):
        CityGraph(['a', 'b'], [[0, 1], [2, 0]])
    with pytest.raises(ValueError, match='zero diagonal'):
        CityGraph(['a', 'b'], [[1, 1], [1, 0]])


def test_gft_of_constant_signal(triangle_graph):
    coefficients = gft(triangle_graph, [2.0, 2.0, 2.0]).values
    assert coefficients[0] == pytest.approx(2.0 * np.sqrt(3))
    np.testing.assert_allclose(coefficients[1:], 0.0, atol=1e-12)


def test_gft_two_nodes(two_node_graph):
    np.testing.assert_allclose(gft(two_node_graph, [1.0, -1.0]).values, [0.0, np.sqrt(2)], atol=1e-12)
    with pytest.raises(DimensionError, match='graph has 2 nodes'):
        gft(two_node_graph, [1.0, 2.0, 3.0])


def test_accentuator_doubles_highest_frequency(two_node_graph):
    filtered = apply_filter(two_node_graph, GraphSignal([1.0, -1.0]), SpectralFilter.accentuate(1.0))
    np.testing.assert_allclose(filtered.values, [2.0, -2.0], atol=1e-12)
    assert filtered.node_ids == ['a', 'b']

    unchanged = apply_filter(two_node_graph, [1.0, -1.0], SpectralFilter.accentuate(0.0))
    np.testing.assert_allclose(unchanged.values, [1.0, -1.0], atol=1e-12)


def test_lowpass(rng):
    g = random_graph(7, rng)
    x = rng.normal(size=7)
    np.testing.assert_allclose(apply_filter(g, x, SpectralFilter.lowpass(1.0)).values, x, atol=1e-10)

    half = SpectralFilter.lowpass(0.5)
    assert half.num_kept(7) == 4
    once = apply_filter(g, x, half)
    twice = apply_filter(g, once, half)
    np.testing.assert_allclose(twice.values, once.values, atol=1e-10)
    np.testing.assert_allclose(gft(g, once).values[4:], 0.0, atol=1e-10)


def test_parseval_and_round_trip(rng):
    for num_nodes in (2, 5, 12):
        g = random_graph(num_nodes, rng)
        x = rng.normal(size=num_nodes)
        coefficients = gft(g, x)
        assert np.linalg.norm(coefficients.values) == pytest.approx(np.linalg.norm(x))
        np.testing.assert_allclose(igft(g, coefficients).values, x, atol=1e-10)


def test_zero_weight_graph_leaves_signals_unchanged():
    g = CityGraph(['a', 'b', 'c'], np.zeros((3, 3)))
    assert g.lambda_max == 0
    np.testing.assert_array_equal(SpectralFilter.accentuate(2.0).gains(g), np.ones(3))
    filtered = apply_filter(g, [1.0, 5.0, -2.0], SpectralFilter.accentuate(2.0))
    np.testing.assert_allclose(filtered.values, [1.0, 5.0, -2.0])


def test_spectral_filter_validation():
    assert SpectralFilter.accentuate().alpha == 1.0
    config.set_option('lowpass_cutoff', 0.25)
    assert SpectralFilter.lowpass().cutoff == 0.25
    with pytest.raises(ValueError, match="Unknown filter kind 'highpass'"):
        SpectralFilter('highpass')
    with pytest.raises(ValueError, match='must be non-negative'):
        SpectralFilter.accentuate(-1.0)
    with pytest.raises(ValueError, match='must be in \\(0, 1\\]'):
        SpectralFilter.lowpass(0.0)


def test_graph_signal_validation():
    with pytest.raises(DimensionError, match='3 values given for 2 nodes'):
        GraphSignal([1, 2, 3], node_ids=['a', 'b'])
    with pytest.raises(ValueError, match='finite'):
        GraphSignal([1, np.inf])


def test_haversine_km():
    assert haversine_km((0, 0), (0, 1)) == pytest.approx(EARTH_RADIUS_KM * np.pi / 180)
    assert haversine_km((0, 0), (0, 1)) == pytest.approx(111.195, abs=1e-3)
    assert haversine_km((-8.05, -34.88), (-8.05, -34.88)) == 0


def test_build_graph_literal_distance():
    cities = [('a', 0.0, 0.0), ('b', 0.0, 1.0), ('c', 0.0, 3.0)]
    g = build_graph(cities)
    assert g.node_ids == ['a', 'b', 'c']
    assert g.weights[0, 1] == pytest.approx(haversine_km((0, 0), (0, 1)))
    assert g.weights[0, 2] == pytest.approx(3 * g.weights[0, 1])


def test_build_graph_gaussian_kernel():
    cities = [('a', 0.0, 0.0), ('b', 0.0, 1.0), ('c', 0.0, 3.0)]
    g = build_graph(cities, weight_mode='gaussian-kernel')
    # b-c is the median pair distance
    assert g.weights[1, 2] == pytest.approx(np.exp(-0.5))
    assert g.weights[0, 1] == pytest.approx(np.exp(-0.125))
    assert np.all(np.diag(g.weights) == 0)


def test_build_graph_errors():
    with pytest.raises(ValueError, match="Unknown weight mode 'manhattan'"):
        build_graph([('a', 0, 0), ('b', 0, 1)], weight_mode='manhattan')
    with pytest.raises(DuplicateNodeError):
        build_graph([('a', 0, 0), ('a', 0, 1)])
    with pytest.raises(GraphTooSmallError):
        build_graph([('a', 0, 0)])
    with pytest.raises(ValueError, match='Latitude 91'):
        build_graph([('a', 91, 0), ('b', 0, 1)])
