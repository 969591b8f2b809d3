import numpy as np
from sklearn.metrics.pairwise import haversine_distances

from modecast.config import config
from modecast.exceptions import DimensionError, DuplicateNodeError, GraphTooSmallError
from modecast.utils import _validate_coordinates

EARTH_RADIUS_KM = 6371.0088
WEIGHT_MODES = ('literal-distance', 'gaussian-kernel')
FILTER_KINDS = ('accentuate', 'lowpass')


class CityGraph(object):
    def __init__(self, node_ids, weights):
        """Create CityGraph

        Builds the Laplacian ``L = D - W`` and its full eigendecomposition. Eigenvalues are
        non-decreasing; each eigenvector has its first non-negligible entry positive and
        eigenvectors sharing an eigenvalue are ordered lexicographically.

        Args:
            node_ids (list[str]): Distinct node identifiers, at least two.
            weights (np.ndarray): Symmetric, non-negative weight matrix with a zero diagonal.
        """
        node_ids = list(node_ids)
        duplicates = sorted({node for node in node_ids if node_ids.count(node) > 1})
        if duplicates:
            raise DuplicateNodeError(f"Duplicate node identifier(s): {', '.join(map(str, duplicates))}")
        if len(node_ids) < 2:
            raise GraphTooSmallError(f'A graph needs at least 2 nodes, got {len(node_ids)}')
        weights = np.array(weights, dtype=float)
        _validate_weights(weights, len(node_ids))

        self.node_ids = node_ids
        self.weights = weights
        self.laplacian = np.diag(weights.sum(axis=1)) - weights
        self.eigenvalues, self.eigenvectors = _ordered_eigh(self.laplacian)
        for array in (self.weights, self.laplacian, self.eigenvalues, self.eigenvectors):
            array.setflags(write=False)

    def __len__(self):
        return len(self.node_ids)

    def __repr__(self):
        return f'<CityGraph ({len(self)} nodes, lambda_max={self.eigenvalues[-1]:.6g})>'

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @classmethod
    def from_weights(cls, node_ids, weights):
        """Builds a graph from an explicit weight matrix."""
        return cls(node_ids, weights)

    def edges(self):
        """Yields ``(id_i, id_j, w_ij)`` for every node pair with ``i < j``."""
        for i in range(len(self)):
            for j in range(i + 1, len(self)):
                yield self.node_ids[i], self.node_ids[j], float(self.weights[i, j])


class GraphSignal(object):
    def __init__(self, values, node_ids=None):
        """Create GraphSignal

        Args:
            values (array-like): One finite value per node.
            node_ids (list[str], optional): Node identifiers the values are ordered by.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise DimensionError('Graph signal values must be one-dimensional')
        if not np.all(np.isfinite(values)):
            raise ValueError('Graph signal values must be finite')
        if node_ids is not None and len(node_ids) != len(values):
            raise DimensionError(f'{len(values)} values given for {len(node_ids)} nodes')
        self.values = values
        self.node_ids = list(node_ids) if node_ids is not None else None

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f'<GraphSignal ({len(self)} values)>'


class SpectralFilter(object):
    def __init__(self, kind, alpha=None, cutoff=None):
        """Create SpectralFilter

        Args:
            kind (str): ``accentuate`` or ``lowpass``.
            alpha (float, optional): Gain of the accentuator, at least 0. Defaults to the
                ``filter_alpha`` config option.
            cutoff (float, optional): Fraction of the spectrum kept by the low-pass filter,
                in (0, 1]. Defaults to the ``lowpass_cutoff`` config option.
        """
        if kind not in FILTER_KINDS:
            raise ValueError(f"Unknown filter kind '{kind}', expected one of {', '.join(FILTER_KINDS)}")
        self.kind = kind
        if kind == 'accentuate':
            self.alpha = float(config._resolve('filter_alpha', alpha))
            if not self.alpha >= 0:
                raise ValueError(f'Accentuator gain must be non-negative, got {self.alpha}')
        else:
            self.cutoff = float(config._resolve('lowpass_cutoff', cutoff))
            if not 0 < self.cutoff <= 1:
                raise ValueError(f'Low-pass cutoff must be in (0, 1], got {self.cutoff}')

    def __repr__(self):
        if self.kind == 'accentuate':
            return f'<SpectralFilter accentuate (alpha={self.alpha})>'
        return f'<SpectralFilter lowpass (cutoff={self.cutoff})>'

    @classmethod
    def accentuate(cls, alpha=None):
        return cls('accentuate', alpha=alpha)

    @classmethod
    def lowpass(cls, cutoff=None):
        return cls('lowpass', cutoff=cutoff)

    def num_kept(self, num_nodes):
        """Number of lowest-frequency coefficients kept by a low-pass filter."""
        return int(np.ceil(self.cutoff * num_nodes - 1e-9))

    def gains(self, g):
        """Per-coefficient gains over the spectrum of ``g``, ordered by eigenvalue."""
        if self.kind == 'accentuate':
            if g.lambda_max <= 0:
                return np.ones(len(g))
            return 1 + self.alpha * np.maximum(g.eigenvalues, 0) / g.lambda_max
        gains = np.zeros(len(g))
        gains[:self.num_kept(len(g))] = 1.0
        return gains


def haversine_km(first, second):
    """Great-circle distance in km between two (latitude, longitude) pairs."""
    points = np.radians([_validate_coordinates(*first), _validate_coordinates(*second)])
    return float(haversine_distances(points)[0, 1] * EARTH_RADIUS_KM)


def build_graph(cities, weight_mode=None):
    """Builds the complete city graph.

    Args:
        cities (list[(str, float, float)]): ``(city_id, latitude, longitude)`` per node.
        weight_mode (str, optional): ``literal-distance`` weights each edge with the great-circle
            distance in km; ``gaussian-kernel`` uses ``exp(-d^2 / (2 theta^2))`` with ``theta``
            the median pairwise distance. Defaults to the ``weight_mode`` config option.

    Returns:
        CityGraph: The graph with its Laplacian spectrum.
    """
    weight_mode = config._resolve('weight_mode', weight_mode)
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"Unknown weight mode '{weight_mode}', expected one of {', '.join(WEIGHT_MODES)}")
    node_ids = [city_id for city_id, _, _ in cities]
    duplicates = sorted({node for node in node_ids if node_ids.count(node) > 1})
    if duplicates:
        raise DuplicateNodeError(f"Duplicate node identifier(s): {', '.join(map(str, duplicates))}")
    if len(node_ids) < 2:
        raise GraphTooSmallError(f'A graph needs at least 2 nodes, got {len(node_ids)}')

    coordinates = np.radians([_validate_coordinates(lat, lon) for _, lat, lon in cities])
    distances = haversine_distances(coordinates) * EARTH_RADIUS_KM
    distances = (distances + distances.T) / 2
    np.fill_diagonal(distances, 0.0)
    if weight_mode == 'literal-distance':
        return CityGraph(node_ids, distances)

    pairwise = distances[np.triu_indices(len(node_ids), k=1)]
    theta = np.median(pairwise) or np.max(pairwise) or 1.0
    weights = np.exp(-distances ** 2 / (2 * theta ** 2))
    np.fill_diagonal(weights, 0.0)
    return CityGraph(node_ids, weights)


def _check_signal(g, x):
    values = np.asarray(getattr(x, 'values', x), dtype=float)
    if values.shape[-1] != len(g):
        raise DimensionError(f'Signal has {values.shape[-1]} values but the graph has {len(g)} nodes')
    return values


def gft(g, x):
    """Graph Fourier transform ``U^T x``, coefficients ordered by ascending eigenvalue."""
    return GraphSignal(_check_signal(g, x) @ g.eigenvectors)


def igft(g, xh):
    """Inverse graph Fourier transform ``U xh``."""
    return GraphSignal(_check_signal(g, xh) @ g.eigenvectors.T, node_ids=g.node_ids)


def apply_filter(g, x, f):
    """Filters a graph signal in the spectral domain.

    Args:
        g (CityGraph): Graph providing the spectrum.
        x (GraphSignal): Signal ordered like ``g.node_ids``.
        f (SpectralFilter): Accentuator or low-pass filter.

    Returns:
        GraphSignal: The filtered signal.
    """
    return GraphSignal(_filter_rows(g, _check_signal(g, x), f), node_ids=g.node_ids)


def _filter_rows(g, rows, f):
    """Filters every row of ``rows`` (one signal per row) at once."""
    return ((rows @ g.eigenvectors) * f.gains(g)) @ g.eigenvectors.T


def _validate_weights(weights, num_nodes):
    if weights.shape != (num_nodes, num_nodes):
        raise DimensionError(f'Weight matrix has shape {weights.shape}, expected ({num_nodes}, {num_nodes})')
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValueError('Weights must be finite and non-negative')
    if not np.allclose(weights, weights.T, rtol=0, atol=1e-12):
        raise ValueError('Weight matrix must be symmetric')
    if np.any(np.diag(weights) != 0):
        raise ValueError('Weight matrix must have a zero diagonal')


def _ordered_eigh(laplacian):
    eigenvalues, eigenvectors = np.linalg.eigh(laplacian)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    vectors = []
    for column in eigenvectors.T:
        pivot = np.flatnonzero(np.abs(column) > 1e-10)[0]
        vectors.append(column if column[pivot] > 0 else -column)

    order = sorted(range(len(eigenvalues)), key=lambda l: eigenvalues[l])
    clusters, current = [], [order[0]]
    for l in order[1:]:
        if eigenvalues[l] - eigenvalues[current[-1]] <= 1e-9 * scale:
            current.append(l)
        else:
            clusters.append(current)
            current = [l]
    clusters.append(current)

    ordered = []
    for cluster in clusters:
        ordered.extend(sorted(cluster, key=lambda l: tuple(np.round(vectors[l], 12))))
    return eigenvalues[ordered], np.column_stack([vectors[l] for l in ordered])
