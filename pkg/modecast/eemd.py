import logging

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from modecast.config import config
from modecast.exceptions import DegenerateEnvelopeError, TooShortError
from modecast.timeseries import TimeSeries
from modecast.utils import _MASK64

logger = logging.getLogger(__name__)


class EemdConfig(object):
    def __init__(self,
                 num_ensembles=None,
                 noise_ratio=None,
                 num_imfs=None,
                 sift_iterations=None,
                 rng_seed=None):
        """Create EemdConfig

        Any parameter left as None takes its value from the global config.

        Args:
            num_ensembles (int, optional): Number of noise-perturbed ensemble members ``m``.
            noise_ratio (float, optional): Ratio ``mu`` between the noise and the signal standard deviations.
            num_imfs (int, optional): Number of IMFs ``s`` extracted before the residual.
            sift_iterations (int, optional): Envelope-mean removals per IMF. 1 extracts each IMF
                with a single mean removal.
            rng_seed (int, optional): 64-bit seed of the white-noise generator.
        """
        self.num_ensembles = int(config._resolve('num_ensembles', num_ensembles))
        self.noise_ratio = float(config._resolve('noise_ratio', noise_ratio))
        self.num_imfs = int(config._resolve('num_imfs', num_imfs))
        self.sift_iterations = int(config._resolve('sift_iterations', sift_iterations))
        self.rng_seed = int(config._resolve('rng_seed', rng_seed))
        _validate_eemd_config(self)

    def __eq__(self, other):
        return isinstance(other, EemdConfig) and vars(self) == vars(other)

    def __repr__(self):
        return (f"<EemdConfig (m={self.num_ensembles}, mu={self.noise_ratio}, s={self.num_imfs}, "
                f"sift_iterations={self.sift_iterations}, seed={self.rng_seed})>")

    def with_seed(self, rng_seed):
        """Returns a copy of the configuration using a different seed."""
        return EemdConfig(self.num_ensembles, self.noise_ratio, self.num_imfs, self.sift_iterations, rng_seed)


class Envelope(object):
    def __init__(self, upper, lower):
        """Create Envelope from the upper and lower spline envelopes; the mean is derived."""
        self.upper = upper
        self.lower = lower
        self.mean = upper.with_values((upper.values + lower.values) / 2, name='envelope_mean')

    def __repr__(self):
        return f'<Envelope ({len(self.upper)} values)>'


class Decomposition(object):
    def __init__(self, imfs, residual, source_name=None):
        """Create Decomposition

        Args:
            imfs (list[TimeSeries]): IMFs ordered from the highest to the lowest frequency.
            residual (TimeSeries): The non-oscillatory remainder.
            source_name (str, optional): Name of the decomposed series.
        """
        for imf in imfs:
            if len(imf) != len(residual) or imf.start_day != residual.start_day:
                raise ValueError('Every IMF must share the residual date range')
        self.imfs = list(imfs)
        self.residual = residual
        self.source_name = source_name

    def __eq__(self, other):
        return (isinstance(other, Decomposition) and
                self.source_name == other.source_name and
                self.imfs == other.imfs and
                self.residual == other.residual)

    def __repr__(self):
        return f"<Decomposition of '{self.source_name}' ({self.num_imfs} IMFs + residual, {len(self.residual)} values)>"

    @property
    def num_imfs(self):
        return len(self.imfs)

    @property
    def components(self):
        """The IMFs followed by the residual."""
        return self.imfs + [self.residual]

    def level(self, j):
        """Returns component ``j`` (1-based); level ``num_imfs + 1`` is the residual."""
        if not 1 <= j <= self.num_imfs + 1:
            raise IndexError(f"Level {j} is outside 1..{self.num_imfs + 1}")
        return self.components[j - 1]

    def reconstruct(self):
        """Returns the pointwise sum of every IMF and the residual."""
        total = np.sum([component.values for component in self.components], axis=0)
        return self.residual.with_values(total, name=self.source_name)

    def to_frame(self):
        """DataFrame with a ``date`` column, ``imf_1`` .. ``imf_s`` and ``residual``."""
        data = {'date': self.residual.dates.strftime('%Y-%m-%d')}
        for j, imf in enumerate(self.imfs, start=1):
            data[f'imf_{j}'] = imf.values
        data['residual'] = self.residual.values
        return pd.DataFrame(data)


def find_extrema(x):
    """Identifies the strict local extrema of a series.

    Flat plateaus count once, at their midpoint index, when both neighbouring runs lie on the
    same side. The first and last samples are never extrema.

    Args:
        x (TimeSeries or array-like): Series with at least three values.

    Returns:
        (list[(int, float)], list[(int, float)]): The maxima and the minima as (index, value) pairs.
    """
    values = np.asarray(getattr(x, 'values', x), dtype=float)
    if len(values) < 3:
        raise TooShortError(f'Finding extrema needs at least 3 values, got {len(values)}')
    maxima, minima = _extrema_indices(values)
    return ([(int(i), float(values[i])) for i in maxima],
            [(int(i), float(values[i])) for i in minima])


def _extrema_indices(values):
    n = len(values)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(values) != 0) + 1])
    if len(starts) < 3:
        empty = np.array([], dtype=int)
        return empty, empty
    ends = np.concatenate([starts[1:] - 1, [n - 1]])
    run_values = values[starts]
    left, middle, right = run_values[:-2], run_values[1:-1], run_values[2:]
    midpoints = (starts[1:-1] + ends[1:-1]) // 2
    maxima = midpoints[(middle > left) & (middle > right)]
    minima = midpoints[(middle < left) & (middle < right)]
    return maxima, minima


def spline_envelope(extrema, length, start_day=0):
    """Interpolates extrema with a natural cubic spline.

    Each end of the extrema list is mirror-extended with one reflected extremum
    before splining, unless the extremum already sits on the boundary.

    Args:
        extrema (list[(int, float)]): Knots as (index, value), in increasing index order.
        length (int): Number of samples to evaluate, at indices ``0 .. length - 1``.
        start_day (int, optional): Day offset assigned to the returned series. Defaults to 0.

    Returns:
        TimeSeries: The envelope, passing exactly through every knot.
    """
    if len(extrema) < 2:
        raise DegenerateEnvelopeError(f'An envelope needs at least 2 extrema, got {len(extrema)}')
    indices = np.array([index for index, _ in extrema], dtype=float)
    values = np.array([value for _, value in extrema], dtype=float)
    return TimeSeries(start_day, _spline(indices, values, length), name='envelope')


def _spline(indices, values, length):
    last = length - 1
    if indices[0] > 0:
        indices = np.concatenate([[-indices[0]], indices])
        values = np.concatenate([[values[0]], values])
    if indices[-1] < last:
        indices = np.concatenate([indices, [2 * last - indices[-1]]])
        values = np.concatenate([values, [values[-1]]])
    return CubicSpline(indices, values, bc_type='natural')(np.arange(length))


def envelope(z):
    """Computes the upper, lower and mean envelopes of a series.

    Args:
        z (TimeSeries): Series with at least two maxima and two minima.

    Returns:
        Envelope: Spline envelopes through the maxima and the minima.
    """
    maxima, minima = _extrema_indices(z.values)
    if len(maxima) < 2 or len(minima) < 2:
        raise DegenerateEnvelopeError(f"'{z.name}' has too few extrema for an envelope")
    n = len(z)
    upper = z.with_values(_spline(maxima.astype(float), z.values[maxima], n), name='upper_envelope')
    lower = z.with_values(_spline(minima.astype(float), z.values[minima], n), name='lower_envelope')
    return Envelope(upper, lower)


def _has_oscillation(values):
    maxima, minima = _extrema_indices(values)
    return len(maxima) >= 2 and len(minima) >= 2


def _sift(values, iterations):
    n = len(values)
    candidate = values
    for iteration in range(iterations):
        maxima, minima = _extrema_indices(candidate)
        if len(maxima) < 2 or len(minima) < 2:
            if iteration == 0:
                return np.zeros(n), values.copy()
            break
        upper = _spline(maxima.astype(float), candidate[maxima], n)
        lower = _spline(minima.astype(float), candidate[minima], n)
        candidate = candidate - (upper + lower) / 2
    return candidate, values - candidate


def sift(z, iterations=None):
    """Extracts one IMF by repeated removal of the envelope mean.

    A series with fewer than two maxima or two minima carries no oscillation: the IMF is
    all zeros and the remainder is the input.

    Args:
        z (TimeSeries): Series with at least three values.
        iterations (int, optional): Number of envelope-mean removals. Defaults to the
            ``sift_iterations`` config option.

    Returns:
        (TimeSeries, TimeSeries): The IMF and the remainder; they add up to ``z``.
    """
    if len(z) < 3:
        raise TooShortError(f'Sifting needs at least 3 values, got {len(z)}')
    iterations = int(config._resolve('sift_iterations', iterations))
    imf, remainder = _sift(np.asarray(z.values), iterations)
    return z.with_values(imf, name=f'{z.name}_imf'), z.with_values(remainder, name=f'{z.name}_remainder')


def _emd(values, num_imfs, sift_iterations):
    imfs = np.zeros((num_imfs, len(values)))
    remainder = values
    for j in range(num_imfs):
        if not _has_oscillation(remainder):
            break
        imfs[j], remainder = _sift(remainder, sift_iterations)
    return imfs, remainder


def _as_decomposition(x, imfs, residual):
    components = [x.with_values(imf, name=f'{x.name}_imf_{j}') for j, imf in enumerate(imfs, start=1)]
    return Decomposition(components, x.with_values(residual, name=f'{x.name}_residual'), source_name=x.name)


def emd(x, s=None, sift_iterations=None):
    """Runs a single Empirical Mode Decomposition.

    Extraction stops early once the remainder has no oscillation left; the remaining IMF
    slots are zero-filled so that exactly ``s`` IMFs are always returned.

    Args:
        x (TimeSeries): Series with at least three values.
        s (int, optional): Number of IMFs. Defaults to the ``num_imfs`` config option.
        sift_iterations (int, optional): Envelope-mean removals per IMF.

    Returns:
        Decomposition: IMFs and residual summing exactly to ``x``.
    """
    if len(x) < 3:
        raise TooShortError(f"EMD needs at least 3 values, '{x.name}' has {len(x)}")
    s = int(config._resolve('num_imfs', s))
    sift_iterations = int(config._resolve('sift_iterations', sift_iterations))
    imfs, residual = _emd(np.asarray(x.values), s, sift_iterations)
    return _as_decomposition(x, imfs, residual)


def _member_noise(cfg, k, scale, n):
    """White noise of ensemble member ``k``, from a counter-based generator keyed by (seed, k)."""
    if scale == 0:
        return np.zeros(n)
    seed_sequence = np.random.SeedSequence([cfg.rng_seed & _MASK64, k])
    rng = np.random.Generator(np.random.Philox(seed_sequence))
    return rng.normal(0.0, scale, n)


def eemd(x, cfg=None):
    """Runs Ensemble Empirical Mode Decomposition.

    Every ensemble member decomposes ``x`` plus Gaussian white noise whose standard deviation
    is ``noise_ratio`` times the population standard deviation of ``x``. Member IMFs are
    averaged level by level, summed in ensemble-index order.

    Args:
        x (TimeSeries): Series with at least three values.
        cfg (EemdConfig, optional): Decomposition parameters. Defaults to the global config.

    Returns:
        Decomposition: The ensemble-averaged IMFs and residual.
    """
    if len(x) < 3:
        raise TooShortError(f"EEMD needs at least 3 values, '{x.name}' has {len(x)}")
    cfg = cfg or EemdConfig()
    values = np.asarray(x.values)
    n = len(values)
    scale = cfg.noise_ratio * np.std(values)

    imf_sum = np.zeros((cfg.num_imfs, n))
    residual_sum = np.zeros(n)
    for k in range(cfg.num_ensembles):
        imfs, residual = _emd(values + _member_noise(cfg, k, scale, n), cfg.num_imfs, cfg.sift_iterations)
        imf_sum += imfs
        residual_sum += residual

    decomposition = _as_decomposition(x, imf_sum / cfg.num_ensembles, residual_sum / cfg.num_ensembles)
    logger.debug("EEMD of '%s': max reconstruction error %.3e", x.name,
                 np.max(np.abs(decomposition.reconstruct().values - values)))
    return decomposition


def _validate_eemd_config(cfg):
    if cfg.num_ensembles < 1:
        raise ValueError('num_ensembles must be at least 1')
    if cfg.num_imfs < 1:
        raise ValueError('num_imfs must be at least 1')
    if cfg.sift_iterations < 1:
        raise ValueError('sift_iterations must be at least 1')
    if not cfg.noise_ratio > 0:
        raise ValueError('noise_ratio must be positive')
