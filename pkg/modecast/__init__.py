# flake8: noqa
from .config import config
from .version import __version__

import modecast.demo
from modecast.anomaly import (
    AnomalyReport,
    ErrorSeries,
    band_energy,
    compare,
    daily_variation,
    detect_anomalies,
    error_series,
    match_errors_anomalies,
    model_errors,
    normalize_cases,
    threshold
)
from modecast.arimax import (
    ArimaxModel,
    ArimaxOrder,
    aicc,
    fit,
    fitted_values,
    forecast,
    innovations,
    min_root_modulus,
    select_order
)
from modecast.eemd import (
    Decomposition,
    EemdConfig,
    Envelope,
    eemd,
    emd,
    envelope,
    find_extrema,
    sift,
    spline_envelope
)
from modecast.graph import (
    CityGraph,
    GraphSignal,
    SpectralFilter,
    apply_filter,
    build_graph,
    gft,
    igft
)
from modecast.hybrid import (
    HybridConfig,
    HybridFit,
    decompose_all,
    evaluate,
    fit_direct,
    fit_hybrid,
    fit_level
)
from modecast.ingest import (
    DatasetManifest,
    GapReport,
    apply_lag,
    impute_gaps,
    load_panel,
    read_manifest
)
from modecast.panel import CityRecord, PanelDataset
from modecast.statistics_utils import (
    CorrelationResult,
    describe_panel,
    metrics,
    relative_improvement,
    screen_variables,
    spearman,
    student_t_sf
)
from modecast.timeseries import TimeSeries, align, difference, integrate
