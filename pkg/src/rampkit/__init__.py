"""Wind-ramp identification and forecasting toolkit.

Pipeline: decompose a wind-speed series into band-limited modes, screen
them by pole rate and reconstruct a denoised series; segment it at the
surviving extrema and label ramp events; match each past segment to its
most similar historical period; assemble multimodal features and run
baseline forecasters; evaluate with grid-code metrics.
"""

from rampkit.series import (
    FeatureTable,
    PowerCurveSpec,
    SeriesKind,
    WindSeries,
    min_max_normalize,
    power_curve,
    power_series,
)
from rampkit.io import load_csv, write_csv
from rampkit.synth import (
    RampEventSpec,
    ScenarioConfig,
    analogue_scenario_pair,
    synth_scenario,
)
from rampkit.vmd import ModeSet, reconstruct, vmd_decompose
from rampkit.poles import (
    ExtremaSet,
    ExtremumKind,
    ExtremumPoint,
    SelectionParams,
    dynamic_window,
    find_extrema,
    pole_rate,
    screen_modes,
    select_poles,
    vmd_ic,
)
from rampkit.ramps import (
    Direction,
    RampDefinition,
    RampEvent,
    RampSegment,
    default_rho_threshold,
    label_ramps,
    ramp_def1,
    ramp_def2,
    ramp_factor,
    segment_by_extrema,
)
from rampkit.matching import (
    MatchRecord,
    WarpPath,
    dtw,
    fastdtw,
    match_periods,
    omega,
    wind_str,
    wind_tre,
)
from rampkit.attention import (
    AttentionInput,
    dense_attention,
    kl_uniform_score,
    m_bar_score,
    m_score,
    prob_sparse_attention,
)
from rampkit.forecasting import (
    FeatureMatrix,
    ForecastReport,
    assemble_features,
    fit_predict_linear,
    mse_objective,
    predict_persistence,
    rank_nwp_features,
)
from rampkit.metrics import (
    EvalReport,
    accuracy_ac,
    evaluate,
    mae,
    pr_power,
    qualification_flags,
    rmse,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
