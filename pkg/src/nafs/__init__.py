"""Node-adaptive feature smoothing: training-free node embeddings."""

from .ensemble import EnsembleConfig, nafs_ensemble, nafs_ensemble_sweep
from .errors import DataError, NafsError, ParameterError
from .graph import (
    ComponentMap,
    Graph,
    NormalizedOperator,
    build_graph,
    connected_components,
    generate_er,
    normalized_operator,
    spmm,
)
from .smoothing import (
    SmoothedEmbedding,
    SmoothingConfig,
    SpectralInfo,
    StationaryState,
    WeightProfile,
    combine,
    distance_profile,
    mixing_time_bound,
    nafs_single,
    propagate,
    smoothing_speed_report,
    smoothing_weights,
    spectral_info,
    stationary_state,
    theorem1_bound,
)

__version__ = "0.1.0"
