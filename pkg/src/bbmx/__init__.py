"""bbmx: Monte Carlo toolkit for branching Brownian motion extremes."""

from .bbm import (
    ConditioningError,
    ParticleSystem,
    PopulationCapError,
    PruneConfig,
    PruneSafetyError,
    centered_max,
    centering,
    conditioned_bbm,
    derivative_martingale,
    extract_clusters,
    genealogical_distance,
    level_set_count,
    local_maxima,
    simulate,
)
from .cluster import (
    ClusterModel,
    ClusterSample,
    GammaEstimate,
    TimestampProcess,
    ZBank,
    ZetaGridSpec,
    ZetaSample,
    build_z_bank,
    calibrate_c0,
    default_model,
    gamma_tail,
    sample_cluster,
    sample_timestamps,
    x_statistic,
    zeta_sample,
)
from .extremal import (
    CANONICAL_RHO,
    DecoratedPointMeasure,
    InfiniteIntensityError,
    PointMeasure,
    StableSamplerConfig,
    Window,
    assemble_limit_process,
    compensated_mass_statistic,
    estimate_compensator,
    recentered_tip_ppp,
    restricted_mass,
    sample_exp_ppp,
    stable1_laplace,
    stable1_sample,
)
from .paths import (
    SamplePath,
    TimeGrid,
    bridge_stay_positive,
    bridge_stay_positive_asymptotic,
    mc_stay_positive,
    sample_backbone,
    sample_bessel3,
    sample_bridge,
    sample_brownian,
)
from .rng import StreamKey
from .stats import (
    ComparisonReport,
    EmpiricalDistribution,
    bootstrap_ci,
    empirical_laplace,
    ks_distance,
    median_center,
    tail_slope,
)

__version__ = "0.1.0"
