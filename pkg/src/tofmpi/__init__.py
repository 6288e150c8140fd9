"""Multipath separation for multi-frequency amplitude-modulated ToF cameras.

Simulate correlation buckets for layered scenes, decompose each pixel's
harmonic response into a few depth/amplitude components by sparse recovery
over an oversampled delay dictionary, and write depth maps and phase
histograms.
"""

from .dictionary import (
    Dictionary,
    build_dictionary,
    depth_to_nearest_grid_index,
    forward_vandermonde,
    grid_index_to_depth,
)
from .errors import (
    AliasedDepthError,
    BudgetError,
    ConfigError,
    DomainError,
    InputDataError,
    PixelError,
    RankDeficientError,
    SceneValidationError,
    TofError,
)
from .model import (
    SPEED_OF_LIGHT,
    Component,
    Decomposition,
    Layer,
    MeasurementCube,
    ModulationPlan,
    Scene,
    load_scene,
    save_scene,
    single_pixel_scene,
    validate_scene,
)
from .pipeline import (
    MapStack,
    ReproductionConfig,
    RunConfig,
    baseline_maps,
    build_reproduction_scene,
    phase_histogram,
    reproduce_experiment,
    run_pipeline,
)
from .sensor import four_bucket_estimate, measure, phase_of_depth, simulate_buckets, single_frequency_depth
from .solver import SolverConfig, brute_force_decompose, least_squares_on_support, omp_decompose

__version__ = "0.1.0"
