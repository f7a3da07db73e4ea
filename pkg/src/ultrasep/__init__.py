"""Separated Carleson sequences in the unit disc: metrics, partitions, tubes and the ultra-separation harness."""
from .disc import (
    BoundaryDirection,
    CarlesonWindow,
    DiscPoint,
    annulus_index,
    disc_automorphism,
    hyperbolic_distance,
    pseudo_hyperbolic_distance,
)
from .errors import (
    CapacityError,
    DegenerateDenominatorError,
    NonFiniteError,
    PipelineError,
    SequenceFormatError,
    TubeOverlapError,
    TubeUnreachableError,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    check_corollary,
    gen_non_carleson,
    gen_radial,
    gen_random_separated,
    run_experiment,
    window_sweep,
)
from .partitions import (
    Partition,
    PartitionKind,
    build_partition,
    classify_window_points,
    good_partition,
    hoffman_partition,
    restricted_good_partition,
    verify_partition,
)
from .sequences import (
    PointSequence,
    blaschke_product,
    carleson_condition_inf,
    carleson_norm,
    dual_bound_witness,
    is_delta_separated,
    is_interpolating,
    points_per_annulus,
    separation_constant,
)
from .tubes import Tube, build_tube, gradient_crossing_integral, route_tubes, window_gradient_mass

__version__ = "0.1.0"
