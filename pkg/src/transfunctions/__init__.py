"""Measures on finite spaces, transfunctions, and their signed and vector extensions."""

from .algebra import (
    PROPERTIES,
    ClampSpread,
    Kernel,
    OperatorNorm,
    PropertyEntry,
    PropertyReport,
    Pushforward,
    SamplerConfig,
    SquareMassSpread,
    Transfunction,
    UniformSpread,
    UnboundedError,
    apply,
    check_all,
    check_property,
    operator_norm,
    pushforward_candidates,
)
from .extension import (
    HypothesisError,
    PartitionApproximation,
    SeriesRepresentation,
    VectorExtension,
    bound_certificate,
    extend_signed,
    extend_vector,
    lemma1_partition,
    norm_preservation_counterexample,
    positive_part_candidate,
    series_decompose,
    shift_candidate,
    uniqueness_probe,
    uniqueness_probe_strong,
    verify_extension_properties,
)
from .measures import (
    BanachSpaceSpec,
    MeasurableSpace,
    PositiveMeasure,
    SignedMeasure,
    SpaceMismatchError,
    VectorMeasure,
    jordan_decompose,
    measure_of,
    mutually_singular,
    total_variation,
)
from .partitions import total_variation_oracle
from .rings import (
    RingSetFunction,
    SetRing,
    SignedRepresentation,
    empty_representation_check,
    extend_set_function,
    represent,
    ring_closure,
    validate_additivity,
)

__version__ = "0.1.0"
