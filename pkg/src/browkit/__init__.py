"""browkit: eyebrow-position measurement from 3D facial-landmark time series.

Parses tracker outputs (OpenFace CSV, the browkit/1 interchange format),
measures brow-to-eye-line distances under head rotation, quantifies the
distortion a tracker introduces, and fits/applies a pose-based correction.
"""

from .correction import (
    CorrectionModel,
    TrainingSet,
    apply,
    build_training_set,
    fit,
    load_model,
    save_model,
)
from .errors import (
    BrowkitError,
    DegenerateGeometryError,
    FitError,
    ParseError,
    ScalingError,
    SchemaError,
    StatsError,
    VersionError,
)
from .geometry import (
    BrowMeasures,
    brow_measures,
    derotate_and_center,
    estimate_pose_rigid,
    euler_to_matrix,
    matrix_to_euler,
    point_to_line_distance,
)
from .landmark_io import (
    INTERCHANGE_VERSION,
    HeadPose,
    LandmarkFrame,
    LandmarkSequence,
    SequenceMeta,
    parse_interchange,
    parse_openface_csv,
    write_interchange,
)
from .metrics import (
    AggregateTrace,
    BrowTrace,
    DeviationRow,
    ScaleParams,
    aggregate_condition,
    build_deviation_report,
    deviation,
    deviation_series,
    extract_trace,
    normalize_time,
    scale_traces,
    scale_unit,
    write_deviation_csv,
    write_trace_csv,
)
from .schema import LandmarkSchema, default_schema, load_schema, save_schema
from .stats import TTestResult, betainc_regularized, t_one_sample, t_sf_two_sided, t_welch
from .synth import (
    BrowRamp,
    DistortionSpec,
    FaceTemplate,
    MotionScript,
    Scenario,
    Scorecard,
    default_template,
    generate,
    load_scenario,
    score_correction,
)

__version__ = "0.1.0"
