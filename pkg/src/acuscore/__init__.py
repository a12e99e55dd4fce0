"""acuscore: acupoint localization, manipulation-trace classification, and
TCM-standard scoring with machine-readable performance reports."""

from .anatomy import (
    AcupointDef,
    AcupointTable,
    LocalizationError,
    ReferencePointSpec,
    SkeletonFrame,
    default_table,
    locate_acupoint,
    locate_all,
    localization_error,
    resolve_reference_point,
)
from .manipulation import (
    InsertionEvent,
    LiftThrustCycle,
    MoxaSession,
    NeedleSample,
    NeedleSession,
    Thresholds,
    TwistSequence,
    classify_lift_thrust,
    classify_moxibustion,
    classify_twist,
    detect_insertion,
    segment_lift_thrust,
    segment_twists,
    twist_delta,
)
from .projection import CameraIntrinsics, back_project, intrinsics_from_fov, project
from .report import SessionReport, build_report, emit, evaluate_session
from .scoring import (
    ScoringConfig,
    TechniqueScore,
    method_weight,
    score_acupressure,
    score_deep,
    score_insertion_angle,
    score_lift_thrust,
    score_moxi_distance,
    score_moxibustion,
    score_shallow,
    score_twist,
)
from .synth import SynthSpec, generate

__version__ = "0.1.0"
