"""Per-session performance reports: labels, scores, and chart-ready series.

``evaluate_session`` runs the full pipeline (detection, segmentation,
classification, scoring) on one loaded session and assembles a
``SessionReport``. Classification failures never abort a report; they land
in ``errors`` as structured entries and the affected scores are omitted.

Reports serialize canonically: sorted keys, floats capped at 6 decimal
places, so identical inputs always emit identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import manipulation as manip
from .errors import ClassificationError, UnsupportedFormat
from .manipulation import (
    InsertionEvent,
    MoxaSession,
    NeedleSession,
    Thresholds,
    TwistSequence,
)
from .scoring import (
    INSERTION_CLASS_ANGLES,
    ScoringConfig,
    TechniqueScore,
    score_insertion_angle,
    score_lift_thrust,
    score_moxibustion,
    score_twist,
)

SCHEMA_VERSION = 1

Session = Union[NeedleSession, MoxaSession]


@dataclass(frozen=True)
class SessionReport:
    session_id: str
    technique: str                      # acupuncture | moxibustion
    target: str
    labels: dict
    scores: tuple[TechniqueScore, ...]
    series: dict
    errors: tuple[dict, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "session_id": self.session_id,
            "technique": self.technique,
            "target": self.target,
            "labels": self.labels,
            "scores": [s.to_json() for s in self.scores],
            "series": self.series,
            "errors": list(self.errors),
        }


def _speed_profile(times: np.ndarray, positions: np.ndarray) -> list:
    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    speeds = np.concatenate([[0.0], steps / np.maximum(np.diff(times), 1e-12)])
    return [[float(t), float(v)] for t, v in zip(times, speeds)]


def _trajectory(times: np.ndarray, positions: np.ndarray) -> list:
    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    speeds = np.concatenate([[0.0], steps / np.maximum(np.diff(times), 1e-12)])
    return [[float(t), float(p[0]), float(p[1]), float(p[2]), float(v)]
            for t, p, v in zip(times, positions, speeds)]


def _twist_snapshots(session: NeedleSession, seq: TwistSequence) -> dict:
    """Hand joints at the first rotation's start and end."""
    first = seq.rotations[0]
    times = session.times()
    out = {}
    for phase, t in (("start", first.t_start), ("end", first.t_end)):
        i = int(np.argmin(np.abs(times - t)))
        hand = session.samples[i].hand or {}
        out[phase] = {k: [float(x) for x in v] for k, v in sorted(hand.items())}
    out["t_start"] = float(first.t_start)
    out["t_end"] = float(first.t_end)
    return out


def build_report(session: Session, classifications: dict, scores: list[TechniqueScore],
                 errors: list[dict] = (), session_id: str = "session") -> SessionReport:
    """Assemble the report; series come straight from the session trace."""
    series: dict = {}
    labels: dict = {}

    if isinstance(session, NeedleSession):
        technique = "acupuncture"
        times = session.times()
        series["trajectory"] = _trajectory(times, session.tips())
        event: Optional[InsertionEvent] = classifications.get("insertion")
        if event is not None:
            labels["insertion"] = {"class": event.insertion_class,
                                   "angle_deg": event.angle_deg}
            t, d = manip.penetration_profile(session, event)
            series["depth_vs_time"] = [[float(a), float(b)] for a, b in zip(t, d)]
            series["speed_profile"] = _speed_profile(
                times, session.tips())
        lt = classifications.get("lift_thrust")
        if lt is not None:
            labels["lift_thrust"] = {"actual": lt.label,
                                     "target": classifications.get("lift_thrust_target")}
        seq: Optional[TwistSequence] = classifications.get("twist")
        if seq is not None:
            labels["twist"] = {"actual": classifications.get("twist_label"),
                               "target": classifications.get("twist_target"),
                               "n_total": seq.n_total}
            series["twist_snapshots"] = _twist_snapshots(session, seq)
    else:
        technique = "moxibustion"
        times = session.times()
        heads = session.heads()
        series["trajectory"] = _trajectory(times, heads)
        series["speed_profile"] = _speed_profile(times, heads)
        dist = np.linalg.norm(heads - session.target_pos, axis=1)
        series["distance_vs_time"] = [[float(t), float(d)] for t, d in zip(times, dist)]
        moxa = classifications.get("moxa")
        if moxa is not None:
            labels["moxibustion"] = {"actual": moxa.label,
                                     "target": classifications.get("moxa_target"),
                                     "d_moxi": moxa.d_moxi}

    return SessionReport(
        session_id=session_id,
        technique=technique,
        target=session.target,
        labels=labels,
        scores=tuple(scores),
        series=series,
        errors=tuple(errors),
    )


def _error_entry(stage: str, exc: Exception) -> dict:
    return {"stage": stage, "error": type(exc).__name__, "message": str(exc)}


def evaluate_needle_session(
    session: NeedleSession,
    target_method: Optional[str] = None,
    cfg: ScoringConfig = ScoringConfig(),
    thresholds: Thresholds = Thresholds(),
    session_id: str = "session",
) -> SessionReport:
    """Classify and score every needle technique present in the trace."""
    classifications: dict = {}
    scores: list[TechniqueScore] = []
    errors: list[dict] = []

    try:
        event = manip.detect_insertion(session, thresholds)
    except ClassificationError as exc:
        errors.append(_error_entry("insertion", exc))
        return build_report(session, classifications, scores, errors, session_id)

    classifications["insertion"] = event
    theta_dev = abs(event.angle_deg - INSERTION_CLASS_ANGLES[event.insertion_class])
    ia = score_insertion_angle(theta_dev, cfg)
    scores.append(TechniqueScore(
        name="insertion", raw=ia, weight=1.0, total=ia,
        breakdown={"theta_dev": theta_dev, "angle_deg": event.angle_deg}))

    try:
        cycles = manip.segment_lift_thrust(session, event, thresholds)
        lt = manip.classify_lift_thrust(cycles, thresholds.speed_margin)
        classifications["lift_thrust"] = lt
        classifications["lift_thrust_target"] = target_method
        d_deep, d_shallow = manip.depth_roles(cycles, lt.label)
        scores.append(score_lift_thrust(
            d_deep, d_shallow, lt.label,
            target_method if target_method is not None else lt.label, cfg))
    except ClassificationError as exc:
        errors.append(_error_entry("lift_thrust", exc))

    try:
        seq = manip.segment_twists(session, thresholds, event)
        label = manip.classify_twist(seq)
        classifications["twist"] = seq
        classifications["twist_label"] = label
        classifications["twist_target"] = target_method
        scores.append(score_twist(
            seq.n_total, label,
            target_method if target_method is not None else label, cfg))
    except ClassificationError as exc:
        errors.append(_error_entry("twist", exc))

    return build_report(session, classifications, scores, errors, session_id)


def evaluate_moxa_session(
    session: MoxaSession,
    target_type: Optional[str] = None,
    cfg: ScoringConfig = ScoringConfig(),
    thresholds: Thresholds = Thresholds(),
    session_id: str = "session",
) -> SessionReport:
    """Classify the moxibustion type and score its working distance."""
    classifications: dict = {}
    scores: list[TechniqueScore] = []
    errors: list[dict] = []
    try:
        moxa = manip.classify_moxibustion(session, thresholds)
        classifications["moxa"] = moxa
        classifications["moxa_target"] = target_type
        scores.append(score_moxibustion(
            moxa.d_moxi, moxa.label,
            target_type if target_type is not None else moxa.label, cfg))
    except ClassificationError as exc:
        errors.append(_error_entry("moxibustion", exc))
    return build_report(session, classifications, scores, errors, session_id)


def evaluate_session(session: Session, target_method: Optional[str] = None,
                     target_type: Optional[str] = None,
                     cfg: ScoringConfig = ScoringConfig(),
                     thresholds: Thresholds = Thresholds(),
                     session_id: str = "session") -> SessionReport:
    if isinstance(session, NeedleSession):
        return evaluate_needle_session(session, target_method, cfg, thresholds, session_id)
    return evaluate_moxa_session(session, target_type, cfg, thresholds, session_id)


def _canonical(obj):
    """Round floats to 6 decimals recursively for byte-stable emission."""
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.floating):
        return round(float(obj), 6)
    if isinstance(obj, np.integer):
        return int(obj)
    raise UnsupportedFormat(f"cannot serialize {type(obj).__name__}")


_SERIES_HEADERS = {
    "depth_vs_time": ["t", "depth_cm"],
    "speed_profile": ["t", "speed_cm_s"],
    "distance_vs_time": ["t", "distance_cm"],
    "trajectory": ["t", "x", "y", "z", "speed_cm_s"],
}


def emit(report: SessionReport, format: str = "json") -> Union[bytes, dict[str, bytes]]:
    """Serialize a report: canonical JSON bytes, or one CSV blob per series."""
    if format == "json":
        doc = _canonical(report.to_json())
        return (json.dumps(doc, sort_keys=True, separators=(",", ":"),
                           allow_nan=False) + "\n").encode("utf-8")
    if format == "csv":
        out: dict[str, bytes] = {}
        for name, rows in report.series.items():
            if name not in _SERIES_HEADERS:
                continue
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(_SERIES_HEADERS[name])
            for row in rows:
                writer.writerow([repr(_canonical(float(v))) for v in row])
            out[name] = buf.getvalue().encode("utf-8")
        return out
    raise UnsupportedFormat(f"unknown report format {format!r}")
