"""Bone-proportional acupoint localization on skeleton frames.

An acupoint is located as an affine combination of two reference points,
A = (1 - lambda) * P1 + lambda * P2, where each reference point is either a
named skeleton joint or, recursively, another such combination (a virtual
point). The shipped table transcribes ratio recipes for the representative
hand/limb/torso acupoints from the national and WHO proportional-measurement
standards; the recipes live in data (``data/acupoints.json``), not in code.

Joint naming follows the 33-landmark body + 21-landmark hand convention of
common pose trackers, lowercased with a ``left_``/``right_`` side prefix
(e.g. ``right_thumb_cmc``, ``left_shoulder``). All geometry is centimeters
in one shared world frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional

import numpy as np

from .errors import InputError, MissingJoint, RecursionLimitExceeded, ZeroNormalization

MAX_SPEC_DEPTH = 4
DEFAULT_CONFIDENCE_MIN = 0.5

REGIONS = ("hand", "limb", "torso")


@dataclass(frozen=True)
class SkeletonFrame:
    """One timestamped pose: named 3D joint positions in cm."""

    timestamp: float
    joints: Mapping[str, np.ndarray]
    confidence: Optional[Mapping[str, float]] = None

    @classmethod
    def from_json(cls, obj: dict) -> "SkeletonFrame":
        joints = {}
        for name, pos in obj["joints"].items():
            arr = np.asarray(pos, dtype=float)
            if arr.shape != (3,) or not np.all(np.isfinite(arr)):
                raise InputError(f"joint {name!r} is not a finite 3-vector: {pos!r}")
            joints[name] = arr
        return cls(
            timestamp=float(obj.get("timestamp", 0.0)),
            joints=joints,
            confidence=obj.get("confidence"),
        )

    def joint(self, joint_id: str, confidence_min: float = DEFAULT_CONFIDENCE_MIN) -> np.ndarray:
        """Return a joint position; low-confidence joints count as absent."""
        pos = self.joints.get(joint_id)
        if pos is None:
            raise MissingJoint(joint_id)
        if self.confidence is not None:
            conf = self.confidence.get(joint_id, 1.0)
            if conf < confidence_min:
                raise MissingJoint(joint_id)
        return np.asarray(pos, dtype=float)


@dataclass(frozen=True)
class ReferencePointSpec:
    """A joint id, or a ratio between two nested specs (a virtual point)."""

    joint: Optional[str] = None
    between: Optional[tuple["ReferencePointSpec", "ReferencePointSpec"]] = None
    ratio: float = 0.5

    def __post_init__(self):
        if (self.joint is None) == (self.between is None):
            raise InputError("reference point needs exactly one of 'joint' or 'between'")
        if self.between is not None and not 0.0 <= self.ratio <= 1.0:
            raise InputError(f"ratio must be in [0, 1], got {self.ratio}")

    @classmethod
    def from_json(cls, obj) -> "ReferencePointSpec":
        if isinstance(obj, str):
            return cls(joint=obj)
        if "joint" in obj:
            return cls(joint=obj["joint"])
        if "between" in obj:
            a, b = obj["between"]
            return cls(
                between=(cls.from_json(a), cls.from_json(b)),
                ratio=float(obj.get("ratio", 0.5)),
            )
        raise InputError(f"not a reference point spec: {obj!r}")

    def to_json(self):
        if self.joint is not None:
            return {"joint": self.joint}
        a, b = self.between
        return {"between": [a.to_json(), b.to_json()], "ratio": self.ratio}

    def depth(self) -> int:
        if self.joint is not None:
            return 0
        return 1 + max(s.depth() for s in self.between)

    def joints_used(self) -> set:
        if self.joint is not None:
            return {self.joint}
        a, b = self.between
        return a.joints_used() | b.joints_used()


def joint_ref(joint_id: str) -> ReferencePointSpec:
    return ReferencePointSpec(joint=joint_id)


def midpoint_ref(a, b, ratio: float = 0.5) -> ReferencePointSpec:
    if isinstance(a, str):
        a = joint_ref(a)
    if isinstance(b, str):
        b = joint_ref(b)
    return ReferencePointSpec(between=(a, b), ratio=ratio)


@dataclass(frozen=True)
class AcupointDef:
    """Declarative recipe producing one acupoint from skeleton joints."""

    id: str
    name: str
    region: str
    p1: ReferencePointSpec
    p2: ReferencePointSpec
    ratio: float
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.region not in REGIONS:
            raise InputError(f"{self.id}: region must be one of {REGIONS}, got {self.region!r}")
        if not 0.0 <= self.ratio <= 1.0:
            raise InputError(f"{self.id}: ratio must be in [0, 1], got {self.ratio}")

    @classmethod
    def from_json(cls, obj: dict) -> "AcupointDef":
        return cls(
            id=obj["id"],
            name=obj.get("name", obj["id"]),
            region=obj["region"],
            p1=ReferencePointSpec.from_json(obj["p1"]),
            p2=ReferencePointSpec.from_json(obj["p2"]),
            ratio=float(obj["lambda"]),
            meta=obj.get("meta", {}),
        )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "region": self.region,
            "p1": self.p1.to_json(),
            "p2": self.p2.to_json(),
            "lambda": self.ratio,
            "meta": dict(self.meta),
        }

    def joints_used(self) -> set:
        return self.p1.joints_used() | self.p2.joints_used()


@dataclass(frozen=True)
class AcupointTable:
    version: str
    acupoints: tuple[AcupointDef, ...]

    def __post_init__(self):
        ids = [d.id for d in self.acupoints]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InputError(f"duplicate acupoint ids in table: {dupes}")

    def __iter__(self):
        return iter(self.acupoints)

    def __len__(self):
        return len(self.acupoints)

    def get(self, acupoint_id: str) -> AcupointDef:
        for d in self.acupoints:
            if d.id == acupoint_id:
                return d
        raise KeyError(acupoint_id)

    @classmethod
    def from_json(cls, obj: dict) -> "AcupointTable":
        return cls(
            version=str(obj.get("version", "unversioned")),
            acupoints=tuple(AcupointDef.from_json(a) for a in obj["acupoints"]),
        )

    @classmethod
    def load(cls, path) -> "AcupointTable":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def to_json(self) -> dict:
        return {"version": self.version, "acupoints": [d.to_json() for d in self.acupoints]}


def default_table() -> AcupointTable:
    """The packaged table covering the representative acupoints."""
    text = resources.files("acuscore.data").joinpath("acupoints.json").read_text("utf-8")
    return AcupointTable.from_json(json.loads(text))


def resolve_reference_point(
    spec: ReferencePointSpec,
    frame: SkeletonFrame,
    confidence_min: float = DEFAULT_CONFIDENCE_MIN,
    _depth: int = 0,
) -> np.ndarray:
    """Resolve a spec to a 3D position, recursing through virtual points."""
    if _depth > MAX_SPEC_DEPTH:
        raise RecursionLimitExceeded(
            f"reference point nests deeper than {MAX_SPEC_DEPTH} levels")
    if spec.joint is not None:
        return frame.joint(spec.joint, confidence_min)
    a = resolve_reference_point(spec.between[0], frame, confidence_min, _depth + 1)
    b = resolve_reference_point(spec.between[1], frame, confidence_min, _depth + 1)
    return (1.0 - spec.ratio) * a + spec.ratio * b


def locate_acupoint(
    defn: AcupointDef,
    frame: SkeletonFrame,
    confidence_min: float = DEFAULT_CONFIDENCE_MIN,
) -> np.ndarray:
    """Locate one acupoint: (1 - lambda) * P1 + lambda * P2."""
    p1 = resolve_reference_point(defn.p1, frame, confidence_min)
    p2 = resolve_reference_point(defn.p2, frame, confidence_min)
    return (1.0 - defn.ratio) * p1 + defn.ratio * p2


def locate_all(
    table: AcupointTable,
    frame: SkeletonFrame,
    confidence_min: float = DEFAULT_CONFIDENCE_MIN,
) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """Locate every table entry on one frame.

    Returns (positions, failures) in table order; a failing entry lands in
    ``failures`` with its error message and does not abort the batch.
    """
    positions: dict[str, np.ndarray] = {}
    failures: dict[str, str] = {}
    for defn in table:
        try:
            positions[defn.id] = locate_acupoint(defn, frame, confidence_min)
        except InputError as exc:
            failures[defn.id] = str(exc)
    return positions, failures


# Normalization pairs for the relative-error metric, per body region,
# with the physical lengths measured for the reference subject.
NORM_PAIRS = {
    "hand": ("EX-UE10", "EX-UE11"),
    "limb": ("LU5", "PC7"),
    "torso": ("LU5", "PC7"),
}
NORM_LENGTHS_CM = {
    "hand": 4.9,
    "limb": 25.0,
    "torso": 25.0,
}

# PC7 (Daling, the wrist-crease endpoint of the forearm normalization pair)
# is not part of the representative table; it resolves on demand.
PC7_DEF = AcupointDef(
    id="PC7", name="Daling", region="limb",
    p1=ReferencePointSpec(joint="right_wrist"),
    p2=ReferencePointSpec(joint="right_elbow"),
    ratio=0.02,
    meta={"meridian": "Pericardium Meridian of Hand-Jueyin"},
)


@dataclass(frozen=True)
class LocalizationError:
    """Deviation between a predicted and a marked acupoint position.

    re = delta_p / d_norm and ae = re * l_phys hold exactly; delta_p and
    d_norm share whatever unit the inputs were in (pixels or cm), ae is cm.
    """

    delta_p: float
    re: float
    ae: float
    l_phys: float
    norm_pair: Optional[tuple[str, str]] = None


def localization_error(
    pred,
    marked,
    d_norm: float,
    l_phys: float,
    norm_pair: Optional[tuple[str, str]] = None,
) -> LocalizationError:
    """Relative and absolute localization error against a marked position."""
    if d_norm <= 0:
        raise ZeroNormalization(f"normalization distance must be > 0, got {d_norm}")
    if l_phys <= 0:
        raise InputError(f"physical normalization length must be > 0, got {l_phys}")
    delta_p = float(np.linalg.norm(np.asarray(pred, float) - np.asarray(marked, float)))
    re = delta_p / d_norm
    return LocalizationError(delta_p=delta_p, re=re, ae=re * l_phys,
                             l_phys=l_phys, norm_pair=norm_pair)


def norm_distance(
    positions: Mapping[str, np.ndarray],
    region: str,
    frame: Optional[SkeletonFrame] = None,
) -> tuple[float, tuple[str, str]]:
    """Normalization distance D for a region, from located acupoints.

    PC7 is located from ``frame`` when it is not among ``positions``.
    """
    pair = NORM_PAIRS[region]
    points = []
    for acupoint_id in pair:
        if acupoint_id in positions:
            points.append(np.asarray(positions[acupoint_id], float))
        elif acupoint_id == PC7_DEF.id and frame is not None:
            points.append(locate_acupoint(PC7_DEF, frame))
        else:
            raise MissingJoint(acupoint_id)
    return float(np.linalg.norm(points[0] - points[1])), pair
