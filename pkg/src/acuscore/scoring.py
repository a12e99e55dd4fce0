"""Piecewise scoring of acupressure, acupuncture, and moxibustion quantities.

Every scorer returns points in [0, C]. Intervals are left-closed: a value
exactly on a knot takes the right-hand branch. The shallow-needling scorer
keeps its source definition of C*d/d_min on the rising branch, so it jumps
from 0 to C*d_lower/d_min at d_lower; every other scorer is continuous on
the whole domain.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from .errors import InvalidConfig

CUN_CM = 3.33

# Per-region acupressure radii: full-score radius is the precise criterion,
# the zero boundary the general criterion (63% / 95% confidence radii).
DEFAULT_ACUPRESSURE_RADII = {
    "hand": (0.56, 1.13),
    "limb": (0.94, 1.90),
    "torso": (1.16, 2.14),
}

INSERTION_CLASS_ANGLES = {"perpendicular": 90.0, "oblique": 45.0, "transverse": 15.0}


def insertion_theta_max(insertion_class: str) -> float:
    """Zero-score deviation bound: half the gap to the nearest adjacent class."""
    angles = sorted(INSERTION_CLASS_ANGLES.values())
    target = INSERTION_CLASS_ANGLES[insertion_class]
    gaps = [abs(target - a) / 2.0 for a in angles if a != target]
    return min(gaps)


@dataclass(frozen=True)
class DepthBounds:
    """Strictly increasing lower < min < max < upper knot set, in cm."""

    lower: float
    min: float
    max: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.min < self.max < self.upper:
            raise InvalidConfig(
                f"depth bounds must be strictly increasing, got "
                f"{self.lower} < {self.min} < {self.max} < {self.upper}")

    def to_json(self) -> dict:
        return {"lower": self.lower, "min": self.min, "max": self.max, "upper": self.upper}


@dataclass(frozen=True)
class ScoringConfig:
    """All evaluation thresholds plus the full-score constant C."""

    c: float = 100.0
    acupressure: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_ACUPRESSURE_RADII))
    theta_min: float = 5.0
    theta_max: float = 22.5
    deep: DepthBounds = DepthBounds(0.5, 1.5, 2.5, 3.5)
    shallow: DepthBounds = DepthBounds(0.2, 0.5, 1.2, 2.5)
    moxi: DepthBounds = DepthBounds(2.0, 2.5, 4.0, 5.0)
    mismatch_weight: float = 0.6

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidConfig(f"full score C must be positive, got {self.c}")
        if not 0.0 <= self.theta_min < self.theta_max:
            raise InvalidConfig(
                f"need 0 <= theta_min < theta_max, got {self.theta_min}, {self.theta_max}")
        for region, (r_min, r_max) in self.acupressure.items():
            if not 0 < r_min < r_max:
                raise InvalidConfig(
                    f"acupressure radii for {region!r} need 0 < r_min < r_max, "
                    f"got {r_min}, {r_max}")
        # Shallow-gone-too-deep must not be misread as deep needling, and
        # deep-gone-too-shallow must bottom out where shallow starts scoring.
        if self.shallow.upper != self.deep.max:
            raise InvalidConfig(
                f"shallow.upper must equal deep.max, got {self.shallow.upper} != {self.deep.max}")
        if self.deep.lower != self.shallow.min:
            raise InvalidConfig(
                f"deep.lower must equal shallow.min, got {self.deep.lower} != {self.shallow.min}")
        if not 0.0 < self.mismatch_weight < 1.0:
            raise InvalidConfig(
                f"mismatch_weight must be in (0, 1), got {self.mismatch_weight}")

    @classmethod
    def from_json(cls, obj: dict) -> "ScoringConfig":
        kwargs = {}
        if "c" in obj:
            kwargs["c"] = float(obj["c"])
        if "acupressure" in obj:
            kwargs["acupressure"] = {
                region: (float(r[0]), float(r[1])) for region, r in obj["acupressure"].items()}
        if "insertion" in obj:
            kwargs["theta_min"] = float(obj["insertion"]["theta_min"])
            kwargs["theta_max"] = float(obj["insertion"]["theta_max"])
        for name in ("deep", "shallow", "moxi"):
            if name in obj:
                kwargs[name] = DepthBounds(**{k: float(v) for k, v in obj[name].items()})
        if "mismatch_weight" in obj:
            kwargs["mismatch_weight"] = float(obj["mismatch_weight"])
        return cls(**kwargs)

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "acupressure": {k: list(v) for k, v in self.acupressure.items()},
            "insertion": {"theta_min": self.theta_min, "theta_max": self.theta_max},
            "deep": self.deep.to_json(),
            "shallow": self.shallow.to_json(),
            "moxi": self.moxi.to_json(),
            "mismatch_weight": self.mismatch_weight,
        }

    def with_acupoint_depths(self, acupoint_meta: Mapping) -> "ScoringConfig":
        """Override needling depth bounds from a table entry's depths_cun block."""
        depths = acupoint_meta.get("depths_cun")
        if not depths:
            return self
        shallow_min, shallow_max = (v * CUN_CM for v in depths["shallow"])
        deep_min, deep_max = (v * CUN_CM for v in depths["deep"])
        shallow = DepthBounds(depths["lower"] * CUN_CM, shallow_min, shallow_max, deep_max)
        deep = DepthBounds(shallow_min, deep_min, deep_max, depths["upper"] * CUN_CM)
        return replace(self, deep=deep, shallow=shallow)


@dataclass(frozen=True)
class TechniqueScore:
    """A technique total: quantitative raw score scaled by the method weight."""

    name: str
    raw: float
    weight: float
    total: float
    breakdown: Mapping[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "raw": self.raw, "weight": self.weight,
                "total": self.total, "breakdown": dict(self.breakdown)}


def score_acupressure(d_dev: float, cfg: ScoringConfig, region: str = "hand") -> float:
    """Pressed-location deviation: full inside r_min, quadratic fall to r_max."""
    if d_dev < 0:
        raise InvalidConfig(f"deviation distance must be >= 0, got {d_dev}")
    r_min, r_max = cfg.acupressure[region]
    if d_dev < r_min:
        return cfg.c
    if d_dev < r_max:
        return cfg.c * (d_dev - r_max) ** 2 / (r_min - r_max) ** 2
    return 0.0


def score_insertion_angle(theta_dev: float, cfg: ScoringConfig) -> float:
    """Insertion-angle deviation: full inside theta_min, quadratic fall to theta_max."""
    if theta_dev < 0:
        raise InvalidConfig(f"angle deviation must be >= 0, got {theta_dev}")
    if theta_dev < cfg.theta_min:
        return cfg.c
    if theta_dev < cfg.theta_max:
        return cfg.c * (theta_dev - cfg.theta_max) ** 2 / (cfg.theta_min - cfg.theta_max) ** 2
    return 0.0


def score_deep(d_deep: float, cfg: ScoringConfig) -> float:
    """Deep needling: linear rise, full range, quadratic fall past max (safety)."""
    b = cfg.deep
    if d_deep < b.lower:
        return 0.0
    if d_deep < b.min:
        return cfg.c * (d_deep - b.lower) / (b.min - b.lower)
    if d_deep < b.max:
        return cfg.c
    if d_deep < b.upper:
        return cfg.c * (d_deep - b.upper) ** 2 / (b.max - b.upper) ** 2
    return 0.0


def score_shallow(d_shallow: float, cfg: ScoringConfig) -> float:
    """Shallow needling: linear rise and fall around the correct range.

    Below ``lower`` the source definition is open; returning 0 there leaves
    the single documented jump at the lower knot.
    """
    b = cfg.shallow
    if d_shallow < b.lower:
        return 0.0
    if d_shallow < b.min:
        return cfg.c * d_shallow / b.min
    if d_shallow < b.max:
        return cfg.c
    if d_shallow < b.upper:
        return cfg.c * (d_shallow - b.upper) / (b.max - b.upper)
    return 0.0


def score_moxi_distance(d_moxi: float, cfg: ScoringConfig) -> float:
    """Moxa-to-skin distance: quadratic rise (burn risk side), linear fall."""
    b = cfg.moxi
    if d_moxi < b.lower:
        return 0.0
    if d_moxi < b.min:
        return cfg.c * (d_moxi - b.lower) ** 2 / (b.min - b.lower) ** 2
    if d_moxi < b.max:
        return cfg.c
    if d_moxi < b.upper:
        return cfg.c * (d_moxi - b.upper) / (b.max - b.upper)
    return 0.0


def method_weight(actual, target, cfg: ScoringConfig = ScoringConfig()) -> float:
    """1.0 on a method/type match, the reduced weight otherwise.

    Serves lifting-thrusting, twisting, and moxibustion alike.
    """
    return 1.0 if actual == target else cfg.mismatch_weight


def score_lift_thrust(d_deep: float, d_shallow: float, actual, target,
                      cfg: ScoringConfig) -> TechniqueScore:
    """Mean of deep/shallow depth scores, scaled by the reinforce/reduce weight."""
    dn = score_deep(d_deep, cfg)
    sn = score_shallow(d_shallow, cfg)
    weight = method_weight(actual, target, cfg)
    raw = (dn + sn) / 2.0
    return TechniqueScore(
        name="lift_thrust", raw=raw, weight=weight, total=raw * weight,
        breakdown={"deep": dn, "shallow": sn, "d_deep": d_deep, "d_shallow": d_shallow})


def score_twist(n_total: int, actual, target, cfg: ScoringConfig) -> TechniqueScore:
    """Full marks only when net rotation returns to zero, scaled by the weight."""
    raw = cfg.c if n_total == 0 else 0.0
    weight = method_weight(actual, target, cfg)
    return TechniqueScore(
        name="twist", raw=raw, weight=weight, total=raw * weight,
        breakdown={"n_total": float(n_total)})


def score_moxibustion(d_moxi: float, actual_type, target_type,
                      cfg: ScoringConfig) -> TechniqueScore:
    """Distance score scaled by the moxibustion-type weight."""
    raw = score_moxi_distance(d_moxi, cfg)
    weight = method_weight(actual_type, target_type, cfg)
    return TechniqueScore(
        name="moxibustion", raw=raw, weight=weight, total=raw * weight,
        breakdown={"d_moxi": d_moxi})
