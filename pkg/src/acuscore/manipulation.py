"""Segmentation and classification of recorded needle and moxa motion traces.

The needle pipeline runs: contact detection (insertion event with entry
angle), penetration-depth profiling, lift-thrust cycle segmentation via
peak detection, and reinforce/reduce classification from depth order and
phase speeds. Twisting is tracked through the sign of the thumb/index
distance difference relative to the finger-root midpoint; the handedness of
each turn comes from the thumb tip's angular sweep about the needle axis
(clockwise = positive rotation about the tip-ward direction vector, i.e.
clockwise for a practitioner sighting along the needle). Moxibustion is
typed from the moxa head's distance spread, off-axis angle, and speed.

All classifiers are pure functions of immutable session values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from .errors import (
    InputError,
    InsufficientCycles,
    InsufficientRotations,
    InvalidConfig,
    MissingJoint,
    NoContact,
    NoTwistDetected,
    TooShort,
)

HAND_KEYS = ("thumb_tip", "index_tip", "thumb_proximal", "index_proximal")

# Canonical entry angles and the midpoint boundaries between them.
INSERTION_ANGLES = {"perpendicular": 90.0, "oblique": 45.0, "transverse": 15.0}
_PERP_OBLIQUE_BOUNDARY = 67.5
_OBLIQUE_TRANSVERSE_BOUNDARY = 30.0

REINFORCE = "reinforce"
REDUCE = "reduce"
INEFFECTIVE = "ineffective"

MILD = "mild"
SPARROW = "sparrow"
WHIRLING = "whirling"

_EPS = 1e-12


def _unit(v, what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    n = np.linalg.norm(arr)
    if abs(n - 1.0) > 1e-6:
        raise InputError(f"{what} must be unit length, |v| = {n:.8f}")
    return arr


@dataclass(frozen=True)
class Thresholds:
    """Tunable detection constants; defaults calibrated on the synth corpus."""

    stationary_band: float = 0.5      # cm, mild moxibustion max-min spread
    whirl_angle_deg: float = 20.0     # off-normal angle marking lateral motion
    whirl_speed: float = 2.0          # cm/s
    whirl_frame_count: int = 15
    twist_deadband: float = 0.2       # cm, |delta d| hysteresis
    contact_radius: float = 0.94      # cm, acupoint sphere (limb default)
    smoothing_window: int = 5         # samples, centered moving average
    peak_prominence: float = 0.2      # cm, lift-thrust peak rejection
    speed_margin: float = 0.1         # relative margin to call one phase faster

    def __post_init__(self):
        for name in ("stationary_band", "whirl_angle_deg", "whirl_speed",
                     "whirl_frame_count", "twist_deadband", "contact_radius",
                     "smoothing_window", "peak_prominence"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"threshold {name} must be positive")
        if self.speed_margin < 0:
            raise InvalidConfig("speed_margin must be >= 0")

    # Contact sphere defaults follow the per-region precise-criterion radii.
    REGION_CONTACT_RADII = {"hand": 0.56, "limb": 0.94, "torso": 1.16}

    @classmethod
    def for_region(cls, region: str, **overrides) -> "Thresholds":
        overrides.setdefault("contact_radius", cls.REGION_CONTACT_RADII[region])
        return cls(**overrides)

    @classmethod
    def from_json(cls, obj: dict) -> "Thresholds":
        return cls(**obj)


@dataclass(frozen=True)
class NeedleSample:
    t: float
    tip: np.ndarray
    direction: np.ndarray
    hand: Optional[Mapping[str, np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "tip", np.asarray(self.tip, dtype=float))
        object.__setattr__(self, "direction", _unit(self.direction, "needle direction"))
        if self.hand is not None:
            object.__setattr__(
                self, "hand",
                {k: np.asarray(v, dtype=float) for k, v in self.hand.items()})


@dataclass(frozen=True)
class NeedleSession:
    samples: tuple[NeedleSample, ...]
    target: str
    skin_point: np.ndarray
    skin_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "skin_point", np.asarray(self.skin_point, dtype=float))
        object.__setattr__(self, "skin_normal", _unit(self.skin_normal, "skin normal"))
        if len(self.samples) < 2:
            raise InputError(f"needle session needs >= 2 samples, got {len(self.samples)}")
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InputError("sample timestamps must be strictly increasing")

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def tips(self) -> np.ndarray:
        return np.stack([s.tip for s in self.samples])


@dataclass(frozen=True)
class MoxaSample:
    t: float
    head: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "head", np.asarray(self.head, dtype=float))


@dataclass(frozen=True)
class MoxaSession:
    samples: tuple[MoxaSample, ...]
    target: str
    target_pos: np.ndarray
    skin_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "target_pos", np.asarray(self.target_pos, dtype=float))
        object.__setattr__(self, "skin_normal", _unit(self.skin_normal, "skin normal"))
        if len(self.samples) < 2:
            raise InputError(f"moxa session needs >= 2 samples, got {len(self.samples)}")
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InputError("sample timestamps must be strictly increasing")

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def heads(self) -> np.ndarray:
        return np.stack([s.head for s in self.samples])


@dataclass(frozen=True)
class InsertionEvent:
    t_start: float
    t_max_depth: float
    t_end: float
    angle_deg: float
    insertion_class: str
    max_penetration: float   # cm along the needle shaft
    vertical_depth: float    # cm below the skin surface

    def __post_init__(self):
        if not self.t_start <= self.t_max_depth <= self.t_end:
            raise InputError("insertion event times out of order")


@dataclass(frozen=True)
class LiftThrustCycle:
    depth: float         # cm, vertical peak depth of the cycle
    thrust_speed: float  # cm/s, average downward speed
    lift_speed: float    # cm/s, average upward speed
    t_peak: float


@dataclass(frozen=True)
class LiftThrustClassification:
    label: str
    deep_then_shallow: bool
    shallow_then_deep: bool
    fast_then_slow: bool
    slow_then_fast: bool


@dataclass(frozen=True)
class TwistRotation:
    direction: str   # "cw" | "ccw"
    turns: int       # +1 for cw, -1 for ccw
    t_start: float
    t_end: float


@dataclass(frozen=True)
class TwistSequence:
    rotations: tuple[TwistRotation, ...]
    n_total: int

    def __post_init__(self):
        if self.n_total != sum(r.turns for r in self.rotations):
            raise InputError("n_total must equal the sum of signed turns")


@dataclass(frozen=True)
class MoxaClassification:
    label: str
    d_moxi: float        # cm, time-weighted mean head-to-skin distance
    spread: float        # cm, max - min distance over the session
    whirl_frames: int


def _depth_below_surface(session: NeedleSession) -> np.ndarray:
    """Signed depth of the tip below the skin plane (positive = inside)."""
    disp = session.tips() - session.skin_point
    return -(disp @ session.skin_normal)


def surface_angle_deg(direction, normal) -> float:
    """Angle between the needle axis and the skin surface, in [0, 90]."""
    d = np.asarray(direction, float)
    n = np.asarray(normal, float)
    s = abs(float(np.dot(d, n))) / (np.linalg.norm(d) * np.linalg.norm(n))
    return math.degrees(math.asin(min(1.0, s)))


def classify_insertion_angle(angle_deg: float) -> str:
    """Nearest canonical entry angle, boundaries at the class midpoints."""
    if angle_deg >= _PERP_OBLIQUE_BOUNDARY:
        return "perpendicular"
    if angle_deg >= _OBLIQUE_TRANSVERSE_BOUNDARY:
        return "oblique"
    return "transverse"


def detect_insertion(session: NeedleSession, thresholds: Thresholds) -> InsertionEvent:
    """Find the insertion event: first in-sphere inward-moving tip sample."""
    t = session.times()
    depth = _depth_below_surface(session)
    dist = np.linalg.norm(session.tips() - session.skin_point, axis=1)
    n = len(t)

    start = None
    for i in range(n):
        if dist[i] > thresholds.contact_radius:
            continue
        nxt = depth[i + 1] if i + 1 < n else depth[i]
        prv = depth[i - 1] if i > 0 else depth[i]
        if nxt > depth[i] or depth[i] > prv:
            start = i
            break
    if start is None:
        raise NoContact(
            f"needle tip never entered the {thresholds.contact_radius} cm "
            f"contact sphere of acupoint {session.target!r}")

    angle = surface_angle_deg(session.samples[start].direction, session.skin_normal)
    inside = np.clip(depth[start:], 0.0, None)
    i_max = start + int(np.argmax(inside))

    end = n - 1
    for i in range(i_max + 1, n):
        if depth[i] <= 0.0:
            end = i
            break

    max_vertical = float(np.max(inside))
    sin_a = max(math.sin(math.radians(angle)), _EPS)
    max_penetration = max_vertical / sin_a
    return InsertionEvent(
        t_start=float(t[start]),
        t_max_depth=float(t[i_max]),
        t_end=float(t[end]),
        angle_deg=angle,
        insertion_class=classify_insertion_angle(angle),
        max_penetration=max_penetration,
        vertical_depth=max_penetration * sin_a,
    )


def penetration_profile(session: NeedleSession,
                        event: InsertionEvent) -> tuple[np.ndarray, np.ndarray]:
    """Vertical penetration depth over [t_start, t_end]; the signal every
    downstream consumer (segmentation, report series) shares."""
    t = session.times()
    depth = np.clip(_depth_below_surface(session), 0.0, None)
    mask = (t >= event.t_start) & (t <= event.t_end)
    return t[mask], depth[mask]


def segment_lift_thrust(session: NeedleSession, event: InsertionEvent,
                        thresholds: Thresholds = Thresholds()) -> list[LiftThrustCycle]:
    """One cycle per penetration-depth peak, with per-phase average speeds.

    Peaks are found on a smoothed copy of the signal and refined back onto
    the raw samples so clean traces keep their exact apex depths.
    """
    t, d = penetration_profile(session, event)
    if len(d) < 3:
        raise InsufficientCycles("penetration signal too short to segment")

    smoothed = uniform_filter1d(d, size=thresholds.smoothing_window, mode="nearest")
    raw_peaks, _ = find_peaks(smoothed, prominence=thresholds.peak_prominence)

    w = thresholds.smoothing_window
    refined = sorted({max(0, int(p) - w) + int(np.argmax(d[max(0, int(p) - w):int(p) + w + 1]))
                      for p in raw_peaks})
    if len(refined) < 2:
        raise InsufficientCycles(
            f"found {len(refined)} lift-thrust cycle(s); a session needs at least 2")

    cycles = []
    for k, p in enumerate(refined):
        a = 0 if k == 0 else refined[k - 1] + int(np.argmin(d[refined[k - 1]:p + 1]))
        right = refined[k + 1] if k + 1 < len(refined) else len(d) - 1
        b = p + int(np.argmin(d[p:right + 1]))
        dt_thrust = max(t[p] - t[a], _EPS)
        dt_lift = max(t[b] - t[p], _EPS)
        cycles.append(LiftThrustCycle(
            depth=float(d[p]),
            thrust_speed=float((d[p] - d[a]) / dt_thrust),
            lift_speed=float((d[p] - d[b]) / dt_lift),
            t_peak=float(t[p]),
        ))
    return cycles


def classify_lift_thrust(cycles: list[LiftThrustCycle],
                         speed_margin: float = 0.1) -> LiftThrustClassification:
    """Reinforce/reduce from the first two cycles' depth order and speeds.

    Reinforce needs deep-then-shallow AND thrust faster than lift in both
    cycles; reduce is the mirror; anything else is ineffective.
    """
    if len(cycles) < 2:
        raise InsufficientCycles(
            f"classification needs >= 2 cycles, got {len(cycles)}")
    c1, c2 = cycles[0], cycles[1]

    def faster(a: float, b: float) -> bool:
        return a > b * (1.0 + speed_margin)

    deep_then_shallow = c1.depth > c2.depth
    shallow_then_deep = c1.depth < c2.depth
    fast_then_slow = faster(c1.thrust_speed, c1.lift_speed) and faster(c2.thrust_speed, c2.lift_speed)
    slow_then_fast = faster(c1.lift_speed, c1.thrust_speed) and faster(c2.lift_speed, c2.thrust_speed)

    if deep_then_shallow and fast_then_slow:
        label = REINFORCE
    elif shallow_then_deep and slow_then_fast:
        label = REDUCE
    else:
        label = INEFFECTIVE
    return LiftThrustClassification(
        label=label,
        deep_then_shallow=deep_then_shallow,
        shallow_then_deep=shallow_then_deep,
        fast_then_slow=fast_then_slow,
        slow_then_fast=slow_then_fast,
    )


def depth_roles(cycles: list[LiftThrustCycle], label: str) -> tuple[float, float]:
    """(d_deep, d_shallow) for scoring: cycle order for reinforce, reversed
    for reduce, extreme depths for ineffective sessions."""
    c1, c2 = cycles[0], cycles[1]
    if label == REINFORCE:
        return c1.depth, c2.depth
    if label == REDUCE:
        return c2.depth, c1.depth
    return max(c1.depth, c2.depth), min(c1.depth, c2.depth)


def twist_delta(hand: Mapping[str, np.ndarray]) -> float:
    """Distance difference of thumb vs index tip to the finger-root midpoint."""
    for key in HAND_KEYS:
        if hand is None or key not in hand:
            raise MissingJoint(key)
    p_mid = 0.5 * (np.asarray(hand["index_proximal"], float)
                   + np.asarray(hand["thumb_proximal"], float))
    d_thumb = np.linalg.norm(p_mid - np.asarray(hand["thumb_tip"], float))
    d_index = np.linalg.norm(p_mid - np.asarray(hand["index_tip"], float))
    return float(d_thumb - d_index)


def _axis_frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal u, v with (u, v, direction) right-handed."""
    w = direction / np.linalg.norm(direction)
    seed = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = seed - np.dot(seed, w) * w
    u /= np.linalg.norm(u)
    return u, np.cross(w, u)


def _sweep_angle(samples, i0: int, i1: int) -> float:
    """Net angular sweep of the thumb tip about the needle axis over [i0, i1].

    Positive sweep = clockwise for a viewer sighting along the direction
    vector (right-hand rule with the axis pointing away from the eye).
    """
    axis_point = samples[i0].tip
    u, v = _axis_frame(samples[i0].direction)
    total = 0.0
    prev = None
    for j in range(i0, i1 + 1):
        r = samples[j].hand["thumb_tip"] - axis_point
        phi = math.atan2(float(np.dot(r, v)), float(np.dot(r, u)))
        if prev is not None:
            dphi = phi - prev
            while dphi > math.pi:
                dphi -= 2.0 * math.pi
            while dphi <= -math.pi:
                dphi += 2.0 * math.pi
            total += dphi
        prev = phi
    return total


def segment_twists(session: NeedleSession, thresholds: Thresholds = Thresholds(),
                   event: Optional[InsertionEvent] = None) -> TwistSequence:
    """Group hysteresis-filtered sign changes of the twist delta into turns.

    Two consecutive state transitions make one full turn; the thumb tip's
    angular sweep over the turn's first transition fixes cw vs ccw. A
    dangling final transition still counts as a turn of its own direction.
    """
    t_min = event.t_start if event is not None else -math.inf
    idx = [i for i, s in enumerate(session.samples)
           if s.t >= t_min and s.hand is not None
           and all(k in s.hand for k in HAND_KEYS)]
    if not idx:
        raise NoTwistDetected("no samples carry the four tracked hand joints")

    band = thresholds.twist_deadband
    transitions = []   # (idx_from, idx_to) sample indices bracketing the sign change
    state = 0
    last_in_state = None
    for i in idx:
        delta = twist_delta(session.samples[i].hand)
        s = 1 if delta > band else (-1 if delta < -band else 0)
        if s == 0:
            continue
        if state == 0:
            state, last_in_state = s, i
        elif s == state:
            last_in_state = i
        else:
            transitions.append((last_in_state, i))
            state, last_in_state = s, i

    if not transitions:
        raise NoTwistDetected("twist delta never crossed the deadband")

    rotations = []
    for k in range(0, len(transitions), 2):
        first = transitions[k]
        last = transitions[k + 1] if k + 1 < len(transitions) else first
        sweep = _sweep_angle(session.samples, first[0], first[1])
        direction = "cw" if sweep > 0 else "ccw"
        rotations.append(TwistRotation(
            direction=direction,
            turns=1 if direction == "cw" else -1,
            t_start=float(session.samples[first[0]].t),
            t_end=float(session.samples[last[1]].t),
        ))
    return TwistSequence(rotations=tuple(rotations),
                         n_total=sum(r.turns for r in rotations))


def classify_twist(seq: TwistSequence) -> str:
    """Reinforce when the first rotation is clockwise, reduce otherwise."""
    if len(seq.rotations) < 2:
        raise InsufficientRotations(
            f"twist classification needs >= 2 rotations, got {len(seq.rotations)}")
    return REINFORCE if seq.rotations[0].direction == "cw" else REDUCE


def classify_moxibustion(session: MoxaSession,
                         thresholds: Thresholds = Thresholds()) -> MoxaClassification:
    """Type the moxa motion and aggregate its time-weighted mean distance."""
    t = session.times()
    duration = float(t[-1] - t[0])
    if duration < 1.0:
        raise TooShort(f"moxibustion session lasted {duration:.3f} s, need >= 1 s")

    disp = session.heads() - session.target_pos
    dist = np.linalg.norm(disp, axis=1)
    d_moxi = float(np.trapezoid(dist, t) / duration)
    spread = float(dist.max() - dist.min())

    if spread <= thresholds.stationary_band:
        return MoxaClassification(MILD, d_moxi, spread, 0)

    cos_angle = (disp @ session.skin_normal) / np.maximum(dist, _EPS)
    angles = np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0)))
    steps = np.linalg.norm(np.diff(session.heads(), axis=0), axis=1)
    speeds = np.concatenate([[0.0], steps / np.maximum(np.diff(t), _EPS)])

    whirl_frames = int(np.sum((angles > thresholds.whirl_angle_deg)
                              & (speeds > thresholds.whirl_speed)))
    label = WHIRLING if whirl_frames >= thresholds.whirl_frame_count else SPARROW
    return MoxaClassification(label, d_moxi, spread, whirl_frames)
