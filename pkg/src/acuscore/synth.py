"""Parameterized synthetic needle/hand/moxa traces with known labels.

Zero-noise output satisfies the defining kinematics of its label by
construction, which makes these generators the ground-truth oracle for the
classifiers. Noise is isotropic Gaussian on positions only (never on unit
vectors), drawn from numpy's seeded PCG64 generator in sample order: needle
tip first, then hand joints in HAND_KEYS order, moxa head last. Identical
seeds give byte-identical traces.

Conventions shared with the classifiers: the skin plane passes through the
origin with outward normal +z; a clockwise turn is a positive rotation
about the needle's tip-ward direction vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import InvalidSpec
from .manipulation import (
    HAND_KEYS,
    MILD,
    REDUCE,
    REINFORCE,
    SPARROW,
    WHIRLING,
    MoxaSample,
    MoxaSession,
    NeedleSample,
    NeedleSession,
)

LIFT_THRUST = "lift_thrust"
TWIST = "twist"
MOXA = "moxa"

# The full generator grid: every label the classifiers must round-trip.
LABEL_GRID = (
    (LIFT_THRUST, REINFORCE),
    (LIFT_THRUST, REDUCE),
    (TWIST, REINFORCE),
    (TWIST, REDUCE),
    (MOXA, MILD),
    (MOXA, SPARROW),
    (MOXA, WHIRLING),
)

_SKIN_POINT = np.zeros(3)
_SKIN_NORMAL = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SynthSpec:
    technique: str
    label: str
    target: str = "LU10"
    # lift-thrust profile
    peak_depths: tuple[float, float] = (2.0, 0.8)
    thrust_speed: float = 3.0
    lift_speed: float = 1.0
    rest_depth: float = 0.2
    insertion_angle_deg: float = 90.0
    # twist profile
    turn_sequence: tuple[str, ...] = ("cw", "cw", "ccw", "ccw")
    twist_hold_depth: float = 1.0
    half_roll_seconds: float = 0.5
    # moxa profile
    height: float = 3.0
    amplitude: float = 1.0
    orbit_rx: float = 1.5
    orbit_ry: float = 2.8
    frequency: float = 0.5
    duration: float = 4.0
    # sampling
    sample_rate: float = 90.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.technique not in (LIFT_THRUST, TWIST, MOXA):
            raise InvalidSpec(f"unknown technique {self.technique!r}")
        valid = {LIFT_THRUST: (REINFORCE, REDUCE), TWIST: (REINFORCE, REDUCE),
                 MOXA: (MILD, SPARROW, WHIRLING)}[self.technique]
        if self.label not in valid:
            raise InvalidSpec(f"label {self.label!r} invalid for {self.technique}")
        if self.sample_rate <= 0:
            raise InvalidSpec("sample_rate must be positive")
        if self.noise_sigma < 0:
            raise InvalidSpec("noise_sigma must be >= 0")
        if self.technique == LIFT_THRUST:
            if min(self.peak_depths) <= self.rest_depth:
                raise InvalidSpec("peak depths must exceed the rest depth")
            if self.thrust_speed <= 0 or self.lift_speed <= 0:
                raise InvalidSpec("phase speeds must be positive")
            if not 0 < self.insertion_angle_deg <= 90:
                raise InvalidSpec("insertion angle must be in (0, 90] degrees")
        if self.technique == TWIST and any(d not in ("cw", "ccw") for d in self.turn_sequence):
            raise InvalidSpec("turn_sequence entries must be 'cw' or 'ccw'")

    @classmethod
    def for_label(cls, technique: str, label: str, **overrides) -> "SynthSpec":
        """Default spec whose zero-noise trace realizes the label exactly."""
        spec = cls(technique=technique, label=label)
        if technique == LIFT_THRUST and label == REDUCE:
            spec = replace(spec, peak_depths=(0.8, 2.0), thrust_speed=1.0, lift_speed=3.0)
        elif technique == TWIST and label == REDUCE:
            spec = replace(spec, turn_sequence=("ccw", "ccw", "cw", "cw"))
        elif technique == MOXA:
            spec = replace(spec, target="ST36")
        return replace(spec, **overrides) if overrides else spec

    @classmethod
    def from_json(cls, obj: dict) -> "SynthSpec":
        obj = dict(obj)
        for key in ("peak_depths", "turn_sequence"):
            if key in obj:
                obj[key] = tuple(obj[key])
        base = {"technique": obj.pop("technique"), "label": obj.pop("label")}
        return cls.for_label(**base, **obj)

    def to_json(self) -> dict:
        return {
            "technique": self.technique, "label": self.label, "target": self.target,
            "peak_depths": list(self.peak_depths), "thrust_speed": self.thrust_speed,
            "lift_speed": self.lift_speed, "rest_depth": self.rest_depth,
            "insertion_angle_deg": self.insertion_angle_deg,
            "turn_sequence": list(self.turn_sequence),
            "twist_hold_depth": self.twist_hold_depth,
            "half_roll_seconds": self.half_roll_seconds,
            "height": self.height, "amplitude": self.amplitude,
            "orbit_rx": self.orbit_rx, "orbit_ry": self.orbit_ry,
            "frequency": self.frequency, "duration": self.duration,
            "sample_rate": self.sample_rate, "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }


def _sample_times(breakpoints: np.ndarray, rate: float) -> np.ndarray:
    """Uniform grid at the sample rate, plus the exact breakpoint times.

    Grid points colliding with a breakpoint are dropped so apex samples
    land exactly on the profile's corners.
    """
    bp = np.asarray(breakpoints, dtype=float)
    grid = np.arange(0.0, bp[-1] + 0.5 / rate, 1.0 / rate)
    grid = grid[grid <= bp[-1] + 1e-9]
    near_bp = np.min(np.abs(grid[:, None] - bp[None, :]), axis=1) < 1e-9
    return np.sort(np.concatenate([grid[~near_bp], bp]))


def _needle_direction(angle_deg: float) -> np.ndarray:
    """Tip-ward unit vector entering the +z-up skin at the given surface angle."""
    if angle_deg == 90.0:
        return np.array([0.0, 0.0, -1.0])
    a = math.radians(angle_deg)
    return np.array([math.cos(a), 0.0, -math.sin(a)])


def _lift_thrust_breakpoints(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    d1, d2 = spec.peak_depths
    b = spec.rest_depth
    exit_height = 0.5
    t = [0.0]
    d = [0.0]
    for dt, dd in (
        (d1 / spec.thrust_speed, d1),
        ((d1 - b) / spec.lift_speed, b),
        ((d2 - b) / spec.thrust_speed, d2),
        ((d2 + exit_height) / spec.lift_speed, -exit_height),
    ):
        t.append(t[-1] + dt)
        d.append(dd)
    return np.array(t), np.array(d)


def _generate_lift_thrust(spec: SynthSpec, rng: np.random.Generator) -> NeedleSession:
    bp_t, bp_d = _lift_thrust_breakpoints(spec)
    times = _sample_times(bp_t, spec.sample_rate)
    depths = np.interp(times, bp_t, bp_d)

    direction = _needle_direction(spec.insertion_angle_deg)
    sin_a = math.sin(math.radians(spec.insertion_angle_deg))
    # Tip travels along the needle shaft; vertical depth = shaft length * sin(angle).
    tips = _SKIN_POINT + np.outer(depths / sin_a, direction)
    if spec.noise_sigma > 0:
        tips = tips + rng.normal(0.0, spec.noise_sigma, tips.shape)

    samples = [NeedleSample(t=float(times[i]), tip=tips[i], direction=direction)
               for i in range(len(times))]
    return NeedleSession(samples=tuple(samples), target=spec.target,
                         skin_point=_SKIN_POINT, skin_normal=_SKIN_NORMAL)


# Hand geometry for twisting: finger roots fixed with their midpoint offset
# from the needle axis along -y, fingertips diametrically opposed on a
# circle around the axis. sign(delta_d) then follows sign(sin(phi)).
_THUMB_PROXIMAL = np.array([0.0, -1.0, 2.0])
_INDEX_PROXIMAL = np.array([0.0, -3.0, 2.0])
_TIP_RADIUS = 2.5
_TIP_HEIGHT = 1.0
_REST_PHI = math.pi / 2.0


def _twist_phi_breakpoints(spec: SynthSpec) -> tuple[list[float], list[float], float, float]:
    """Thumb-tip azimuth profile: rolls out and back once per turn.

    A cw turn sweeps phi down through 0 and back (positive rotation about
    the downward needle direction); a ccw turn sweeps up through pi.
    """
    insert_s, dwell_s, exit_s = 0.5, 0.25, 0.5
    t = [0.0, insert_s, insert_s + dwell_s]
    phi = [_REST_PHI, _REST_PHI, _REST_PHI]
    for turn in spec.turn_sequence:
        delta = -math.pi if turn == "cw" else math.pi
        t.append(t[-1] + spec.half_roll_seconds)
        phi.append(phi[-1] + delta)
        t.append(t[-1] + spec.half_roll_seconds)
        phi.append(phi[-1] - delta)
    t_exit_start = t[-1] + dwell_s
    t.append(t_exit_start)
    phi.append(phi[-1])
    t.append(t_exit_start + exit_s)
    phi.append(phi[-1])
    return t, phi, insert_s, t_exit_start


def _generate_twist(spec: SynthSpec, rng: np.random.Generator) -> NeedleSession:
    bp_t, bp_phi, insert_s, t_exit_start = _twist_phi_breakpoints(spec)
    bp_t = np.array(bp_t)
    times = _sample_times(bp_t, spec.sample_rate)
    phis = np.interp(times, bp_t, np.array(bp_phi))

    hold = spec.twist_hold_depth
    depth_bp_t = np.array([0.0, insert_s, t_exit_start, bp_t[-1]])
    depth_bp_d = np.array([0.0, hold, hold, -0.5])
    depths = np.interp(times, depth_bp_t, depth_bp_d)

    direction = np.array([0.0, 0.0, -1.0])
    samples = []
    for i, t in enumerate(times):
        tip = _SKIN_POINT + direction * depths[i]
        thumb_tip = np.array([_TIP_RADIUS * math.cos(phis[i]),
                              _TIP_RADIUS * math.sin(phis[i]), _TIP_HEIGHT])
        index_tip = np.array([-thumb_tip[0], -thumb_tip[1], _TIP_HEIGHT])
        hand = {
            "thumb_tip": thumb_tip,
            "index_tip": index_tip,
            "thumb_proximal": _THUMB_PROXIMAL.copy(),
            "index_proximal": _INDEX_PROXIMAL.copy(),
        }
        if spec.noise_sigma > 0:
            tip = tip + rng.normal(0.0, spec.noise_sigma, 3)
            for key in HAND_KEYS:
                hand[key] = hand[key] + rng.normal(0.0, spec.noise_sigma, 3)
        samples.append(NeedleSample(t=float(t), tip=tip, direction=direction, hand=hand))
    return NeedleSession(samples=tuple(samples), target=spec.target,
                         skin_point=_SKIN_POINT, skin_normal=_SKIN_NORMAL)


def _generate_moxa(spec: SynthSpec, rng: np.random.Generator) -> MoxaSession:
    times = _sample_times(np.array([0.0, spec.duration]), spec.sample_rate)
    omega = 2.0 * math.pi * spec.frequency
    if spec.label == MILD:
        heads = np.tile([0.0, 0.0, spec.height], (len(times), 1))
    elif spec.label == SPARROW:
        z = spec.height + spec.amplitude * np.sin(omega * times)
        heads = np.column_stack([np.zeros_like(times), np.zeros_like(times), z])
    else:  # whirling: elliptical orbit so the target distance visibly varies
        heads = np.column_stack([
            spec.orbit_rx * np.cos(omega * times),
            spec.orbit_ry * np.sin(omega * times),
            np.full_like(times, spec.height),
        ])
    if spec.noise_sigma > 0:
        heads = heads + rng.normal(0.0, spec.noise_sigma, heads.shape)
    samples = tuple(MoxaSample(t=float(times[i]), head=heads[i]) for i in range(len(times)))
    return MoxaSession(samples=samples, target=spec.target,
                       target_pos=_SKIN_POINT, skin_normal=_SKIN_NORMAL)


def generate(spec: SynthSpec) -> Union[NeedleSession, MoxaSession]:
    """Generate the trace realizing the spec's label; reproducible per seed."""
    rng = np.random.default_rng(spec.seed)
    if spec.technique == LIFT_THRUST:
        return _generate_lift_thrust(spec, rng)
    if spec.technique == TWIST:
        return _generate_twist(spec, rng)
    return _generate_moxa(spec, rng)
