"""Pinhole camera model: FOV-derived intrinsics, projection and back-projection.

Depth is an input here; the package never solves for camera pose. All 3D
positions are camera-space centimeters, image coordinates are pixels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BehindCamera, InvalidConfig, InvalidFov, NonPositiveDepth


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidConfig(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width):
            raise InvalidConfig(f"cx={self.cx} outside [0, {self.width})")
        if not (0 <= self.cy < self.height):
            raise InvalidConfig(f"cy={self.cy} outside [0, {self.height})")

    @classmethod
    def from_json(cls, block: dict) -> "CameraIntrinsics":
        """Build from a config block: either explicit fx/fy/cx/cy or h_fov_deg."""
        if "h_fov_deg" in block:
            return intrinsics_from_fov(block["h_fov_deg"], block["width"], block["height"])
        return cls(
            fx=float(block["fx"]),
            fy=float(block.get("fy", block["fx"])),
            cx=float(block["cx"]),
            cy=float(block["cy"]),
            width=int(block["width"]),
            height=int(block["height"]),
        )


def intrinsics_from_fov(h_fov_deg: float, width: int, height: int) -> CameraIntrinsics:
    """Derive square-pixel intrinsics from a horizontal field of view.

    fx = width / (2 * tan(h_fov / 2)), fy = fx, principal point at the
    image center.
    """
    if not 0.0 < h_fov_deg < 180.0:
        raise InvalidFov(f"horizontal FOV must be in (0, 180) degrees, got {h_fov_deg}")
    fx = width / (2.0 * math.tan(math.radians(h_fov_deg) / 2.0))
    return CameraIntrinsics(fx=fx, fy=fx, cx=width / 2.0, cy=height / 2.0,
                            width=int(width), height=int(height))


def back_project(u: float, v: float, z_cam: float, k: CameraIntrinsics) -> np.ndarray:
    """Lift image coordinates plus depth to a camera-space 3D point.

    P = z * K^-1 * [u, v, 1]^T, expanded in closed form.
    """
    if z_cam <= 0:
        raise NonPositiveDepth(f"depth must be positive, got {z_cam}")
    return np.array([
        z_cam * (u - k.cx) / k.fx,
        z_cam * (v - k.cy) / k.fy,
        z_cam,
    ])


def project(p, k: CameraIntrinsics) -> tuple[float, float]:
    """Project a camera-space point onto the image plane (inverse of back_project)."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if z <= 0:
        raise BehindCamera(f"point has non-positive depth z={z}")
    return (k.fx * x / z + k.cx, k.fy * y / z + k.cy)
