import numpy as np
import pytest

from acuscore.anatomy import SkeletonFrame


def t_pose_joints() -> dict:
    """Synthetic standing skeleton (cm), right hand spread at waist height.

    Covers every joint the packaged acupoint table references.
    """
    j = {
        "left_shoulder": [-18.0, 140.0, 0.0],
        "right_shoulder": [18.0, 140.0, 0.0],
        "left_elbow": [-30.0, 115.0, 0.0],
        "right_elbow": [30.0, 115.0, 0.0],
        "left_wrist": [-40.0, 90.0, 0.0],
        "right_wrist": [40.0, 90.0, 0.0],
        "left_hip": [-12.0, 95.0, 0.0],
        "right_hip": [12.0, 95.0, 0.0],
        "left_knee": [-12.0, 50.0, 0.0],
        "right_knee": [12.0, 50.0, 0.0],
        "left_ankle": [-12.0, 8.0, 0.0],
        "right_ankle": [12.0, 8.0, 0.0],
        "left_foot_index": [-12.0, 0.0, 12.0],
        "right_foot_index": [12.0, 0.0, 12.0],
        # right hand, fingers fanned along +x
        "right_thumb_cmc": [42.0, 88.0, 2.0],
        "right_thumb_mcp": [45.0, 87.0, 3.0],
        "right_thumb_ip": [47.0, 86.0, 4.0],
        "right_thumb_tip": [49.0, 85.0, 5.0],
        "right_index_mcp": [46.0, 91.0, 0.0],
        "right_index_pip": [49.0, 91.0, 0.0],
        "right_index_dip": [51.0, 91.0, 0.0],
        "right_index_tip": [53.0, 91.0, 0.0],
        "right_middle_mcp": [46.0, 89.5, 0.0],
        "right_middle_pip": [49.5, 89.5, 0.0],
        "right_middle_dip": [52.0, 89.5, 0.0],
        "right_middle_tip": [54.0, 89.5, 0.0],
        "right_ring_mcp": [46.0, 88.0, 0.0],
        "right_ring_pip": [49.0, 88.0, 0.0],
        "right_ring_dip": [51.0, 88.0, 0.0],
        "right_ring_tip": [53.0, 88.0, 0.0],
        "right_pinky_mcp": [45.5, 86.5, 0.0],
        "right_pinky_pip": [48.0, 86.5, 0.0],
        "right_pinky_dip": [50.0, 86.5, 0.0],
        "right_pinky_tip": [52.0, 86.5, 0.0],
    }
    return {k: np.array(v) for k, v in j.items()}


@pytest.fixture
def t_pose() -> SkeletonFrame:
    return SkeletonFrame(timestamp=0.0, joints=t_pose_joints())


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix from a normalized quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def transform_frame(frame: SkeletonFrame, rot: np.ndarray, shift: np.ndarray) -> SkeletonFrame:
    return SkeletonFrame(
        timestamp=frame.timestamp,
        joints={k: rot @ v + shift for k, v in frame.joints.items()},
        confidence=frame.confidence,
    )
