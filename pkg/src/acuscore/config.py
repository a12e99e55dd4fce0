"""Global configuration: acupoint table, scoring bounds, detection thresholds,
camera intrinsics, and output directory, loaded from one JSON document.

Every command validates the whole config before doing any work; a missing
or unparsable referenced file is a ConfigError.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .anatomy import AcupointTable, default_table
from .errors import AcuscoreError, ConfigError
from .manipulation import Thresholds
from .projection import CameraIntrinsics
from .scoring import ScoringConfig

ENV_CONFIG = "ACU_CONFIG"


@dataclass(frozen=True)
class GlobalConfig:
    table: AcupointTable = field(default_factory=default_table)
    scoring: ScoringConfig = ScoringConfig()
    thresholds: Thresholds = Thresholds()
    intrinsics: Optional[CameraIntrinsics] = None
    output_dir: Optional[Path] = None


def load_config(path: Optional[str] = None) -> GlobalConfig:
    """Load and validate the global config; defaults apply when absent.

    The file path falls back to the ``ACU_CONFIG`` environment variable.
    Relative paths inside the config resolve against the config file.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return GlobalConfig()

    cfg_path = Path(path)
    try:
        obj = json.loads(cfg_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {cfg_path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {cfg_path} is not valid JSON: {exc}") from None

    base = cfg_path.parent
    try:
        table = default_table()
        if "acupoint_table" in obj:
            table_path = base / obj["acupoint_table"]
            if not table_path.exists():
                raise ConfigError(f"acupoint table not found: {table_path}")
            table = AcupointTable.load(table_path)
        scoring = ScoringConfig.from_json(obj.get("scoring", {}))
        thresholds = Thresholds.from_json(obj.get("thresholds", {}))
        intrinsics = None
        if "intrinsics" in obj:
            intrinsics = CameraIntrinsics.from_json(obj["intrinsics"])
        output_dir = Path(obj["output_dir"]) if "output_dir" in obj else None
    except ConfigError:
        raise
    except (AcuscoreError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config {cfg_path}: {exc}") from None

    return GlobalConfig(table=table, scoring=scoring, thresholds=thresholds,
                        intrinsics=intrinsics, output_dir=output_dir)
