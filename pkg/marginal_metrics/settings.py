from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import psutil
from dotenv import load_dotenv


def _to_int(value: str | None, default: int) -> int:
    try:
        return int(value) if value is not None and value != "" else default
    except ValueError:
        return default


def _to_float(value: str | None, default: float) -> float:
    if value is None or value == "":
        return default
    if value.strip().lower() in {"inf", "infinity"}:
        return math.inf
    try:
        return float(value)
    except ValueError:
        return default


def _to_workers(value: str | None) -> int:
    if (value or "").strip().lower() == "auto":
        return psutil.cpu_count(logical=False) or 1
    return max(1, _to_int(value, 1))


@dataclass(frozen=True)
class Settings:
    project_root: Path
    seed: int
    tol: float
    trials: int
    p: float
    workers: int
    truncation: int
    samples: int
    bl_max_support: int
    log_level: str


def load_settings() -> Settings:
    project_root = Path(__file__).resolve().parents[1]
    env_path = project_root / ".env"
    load_dotenv(env_path, override=False)

    seed = _to_int(os.getenv("MARGINAL_METRICS_SEED"), 20070611)

    tol = _to_float(os.getenv("MARGINAL_METRICS_TOL"), 1e-9)
    if not tol > 0:
        tol = 1e-9

    trials = max(1, _to_int(os.getenv("MARGINAL_METRICS_TRIALS"), 1000))

    p = _to_float(os.getenv("MARGINAL_METRICS_P"), 1.0)
    if not p >= 1:
        p = 1.0

    workers = _to_workers(os.getenv("MARGINAL_METRICS_WORKERS"))

    truncation = max(1, _to_int(os.getenv("MARGINAL_METRICS_TRUNCATION"), 64))
    samples = max(1, _to_int(os.getenv("MARGINAL_METRICS_SAMPLES"), 20000))
    bl_max_support = max(1, _to_int(os.getenv("MARGINAL_METRICS_BL_MAX_SUPPORT"), 300))

    log_level = (os.getenv("MARGINAL_METRICS_LOG_LEVEL") or "WARNING").upper()

    return Settings(
        project_root=project_root,
        seed=seed,
        tol=tol,
        trials=trials,
        p=p,
        workers=workers,
        truncation=truncation,
        samples=samples,
        bl_max_support=bl_max_support,
        log_level=log_level,
    )


settings = load_settings()
