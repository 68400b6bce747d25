"""
ridge-lab models.

Pydantic models for settings, experiment files, run parameters,
acceptance checks and run manifests.

Key models:
    - LabSettings: process defaults loaded from the environment
    - ExperimentConfig: a validated experiment file
    - RunParams: CLI overrides for one run
    - CheckResult: acceptance gates of one run
    - RunManifest: reproducibility record written next to artifacts
"""

from .config import LabSettings, load_env
from .experiment import (
    Counts,
    EllFunctionSpec,
    ExperimentConfig,
    ProposalSpec,
    TargetSpec,
)
from .check_result import CheckRecord, CheckResult
from .manifest import ArtifactEntry, RunManifest

__all__ = [
    "LabSettings",
    "load_env",
    "Counts",
    "EllFunctionSpec",
    "ExperimentConfig",
    "ProposalSpec",
    "TargetSpec",
    "CheckRecord",
    "CheckResult",
    "ArtifactEntry",
    "RunManifest",
]
