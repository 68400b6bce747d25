"""File loading utilities.

Key modules:
    - config_file: JSON/YAML experiment files validated into ExperimentConfig
"""

from .config_file import (
    field_path,
    load_config,
    read_config_data,
    validate_config,
)

__all__ = [
    "field_path",
    "load_config",
    "read_config_data",
    "validate_config",
]
