import logging
import os
from typing import Optional

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

ENV_PREFIX = "RUNWAIT_"


class EngineSettings(BaseModel):
    """Runtime settings for the waiting-time engine."""
    log_level: str = "WARNING"
    log_file: Optional[str] = None
    max_operator_r: int = Field(default=20, ge=1)
    max_prefix_law_r: int = Field(default=12, ge=1)
    decimal_digits: int = Field(default=12, ge=1)
    simulation_block: int = Field(default=100_000, ge=1)
    tail_precision_bits: int = Field(default=128, ge=32)
    allow_large: bool = False

    model_config = {"frozen": True}


def load_settings(**overrides) -> EngineSettings:
    """
    Build settings from explicit overrides, then environment, then defaults.

    Args:
        overrides: Field values that win over the environment (None is ignored)

    Returns:
        Validated EngineSettings
    """
    values = {}
    for name in EngineSettings.model_fields:
        env_value = os.getenv(ENV_PREFIX + name.upper())
        if env_value is not None and env_value != "":
            values[name] = env_value
    for name, value in overrides.items():
        if value is not None:
            values[name] = value

    settings = EngineSettings(**values)
    logger.debug(f"Settings loaded: {settings.model_dump()}")
    return settings
