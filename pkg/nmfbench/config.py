"""
Configuration for nmfbench.

Process settings come from NMFBENCH_* environment variables (a local .env
file is honoured through python-dotenv). Run manifests are flat key=value
files whose keys mirror the long options of `nmfbench run`.
"""

import os
from pathlib import Path
from typing import Dict

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError

from nmfbench.errors import IoError

DEFAULT_DATABASE_URL = "sqlite:///./nmfbench.db"


class Settings(BaseModel):
    """
    Process-wide settings.

    Attributes:
        jobs: Default number of concurrent grid cells (NMFBENCH_JOBS)
        database_url: SQLAlchemy URL of the results store (NMFBENCH_DATABASE_URL)
        log_level: Root log level name (NMFBENCH_LOG_LEVEL)
    """
    jobs: int = Field(default=1, ge=1)
    database_url: str = DEFAULT_DATABASE_URL
    log_level: str = "WARNING"


def get_settings() -> Settings:
    """
    Read settings from the environment.

    Raises:
        ValueError: If a variable holds an invalid value
    """
    values = {}
    for field, variable in (("jobs", "NMFBENCH_JOBS"),
                            ("database_url", "NMFBENCH_DATABASE_URL"),
                            ("log_level", "NMFBENCH_LOG_LEVEL")):
        if os.environ.get(variable):
            values[field] = os.environ[variable]
    try:
        return Settings(**values)
    except ValidationError as e:
        raise ValueError(f"invalid NMFBENCH_* environment setting: {e}")


def load_run_file(path) -> Dict[str, str]:
    """
    Parse a run manifest into option name -> value.

    Keys are normalized to the long option spelling ('max_iter' and
    'max-iter' are the same key). Empty values are dropped.

    Raises:
        IoError: If the file does not exist
    """
    path = Path(path)
    if not path.is_file():
        raise IoError(f"run file {path} not found")
    return {
        key.strip().lower().replace("_", "-"): value.strip()
        for key, value in dotenv_values(path).items()
        if value is not None and value.strip()
    }
