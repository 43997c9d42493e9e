"""
Configuration management for designhub
"""

import logging
import tempfile
from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict

# .env next to the package root, independent of the working directory
_ENV_FILE = Path(__file__).parent.parent / ".env"

if not _ENV_FILE.exists():
    logging.debug(f"[config] .env file not found at {_ENV_FILE}, using environment only")


class Settings(BaseSettings):
    """Process settings loaded from DESIGNHUB_* environment variables"""

    # Artifacts (used when --out is absent)
    output_dir: str = "./runs"

    # Subprocess executor
    sandbox_root: str = tempfile.gettempdir()
    subprocess_timeout_seconds: float = 3600.0

    # Executors: completed results kept per executor for repeat calls
    result_cache_size: int = 4096

    # Logging
    log_level: str = "INFO"
    log_json: bool = True

    model_config = SettingsConfigDict(
        env_prefix="DESIGNHUB_",
        env_file=str(_ENV_FILE),
        env_file_encoding="utf-8",
        extra="ignore",
    )


# Global settings instance
settings = Settings()
