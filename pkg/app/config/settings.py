from pydantic_settings import BaseSettings
from pathlib import Path


class Settings(BaseSettings):
    # Optimizer settings
    tolerance: float = 1e-4          # Optimality tolerance for convex programming
    max_iterations: int = 5000
    multistart: int = 5              # Set center plus quasi-random interior starts
    backtracking_factor: float = 0.5
    sufficient_increase: float = 1e-4

    # Model validation
    validation_samples: int = 256    # Quasi-random actions checked at load
    validation_tolerance: float = 1e-9
    shape_check_chords: int = 1000   # Midpoint tests for Opaque bounds
    shape_check_tolerance: float = 1e-8

    # Directories
    output_dir: str = "data/output"

    # Concurrency settings
    max_workers: int = 1             # 1 = sequential backups

    # Logging
    log_level: str = "INFO"
    log_json: bool = False
    show_progress: bool = False

    seed: int = 0

    class Config:
        env_prefix = "CAIMDP_"
        env_file = ".env"
        env_file_encoding = "utf-8"


def get_settings() -> Settings:
    return Settings()


def ensure_directories():
    """Create necessary directories if they don't exist"""
    settings = get_settings()
    Path(settings.output_dir).mkdir(parents=True, exist_ok=True)
