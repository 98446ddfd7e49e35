"""
Environment configuration (.env aware)
"""
import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_THREADS = 1
DEFAULT_PERMUTATIONS = 999
DEFAULT_LOG_LEVEL = "INFO"


def _int_from_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"⚠️  {name}={raw!r} is not an integer, using {default}")
        return default
    if value < minimum:
        logger.warning(f"⚠️  {name}={value} is below {minimum}, using {default}")
        return default
    return value


def get_threads() -> int:
    """Default worker count for permutation and power-study tasks."""
    return _int_from_env("RRINDEP_THREADS", DEFAULT_THREADS)


def get_default_permutations() -> int:
    return _int_from_env("RRINDEP_DEFAULT_PERMUTATIONS", DEFAULT_PERMUTATIONS, minimum=19)


def get_log_level() -> str:
    level = os.getenv("RRINDEP_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(level), int):
        logger.warning(f"⚠️  RRINDEP_LOG_LEVEL={level!r} unknown, using {DEFAULT_LOG_LEVEL}")
        return DEFAULT_LOG_LEVEL
    return level


def run_slow_checks() -> bool:
    """Whether the Monte-Carlo acceptance tests should run."""
    return os.getenv("RRINDEP_RUN_SLOW", "").strip().lower() in {"1", "true", "yes", "on"}
