"""
Logging setup driven by the LUKAN_LOG environment variable
"""
import logging
import os
import sys

LOG_ENV_VAR = 'LUKAN_LOG'
DEFAULT_LEVEL = 'info'
LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

LEVELS = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}


def resolve_level(value: str = None) -> int:
    if value is None:
        value = os.environ.get(LOG_ENV_VAR, DEFAULT_LEVEL)
    return LEVELS.get(value.strip().lower(), LEVELS[DEFAULT_LEVEL])


def configure_logging(value: str = None) -> int:
    """
    Configure the root logger once per process and return the chosen level
    """
    raw = value if value is not None else os.environ.get(LOG_ENV_VAR, DEFAULT_LEVEL)
    level = resolve_level(raw)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    if raw.strip().lower() not in LEVELS:
        logging.getLogger(__name__).warning(
            f"Unknown {LOG_ENV_VAR} value '{raw}', using '{DEFAULT_LEVEL}'"
        )
    return level


def show_progress() -> bool:
    """Progress bars only when informational output is wanted and stderr is a terminal"""
    root = logging.getLogger()
    return root.isEnabledFor(logging.INFO) and sys.stderr.isatty()
