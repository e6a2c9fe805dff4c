"""
Logging configuration for depdisplace
"""
import logging

logger = logging.getLogger(__package__)
logger.setLevel(logging.WARNING)

# -v gives INFO, -vv and more give DEBUG
VERBOSITY = (logging.WARNING, logging.INFO, logging.DEBUG)


def set_verbosity(count: int) -> int:
    """Sets the package logger level from a repeated -v flag count"""
    level = VERBOSITY[max(0, min(count, len(VERBOSITY) - 1))]
    logger.setLevel(level)
    return level
