import depdisplace.transitions
from depdisplace.dispatcher import create, systems
from depdisplace.exceptions import (
    ConlluParseError,
    DepdisplaceError,
    EmptyDistributionError,
    EmptyTreebankError,
    EnumerationCapacityError,
    IllegalTransitionError,
    MalformedTreeError,
    ManifestError,
    ModelFormatError,
    SystemMismatchError,
    UndefinedCorrelationError,
)
from depdisplace.logger import logger
from depdisplace.version import __author__, __author_email__, __url__, __version__

__all__ = (
    "create",
    "systems",
    "logger",
    "DepdisplaceError",
    "ConlluParseError",
    "MalformedTreeError",
    "IllegalTransitionError",
    "EmptyDistributionError",
    "EmptyTreebankError",
    "EnumerationCapacityError",
    "UndefinedCorrelationError",
    "ModelFormatError",
    "SystemMismatchError",
    "ManifestError",
    "transitions",
)
