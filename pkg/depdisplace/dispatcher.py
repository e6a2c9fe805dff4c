"""Contains the factory function which generates depdisplace transition systems.

"""
from depdisplace.transitions import ArcEager, ArcStandard, SwapEager
from depdisplace.transitions import CovingtonNonProjective, CovingtonProjective

# @formatter:off
# The keys of this dictionary are the supported system identifiers
CLASS_MAPPER = {
    "arc_standard": ArcStandard,
    "arc_eager": ArcEager,
    "covington_proj": CovingtonProjective,
    "covington_np": CovingtonNonProjective,
    "swap_eager": SwapEager,
}

# @formatter:on

systems = list(CLASS_MAPPER.keys())
systems.sort()
systems_str = "\n".join(systems)

# Groups used by the correlation analysis
PROJECTIVE = [name for name in systems if CLASS_MAPPER[name].projective]
NON_PROJECTIVE = [name for name in systems if not CLASS_MAPPER[name].projective]


def create(identifier):
    """Selects the proper transition system class and creates an instance

    Args:
        identifier: one of arc_standard, arc_eager, covington_proj,
            covington_np, swap_eager

    Raises:
        ValueError: the identifier names no supported system
    """
    if identifier not in systems:
        raise ValueError(
            f"Unsupported system: {identifier!r}: "
            f"currently supported systems are: {systems_str}"
        )
    system_class = CLASS_MAPPER[identifier]
    return system_class()
