from .covington_np import CovingtonNonProjective
from .covington_proj import CovingtonProjective

__all__ = ["CovingtonProjective", "CovingtonNonProjective"]
