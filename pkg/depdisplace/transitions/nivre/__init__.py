from .arc_eager import ArcEager
from .arc_standard import ArcStandard
from .swap_eager import SwapEager

__all__ = ["ArcStandard", "ArcEager", "SwapEager"]
