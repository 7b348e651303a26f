"""Mechanism analysis and grasp planning for a three-finger quick-return gripper
driven through a load-sensitive CVT."""

from . import design_search, geom, immobility, ls_cvt, planner, quick_return, statics
from .quick_return import FingerGeometry
from .ls_cvt import CvtGeometry, CvtMode

__version__ = "0.1.0"

__all__ = [
    "design_search",
    "geom",
    "immobility",
    "ls_cvt",
    "planner",
    "quick_return",
    "statics",
    "FingerGeometry",
    "CvtGeometry",
    "CvtMode",
    "__version__",
]
