"""guidebot: deterministic 2D simulator and algorithms for a wayfinding
robot that guides a person holding its grip bar.

The planner's collision boundary is the robot body plus the estimated
reachable-space rectangle of the user, so planned motion keeps both safe.
"""

from .geometry import Pose2D, Twist2D
from .grid import OccupancyGrid, SemanticEntity, load_map_file, parse_map_text

__version__ = "0.1.0"

__all__ = [
    "Pose2D",
    "Twist2D",
    "OccupancyGrid",
    "SemanticEntity",
    "load_map_file",
    "parse_map_text",
    "__version__",
]
