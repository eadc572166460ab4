"""Nystrom-based evaluation of local Poisson spaces on curvilinear polygons."""

from ._nyfem import *  # noqa: F401,F403
from ._nyfem import __version__  # noqa: F401
