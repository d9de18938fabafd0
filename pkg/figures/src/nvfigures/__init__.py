"""Figure analogues rendered from nvspin sweep CSV files.

This package consumes only the documented CSV contract of the ``nvspin``
command-line tool; it never imports the physics package itself.
"""

from .errors import EmptySeries, FigureError, MissingColumn  # noqa: F401
from .render import FigureSpec, render  # noqa: F401

__version__ = "0.1.0"
