"""Python bindings for the HJM multi-curve library."""

from ._hjmrw import *  # noqa: F401,F403
from ._hjmrw import __version__  # noqa: F401
