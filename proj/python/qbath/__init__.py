"""Python bindings for the qbath exact damped-oscillator engine."""

from ._qbath import *  # noqa: F401,F403
from ._qbath import __doc__  # noqa: F401

__version__ = "0.1.0"
