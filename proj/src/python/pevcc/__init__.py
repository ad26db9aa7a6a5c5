"""Distributed PEV charging coordination (C++ core)."""

from ._pevcc import *  # noqa: F401,F403
from ._pevcc import __doc__  # noqa: F401
