# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the agristable C++ core."""

from ._agristable import *  # noqa: F401,F403
from ._agristable import __doc__  # noqa: F401

__version__ = "0.1.0"
