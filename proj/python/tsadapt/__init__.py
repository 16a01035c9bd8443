"""Streaming time-series anomaly detection with trend-aware test-time adaptation."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
