"""Interference-robust over-the-air federated learning simulator."""

from .channel import ChannelRealization, SystemConfig
from .rngstream import RngStream, derive_stream

__version__ = "0.1.0"

__all__ = ["ChannelRealization", "RngStream", "SystemConfig", "derive_stream",
           "__version__"]
