"""
Core Package - Configuration, error hierarchy and random streams
"""

from .errors import ClimdeltaError
from .rng import stream


# Lazy import: config pulls in src.models, whose modules import src.core.errors
def __getattr__(name):
    if name in ('Settings', 'settings'):
        from . import config
        return getattr(config, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    'Settings',
    'settings',
    'ClimdeltaError',
    'stream',
]
