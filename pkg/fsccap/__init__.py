"""Top level entry of fsccap."""

# importing modules to be available at the package level namespace

from . import version
from .bounds import bounds, dmc, limits
from .channel import families, fsc
from .indecomp import indecomposability
from .info import interval, measures

__version__ = version.version
