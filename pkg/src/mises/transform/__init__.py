"""Typed equation templates, their matchers, and the transformations."""

from .engine import *  # noqa: F401,F403
from .engine import __all__ as _engine_all
from .equations import *  # noqa: F401,F403
from .equations import __all__ as _equations_all
from .matching import *  # noqa: F401,F403
from .matching import __all__ as _matching_all

__all__ = [*_engine_all, *_equations_all, *_matching_all]
