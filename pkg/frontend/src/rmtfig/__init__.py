"""Deterministic figures from rmtlab CSV outputs."""

__version__ = "0.1.0"

from .render import FigureSpec, FigureSpecError, EmptyDataError, render

__all__ = ["FigureSpec", "FigureSpecError", "EmptyDataError", "render", "__version__"]
