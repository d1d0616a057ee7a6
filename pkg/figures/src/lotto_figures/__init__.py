"""Rendering of the standard lotto-scouts figures from the CLI's CSV files."""

__version__ = "0.1.0"

from .render import FigureSpec, RenderError, render, spec_for

__all__ = ["FigureSpec", "RenderError", "render", "spec_for", "__version__"]
