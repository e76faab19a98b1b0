"""SVG figure rendering over the crossthink analysis CSV contract."""

from .render import KINDS, SCHEMAS, FigureError, FigureSpec, render

__all__ = ["KINDS", "SCHEMAS", "FigureError", "FigureSpec", "render"]
