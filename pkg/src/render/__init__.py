"""Diagram output."""

from .dot import RenderOptions, to_agraph, to_dot

__all__ = ["RenderOptions", "to_agraph", "to_dot"]
