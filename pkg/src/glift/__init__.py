"""Čech obstructions to lifting principal bundles through central extensions,
plus a sampled differential-geometric layer (connections, curvature,
connective structures, holonomy)."""

__version__ = "0.1.0"
