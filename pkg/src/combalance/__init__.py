"""Skeleton-based center-of-mass estimation with body-fat-dependent correction."""

__version__ = "0.1.0"
