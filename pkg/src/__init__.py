"""AMMSM - Main package."""

__version__ = "0.1.0"
__description__ = "Adaptive motion magnification and sparse state-space micro-expression recognition"
