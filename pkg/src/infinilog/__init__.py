"""Wait-free weak logs and a universal construction for the infinite arrival model."""

__version__ = "0.1.0"
