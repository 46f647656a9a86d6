"""Sequential and integrated public-transport planning."""

__version__ = "0.1.0"
