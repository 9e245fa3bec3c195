"""LiDAR-only multi-robot intruder detection and its simulator."""
__version__ = "0.1.0"
