"""Topological feature extraction for grayscale images and planar point clouds."""

__version__ = "0.1.0"
