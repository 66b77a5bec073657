"""Circle packings of random planar triangulations and random walks on them."""

__version__ = "0.1.0"
