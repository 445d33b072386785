"""Monte Carlo visibility in Boolean models, Poisson cylinders and Brownian interlacements."""

__version__ = "0.1.0"
