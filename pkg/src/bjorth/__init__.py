"""Birkhoff-James orthogonality, best approximation and best coapproximation in l_p spaces."""

from .space import EPS, INF, PNormSpace, as_vector, parse_p

__version__ = "0.1.0"

__all__ = ["EPS", "INF", "PNormSpace", "as_vector", "parse_p"]
