"""deforma: exact-arithmetic L-infinity algebra and deformation-functor toolkit."""

__version__ = "0.1.0"
