"""Spectral, dynamical and quantization toolkit for a string with endpoint masses and springs."""

__version__ = "0.1.0"
