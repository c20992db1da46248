"""Method of fundamental solutions for the interior Helmholtz problem in 2-D."""

__version__ = "0.1.0"
