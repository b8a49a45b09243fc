"""Nudged Ladyzhenskaya/Smagorinsky LES: pseudospectral continuous data assimilation."""

__version__ = "0.3.0"
