"""Generalised Euclidean Taub-NUT metrics: hidden symmetries, anomalies and Dirac indices."""

__version__ = "0.1.0"
