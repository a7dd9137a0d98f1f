"""Windowing, decorrelation and masked-noise signal processing."""
