"""Simulation document schema, presets and loading."""
