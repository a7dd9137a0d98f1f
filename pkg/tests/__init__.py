"""Test suite for decohere."""
