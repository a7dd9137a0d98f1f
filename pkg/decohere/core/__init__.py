"""Core pipeline building blocks: components, workflows and errors."""
