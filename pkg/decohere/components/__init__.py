"""Pipeline stages for simulation and comparison runs."""
