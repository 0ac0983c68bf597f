"""Experiment layer: sweeps, fits, acceptance checks and the command line."""
