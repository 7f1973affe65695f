"""Synthetic data, experiment harness and command line."""
