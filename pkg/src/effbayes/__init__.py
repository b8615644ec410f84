"""Exact Bayesian posteriors, consistency checks and Schnorr-test tooling at desk scale."""

__version__ = "0.1.0"
