"""Experiment catalog and attack scenarios."""
