"""Experiment configs, runs, reports and charts."""
