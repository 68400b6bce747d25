"""Experiment catalog, drivers and the runner.

The runner lives in ``ridge_lab.experiments.runner``; it is not
imported here because the run-parameter model depends on the catalog.
"""
