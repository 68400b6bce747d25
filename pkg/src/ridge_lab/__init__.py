"""
ridge-lab - Random-Walk Metropolis on ridged two-scale densities.

Simulates RWM chains on targets concentrated near a lower-dimensional
set and compares them with their diffusion, jump-process and
high-dimensional scaling limits.

Main entry points:
    - ridge_lab.main: CLI entrypoint
    - ridge_lab.experiments.runner: run_experiment() for one configured study
    - ridge_lab.core: targets, kernels, limits and diagnostics
"""

__version__ = "0.1.0"
