"""Packaged default calibration artifacts.

The Z bank and the level-set constant c0 ship with the package so samplers
work out of the box; both were produced by the package's own pipeline
(`bbmx simulate-bbm` runs at t = 12 with the default pruning) and can be
regenerated with the CLI.  See README for the regeneration commands.
"""

from __future__ import annotations

from importlib import resources

# Through-origin regression of level-set counts over (v exp(sqrt2 v - v^2/2t))
# against bank-normalized martingale values, t = 12, v = 0.7 sqrt(12),
# 2000 runs, seed 20240812.  Stderr from the same regression.
DEFAULT_C0 = 0.5861
DEFAULT_C0_STDERR = 0.0075


def z_bank_path():
    """Path to the packaged Z-bank CSV."""
    return resources.files("bbmx").joinpath("data/z_bank.csv")
