"""Truncated universal path sums over a toy prefix-free machine.

Submodules: ``bitcore`` (bit strings, dyadic numbers, phases), ``machine``
(the two-dialect interpreter), ``enumerator`` (program-tree exploration),
``pathsum`` (exact amplitudes and truncated sums), ``events`` (coarse-grained
path ensembles), ``circuits`` ({CNOT, H, T} path sums) and ``translate``
(the dialect-switching sub-integral).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bitcore import BitString, DyadicRational, PhaseFraction
from .enumerator import ExplorationReport, ExploreBudget, explore
from .machine import DEFAULT_MACHINE, Dialect, Machine, run
from .pathsum import ExactAmplitude, sigma_enclosure, sigma_paper

__all__ = [
    "BitString",
    "DyadicRational",
    "PhaseFraction",
    "Dialect",
    "Machine",
    "DEFAULT_MACHINE",
    "run",
    "ExploreBudget",
    "ExplorationReport",
    "explore",
    "ExactAmplitude",
    "sigma_paper",
    "sigma_enclosure",
]
