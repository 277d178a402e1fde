#!/usr/bin/env python3
"""
riskmdp
=======

Risk-averse total-cost dynamic programming for transient Markov decision
processes with coherent one-step risk measures.

:license: MIT License, see LICENSE for more details
"""

import sys

from .dp_solver import DynamicProgramming, FiniteHorizonSolution, InfiniteHorizonSolution
from .internals.metadata import __package__, __version__
from .mdp_core import Policy, PolicyKind, TransientMdp, ValueFunction, WeightFunction, effective_restriction, ensure_valid, validate
from .model_file import ModelFile
from .multikernel import RiskKernelSelector, RiskMultikernel, TransienceReport
from .randomized import JointMeasure, RandomizedSolution, RandomizedSolver, compose_measure, sigma_joint
from .risk_measures import RiskFamily, RiskSpec, RiskValue
from .solver_report import build_report, verify_report, write_report

python_major, python_minor = (3, 12)

try:
    assert sys.version_info >= (python_major, python_minor)
except AssertionError:
    raise RuntimeError(f"{__package__} requires {python_major}.{python_minor}+, but found {sys.version}")
