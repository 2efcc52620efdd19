"""Explicit-state QsCTL model checking with critical-tree counterexamples."""
from .csm import AutomataNetwork, ReachabilityGraph, build_rg, load_model, parse_model
from .critical import CriticalTree, build_tree, compress, decompress
from .engine import EvalContext, Optimizations, evaluate, find_sequence, spheres
from .formula import Formula, free_atoms, parse_formula
from .oracle import eval_oracle

__version__ = "0.1.0"

import logging as _logging

_logging.getLogger(__name__).addHandler(_logging.NullHandler())
