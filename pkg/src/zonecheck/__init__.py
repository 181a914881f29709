"""Backwards-reachability model checking for probabilistic timed automata."""

from .kernels import BACKEND

__version__ = "0.1.0"
