"""Netlist format, equation and trajectory serialization, command line."""

from .emit import emit_equations, emit_trajectory
from .netlist import Netlist, load, lower, parse, print_netlist

__all__ = [
    "Netlist",
    "emit_equations",
    "emit_trajectory",
    "load",
    "lower",
    "parse",
    "print_netlist",
]
