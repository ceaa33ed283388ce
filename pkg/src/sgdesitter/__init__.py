"""Numerics for the Sine-Gordon model on two-dimensional de Sitter space.

Modules
-------
geometry      cylinder chart, Killing fields and their finite flows
modes         mode functions and the alpha-family of states
propagators   two-point functions, Hadamard form, flat-space limit
vertex        vertex-operator correlators
fock          truncated Fock space, Noether charges, vertex oracle
bounds        weighted norms and the convergence-bound chain
estimator     quadrature and Monte Carlo for singular integrals
checks        the acceptance suite
cli           the ``sgds`` command-line front end
"""
from .bounds import Coupling
from .geometry import GroupParams, Point
from .modes import Regulator, StateAlpha
from .propagators import Ordering
from .testfunctions import TestFunction

__version__ = "0.1.0"

__all__ = ["Coupling", "GroupParams", "Ordering", "Point", "Regulator", "StateAlpha", "TestFunction"]
