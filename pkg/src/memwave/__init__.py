"""memwave: boundary control of a coupled wave system with exponential memory.

The model lives on the interval (0, pi): a viscoelastic wave component with
memory kernel beta*exp(-eta*t) is coupled (zeroth order, coefficients a and b)
to a purely elastic one.  The package computes the per-mode characteristic
spectrum, reconstructs solutions from modal data, runs windowed frame-ratio
(observability) experiments, and synthesizes Dirichlet boundary controls by
duality, cross-checked against a finite-difference initial value solver.
"""

from memwave.core import Parameters, TraceSignal

__all__ = ["Parameters", "TraceSignal"]
__version__ = "0.1.0"
