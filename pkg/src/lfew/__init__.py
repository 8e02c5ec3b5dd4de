"""lfew: evaluate L-functions precisely from a small set of Dirichlet coefficients.

The package combines many smoothed approximate-functional-equation
evaluations (one per test function) by constrained least squares and by
linear programming, shrinking the error contributed by unknown
coefficients and recovering bounds on the unknown coefficients themselves.
"""

__version__ = "0.1.0"

from .numerics import PrecisionContext

__all__ = ["PrecisionContext", "__version__"]
