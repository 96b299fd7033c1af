"""Numerical hierarchy of hypergeometric special functions (elliptic,
hyperbolic, complex/rational levels), their difference and
difference-recurrence equations, degeneration limits, closed-form
evaluations, and the associated integrable N-body Hamiltonian checks."""

__version__ = "0.1.0"
