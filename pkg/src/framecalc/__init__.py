"""framecalc: exact exterior calculus and frame-field gravity verification.

The package is organized as a small stack:

    symcore      exact rational sparse polynomials (the coefficient ring)
    extcalc      charts, differential forms, multivector fields, brackets
    indexalg     permutation symbols, Kronecker deltas, frame densities
    palatini     the covariant-Hamiltonian frame-gravity model layer
    observables  Hamiltonian (n-1)-forms, Poisson brackets, Jacobi suites
    cli          deterministic command-line verification runner

Everything is exact: residuals of identities are polynomials that must
normalize to zero, never floats compared against a tolerance.
"""

from framecalc.symcore import Poly, Rational, VarId

__all__ = ["Poly", "Rational", "VarId"]
__version__ = "0.1.0"
