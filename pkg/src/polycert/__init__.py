"""polycert: exact polynomial certificates for finite-domain constraint problems.

The library encodes constraint satisfaction instances as polynomial systems,
computes degree-truncated Groebner bases, replays and checks polynomial
calculus derivations, translates them into exactly verified sum-of-squares
certificates, and provides spectral diagnostics for the moment matrices of
solution sets.
"""

__version__ = "0.1.0"
