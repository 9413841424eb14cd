"""feqlab: a variant of Wilson's functional equation on groups, solved and stress-tested.

The equation is f(xy) + chi(y) f(sigma(y) x) = 2 f(x) g(y) with sigma an
involutive (anti-)automorphism and chi a unitary character satisfying
chi(x sigma(x)) = 1. The package builds group domains, enumerates the
morphism data, constructs the closed-form solution families, recovers
solutions independently with linear-algebra and Newton solvers, and checks
the quantitative inequalities behind the stability results.
"""

__version__ = "0.1.0"
