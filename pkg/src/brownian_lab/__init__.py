"""Numerical companion to a constructive treatment of Brownian motion.

Finite-universe extension theory, Gaussian measures, the min-kernel projective
family, covering/chaining machinery with explicit Kolmogorov-Chentsov
constants, path simulation and statistical verification of invariances.
"""

__version__ = "0.1.0"
