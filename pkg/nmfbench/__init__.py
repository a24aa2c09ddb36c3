"""
nmfbench: non-negative matrix factorization solvers, initializers and a
benchmark harness comparing how initialization shapes convergence.
"""

__version__ = "0.1.0"
