"""Filter-based regularization for discrete ill-posed problems.

Tikhonov, Landweber and iterated fractional weighted Tikhonov solvers,
the Fredholm test problems they are compared on, and a CLI that
reproduces the comparison experiments.
"""

__version__ = "0.1.0"
