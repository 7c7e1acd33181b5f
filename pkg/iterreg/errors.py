"""Exceptions raised by iterreg."""

from typing import List

import numpy as np


class IterRegError(Exception):
    """Base class for all iterreg errors."""


class InvalidInputError(IterRegError, ValueError):
    """Input has the wrong shape, is empty, or is out of range."""


class InvalidParameterError(InvalidInputError):
    """A regularization parameter (alpha, l, r, m, a, sigma, E) is not admissible."""


class NotPSDError(IterRegError, np.linalg.LinAlgError):
    """Matrix has an eigenvalue below the negative clamp tolerance."""


class DecompositionError(IterRegError, np.linalg.LinAlgError):
    """A matrix factorization failed."""


class SingularMatrixError(DecompositionError):
    """Elimination hit an exact zero pivot."""


class ConfigError(InvalidInputError):
    """Run configuration failed validation.

    All problems are collected so a single run reports every bad field.
    """

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
