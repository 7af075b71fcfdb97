"""Separability-probability estimation for two-rebit and two-qubit density matrices."""

from ._sepscope import *  # noqa: F401,F403
from ._sepscope import __version__, DomainError, EstimationError  # noqa: F401
