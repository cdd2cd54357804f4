"""
Exceptions Module

This module defines the error hierarchy raised by the pairwords engines.
"""

from typing import Any, Dict, Optional


class PairwordsError(Exception):
    """Base class for all pairwords errors."""


class DomainError(PairwordsError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class BudgetExceededError(PairwordsError):
    """
    A computation would exceed its configured budget.

    Args:
        message: Human readable description
        required: Estimated resource need (states, quadruples, letters)
        budget: The configured cap that would be exceeded
    """

    def __init__(self, message: str, required: float, budget: float):
        super().__init__(message)
        self.required = required
        self.budget = budget


class ConvergenceError(PairwordsError):
    """
    An iteration stopped at its cap before reaching tolerance.

    Args:
        message: Human readable description
        diagnostic: Values that explain the failure (e.g. spectral gap)
    """

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}
