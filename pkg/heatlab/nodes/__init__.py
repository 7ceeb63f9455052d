"""
Nodes of the validation pipeline.

- Criteria: the acceptance checks A1-A10 and their fast/full budgets
- Logger: JSONL run log for CLI commands and criteria
"""

from .criteria import (
    CRITERIA, FAST_BUDGET, FAST_ORDER, FULL_BUDGET, FULL_EXTRA, SUITE_BUDGETS
)
from .logger import RunLogger

__all__ = [
    # Criteria
    'CRITERIA', 'FAST_BUDGET', 'FULL_BUDGET', 'FAST_ORDER', 'FULL_EXTRA', 'SUITE_BUDGETS',

    # Logger
    'RunLogger'
]
