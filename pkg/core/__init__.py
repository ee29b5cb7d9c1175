"""
Core components for the ncdomain toolkit: words, symbols and the truncated Fock model
"""

from .errors import NCDomainError, NumericalError, ValidationError
from .fock import TruncatedFock, build_fock
from .symbol import BTable, FreeSymbol, compute_b
from .words import Word, enumerate_words

__all__ = [
    'NCDomainError',
    'NumericalError',
    'ValidationError',
    'TruncatedFock',
    'build_fock',
    'BTable',
    'FreeSymbol',
    'compute_b',
    'Word',
    'enumerate_words'
]
