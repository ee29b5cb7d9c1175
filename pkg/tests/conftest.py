"""
Shared fixtures: standard symbols, a seeded generator and random pure tuples
"""

import os
from typing import Iterable, Sequence, Tuple

import hypothesis
import numpy as np
import pytest

from config import Config
from core.symbol import FreeSymbol
from core.words import Word
from engines.tuples import OperatorTuple, scale_to_gauge

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def shift_symbol():
    """f = X (n = 1)"""
    return FreeSymbol.free_ball(1)


@pytest.fixture
def ball2():
    return FreeSymbol.free_ball(2)


@pytest.fixture
def ball3():
    return FreeSymbol.free_ball(3)


@pytest.fixture
def mixed():
    """f = X_1 + X_2 + X_1 X_2"""
    return mixed_symbol()


def symbol_from_pairs(n: int, pairs: Iterable[Tuple[Sequence[int], float]]) -> FreeSymbol:
    return FreeSymbol(n, {Word(tuple(letters)): a for letters, a in pairs})


def mixed_symbol() -> FreeSymbol:
    return symbol_from_pairs(2, [((0,), 1.0), ((1,), 1.0), ((0, 1), 1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(Config.DEFAULT_SEED)


def random_tuple(rng: np.random.Generator, n: int, d: int) -> OperatorTuple:
    return OperatorTuple([rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                          for _ in range(n)])


def random_pure_tuple(f: FreeSymbol, rng: np.random.Generator, d: int, target: float = 0.8) -> OperatorTuple:
    """Random tuple rescaled so ||Phi_{f,T}(I)|| = target < 1"""
    return scale_to_gauge(f, random_tuple(rng, f.n, d), target)


@pytest.fixture
def pure_tuples(ball2, rng):
    return [random_pure_tuple(ball2, rng, 4) for _ in range(10)]
