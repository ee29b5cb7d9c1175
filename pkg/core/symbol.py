#!/usr/bin/env python3
"""
Domain Symbols
Positive regular free polynomials f = sum a_alpha X_alpha, the derived b-table
of (1 - f)^{-1}, and the scalar constants other modules rely on.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from config import Config
from .errors import SymbolValidationError, ValidationError
from .words import EMPTY, Word, enumerate_words, prefix_splits, suffix_splits, word

logger = logging.getLogger(__name__)

CoefficientMap = Dict[Word, complex]


class FreeSymbol:
    """Finitely supported positive regular symbol on n generators"""

    def __init__(self, n: int, coeffs: Mapping[Word, float],
                 truncation_degree: Optional[int] = None):
        if not isinstance(n, int) or n < 1:
            raise SymbolValidationError(f"generator count must be a positive integer, got {n!r}", field="n")
        self.n = n
        self.truncation_degree = truncation_degree
        cleaned: Dict[Word, float] = {}
        for w, a in coeffs.items():
            w.check_alphabet(n)
            a = float(a)
            if not math.isfinite(a):
                raise SymbolValidationError(f"coefficient of {w} is not finite", field=str(w))
            if a < 0:
                raise SymbolValidationError(f"coefficient of {w} is negative ({a})", field=str(w))
            if w.is_empty and a != 0:
                raise SymbolValidationError("constant coefficient a_g0 must be 0", field=str(w))
            if a > 0:
                cleaned[w] = a
        for i in range(n):
            if cleaned.get(word(i), 0.0) <= 0:
                raise SymbolValidationError(f"linear coefficient of {word(i)} must be positive",
                                            field=str(word(i)))
        self._coeffs = dict(sorted(cleaned.items()))

    # ===== ACCESSORS =====
    def __getitem__(self, w: Word) -> float:
        return self._coeffs.get(w, 0.0)

    def __repr__(self) -> str:
        terms = ' + '.join(f"{a:g}*{w}" for w, a in self._coeffs.items())
        return f"FreeSymbol(n={self.n}, {terms})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeSymbol) and self.n == other.n and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.n, tuple(self._coeffs.items())))

    @property
    def coeffs(self) -> Dict[Word, float]:
        return dict(self._coeffs)

    @property
    def support(self) -> List[Word]:
        """Support words in graded-lex order"""
        return list(self._coeffs)

    @property
    def support_degree(self) -> int:
        return max(len(w) for w in self._coeffs)

    @property
    def is_linear(self) -> bool:
        return self.support_degree == 1

    # ===== CONSTRUCTORS =====
    @classmethod
    def linear(cls, weights: Sequence[float]) -> 'FreeSymbol':
        """a_1 X_1 + ... + a_n X_n"""
        return cls(len(weights), {word(i): a for i, a in enumerate(weights)})

    @classmethod
    def free_ball(cls, n: int) -> 'FreeSymbol':
        """X_1 + ... + X_n"""
        return cls.linear([1.0] * n)

    # ===== SERIALIZATION =====
    @classmethod
    def from_json(cls, data: Any) -> 'FreeSymbol':
        if not isinstance(data, dict):
            raise ValidationError("symbol must be a JSON object", field="symbol")
        n = data.get('n')
        if not isinstance(n, int) or isinstance(n, bool):
            raise ValidationError(f"n must be an integer, got {n!r}", field="n")
        entries = data.get('coeffs')
        if not isinstance(entries, list):
            raise ValidationError("coeffs must be a list", field="coeffs")
        coeffs: Dict[Word, float] = {}
        for idx, entry in enumerate(entries):
            where = f"coeffs[{idx}]"
            if not isinstance(entry, dict) or 'word' not in entry or 'a' not in entry:
                raise ValidationError("entry needs 'word' and 'a'", field=where)
            w = Word.from_json(entry['word'])
            a = entry['a']
            if not isinstance(a, (int, float)) or isinstance(a, bool):
                raise ValidationError(f"coefficient of {w} must be a number", field=f"{where}.a")
            if w in coeffs:
                raise ValidationError(f"duplicate word {w.to_json()}", field=f"{where}.word")
            coeffs[w] = float(a)
        truncation = data.get('truncation_degree')
        if truncation is not None and (not isinstance(truncation, int) or truncation < 1):
            raise ValidationError("truncation_degree must be a positive integer", field="truncation_degree")
        return cls(n, coeffs, truncation_degree=truncation)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'n': self.n,
            'coeffs': [{'word': w.to_json(), 'a': a} for w, a in self._coeffs.items()],
        }
        if self.truncation_degree is not None:
            data['truncation_degree'] = self.truncation_degree
        return data

    def fingerprint(self) -> str:
        """sha256 of the canonical JSON form"""
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class BTable:
    """Coefficients b_alpha of (1 - f)^{-1} up to a fixed degree"""
    n: int
    degree: int
    values: Dict[Word, float] = field(repr=False)

    def __getitem__(self, w: Word) -> float:
        if len(w) > self.degree:
            raise ValidationError(f"b-table has degree {self.degree}, asked for {w}", field=str(w))
        return self.values[w]

    def words(self) -> List[Word]:
        return list(self.values)

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.values.values(), dtype=float, count=len(self.values))

    def prefix_residual(self, f: FreeSymbol) -> float:
        """max relative |b_g - sum_{beta alpha = g} a_beta b_alpha|"""
        return self._split_residual(f, prefix_splits, prefix_first=True)

    def suffix_residual(self, f: FreeSymbol) -> float:
        """max relative |b_g - sum_{alpha beta = g} b_alpha a_beta|"""
        return self._split_residual(f, suffix_splits, prefix_first=False)

    def _split_residual(self, f: FreeSymbol, splitter, prefix_first: bool) -> float:
        worst = 0.0
        for gamma, b in self.values.items():
            if gamma.is_empty:
                continue
            total = 0.0
            for left, right in splitter(gamma):
                coefficient, rest = (left, right) if prefix_first else (right, left)
                total += f[coefficient] * self.values[rest]
            worst = max(worst, abs(b - total) / b)
        return worst

    def check_submultiplicativity(self) -> float:
        """Largest relative excess of b_alpha b_beta over b_{alpha beta}; <= 0 when it holds"""
        worst = -math.inf
        by_length: Dict[int, List[Word]] = {}
        for w in self.values:
            by_length.setdefault(len(w), []).append(w)
        for la, alphas in by_length.items():
            for lb, betas in by_length.items():
                if la + lb > self.degree:
                    continue
                for alpha in alphas:
                    for beta in betas:
                        product = self.values[alpha] * self.values[beta]
                        joined = self.values[alpha + beta]
                        worst = max(worst, (product - joined) / joined)
        return worst


def compute_b(f: FreeSymbol, m: int) -> BTable:
    """b_eps = 1, b_g = sum over prefix splits of a_beta b_alpha, in graded order"""
    if m < 0:
        raise ValidationError(f"degree must be >= 0, got {m}", field="degree")
    deg = f.support_degree
    values: Dict[Word, float] = {EMPTY: 1.0}
    for gamma in enumerate_words(f.n, m)[1:]:
        total = 0.0
        for k in range(1, min(len(gamma), deg) + 1):
            a = f[gamma[:k]]
            if a:
                total += a * values[gamma[k:]]
        values[gamma] = total
    logger.debug(f"b-table for {f!r} computed to degree {m} ({len(values)} words)")
    return BTable(f.n, m, values)


def gamma_constant(f: FreeSymbol, b: BTable) -> float:
    """sum over the support of a_alpha / b_alpha"""
    if b.degree < f.support_degree:
        raise ValidationError(f"b-table degree {b.degree} below support degree {f.support_degree}",
                              field="degree")
    return float(sum(a / b[w] for w, a in f.coeffs.items()))


def schwarz_constant(f: FreeSymbol, b: BTable, m: int) -> float:
    """max over |alpha| <= m and i of sqrt(b_{g_i alpha} / b_alpha)"""
    if b.degree < m + 1:
        raise ValidationError(f"b-table must cover degree {m + 1}", field="degree")
    best = 0.0
    for alpha in enumerate_words(f.n, m):
        for i in range(f.n):
            best = max(best, b[word(i) + alpha] / b[alpha])
    return math.sqrt(best)


def reverse_symbol(f: FreeSymbol) -> FreeSymbol:
    return FreeSymbol(f.n, {w.reverse(): a for w, a in f.coeffs.items()},
                      truncation_degree=f.truncation_degree)


def gauge(f: FreeSymbol, lam: Sequence[complex]) -> float:
    """sum a_alpha |lambda_alpha|^2 at a scalar point"""
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (f.n,):
        raise ValidationError(f"point needs {f.n} coordinates, got {lam.shape}", field="point")
    moduli = np.abs(lam) ** 2
    return float(sum(a * np.prod(moduli[list(w.letters)]) for w, a in f.coeffs.items()))


def word_value(w: Word, lam: Sequence[complex]) -> complex:
    """lambda_alpha = lambda_{i1} ... lambda_{ik}"""
    value = 1.0 + 0.0j
    for x in w:
        value *= lam[x]
    return value


@dataclass
class RadiusDiagnostic:
    """Finite-data evidence for the holomorphy radius criterion"""
    rho: List[float]
    window_max: float
    plausibly_holomorphic: bool
    window: int
    tolerance: float
    heuristic: bool = True


def radius_test(c: Mapping[Word, complex], b: BTable, m: int,
                window: Optional[int] = None, tolerance: Optional[float] = None) -> RadiusDiagnostic:
    """rho_k = (sum_{|beta| = k} |c_beta|^2 / b_beta)^{1/2k} for k = 1..m"""
    window = window or Config.RADIUS_WINDOW
    tolerance = Config.RADIUS_TOL if tolerance is None else tolerance
    if b.degree < m:
        raise ValidationError(f"b-table must cover degree {m}", field="degree")
    sums = [0.0] * (m + 1)
    for w, value in c.items():
        if len(w) > m:
            raise ValidationError(f"coefficient word {w} longer than {m}", field=str(w))
        sums[len(w)] += abs(value) ** 2 / b[w]
    rho = [sums[k] ** (1.0 / (2 * k)) for k in range(1, m + 1)]
    tail = rho[-window:] if rho else [0.0]
    window_max = max(tail)
    flag = window_max <= 1.0 + tolerance
    logger.debug(f"radius test: trailing max {window_max:.6g} over {len(tail)} degrees")
    return RadiusDiagnostic(rho, window_max, flag, window, tolerance)


@dataclass
class EquivalenceReport:
    """Coefficient-ratio comparison of two b-tables"""
    degree: int
    unitarily_equivalent: bool
    max_abs_difference: float
    c1: float
    c2: float

    @property
    def similarity_bound(self) -> float:
        return max(1.0 / self.c1, self.c2)


def equivalence_test(b: BTable, other: BTable, rel_tol: float = 1e-12) -> EquivalenceReport:
    """Equal tables on all tested degrees give unitarily equivalent models; bounded ratios give similar ones"""
    if b.n != other.n:
        raise ValidationError(f"generator counts differ ({b.n} vs {other.n})", field="n")
    degree = min(b.degree, other.degree)
    ratios = []
    diff = 0.0
    for w in enumerate_words(b.n, degree):
        x, y = b[w], other[w]
        ratios.append(x / y)
        diff = max(diff, abs(x - y) / max(x, y))
    return EquivalenceReport(degree, diff <= rel_tol, diff, min(ratios), max(ratios))
