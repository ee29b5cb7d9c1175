#!/usr/bin/env python3
"""
Truncated Weighted Fock Space
Level-m truncation of the weighted Fock space with the weighted left and right
creation operators, polynomial evaluation, truncation-aware norms, the Hol
metric and the Wiener/Bohr coefficient checks.

Basis order is graded-lex. W_i and L_i annihilate top-degree basis vectors,
which is the compression to the co-invariant subspace of degree <= m.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from config import Config
from .errors import DimensionCapError, NotInDomainError, ValidationError
from .symbol import BTable, FreeSymbol, compute_b, gauge, word_value
from .words import EMPTY, Word, enumerate_words, word_count

logger = logging.getLogger(__name__)


def _offset(n: int, k: int) -> int:
    """Index of the first basis word of length k"""
    return word_count(n, k - 1) if k > 0 else 0


def basis_index(n: int, w: Word) -> int:
    """Position of w in the graded-lex basis"""
    position = 0
    for x in w:
        position = position * n + x
    return _offset(n, len(w)) + position


@dataclass(frozen=True, eq=False)
class TruncatedFock:
    """Weighted Fock space cut at level m, with W_i and L_i as sparse matrices"""
    symbol: FreeSymbol
    level: int
    basis: Tuple[Word, ...] = field(repr=False)
    b: BTable = field(repr=False)
    W: Tuple[sp.csr_matrix, ...] = field(repr=False)
    L: Tuple[sp.csr_matrix, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.symbol.n

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def degrees(self) -> np.ndarray:
        return np.repeat(np.arange(self.level + 1), [self.n ** k for k in range(self.level + 1)])

    @property
    def interior_degree(self) -> int:
        """Default degree for residual checks: m - deg f - 1"""
        return max(0, self.level - self.symbol.support_degree - 1)

    @property
    def b_array(self) -> np.ndarray:
        return self.b.as_array()[:self.dim]

    def index(self, w: Word) -> int:
        if len(w) > self.level:
            raise ValidationError(f"word {w} longer than level {self.level}", field=str(w))
        return basis_index(self.n, w)

    def degree_mask(self, d: int, mult: int = 1) -> np.ndarray:
        mask = self.degrees <= d
        return np.repeat(mask, mult) if mult > 1 else mask

    def vacuum(self) -> np.ndarray:
        return self.basis_vector(EMPTY)

    def basis_vector(self, w: Word) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[self.index(w)] = 1.0
        return e

    def word_operator(self, w: Word, side: str = 'left') -> sp.csr_matrix:
        """W_w = W_{i1}...W_{ik}, or the same product of right shifts"""
        ops = self._side(side)
        result = sp.identity(self.dim, format='csr')
        for x in w:
            result = result @ ops[x]
        return result.tocsr()

    def reversal_unitary(self) -> sp.csr_matrix:
        """Permutation matrix U e_alpha = e_{reverse(alpha)}"""
        rows = np.array([self.index(w.reverse()) for w in self.basis])
        cols = np.arange(self.dim)
        return sp.csr_matrix((np.ones(self.dim), (rows, cols)), shape=(self.dim, self.dim))

    def weight_histogram(self, i: int, bins: int = 10) -> Dict[str, List[float]]:
        weights = self.W[i].data
        counts, edges = np.histogram(weights, bins=bins)
        return {'counts': counts.tolist(), 'edges': edges.tolist()}

    def _side(self, side: str) -> Tuple[sp.csr_matrix, ...]:
        if side == 'left':
            return self.W
        if side == 'right':
            return self.L
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}", field="side")


def build_fock(f: FreeSymbol, m: int, dim_cap: Optional[int] = None) -> TruncatedFock:
    """Assemble W_i e_a = sqrt(b_a / b_{g_i a}) e_{g_i a} and L_i e_a = sqrt(b_a / b_{a g_i}) e_{a g_i}"""
    if m < 1:
        raise ValidationError(f"level must be >= 1, got {m}", field="level")
    n = f.n
    dim = word_count(n, m)
    cap = dim_cap or Config.DIM_CAP
    if dim > cap:
        raise DimensionCapError(f"Fock dimension {dim} at level {m} exceeds cap {cap}")

    b = compute_b(f, m + 1)
    b_all = b.as_array()
    basis = tuple(enumerate_words(n, m))

    w_parts: List[List[list]] = [[[], [], []] for _ in range(n)]
    l_parts: List[List[list]] = [[[], [], []] for _ in range(n)]
    for k in range(m):
        count = n ** k
        p = np.arange(count)
        cols = _offset(n, k) + p
        for i in range(n):
            left_rows = _offset(n, k + 1) + i * count + p
            right_rows = _offset(n, k + 1) + p * n + i
            for parts, rows in ((w_parts[i], left_rows), (l_parts[i], right_rows)):
                parts[0].append(rows)
                parts[1].append(cols)
                parts[2].append(np.sqrt(b_all[cols] / b_all[rows]))

    def assemble(parts) -> sp.csr_matrix:
        rows, cols, data = (np.concatenate(x) for x in parts)
        return sp.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()

    W = tuple(assemble(parts) for parts in w_parts)
    L = tuple(assemble(parts) for parts in l_parts)
    logger.info(f"🧮 Built Fock truncation: n={n}, level={m}, dim={dim}")
    return TruncatedFock(f, m, basis, b, W, L)


def defect_residual(F: TruncatedFock) -> float:
    """max over |a| <= m - deg f of |<(I - sum a_b W_b W_b*) e_a, e_a> - delta_{a, eps}|"""
    diag = np.ones(F.dim)
    for w, a in F.symbol.coeffs.items():
        Wb = F.word_operator(w)
        diag -= a * np.asarray(abs(Wb).power(2).sum(axis=1)).ravel()
    target = np.zeros(F.dim)
    target[0] = 1.0
    mask = F.degree_mask(max(0, F.level - F.symbol.support_degree))
    return float(np.max(np.abs(diag - target)[mask]))


def _check_words(F: TruncatedFock, c: Mapping[Word, complex]) -> None:
    for w in c:
        w.check_alphabet(F.n)
        if len(w) > F.level:
            raise ValidationError(f"coefficient word {w} longer than level {F.level}", field=str(w))


def poly_operator(F: TruncatedFock, c: Mapping[Word, complex], side: str = 'left') -> sp.csr_matrix:
    """sum c_b W_b (left) or sum c_{reverse(b)} L_b (right) as a sparse matrix"""
    _check_words(F, c)
    total = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for w, value in c.items():
        if value == 0:
            continue
        target = w if side == 'left' else w.reverse()
        total = total + complex(value) * F.word_operator(target, side)
    return total.tocsr()


def eval_poly(F: TruncatedFock, c: Mapping[Word, complex], side: str = 'left') -> np.ndarray:
    return poly_operator(F, c, side).toarray()


def sparse_max_abs(A) -> float:
    A = sp.csr_matrix(A)
    return float(np.max(np.abs(A.data))) if A.nnz else 0.0


def interior_norm(F: TruncatedFock, A, d: int, mult: int = 1) -> float:
    """Largest singular value of A compressed to span{e_a : |a| <= d} (tensored with C^mult)"""
    if d > F.level:
        raise ValidationError(f"interior degree {d} exceeds level {F.level}", field="degree")
    idx = np.flatnonzero(F.degree_mask(d, mult))
    if idx.size == 0:
        return 0.0
    if sp.issparse(A):
        block = sp.csr_matrix(A)[idx][:, idx].toarray()
    else:
        block = np.asarray(A)[np.ix_(idx, idx)]
    return float(scipy.linalg.svdvals(block)[0])


def hol_metric(F: TruncatedFock, c1: Mapping[Word, complex], c2: Mapping[Word, complex],
               radii: Sequence[float]) -> float:
    """sum_j 2^-j d_j / (1 + d_j) with d_j = ||(phi - psi)(r_j W)||"""
    radii = list(radii)
    if not radii:
        raise ValidationError("at least one radius is required", field="radii")
    if any(not 0 < r < 1 for r in radii):
        raise ValidationError(f"radii must lie in (0, 1), got {radii}", field="radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValidationError("radii must be strictly increasing", field="radii")
    words = set(c1) | set(c2)
    diff = {w: complex(c1.get(w, 0)) - complex(c2.get(w, 0)) for w in words}
    total = 0.0
    for j, r in enumerate(radii, start=1):
        scaled = {w: value * r ** len(w) for w, value in diff.items()}
        d = interior_norm(F, poly_operator(F, scaled), F.level)
        total += 2.0 ** -j * d / (1.0 + d)
    return total


@dataclass
class WienerReport:
    """Per-degree coefficient bounds for a contractive multiplier"""
    norm_bound: float
    computed_norm: float
    constant_term: complex
    lhs: List[float]
    margins: List[float]

    @property
    def holds(self) -> bool:
        return all(margin >= -1e-12 for margin in self.margins)


def wiener_check(F: TruncatedFock, c: Mapping[Word, complex], norm_ub: float) -> WienerReport:
    """After scaling by 1/normUB: (sum_{|b|=k} |c_b|^2 / b_b)^{1/2} <= 1 - |c_0|^2"""
    if norm_ub <= 0:
        raise ValidationError(f"norm bound must be positive, got {norm_ub}", field="normUB")
    _check_words(F, c)
    computed = interior_norm(F, poly_operator(F, c), F.level)
    if computed > norm_ub * (1 + 1e-9):
        logger.warning(f"⚠️ normUB {norm_ub:.6g} is below the computed interior norm {computed:.6g}")
    scaled = {w: complex(v) / norm_ub for w, v in c.items()}
    c0 = scaled.get(EMPTY, 0j)
    degree = max((len(w) for w in scaled), default=0)
    sums = [0.0] * (degree + 1)
    for w, value in scaled.items():
        sums[len(w)] += abs(value) ** 2 / F.b[w]
    lhs = [float(np.sqrt(s)) for s in sums[1:]]
    bound = 1.0 - abs(c0) ** 2
    return WienerReport(norm_ub, computed, c0, lhs, [bound - x for x in lhs])


def bohr_check(F: TruncatedFock, c: Mapping[Word, complex], lam: Sequence[complex],
               norm_ub: float) -> float:
    """normUB - sum |c_b| |lambda_b|, for lambda with 3 lambda in the closed scalar domain"""
    if norm_ub <= 0:
        raise ValidationError(f"norm bound must be positive, got {norm_ub}", field="normUB")
    _check_words(F, c)
    lam = np.asarray(lam, dtype=complex)
    g = gauge(F.symbol, 3 * lam)
    if g > 1 + Config.BOUNDARY_BAND:
        raise NotInDomainError(f"3*lambda has gauge {g:.6g} > 1; point is outside D_f,1/3", field="point")
    total = sum(abs(complex(v)) * abs(word_value(w, lam)) for w, v in c.items())
    return float(norm_ub - total)


def similarity_intertwiner(F: TruncatedFock, other: TruncatedFock) -> np.ndarray:
    """Diagonal X = diag(sqrt(b_a / b'_a)) with X W_i = W'_i X"""
    if F.n != other.n or F.level != other.level:
        raise ValidationError("truncations must share n and level", field="level")
    return np.sqrt(F.b_array / other.b_array)


def intertwiner_residual(F: TruncatedFock, other: TruncatedFock) -> float:
    x = sp.diags(similarity_intertwiner(F, other))
    worst = 0.0
    for Wi, Vi in zip(F.W, other.W):
        delta = (x @ Wi - Vi @ x).toarray()
        worst = max(worst, float(np.max(np.abs(delta))) if delta.size else 0.0)
    return worst
