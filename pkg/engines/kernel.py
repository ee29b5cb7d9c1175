#!/usr/bin/env python3
"""
Scalar Point Engine
Scalar points of D_f: gauge and classification, eigenvectors z_lambda, the
reproducing kernel K_f, the symmetric weighted Fock basis, Pick-matrix
interpolation, the Schur-Caratheodory criterion and the corona lower bound.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp

from config import Config
from core.errors import NotInDomainError, SingularKernelError, ValidationError
from core.fock import TruncatedFock, basis_index, interior_norm, poly_operator
from core.symbol import BTable, FreeSymbol, gauge, word_value
from core.words import Word, degree_class, multidegrees, word_count

logger = logging.getLogger(__name__)


class PointStatus(Enum):
    """Position of a scalar point relative to the closed domain"""
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass
class DomainPoint:
    lam: np.ndarray
    gauge: float
    status: PointStatus
    band: float

    @property
    def interior(self) -> bool:
        return self.status is PointStatus.INTERIOR


def point_in_domain(f: FreeSymbol, lam: Sequence[complex]) -> DomainPoint:
    """Classify lambda by sum a_alpha |lambda_alpha|^2 against 1 with a +-band"""
    lam = np.asarray(lam, dtype=complex)
    g = gauge(f, lam)
    band = Config.BOUNDARY_BAND
    if g < 1 - band:
        status = PointStatus.INTERIOR
    elif g <= 1 + band:
        status = PointStatus.BOUNDARY
    else:
        status = PointStatus.EXTERIOR
    return DomainPoint(lam, g, status, band)


def random_interior_points(f: FreeSymbol, count: int, rng: np.random.Generator,
                           max_gauge: float = 0.9) -> List[np.ndarray]:
    """Random complex directions rescaled so the gauge is uniform on (0.05, max_gauge)"""
    if not 0 < max_gauge < 1:
        raise ValidationError(f"max_gauge must lie in (0, 1), got {max_gauge}", field="max_gauge")
    points = []
    for _ in range(count):
        direction = rng.standard_normal(f.n) + 1j * rng.standard_normal(f.n)
        target = rng.uniform(0.05, max_gauge)

        def excess(t: float) -> float:
            return gauge(f, t * direction) - target

        upper = 1.0
        while excess(upper) < 0:
            upper *= 2
        t = scipy.optimize.brentq(excess, 0.0, upper, xtol=1e-15)
        points.append(t * direction)
    return points


def _require_interior(f: FreeSymbol, lam: Sequence[complex], name: str = "point") -> DomainPoint:
    point = point_in_domain(f, lam)
    if not point.interior:
        raise NotInDomainError(f"{np.round(point.lam, 12).tolist()} has gauge {point.gauge:.12g}, "
                               f"not an interior point", field=name)
    return point


# ===== EIGENVECTORS AND KERNEL =====

@dataclass
class ZVector:
    """Truncated z_lambda = sum sqrt(b_beta) conj(lambda_beta) e_beta"""
    vector: np.ndarray = field(repr=False)
    norm_sq: float
    closed_norm_sq: float
    tail_bound: float
    eigen_tail_bound: float


def z_vector(f: FreeSymbol, F: TruncatedFock, lam: Sequence[complex]) -> ZVector:
    point = _require_interior(f, lam)
    lam = point.lam
    g = point.gauge
    values = np.array([np.conj(word_value(w, lam)) for w in F.basis])
    vector = np.sqrt(F.b_array) * values
    N = f.support_degree
    closed = 1.0 / (1.0 - g)
    tail = g ** (F.level // N + 1) / (1.0 - g)
    top = math.sqrt(g ** math.ceil(F.level / N) / (1.0 - g))
    eigen_tail = float(np.max(np.abs(lam))) * top
    return ZVector(vector, float(np.vdot(vector, vector).real), closed, tail, eigen_tail)


def eigen_residual(F: TruncatedFock, z: np.ndarray, lam: Sequence[complex]) -> float:
    """max_i ||W_i* z - conj(lambda_i) z|| / ||z||"""
    lam = np.asarray(lam, dtype=complex)
    norm = np.linalg.norm(z)
    return max(float(np.linalg.norm(Wi.conj().T @ z - np.conj(lam[i]) * z)) / norm
               for i, Wi in enumerate(F.W))


def kernel_value(f: FreeSymbol, mu: Sequence[complex], lam: Sequence[complex]) -> complex:
    """K_f(mu, lambda) = 1 / (1 - sum a_alpha mu_alpha conj(lambda_alpha))"""
    mu = _require_interior(f, mu, "mu").lam
    lam = _require_interior(f, lam, "lambda").lam
    s = sum(a * word_value(w, mu) * np.conj(word_value(w, lam)) for w, a in f.coeffs.items())
    denominator = 1.0 - s
    if abs(denominator) <= 16 * np.finfo(float).eps:
        raise SingularKernelError(f"kernel denominator vanishes at mu={mu.tolist()}, lambda={lam.tolist()}")
    return complex(1.0 / denominator)


def kernel_series(f: FreeSymbol, F: TruncatedFock, mu: Sequence[complex],
                  lam: Sequence[complex]) -> Tuple[complex, float]:
    """<z_lambda, z_mu> on the truncation and the Cauchy-Schwarz tail sqrt(tail_mu tail_lambda)"""
    z_mu = z_vector(f, F, mu)
    z_lam = z_vector(f, F, lam)
    value = complex(np.vdot(z_mu.vector, z_lam.vector))
    return value, math.sqrt(z_mu.tail_bound * z_lam.tail_bound)


def kernel_gram(f: FreeSymbol, points: Sequence[Sequence[complex]]) -> np.ndarray:
    """[K_f(lambda_i, lambda_j)]"""
    k = len(points)
    G = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            G[i, j] = kernel_value(f, points[i], points[j])
    return G


def point_value(c: Mapping[Word, complex], lam: Sequence[complex]) -> complex:
    return complex(sum(complex(v) * word_value(w, lam) for w, v in c.items()))


def multiplier_eigen_residual(f: FreeSymbol, F: TruncatedFock, c: Mapping[Word, complex],
                              lam: Sequence[complex]) -> float:
    """||phi(W)* z_lambda - conj(phi(lambda)) z_lambda|| / ||z_lambda|| on degrees <= m - deg phi"""
    z = z_vector(f, F, lam).vector
    degree = max((len(w) for w in c), default=0)
    rows = F.degree_mask(F.level - degree)
    diff = poly_operator(F, c).conj().T @ z - np.conj(point_value(c, lam)) * z
    return float(np.linalg.norm(diff[rows]) / np.linalg.norm(z))


def right_spectrum_witness(f: FreeSymbol, F: TruncatedFock, lam: Sequence[complex]) -> Dict[str, float]:
    """Rayleigh quotient of sum_i (lambda_i - W_i)(lambda_i - W_i)* at z_lambda, and its smallest eigenvalue"""
    lam = _require_interior(f, lam).lam
    z = z_vector(f, F, lam).vector
    I = sp.identity(F.dim, dtype=complex, format='csr')
    M = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for i, Wi in enumerate(F.W):
        A = lam[i] * I - Wi
        M = M + A @ A.conj().T
    rayleigh = float(np.vdot(z, M @ z).real / np.vdot(z, z).real)
    min_eig = float(scipy.linalg.eigvalsh(M.toarray())[0])
    return {'rayleigh': rayleigh, 'min_eig': min_eig}


# ===== SYMMETRIC FOCK SPACE =====

@dataclass
class SymmetricBasisEntry:
    """w^k = (1/gamma_k) sum_{alpha in class k} sqrt(b_alpha) e_alpha"""
    k: Tuple[int, ...]
    gamma_k: float
    w_k: np.ndarray = field(repr=False)


def symmetric_basis(f: FreeSymbol, b: BTable, m: int) -> List[SymmetricBasisEntry]:
    if b.degree < m:
        raise ValidationError(f"b-table must cover degree {m}", field="degree")
    dim = word_count(f.n, m)
    entries = []
    for k in multidegrees(f.n, m):
        members = degree_class(k).members
        gamma_k = float(sum(b[w] for w in members))
        vec = np.zeros(dim, dtype=complex)
        for w in members:
            vec[basis_index(f.n, w)] = math.sqrt(b[w])
        entries.append(SymmetricBasisEntry(k, gamma_k, vec / gamma_k))
    return entries


def symmetric_z_residual(entries: Sequence[SymmetricBasisEntry], z: np.ndarray,
                         lam: Sequence[complex]) -> float:
    """max |z_lambda - sum_k conj(lambda^k) gamma_k w^k|"""
    lam = np.asarray(lam, dtype=complex)
    total = np.zeros_like(z)
    for entry in entries:
        total += np.conj(np.prod(lam ** np.array(entry.k))) * entry.gamma_k * entry.w_k
    return float(np.max(np.abs(total - z)))


def symmetric_compression_residual(F: TruncatedFock, entries: Sequence[SymmetricBasisEntry],
                                   lam: Sequence[complex]) -> float:
    """max_i ||L_i* z - conj(lambda_i) z|| / ||z|| with L_i the compression of W_i to span{w^k}"""
    Q = np.column_stack([e.w_k * math.sqrt(e.gamma_k) for e in entries])
    z = Q.conj().T @ z_vector(F.symbol, F, lam).vector
    lam = np.asarray(lam, dtype=complex)
    worst = 0.0
    for i, Wi in enumerate(F.W):
        Li = Q.conj().T @ (Wi @ Q)
        worst = max(worst, float(np.linalg.norm(Li.conj().T @ z - np.conj(lam[i]) * z) / np.linalg.norm(z)))
    return worst


# ===== INTERPOLATION =====

@dataclass
class PickProblem:
    """k distinct interior nodes with q x q targets"""
    nodes: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.nodes = np.atleast_2d(np.asarray(self.nodes, dtype=complex))
        targets = np.asarray(self.targets, dtype=complex)
        if targets.ndim == 1:
            targets = targets[:, None, None]
        self.targets = targets
        k = self.nodes.shape[0]
        if targets.ndim != 3 or targets.shape[0] != k or targets.shape[1] != targets.shape[2]:
            raise ValidationError(f"need {k} square targets of a common size, got shape {targets.shape}",
                                  field="targets")
        sep = Config.NODE_SEPARATION
        for i in range(k):
            for j in range(i + 1, k):
                if np.linalg.norm(self.nodes[i] - self.nodes[j]) <= sep:
                    raise ValidationError(f"nodes {i} and {j} are closer than {sep:g}", field="nodes")

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def q(self) -> int:
        return self.targets.shape[1]


@dataclass
class PickMatrix:
    matrix: np.ndarray = field(repr=False)
    asymmetry: float


def pick_matrix(f: FreeSymbol, P: PickProblem) -> PickMatrix:
    """Blocks (I - A_i A_j*) K_f(lambda_i, lambda_j), symmetrized"""
    if P.nodes.shape[1] != f.n:
        raise ValidationError(f"nodes need {f.n} coordinates", field="nodes")
    k, q = P.size, P.q
    M = np.zeros((k * q, k * q), dtype=complex)
    eye = np.eye(q)
    for i in range(k):
        for j in range(k):
            kij = kernel_value(f, P.nodes[i], P.nodes[j])
            M[i * q:(i + 1) * q, j * q:(j + 1) * q] = (eye - P.targets[i] @ P.targets[j].conj().T) * kij
    asymmetry = float(np.max(np.abs(M - M.conj().T)))
    return PickMatrix((M + M.conj().T) / 2, asymmetry)


@dataclass
class PickVerdict:
    feasible: bool
    min_eig: float
    tolerance: float
    pick: PickMatrix = field(repr=False)


def pick_feasible(f: FreeSymbol, P: PickProblem) -> PickVerdict:
    """feasible iff lambda_min >= -PSD_REL_TOL (1 + trace) / size"""
    pick = pick_matrix(f, P)
    size = pick.matrix.shape[0]
    min_eig = float(scipy.linalg.eigvalsh(pick.matrix)[0])
    tolerance = Config.PSD_REL_TOL * (1 + float(np.trace(pick.matrix).real)) / size
    feasible = min_eig >= -tolerance
    logger.info(f"📐 Pick problem with {P.size} nodes: min_eig={min_eig:.3e}, feasible={feasible}")
    return PickVerdict(feasible, min_eig, tolerance, pick)


def schur_caratheodory_value(F: TruncatedFock, c: Mapping[Word, complex], m_sc: int) -> float:
    """||P_{<= m_sc} p(L)|_{<= m_sc}|| with p(L) = sum c_alpha L_alpha"""
    if m_sc > F.level:
        raise ValidationError(f"degree {m_sc} exceeds level {F.level}", field="degree")
    if any(len(w) > m_sc for w in c):
        raise ValidationError(f"coefficient degree exceeds {m_sc}", field="coeffs")
    total = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for w, v in c.items():
        total = total + complex(v) * F.word_operator(w.check_alphabet(F.n), 'right')
    return interior_norm(F, total, m_sc)


def corona_delta(F: TruncatedFock, phis: Sequence[Mapping[Word, complex]],
                 d: Optional[int] = None) -> float:
    """lambda_min of sum phi_i(W) phi_i(W)* compressed to degrees <= d"""
    if not phis:
        raise ValidationError("at least one function is required", field="phis")
    d = F.interior_degree if d is None else d
    total = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for c in phis:
        A = poly_operator(F, c)
        total = total + A @ A.conj().T
    idx = np.flatnonzero(F.degree_mask(d))
    return float(scipy.linalg.eigvalsh(total[idx][:, idx].toarray())[0])
