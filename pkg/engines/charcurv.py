#!/usr/bin/env python3
"""
Characteristic Function and Curvature Engine
Scalar-point and truncated multi-analytic characteristic functions, the
factorization I - Theta Theta* = K K*, and the curvature / *-curvature
estimators for polynomial symbols.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from config import Config
from core.errors import NotInDomainError, SingularKernelError, ValidationError
from core.fock import TruncatedFock
from core.symbol import FreeSymbol, compute_b, gamma_constant, word_value
from core.words import Word
from .poisson import build_poisson
from .tuples import (OperatorTuple, classify, membership, phi_apply, phi_star_apply,
                     reconstruction_operator)

logger = logging.getLogger(__name__)


def _psd_sqrt(A: np.ndarray) -> np.ndarray:
    A = (A + A.conj().T) / 2
    evals, evecs = scipy.linalg.eigh(A)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


@dataclass
class CharData:
    """Row operator C(T) = [sqrt(a_{rev alpha}) T_{rev alpha}] over alpha in reverse(supp f), and its defects"""
    index_words: List[Word]
    C: np.ndarray = field(repr=False)
    delta_c: np.ndarray = field(repr=False)
    delta_c_star: np.ndarray = field(repr=False)
    rank_c: int
    rank_c_star: int

    @property
    def N(self) -> int:
        return len(self.index_words)

    def intertwining_residual(self) -> float:
        """||Delta_C C - C Delta_{C*}||"""
        return float(np.max(np.abs(self.delta_c @ self.C - self.C @ self.delta_c_star)))


def _rank(D: np.ndarray) -> int:
    sing = scipy.linalg.svdvals(D) if D.size else np.zeros(0)
    if not sing.size or sing[0] == 0:
        return 0
    return int(np.sum(sing > Config.RANK_CUT * sing[0]))


def char_data(f: FreeSymbol, T: OperatorTuple) -> CharData:
    mem = membership(f, T)
    if not mem.member:
        raise NotInDomainError(f"tuple is not in D_f: lambda_min = {mem.defect_min_eig:.6g}", field="tuple")
    index_words = sorted(w.reverse() for w in f.support)
    C = np.hstack([np.sqrt(f[a.reverse()]) * T.word_product(a.reverse()) for a in index_words])
    delta_c = _psd_sqrt(np.eye(T.d) - C @ C.conj().T)
    delta_c_star = _psd_sqrt(np.eye(C.shape[1]) - C.conj().T @ C)
    return CharData(index_words, C, delta_c, delta_c_star, _rank(delta_c), _rank(delta_c_star))


# ===== SCALAR POINTS =====

def _resolvent(f: FreeSymbol, T: OperatorTuple, z: np.ndarray) -> np.ndarray:
    A = np.eye(T.d, dtype=complex)
    for w, a in f.coeffs.items():
        A -= a * word_value(w, z) * T.word_product(w).conj().T
    try:
        inverse = scipy.linalg.inv(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularKernelError(f"resolvent is singular at z={z.tolist()}") from exc
    if not np.all(np.isfinite(inverse)) or np.linalg.cond(A) > 1 / np.finfo(float).eps:
        raise SingularKernelError(f"resolvent is singular at z={z.tolist()}")
    return inverse


def _row(f: FreeSymbol, data: CharData, z: np.ndarray, d: int) -> np.ndarray:
    """[sqrt(a) z_alpha I] in the column order of C(T)"""
    return np.hstack([np.sqrt(f[a.reverse()]) * word_value(a.reverse(), z) * np.eye(d)
                      for a in data.index_words])


def char_point(f: FreeSymbol, T: OperatorTuple, z: Sequence[complex],
               data: Optional[CharData] = None) -> np.ndarray:
    """Theta(z) = -C + Delta_C (I - sum a z_alpha T_alpha*)^{-1} [sqrt(a) z_alpha I] Delta_{C*}"""
    z = np.asarray(z, dtype=complex)
    if z.shape != (f.n,):
        raise ValidationError(f"point needs {f.n} coordinates", field="z")
    data = data or char_data(f, T)
    R = _resolvent(f, T, z)
    return -data.C + data.delta_c @ R @ _row(f, data, z, T.d) @ data.delta_c_star


def char_point_residual(f: FreeSymbol, T: OperatorTuple, z: Sequence[complex]) -> float:
    """||(I - Theta Theta*) - (1 - sum a |z_alpha|^2) Delta_C R R* Delta_C||"""
    z = np.asarray(z, dtype=complex)
    data = char_data(f, T)
    theta = char_point(f, T, z, data)
    R = _resolvent(f, T, z)
    scale = 1.0 - sum(a * abs(word_value(w, z)) ** 2 for w, a in f.coeffs.items())
    rhs = scale * data.delta_c @ R @ R.conj().T @ data.delta_c
    return float(np.linalg.norm(np.eye(T.d) - theta @ theta.conj().T - rhs, 2))


# ===== TRUNCATED MULTI-ANALYTIC OPERATOR =====

def char_operator(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                  data: Optional[CharData] = None) -> np.ndarray:
    """Theta on Fock (x) C^{dN} -> Fock (x) C^d"""
    data = data or char_data(f, T)
    d, dN = T.d, data.C.shape[1]
    eye_fock = sp.identity(F.dim, format='csr')
    row = sp.csr_matrix((F.dim * d, F.dim * dN), dtype=complex)
    for j, a in enumerate(data.index_words):
        selector = sp.csr_matrix((np.ones(d), (np.arange(d), j * d + np.arange(d))), shape=(d, dN))
        row = row + np.sqrt(f[a.reverse()]) * sp.kron(F.word_operator(a, 'right'), selector, format='csr')
    rhs = (row @ sp.kron(eye_fock, sp.csr_matrix(data.delta_c_star), format='csr')).toarray()
    M = (sp.identity(F.dim * d, dtype=complex, format='csr') - reconstruction_operator(f, T, F)).tocsr()
    solved = scipy.sparse.linalg.spsolve_triangular(M, rhs, lower=True, unit_diagonal=True)
    theta = sp.kron(eye_fock, sp.csr_matrix(data.delta_c), format='csr') @ solved
    theta -= sp.kron(eye_fock, sp.csr_matrix(data.C), format='csr').toarray()
    logger.debug(f"characteristic operator of shape {theta.shape}")
    return theta


def char_multianalytic_residual(F: TruncatedFock, theta: np.ndarray, d: int, dN: int,
                                degree: Optional[int] = None) -> float:
    """max_i ||Theta (W_i (x) I) - (W_i (x) I) Theta|| on degrees <= degree"""
    degree = F.interior_degree if degree is None else degree
    rows = F.degree_mask(degree, d)
    cols = F.degree_mask(degree, dN)
    worst = 0.0
    for Wi in F.W:
        left = (sp.kron(Wi, sp.identity(dN), format='csr').T @ theta.T).T
        right = sp.kron(Wi, sp.identity(d), format='csr') @ theta
        worst = max(worst, float(np.linalg.norm((left - right)[np.ix_(rows, cols)], 2)))
    return worst


def factorization_residual(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                           theta: Optional[np.ndarray] = None) -> float:
    """||(I - Theta Theta*) - K K*|| on degrees <= interior degree"""
    theta = char_operator(f, T, F) if theta is None else theta
    K = build_poisson(f, T, F).full_kernel()
    size = theta.shape[0]
    lhs = np.eye(size) - theta @ theta.conj().T
    rhs = K @ K.conj().T if K.size else np.zeros((size, size))
    mask = F.degree_mask(F.interior_degree, T.d)
    return float(np.linalg.norm((lhs - rhs)[np.ix_(mask, mask)], 2))


# ===== CURVATURE =====

class Branch(Enum):
    """Which closed form the normalizing growth rate selects"""
    ABOVE = "above"
    UNIT = "unit"
    BELOW = "below"


@dataclass
class CurvatureTrace:
    numerators: List[float]
    denominators: List[float]
    ratios: List[float]
    value: float
    spread: float
    converged: bool
    rate: float
    branch: Branch
    alternate: Optional[Dict[str, object]] = None
    bound_trace: float = 0.0
    bound_rank: int = 0
    bound_holds: bool = True


def _plateau(values: Sequence[float]):
    """(converged, mean, spread) of the trailing window"""
    cfg = Config.get_plateau_config()
    window = int(cfg['window'])
    if len(values) < window:
        return False, values[-1], float('inf')
    tail = values[-window:]
    spread = max(tail) - min(tail)
    mean = float(np.mean(tail))
    ok = spread <= cfg['rel_tol'] * abs(mean) + cfg['abs_tol']
    return ok, tail[-1], spread


def _branch(rate: float) -> Branch:
    if abs(rate - 1.0) <= Config.BRANCH_BAND:
        return Branch.UNIT
    return Branch.ABOVE if rate > 1.0 else Branch.BELOW


def _require_polynomial(p: FreeSymbol, T: OperatorTuple) -> np.ndarray:
    if p.truncation_degree is not None:
        raise ValidationError("curvature is defined for polynomial symbols only; "
                              "this symbol is a truncated series", field="symbol")
    mem = membership(p, T)
    if not mem.member:
        raise NotInDomainError(f"tuple is not in D_p: lambda_min = {mem.defect_min_eig:.6g}", field="tuple")
    return np.eye(T.d) - phi_apply(p, T, np.eye(T.d))


def _ratio_run(p: FreeSymbol, T: OperatorTuple, rate: float, k_max: int, label: str, warn: bool = True):
    numerators, denominators, ratios = [], [], []
    Q = np.eye(T.d, dtype=complex)
    power, denominator = 1.0, 0.0
    converged = False
    for _ in range(k_max):
        Q = phi_apply(p, T, Q)
        denominator += power
        power *= rate
        numerators.append(float(T.d - np.trace(Q).real))
        denominators.append(denominator)
        ratios.append(numerators[-1] / denominator)
        converged, value, spread = _plateau(ratios)
        if converged:
            break
    else:
        if warn:
            logger.warning(f"⚠️ {label}: no plateau within k_max={k_max}")
    converged, value, spread = _plateau(ratios)
    return numerators, denominators, ratios, value, spread, converged


def _defect_series(p: FreeSymbol, T: OperatorTuple, defect: np.ndarray, k_max: int) -> Dict[str, object]:
    """trace Phi^k(I - Phi(I)), the unit-rate closed form"""
    X = defect.astype(complex)
    series = [float(np.trace(X).real)]
    converged = False
    for _ in range(k_max - 1):
        X = phi_apply(p, T, X)
        series.append(float(np.trace(X).real))
        converged, _, _ = _plateau(series)
        if converged:
            break
    converged, value, spread = _plateau(series)
    return {'form': 'trace Phi^k(I - Phi(I))', 'sequence': series, 'value': value,
            'spread': spread, 'converged': converged}


def curvature(p: FreeSymbol, T: OperatorTuple, k_max: Optional[int] = None) -> CurvatureTrace:
    """trace(I - Phi^k(I)) / sum_{j<k} gamma^j, with the unit-rate form when gamma = 1"""
    k_max = k_max or Config.K_MAX
    defect = _require_polynomial(p, T)
    gamma = gamma_constant(p, compute_b(p, p.support_degree))
    branch = _branch(gamma)
    nums, dens, ratios, value, spread, converged = _ratio_run(
        p, T, gamma, k_max, "curvature", warn=branch is not Branch.UNIT)
    alternate = None
    if branch is Branch.UNIT:
        alternate = _defect_series(p, T, defect, k_max)
        alternate['ratio_value'] = value
        value, spread, converged = alternate['value'], alternate['spread'], alternate['converged']
        logger.debug(f"gamma={gamma:.12g} is in the unit band; reporting both forms")

    trace_bound = float(np.trace(defect).real)
    rank_bound = _rank(_psd_sqrt(defect))
    holds = value <= trace_bound + 1e-10 and trace_bound <= rank_bound + 1e-10
    return CurvatureTrace(nums, dens, ratios, float(value), float(spread), converged, gamma,
                          branch, alternate, trace_bound, rank_bound, holds)


def star_curvature(p: FreeSymbol, T: OperatorTuple, k_max: Optional[int] = None) -> CurvatureTrace:
    """Same ratios with ||Phi*(I)|| as the growth rate"""
    k_max = k_max or Config.K_MAX
    defect = _require_polynomial(p, T)
    star = phi_star_apply(p, T, np.eye(T.d))
    rate = float(np.max(np.abs(scipy.linalg.eigvalsh((star + star.conj().T) / 2))))
    branch = _branch(rate)
    nums, dens, ratios, value, spread, converged = _ratio_run(p, T, rate, k_max, "*-curvature")
    alternate = None
    if branch is Branch.UNIT:
        side = Branch.ABOVE if rate >= 1.0 else Branch.BELOW
        unit = _ratio_run(p, T, 1.0, k_max, "*-curvature (unit branch)")
        alternate = {'branches': [side.value, Branch.UNIT.value], 'unit_ratios': unit[2],
                     'unit_value': unit[3], 'unit_converged': unit[5]}
        logger.warning(f"⚠️ ||Phi*(I)|| = {rate:.12g} is within the branch band; both branches reported")
    trace_bound = float(np.trace(defect).real)
    return CurvatureTrace(nums, dens, ratios, float(value), float(spread), converged, rate,
                          branch, alternate, trace_bound, _rank(_psd_sqrt(defect)), True)


def trace_inequality_check(p: FreeSymbol, T: OperatorTuple, X: np.ndarray) -> Dict[str, float]:
    """trace Phi(X) <= ||Phi*(I)|| trace X <= gamma trace X for X >= 0"""
    X = np.asarray(X, dtype=complex)
    lhs = float(np.trace(phi_apply(p, T, X)).real)
    star = phi_star_apply(p, T, np.eye(T.d))
    s = float(np.max(np.abs(scipy.linalg.eigvalsh((star + star.conj().T) / 2))))
    gamma = gamma_constant(p, compute_b(p, p.support_degree))
    tr = float(np.trace(X).real)
    return {'trace_phi': lhs, 'star_bound': s * tr, 'gamma_bound': gamma * tr,
            'holds': lhs <= s * tr * (1 + 1e-10) + 1e-14 and s <= gamma * (1 + 1e-10)}


@dataclass
class EllipsoidReport:
    weights: List[float]
    curvature: CurvatureTrace = field(repr=False)
    star_curvature: CurvatureTrace = field(repr=False)
    defect_rank: int
    pure: bool
    model_candidate: bool


def ellipsoid_report(a: Sequence[float], T: OperatorTuple, k_max: Optional[int] = None) -> EllipsoidReport:
    """Curvatures on the ellipsoid p = sum a_i X_i; flags pure tuples with curvature equal to defect rank"""
    p = FreeSymbol.linear(list(a))
    curv = curvature(p, T, k_max)
    star = star_curvature(p, T, k_max)
    rank = curv.bound_rank
    pure = classify(p, T, k_max).pure
    candidate = pure and abs(curv.value - rank) <= 1e-3
    return EllipsoidReport(list(a), curv, star, rank, pure, candidate)
