#!/usr/bin/env python3
"""
Poisson Kernel Engine
The truncated Poisson kernel K_{f,T}, its defining identities, the Poisson
transform on W_alpha W_beta*, and the Beurling-type factorization of
Phi-subharmonic positive operators.

Row blocks of K are indexed by the graded Fock basis; rows are ordered
(fock index, defect coordinate), matching kron(Fock, C^{d'}).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from config import Config
from core.errors import NotInDomainError, SubharmonicityError, ValidationError
from core.fock import TruncatedFock, sparse_max_abs
from core.symbol import FreeSymbol
from core.words import Word
from .tuples import OperatorTuple, membership, phi_apply, phi_power

logger = logging.getLogger(__name__)


@dataclass
class PoissonKernel:
    """K: C^d -> Fock_m (x) C^{d'}, row block alpha = sqrt(b_alpha) V* Delta T_alpha*"""
    K: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    defect_basis: np.ndarray = field(repr=False)
    defect_rank: int
    tail_bound: float
    level: int
    interior_degree: int
    d: int

    def full_kernel(self) -> np.ndarray:
        """(I (x) V) K, the same kernel with values in Fock_m (x) C^d"""
        if not self.defect_rank:
            return np.zeros((0, self.d), dtype=complex)
        fock_dim = self.K.shape[0] // self.defect_rank
        lift = sp.kron(sp.identity(fock_dim), sp.csr_matrix(self.defect_basis), format='csr')
        return lift @ self.K

    @property
    def norm(self) -> float:
        return float(scipy.linalg.svdvals(self.K)[0]) if self.K.size else 0.0


def defect_operator(f: FreeSymbol, T: OperatorTuple) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Delta = (I - Phi(I))^{1/2}, with the eigenbasis of its range and the kept singular values"""
    D2 = np.eye(T.d) - phi_apply(f, T, np.eye(T.d))
    D2 = (D2 + D2.conj().T) / 2
    evals, evecs = scipy.linalg.eigh(D2)
    evals = np.clip(evals, 0.0, None)
    sing = np.sqrt(evals)
    delta = (evecs * sing) @ evecs.conj().T
    top = sing.max() if sing.size else 0.0
    keep = sing > Config.RANK_CUT * top if top > 0 else np.zeros_like(sing, dtype=bool)
    return delta, evecs[:, keep], sing[keep]


def build_poisson(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock) -> PoissonKernel:
    """Stack sqrt(b_alpha) V* Delta T_alpha* over all words of length <= m"""
    mem = membership(f, T)
    if not mem.member:
        raise NotInDomainError(
            f"Poisson kernel needs T in D_f; lambda_min(I - Phi(I)) = {mem.defect_min_eig:.6g}",
            field="tuple")
    delta, basis, sing = defect_operator(f, T)
    rank = basis.shape[1]
    # V* Delta = diag(s) V* on the kept eigenvectors
    head = (basis.conj().T * sing[:, None])
    b = F.b_array
    blocks = [np.sqrt(b[j]) * (head @ T.word_product(w).conj().T) for j, w in enumerate(F.basis)]
    K = np.vstack(blocks) if rank else np.zeros((0, T.d), dtype=complex)
    steps = F.level // f.support_degree + 1
    tail = float(np.linalg.norm(phi_power(f, T, steps), 2))
    logger.debug(f"Poisson kernel: d={T.d}, defect rank={rank}, tail={tail:.3e}")
    return PoissonKernel(K, delta, basis, rank, tail, F.level, F.interior_degree, T.d)


def kk_residual(P: PoissonKernel) -> float:
    """||K*K - I||"""
    return float(np.linalg.norm(P.K.conj().T @ P.K - np.eye(P.d), 2))


def kk_bracket(P: PoissonKernel, f: FreeSymbol, T: OperatorTuple) -> Dict[str, float]:
    """Smallest eigenvalues of K*K - (I - Phi^{j}(I)) and (I - Phi^{m+1}(I)) - K*K, j = floor(m/N)+1"""
    KK = P.K.conj().T @ P.K
    lower = np.eye(P.d) - phi_power(f, T, P.level // f.support_degree + 1)
    upper = np.eye(P.d) - phi_power(f, T, P.level + 1)

    def min_eig(A: np.ndarray) -> float:
        return float(scipy.linalg.eigvalsh((A + A.conj().T) / 2)[0])

    return {'lower_gap': min_eig(KK - lower), 'upper_gap': min_eig(upper - KK)}


def _shift_adjoint(F: TruncatedFock, w: Word, mult: int) -> sp.csr_matrix:
    return sp.kron(F.word_operator(w).conj().T, sp.identity(mult), format='csr')


def intertwine_residual(P: PoissonKernel, F: TruncatedFock, T: OperatorTuple) -> float:
    """max_i ||K T_i* - (W_i* (x) I) K|| on rows of degree <= m - 1"""
    if not P.defect_rank:
        return 0.0
    rows = F.degree_mask(F.level - 1, P.defect_rank)
    worst = 0.0
    for i, Ti in enumerate(T):
        lhs = P.K @ Ti.conj().T
        rhs = _shift_adjoint(F, Word((i,)), P.defect_rank) @ P.K
        worst = max(worst, float(np.linalg.norm((lhs - rhs)[rows], 2)))
    return worst


def poisson_transform(P: PoissonKernel, F: TruncatedFock, alpha: Word, beta: Word) -> np.ndarray:
    """K* (W_alpha W_beta* (x) I) K"""
    if not P.defect_rank:
        return np.zeros((P.d, P.d), dtype=complex)
    left = _shift_adjoint(F, alpha, P.defect_rank) @ P.K
    right = _shift_adjoint(F, beta, P.defect_rank) @ P.K
    return left.conj().T @ right


def transform_residual(P: PoissonKernel, F: TruncatedFock, f: FreeSymbol, T: OperatorTuple,
                       alpha: Word, beta: Word) -> Tuple[float, float]:
    """||K*(W_a W_b* (x) I)K - T_a T_b*|| and its bound ||T_a|| ||T_b|| ||Phi^{floor(m'/N)+1}(I)||"""
    depth = max(len(alpha), len(beta))
    if depth > F.level:
        raise ValidationError(f"words longer than level {F.level}", field="words")
    Ta, Tb = T.word_product(alpha), T.word_product(beta)
    residual = float(np.linalg.norm(poisson_transform(P, F, alpha, beta) - Ta @ Tb.conj().T, 2))
    steps = (F.level - depth) // f.support_degree + 1
    bound = (float(np.linalg.norm(Ta, 2)) * float(np.linalg.norm(Tb, 2))
             * float(np.linalg.norm(phi_power(f, T, steps), 2)))
    return residual, bound


def poisson_transform_at_radius(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                                alpha: Word, beta: Word, r: float) -> np.ndarray:
    """K_{rT}* (W_alpha W_beta* (x) I) K_{rT} for a single radius r in (0, 1)"""
    if not 0 < r < 1:
        raise ValidationError(f"radius must lie in (0, 1), got {r}", field="r")
    rT = T.scaled(r)
    return poisson_transform(build_poisson(f, rT, F), F, alpha, beta)


def defect_expansion_residual(F: TruncatedFock, d: int) -> float:
    """sum_{|beta| <= d} b_beta W_beta P_C W_beta* should act as the identity on degrees <= d"""
    if d > F.level:
        raise ValidationError(f"degree {d} exceeds level {F.level}", field="degree")
    vac = sp.csc_matrix(F.vacuum().reshape(-1, 1))
    columns = []
    for w in F.basis:
        if len(w) > d:
            break
        columns.append(np.sqrt(F.b[w]) * (F.word_operator(w) @ vac))
    V = sp.hstack(columns, format='csc')
    cols = np.flatnonzero(F.degree_mask(d))
    total = (V @ V.conj().T).tocsc()[:, cols]
    return sparse_max_abs(total - sp.identity(F.dim, dtype=complex, format='csc')[:, cols])


# ===== BEURLING FACTORIZATION =====

@dataclass
class BeurlingFactor:
    """Psi with Psi Psi* = Y, built from the tuple induced on range(Y^{1/2})"""
    psi: np.ndarray = field(repr=False)
    induced: OperatorTuple = field(repr=False)
    kernel: PoissonKernel = field(repr=False)
    rank: int
    factor_residual: float
    multianalytic_residual: float
    interior_degree: int


def _model_phi(f: FreeSymbol, F: TruncatedFock, Y: np.ndarray, h: int) -> np.ndarray:
    result = np.zeros_like(Y)
    for w, a in f.coeffs.items():
        Ww = sp.kron(F.word_operator(w), sp.identity(h), format='csr')
        # Y is Hermitian, so (W Y)* = Y W*
        result += a * (Ww @ (Ww @ Y).conj().T)
    return result


def beurling_factorize(f: FreeSymbol, F: TruncatedFock, Y: np.ndarray, h: int) -> BeurlingFactor:
    """Factor a Phi_{f, W (x) I}-subharmonic Y >= 0 as Psi Psi* with Psi multi-analytic"""
    Y = np.asarray(Y, dtype=complex)
    size = F.dim * h
    if Y.shape != (size, size):
        raise ValidationError(f"Y must be {size}x{size}, got {Y.shape}", field="Y")
    Y = (Y + Y.conj().T) / 2
    interior = F.interior_degree
    mask = F.degree_mask(interior, h)
    gap = Y - _model_phi(f, F, Y, h)
    gap_min = float(scipy.linalg.eigvalsh(gap[np.ix_(mask, mask)])[0])
    scale = Config.PSD_REL_TOL * (1 + float(np.linalg.norm(Y, 2)))
    if gap_min < -scale:
        raise SubharmonicityError(
            f"Y - Phi(Y) has eigenvalue {gap_min:.6g} on degrees <= {interior}", field="Y")

    evals, evecs = scipy.linalg.eigh(Y)
    if evals[0] < -scale:
        raise ValidationError(f"Y is not positive semidefinite (eigenvalue {evals[0]:.6g})", field="Y")
    top = max(evals[-1], 0.0)
    keep = evals > Config.RANK_CUT * top
    U = evecs[:, keep]
    s = np.sqrt(evals[keep])
    if not s.size:
        raise ValidationError("Y is zero", field="Y")

    mats = []
    for i in range(F.n):
        shift_adj = sp.kron(F.W[i], sp.identity(h), format='csr').conj().T
        a_i = (s[:, None] * (U.conj().T @ (shift_adj @ U))) / s[None, :]
        mats.append(a_i.conj().T)
    T = OperatorTuple(mats)
    kernel = build_poisson(f, T, F)
    psi = (U * s) @ kernel.K.conj().T

    factor_res = float(np.linalg.norm((psi @ psi.conj().T - Y)[np.ix_(mask, mask)], 2))
    d_mask = F.degree_mask(interior, max(kernel.defect_rank, 1))
    worst = 0.0
    for i in range(F.n):
        left = (sp.kron(F.W[i], sp.identity(kernel.defect_rank), format='csr').T @ psi.T).T
        right = sp.kron(F.W[i], sp.identity(h), format='csr') @ psi
        diff = (left - right)[np.ix_(mask, d_mask)] if kernel.defect_rank else np.zeros((1, 1))
        worst = max(worst, float(np.linalg.norm(diff, 2)))
    logger.info(f"🧱 Beurling factor: rank={s.size}, residual={factor_res:.3e}, multi-analytic={worst:.3e}")
    return BeurlingFactor(psi, T, kernel, int(s.size), factor_res, worst, interior)
