#!/usr/bin/env python3
"""
Operator Tuple Engine
Concrete n-tuples of matrices: membership in D_f, the completely positive map
Phi_{f,T}, joint spectral radius, purity and c.n.c. classification, the Cauchy
kernel and the series functional calculus.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg

from config import Config
from core.errors import (DivergenceError, NotInDomainError, PreconditionError,
                         SingularKernelError, ValidationError)
from core.fock import TruncatedFock, poly_operator
from core.symbol import FreeSymbol, reverse_symbol
from core.words import Word

logger = logging.getLogger(__name__)


class OperatorTuple:
    """n square complex matrices of a common size d"""

    def __init__(self, mats: Iterable[Any]):
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if not mats:
            raise ValidationError("a tuple needs at least one matrix", field="mats")
        for i, m in enumerate(mats):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError(f"matrix {i} is not square: shape {m.shape}", field=f"mats[{i}]")
            if m.shape != mats[0].shape:
                raise ValidationError(f"matrix {i} has shape {m.shape}, expected {mats[0].shape}",
                                      field=f"mats[{i}]")
            if not np.all(np.isfinite(m)):
                raise ValidationError(f"matrix {i} has non-finite entries", field=f"mats[{i}]")
        self.mats = tuple(mats)
        self._products: Dict[Word, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.mats)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.mats[i]

    def __iter__(self):
        return iter(self.mats)

    def __repr__(self) -> str:
        return f"OperatorTuple(n={self.n}, d={self.d})"

    @property
    def n(self) -> int:
        return len(self.mats)

    @property
    def d(self) -> int:
        return self.mats[0].shape[0]

    def word_product(self, w: Word) -> np.ndarray:
        """T_w = T_{i1} ... T_{ik}, cached by prefix"""
        if w.is_empty:
            return np.eye(self.d, dtype=complex)
        cached = self._products.get(w)
        if cached is None:
            cached = self.word_product(w[:-1]) @ self.mats[w[-1]]
            self._products[w] = cached
        return cached

    def scaled(self, r: float) -> 'OperatorTuple':
        return OperatorTuple([r * m for m in self.mats])

    def adjoint(self) -> 'OperatorTuple':
        return OperatorTuple([m.conj().T for m in self.mats])

    def direct_sum(self, other: 'OperatorTuple') -> 'OperatorTuple':
        if other.n != self.n:
            raise ValidationError(f"tuples have {self.n} and {other.n} entries", field="mats")
        return OperatorTuple([scipy.linalg.block_diag(a, b) for a, b in zip(self.mats, other.mats)])

    @classmethod
    def scalar_point(cls, lam: Sequence[complex]) -> 'OperatorTuple':
        return cls([[[complex(x)]] for x in lam])

    @classmethod
    def zero(cls, n: int, d: int) -> 'OperatorTuple':
        return cls([np.zeros((d, d)) for _ in range(n)])


def _check_pair(f: FreeSymbol, T: OperatorTuple) -> None:
    if f.n != T.n:
        raise ValidationError(f"symbol has n={f.n} but tuple has {T.n} matrices", field="tuple")


def phi_apply(f: FreeSymbol, T: OperatorTuple, X: np.ndarray) -> np.ndarray:
    """Phi_{f,T}(X) = sum a_alpha T_alpha X T_alpha*"""
    _check_pair(f, T)
    X = np.asarray(X, dtype=complex)
    if X.shape != (T.d, T.d):
        raise ValidationError(f"X has shape {X.shape}, expected {(T.d, T.d)}", field="X")
    result = np.zeros_like(X)
    for w, a in f.coeffs.items():
        Tw = T.word_product(w)
        result += a * (Tw @ X @ Tw.conj().T)
    return result


def phi_star_apply(f: FreeSymbol, T: OperatorTuple, X: np.ndarray) -> np.ndarray:
    """Phi*_{f,T}(X) = sum a_alpha T_alpha* X T_alpha"""
    _check_pair(f, T)
    X = np.asarray(X, dtype=complex)
    result = np.zeros_like(X)
    for w, a in f.coeffs.items():
        Tw = T.word_product(w)
        result += a * (Tw.conj().T @ X @ Tw)
    return result


def phi_power(f: FreeSymbol, T: OperatorTuple, k: int, X: Optional[np.ndarray] = None) -> np.ndarray:
    X = np.eye(T.d, dtype=complex) if X is None else np.asarray(X, dtype=complex)
    for _ in range(k):
        X = phi_apply(f, T, X)
    return X


def _hermitian_norm(X: np.ndarray) -> float:
    return float(np.max(np.abs(scipy.linalg.eigvalsh(X)))) if X.size else 0.0


@dataclass
class Membership:
    member: bool
    defect_min_eig: float
    tolerance: float
    phi_norm: float


def membership(f: FreeSymbol, T: OperatorTuple) -> Membership:
    """member iff lambda_min(I - Phi(I)) >= -eps, eps = PSD_REL_TOL (1 + ||Phi(I)||)"""
    phi_i = phi_apply(f, T, np.eye(T.d))
    phi_i = (phi_i + phi_i.conj().T) / 2
    phi_norm = _hermitian_norm(phi_i)
    defect_min = float(scipy.linalg.eigvalsh(np.eye(T.d) - phi_i)[0])
    tolerance = Config.PSD_REL_TOL * (1 + phi_norm)
    return Membership(defect_min >= -tolerance, defect_min, tolerance, phi_norm)


@dataclass
class SpectralRadius:
    value: float
    trend: List[float]
    iterations: int
    nilpotent: bool = False


def spectral_radius(f: FreeSymbol, T: OperatorTuple, k_max: Optional[int] = None) -> SpectralRadius:
    """||Phi^k(I)||^{1/2k}, normalizing every step so the norm is carried as a log"""
    k_max = k_max or Config.K_MAX
    X = np.eye(T.d, dtype=complex)
    log_norm = 0.0
    trend: List[float] = []
    for k in range(1, k_max + 1):
        X = phi_apply(f, T, X)
        X = (X + X.conj().T) / 2
        step = _hermitian_norm(X)
        if step == 0.0:
            trend.append(0.0)
            logger.debug(f"Phi^{k}(I) vanished; spectral radius is 0")
            return SpectralRadius(0.0, trend, k, nilpotent=True)
        log_norm += math.log(step)
        X = X / step
        trend.append(math.exp(log_norm / (2 * k)))
    return SpectralRadius(trend[-1], trend, k_max)


def _certify_radius(f: FreeSymbol, T: OperatorTuple, k_max: Optional[int], strict: bool) -> SpectralRadius:
    radius = spectral_radius(f, T, k_max)
    band = Config.BORDERLINE_RADIUS
    if radius.value >= 1 + band:
        message = f"spectral radius estimate {radius.value:.6g} is not below 1"
        if strict:
            raise PreconditionError(message, field="tuple")
        logger.warning(f"⚠️ {message}")
    elif radius.value >= 1 - band:
        logger.warning(f"⚠️ spectral radius {radius.value:.6g} is borderline; treating as caller-certified")
    return radius


@dataclass
class DomainReport:
    """Membership, purity, c.n.c. and spectral radius of a tuple"""
    member: bool
    defect_min_eig: float
    tolerance: float
    pure: bool
    cnc: bool
    spectral_radius: float
    radius_trend: List[float] = field(repr=False)
    trend: List[float] = field(repr=False)
    q_max_eig: float = 0.0
    converged: bool = True
    iterations: int = 0


def classify(f: FreeSymbol, T: OperatorTuple, k_max: Optional[int] = None) -> DomainReport:
    """Q_est = Phi^k(I) with early exit once it is negligible or stationary"""
    k_max = k_max or Config.K_MAX
    mem = membership(f, T)
    if not mem.member:
        raise NotInDomainError(
            f"tuple is not in D_f: lambda_min(I - Phi(I)) = {mem.defect_min_eig:.6g}", field="tuple")

    Q = np.eye(T.d, dtype=complex)
    trend = [1.0]
    converged = False
    iterations = 0
    for k in range(1, k_max + 1):
        Q_next = phi_apply(f, T, Q)
        Q_next = (Q_next + Q_next.conj().T) / 2
        iterations = k
        step = float(np.max(np.abs(Q_next - Q)))
        Q = Q_next
        trend.append(_hermitian_norm(Q))
        if trend[-1] <= Config.PURE_TOL or step < 1e-13:
            converged = True
            break
    if not converged:
        logger.warning(f"⚠️ Phi^k(I) did not stabilize within k_max={k_max}")

    eigs = scipy.linalg.eigvalsh(Q)
    q_norm = trend[-1]
    pure = q_norm <= Config.PURE_TOL
    cnc = not np.any(np.abs(eigs - 1.0) <= Config.FIXED_VECTOR_TOL)
    radius = spectral_radius(f, T, k_max)
    logger.info(f"📋 classify: member={mem.member}, pure={pure}, cnc={cnc}, r_f={radius.value:.6g}")
    return DomainReport(
        member=mem.member, defect_min_eig=mem.defect_min_eig, tolerance=mem.tolerance,
        pure=pure, cnc=cnc, spectral_radius=radius.value, radius_trend=radius.trend,
        trend=trend, q_max_eig=float(eigs[-1]) if eigs.size else 0.0,
        converged=converged, iterations=iterations)


# ===== CAUCHY KERNEL =====

def reconstruction_operator(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock) -> sp.csr_matrix:
    """R = sum_{g in supp f} a_g L_{reverse(g)} (x) T_g*, strictly block lower triangular"""
    _check_pair(f, T)
    size = F.dim * T.d
    R = sp.csr_matrix((size, size), dtype=complex)
    for w, a in f.coeffs.items():
        Tw_star = sp.csr_matrix(T.word_product(w).conj().T)
        R = R + a * sp.kron(F.word_operator(w.reverse(), 'right'), Tw_star, format='csr')
    return R.tocsr()


def cauchy_kernel(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                  k_max: Optional[int] = None) -> sp.csr_matrix:
    """C_{f,T} = (I - R)^{-1} by a sparse unit lower-triangular solve"""
    _certify_radius(f, T, k_max, strict=True)
    R = reconstruction_operator(f, T, F)
    size = R.shape[0]
    M = (sp.identity(size, dtype=complex, format='csc') - R).tocsc()
    try:
        C = scipy.sparse.linalg.spsolve(M, sp.identity(size, dtype=complex, format='csc'))
    except RuntimeError as exc:
        raise SingularKernelError(f"I - R is singular: {exc}") from exc
    C = sp.csr_matrix(C)
    if not np.all(np.isfinite(C.data)):
        raise SingularKernelError("Cauchy kernel solve produced non-finite entries")
    return C


def cauchy_neumann(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock) -> sp.csr_matrix:
    """sum_k R^k; the sum is finite because R raises degree"""
    R = reconstruction_operator(f, T, F)
    size = R.shape[0]
    total = sp.identity(size, dtype=complex, format='csr')
    power = total
    for _ in range(F.level):
        power = (power @ R).tocsr()
        if power.nnz == 0:
            break
        total = total + power
    return total.tocsr()


def cauchy_fourier(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock) -> sp.csr_matrix:
    """sum_beta L_beta (x) b_{reverse(beta)} T_{reverse(beta)}*"""
    _check_pair(f, T)
    size = F.dim * T.d
    total = sp.csr_matrix((size, size), dtype=complex)
    for w in F.basis:
        Tw_star = sp.csr_matrix(F.b[w] * T.word_product(w).conj().T)
        total = total + sp.kron(F.word_operator(w.reverse(), 'right'), Tw_star, format='csr')
    return total.tocsr()


def cauchy_norm_bound(f: FreeSymbol, T: OperatorTuple, k_max: Optional[int] = None) -> float:
    """sum_k ||Phi^k(I)||^{1/2}, truncated once terms drop below 1e-16 of the sum"""
    k_max = k_max or Config.K_MAX
    X = np.eye(T.d, dtype=complex)
    total = 1.0
    for _ in range(k_max):
        X = phi_apply(f, T, X)
        term = math.sqrt(_hermitian_norm(X))
        total += term
        if term <= 1e-16 * total:
            break
    return total


def cauchy_transform_residual(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                              c: Mapping[Word, complex], x: np.ndarray, y: np.ndarray,
                              C: Optional[sp.csr_matrix] = None) -> float:
    """|<g(T)x, y> - <(g(W) (x) I)(1 (x) x), C_{f,T}(1 (x) y)>|"""
    C = cauchy_kernel(f, T, F) if C is None else C
    gT = series_calculus(f, T, c, certify=False)
    lhs = np.vdot(y, gT @ x)
    vac = F.vacuum()
    left = sp.kron(poly_operator(F, c), sp.identity(T.d), format='csr') @ np.kron(vac, x)
    right = C @ np.kron(vac, y)
    return float(abs(lhs - np.vdot(right, left)))


def series_calculus(f: FreeSymbol, T: OperatorTuple, c: Mapping[Word, complex],
                    k_max: Optional[int] = None, certify: bool = True) -> np.ndarray:
    """g(T) = sum_k sum_{|alpha| = k} c_alpha T_alpha, degree by degree"""
    _check_pair(f, T)
    if certify:
        _certify_radius(f, T, None, strict=False)
    k_max = Config.K_MAX if k_max is None else k_max
    by_degree: Dict[int, List[Word]] = {}
    for w in c:
        w.check_alphabet(T.n)
        if len(w) <= k_max:
            by_degree.setdefault(len(w), []).append(w)
    total = np.zeros((T.d, T.d), dtype=complex)
    for k in sorted(by_degree):
        for w in by_degree[k]:
            total += complex(c[w]) * T.word_product(w)
        size = float(np.linalg.norm(total, 2))
        if size > Config.DIVERGENCE_LIMIT:
            raise DivergenceError(f"partial sum norm {size:.3g} exceeded {Config.DIVERGENCE_LIMIT:.3g} at degree {k}")
    return total


# ===== CONSTRUCTIONS =====

def model_tuple(F: TruncatedFock, mult: int = 1) -> OperatorTuple:
    """(W_1 (x) I_c, ..., W_n (x) I_c) as dense matrices"""
    eye = sp.identity(mult, format='csr')
    return OperatorTuple([sp.kron(Wi, eye).toarray() for Wi in F.W])


def coinvariant_compression(F: TruncatedFock, vectors: np.ndarray, mult: int = 1) -> OperatorTuple:
    """Compress W (x) I_c to the smallest W*-invariant subspace containing the given columns"""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[0] != F.dim * mult:
        raise ValidationError(f"vectors need {F.dim * mult} rows", field="vectors")
    adjoints = [sp.kron(Wi, sp.identity(mult), format='csr').conj().T.tocsr() for Wi in F.W]
    basis = scipy.linalg.orth(vectors)
    while True:
        grown = np.hstack([basis] + [A @ basis for A in adjoints])
        new_basis = scipy.linalg.orth(grown)
        if new_basis.shape[1] == basis.shape[1]:
            break
        basis = new_basis
    mats = [basis.conj().T @ (sp.kron(Wi, sp.identity(mult), format='csr') @ basis) for Wi in F.W]
    logger.debug(f"co-invariant subspace of dimension {basis.shape[1]}")
    return OperatorTuple(mats)


def scale_to_gauge(f: FreeSymbol, T: OperatorTuple, target: float) -> OperatorTuple:
    """Return rT with ||Phi_{f,rT}(I)|| = target"""
    if not 0 < target:
        raise ValidationError(f"target gauge must be positive, got {target}", field="target")

    def excess(r: float) -> float:
        return membership(f, T.scaled(r)).phi_norm - target

    if membership(f, T).phi_norm == 0:
        raise ValidationError("cannot rescale a tuple with Phi(I) = 0", field="tuple")
    upper = 1.0
    while excess(upper) < 0:
        upper *= 2
    r = scipy.optimize.brentq(excess, 0.0, upper, xtol=1e-15, rtol=1e-14)
    return T.scaled(r)


def _nilpotency(A: sp.csr_matrix, limit: int):
    """(k, rho): A^k = 0 gives rho = 0, otherwise ||A^limit||_F^(1/limit)"""
    P = A.tocsr()
    P.eliminate_zeros()
    k = 1
    while P.nnz and k < limit:
        P = (P @ A).tocsr()
        P.eliminate_zeros()
        k += 1
    if not P.nnz:
        return k, 0.0
    return k, float(scipy.sparse.linalg.norm(P)) ** (1.0 / k)


def _right_shift_radius(f: FreeSymbol, F: TruncatedFock, k_max: int) -> float:
    """r_{reverse f}(L) by sparse powers of Phi_{reverse f, L}(I)"""
    g = reverse_symbol(f)
    shifts = [(a, F.word_operator(w, 'right')) for w, a in g.coeffs.items()]
    X = sp.identity(F.dim, dtype=complex, format='csr')
    log_norm = 0.0
    for k in range(1, k_max + 1):
        Y = sp.csr_matrix((F.dim, F.dim), dtype=complex)
        for a, Lw in shifts:
            Y = Y + a * (Lw @ X @ Lw.conj().T)
        X = Y.tocsr()
        X.eliminate_zeros()
        if not X.nnz:
            return 0.0
        step = float(scipy.sparse.linalg.norm(X))
        log_norm += math.log(step)
        X = X / step
    return math.exp(log_norm / (2 * k_max))


def reconstruction_radius_check(f: FreeSymbol, T: OperatorTuple, F: TruncatedFock,
                                k_max: Optional[int] = None) -> Dict[str, Any]:
    """Spectral radius of R against r_{reverse f}(L) r_f(T)"""
    k_max = k_max or Config.K_MAX
    R = reconstruction_operator(f, T, F)
    if sp.triu(R).nnz:
        raise ValidationError("reconstruction operator is not strictly lower triangular", field="tuple")
    index, r_R = _nilpotency(R, F.level + 2)
    r_L = _right_shift_radius(f, F, k_max)
    r_T = spectral_radius(f, T, k_max).value
    return {
        'reconstruction_radius': r_R,
        'nilpotency_index': index,
        'bound': r_L * r_T,
        'holds': r_R <= r_L * r_T + 1e-10,
        'caveat': 'truncated right shifts are nilpotent; the untruncated model has radius 1',
    }
