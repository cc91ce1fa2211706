"""Sparse SPD solves and the generalized buckling eigensolver.

The discrete problem is the pencil K u = lam G u with K symmetric positive
definite on the constrained subspace (the bending stiffness) and G symmetric,
possibly indefinite (the geometric stiffness).  Buckling loads are the
eigenvalues of positive G-energy, i.e. lam = (u' K u) / (u' G u) > 0, reported
in ascending order.

The solver is shift-invert inverse iteration with deflation against converged
vectors (orthogonality in the K inner product) and a Rayleigh-shift restart
once the residual drops below 1e-3.  A final Rayleigh-Ritz pass over the
collected block tightens G-orthogonality within eigenvalue clusters.  All
randomness comes from a fixed seed, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    DegenerateVectorError,
    IndefiniteMatrixError,
    NoBucklingModeError,
    ParameterError,
)

__all__ = [
    "EigenPair",
    "EigenOptions",
    "SpdFactor",
    "factor_spd",
    "smallest_eigenpairs",
    "normalize_energy",
    "dense_pencil_eigenvalues",
]


@dataclass
class EigenPair:
    """One converged buckling pair, energy-normalized (u' K u = 1)."""

    lambda_hat: float
    U: np.ndarray
    residual_norm: float


@dataclass
class EigenOptions:
    tol: float = 1e-9
    max_iter: int = 400
    cluster_rtol: float = 1e-6
    seed: int = 20260810
    initial_vectors: list = field(default_factory=list)
    max_collect: int | None = None


class SpdFactor:
    """LU factorization of an SPD matrix with a positive-pivot check.

    SuperLU runs in symmetric mode with diagonal pivoting, so the signs of
    the U diagonal reveal the inertia: any non-positive pivot means the
    matrix was not positive definite.
    """

    def __init__(self, A):
        A = sp.csc_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise ParameterError("factor_spd needs a square operator")
        try:
            self._lu = spla.splu(
                A,
                diag_pivot_thresh=0.0,
                permc_spec="MMD_AT_PLUS_A",
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:  # singular
            raise IndefiniteMatrixError(f"factorization failed: {exc}") from exc
        if np.any(self._lu.U.diagonal() <= 0.0):
            raise IndefiniteMatrixError("non-positive pivot: operator is not SPD")
        self._A = A
        self.shape = A.shape

    def solve(self, b):
        """Solve A x = b with one step of iterative refinement when needed."""
        x = self._lu.solve(b)
        nb = np.linalg.norm(b)
        if nb > 0.0:
            r = b - self._A @ x
            if np.linalg.norm(r) > 1e-12 * nb:
                x = x + self._lu.solve(r)
        return x


def factor_spd(A):
    """Factor a symmetric positive definite sparse operator for reuse."""
    return SpdFactor(A)


class _ShiftedFactor:
    """Plain LU of K - sigma G (indefinite is fine here)."""

    def __init__(self, K, G, sigma):
        M = (K - sigma * G).tocsc() if sigma != 0.0 else sp.csc_matrix(K)
        self._lu = spla.splu(M)

    def solve(self, b):
        return self._lu.solve(b)


def normalize_energy(U, K):
    """Scale U so that the bending energy u' K u equals one; idempotent."""
    U = np.asarray(U, dtype=float)
    en = float(U @ (K @ U))
    if not en > 0.0 or not np.isfinite(en):
        raise DegenerateVectorError("vector has no positive bending energy")
    return U / np.sqrt(en)


def dense_pencil_eigenvalues(K, G, return_vectors=False):
    """Brute-force oracle: the full positive spectrum of K u = lam G u.

    Solves the reversed pencil G y = mu K y with dense LAPACK (K is SPD) and
    maps mu -> lam = 1/mu, keeping the directions of positive G-energy.
    Returns eigenvalues ascending (and matching columns when requested).
    """
    Kd = np.asarray(K.todense()) if sp.issparse(K) else np.asarray(K, dtype=float)
    Gd = np.asarray(G.todense()) if sp.issparse(G) else np.asarray(G, dtype=float)
    mu, Y = scipy.linalg.eigh(Gd, Kd)
    keep = mu > 0.0
    lam = 1.0 / mu[keep]
    vecs = Y[:, keep]
    order = np.argsort(lam)
    lam = lam[order]
    vecs = vecs[:, order]
    if return_vectors:
        return lam, vecs
    return lam


def _k_orthonormalize(x, K, basis, k_basis):
    """Deflate x against ``basis`` (K-orthonormal columns) and K-normalize."""
    if basis:
        B = np.column_stack(basis)
        KB = np.column_stack(k_basis)
        x = x - B @ (KB.T @ x)
        # one re-orthogonalization pass keeps the deflation tight
        x = x - B @ (KB.T @ x)
    nrm2 = float(x @ (K @ x))
    if nrm2 <= 0.0 or not np.isfinite(nrm2):
        return None
    return x / np.sqrt(nrm2)


def smallest_eigenpairs(K, G, count, opts=None):
    """The ``count`` smallest positive-energy eigenvalues of K u = lam G u.

    Returned pairs are sorted ascending, energy-normalized, pairwise
    G-orthogonal, and satisfy ||K u - lam G u|| / ||K u|| <= opts.tol.
    """
    if count < 1:
        raise ParameterError("count must be >= 1")
    opts = opts or EigenOptions()
    n = K.shape[0]
    if count > n:
        raise ParameterError(f"requested {count} pairs from an {n}-dof system")
    K = sp.csr_matrix(K)
    G = sp.csr_matrix(G)
    if spla.norm(G, "fro") == 0.0:
        raise NoBucklingModeError("geometric operator is identically zero")

    rng = np.random.default_rng(opts.seed)
    base = _ShiftedFactor(K, G, 0.0)
    basis, k_basis, lams = [], [], []   # every converged direction (any sign)
    positive = []                        # indices into the lists above
    max_collect = opts.max_collect or (3 * count + 10)
    best_residual = np.inf

    while len(positive) < count:
        if len(lams) >= max_collect:
            if not positive:
                raise NoBucklingModeError(
                    "no direction of positive geometric energy found"
                )
            raise ConvergenceError(
                f"collected {len(lams)} pairs but only {len(positive)} positive",
                best_residual=best_residual,
            )
        if len(lams) < len(opts.initial_vectors):
            x = np.array(opts.initial_vectors[len(lams)], dtype=float)
        else:
            x = rng.standard_normal(n)
        x = _k_orthonormalize(x, K, basis, k_basis)
        if x is None:
            raise ConvergenceError("start vector lies in the converged subspace")

        sigma = 0.0
        lu = base
        lam = None
        converged = False
        for _ in range(opts.max_iter):
            y = lu.solve(G @ x)
            y = _k_orthonormalize(y, K, basis, k_basis)
            if y is None:
                break
            x = y
            kx = K @ x
            gx = G @ x
            xgx = float(x @ gx)
            nk = np.linalg.norm(kx)
            if abs(xgx) < 1e-300 or nk == 0.0:
                continue
            lam = 1.0 / xgx  # x'Kx = 1 by K-normalization
            res = np.linalg.norm(kx - lam * gx) / nk
            best_residual = min(best_residual, res)
            if res <= opts.tol:
                converged = True
                break
            if res < 1e-3 and abs(lam - sigma) > 1e-2 * abs(lam):
                sigma = lam
                lu = _ShiftedFactor(K, G, sigma)
        if not converged or lam is None:
            raise ConvergenceError(
                "inverse iteration did not converge", best_residual=best_residual
            )
        basis.append(x)
        k_basis.append(K @ x)
        lams.append(lam)
        if lam > 0.0:
            positive.append(len(lams) - 1)

    # Rayleigh-Ritz over the collected block: exact G-orthogonality inside
    # clusters and a final polish of every pair.
    V = np.column_stack(basis)
    Ks = V.T @ (K @ V)
    Gs = V.T @ (G @ V)
    mu, S = scipy.linalg.eigh(Gs, Ks)
    keep = mu > 0.0
    lam_all = 1.0 / mu[keep]
    W = V @ S[:, keep]
    order = np.argsort(lam_all)[:count]

    pairs = []
    for idx in order:
        u = normalize_energy(W[:, idx], K)
        lam = float(lam_all[idx])
        res = float(np.linalg.norm(K @ u - lam * (G @ u)) / np.linalg.norm(K @ u))
        if res > 10.0 * opts.tol:
            raise ConvergenceError(
                f"pair at {lam:.6g} lost accuracy in the Ritz step", best_residual=res
            )
        pairs.append(EigenPair(lam, u, res))
    return pairs
