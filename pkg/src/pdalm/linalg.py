"""Dense symmetric indefinite factorization and box projection.

The factorization is the Bunch-Kaufman diagonal pivoting method: it
produces ``P A P^T = L D L^T`` with ``L`` unit lower triangular and ``D``
block diagonal with 1x1 and 2x2 blocks.  It is what the Newton step uses
to solve the (indefinite) reduced KKT system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

# growth-bounding constant of the Bunch-Kaufman pivot rule
_ALPHA = (1.0 + np.sqrt(17.0)) / 8.0

SOLVE_RTOL = 1e-8
SYMMETRY_RTOL = 1e-12


class SingularSystem(np.linalg.LinAlgError):
    """Raised when solving with a factorization flagged singular."""


class ResidualTooLarge(np.linalg.LinAlgError):
    """Raised when a computed solution fails the residual check."""


@dataclass(frozen=True)
class SymIndefFactorization:
    matrix: np.ndarray
    lower: np.ndarray
    block_diag: np.ndarray
    permutation: np.ndarray
    pivot_sizes: tuple[int, ...]
    inertia: tuple[int, int, int]
    singular: bool
    drop_tol: float

    @property
    def factors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.block_diag

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _sym_swap(W: np.ndarray, i: int, j: int) -> None:
    W[[i, j], :] = W[[j, i], :]
    W[:, [i, j]] = W[:, [j, i]]


def factor_symmetric_indefinite(A, drop_tol: float | None = None) -> SymIndefFactorization:
    """Bunch-Kaufman ``L D L^T`` factorization of a symmetric matrix.

    A pivot block whose smallest eigenvalue magnitude falls below
    ``drop_tol`` (default ``1e-12 * ||A||_inf``) counts as a zero pivot
    and marks the factorization singular.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    m = A.shape[0]
    a_norm = float(np.max(np.sum(np.abs(A), axis=1), initial=0.0))
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_RTOL * max(a_norm, 1e-300):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    if drop_tol is None:
        drop_tol = max(1e-12 * a_norm, np.finfo(float).tiny)
    elif drop_tol <= 0:
        raise ValueError("drop_tol must be positive")

    W = A.copy()
    L = np.eye(m)
    D = np.zeros((m, m))
    perm = np.arange(m)
    sizes: list[int] = []

    k = 0
    while k < m:
        absakk = abs(W[k, k])
        if k + 1 < m:
            col = np.abs(W[k + 1:, k])
            imax = k + 1 + int(np.argmax(col))
            colmax = col[imax - k - 1]
        else:
            imax, colmax = k, 0.0

        step, kp = 1, k
        if max(absakk, colmax) == 0.0:
            pass  # zero column: zero 1x1 pivot, nothing to eliminate
        elif absakk >= _ALPHA * colmax:
            pass
        else:
            row = np.abs(W[imax, k:])
            row[imax - k] = 0.0
            rowmax = row.max()
            if absakk * rowmax >= _ALPHA * colmax * colmax:
                pass
            elif abs(W[imax, imax]) >= _ALPHA * rowmax:
                kp = imax
            else:
                kp, step = imax, 2

        kk = k + step - 1
        if kp != kk:
            _sym_swap(W, kk, kp)
            L[[kk, kp], :k] = L[[kp, kk], :k]
            perm[[kk, kp]] = perm[[kp, kk]]

        if step == 1:
            d = W[k, k]
            D[k, k] = d
            if abs(d) >= drop_tol and k + 1 < m:
                l = W[k + 1:, k] / d
                W[k + 1:, k + 1:] -= np.outer(l, W[k + 1:, k])
                L[k + 1:, k] = l
        else:
            blk = W[k:k + 2, k:k + 2].copy()
            D[k:k + 2, k:k + 2] = blk
            if k + 2 < m:
                C = W[k + 2:, k:k + 2]
                if np.min(np.abs(np.linalg.eigvalsh(blk))) < drop_tol:
                    # numerically zero block: already counted singular below
                    Lb = C @ np.linalg.pinv(blk)
                else:
                    Lb = np.linalg.solve(blk, C.T).T
                W[k + 2:, k + 2:] -= Lb @ C.T
                L[k + 2:, k:k + 2] = Lb
        sizes.append(step)
        k += step

    n_pos = n_neg = n_zero = 0
    k = 0
    for s in sizes:
        eig = np.array([D[k, k]]) if s == 1 else np.linalg.eigvalsh(D[k:k + 2, k:k + 2])
        for lam in eig:
            if abs(lam) < drop_tol:
                n_zero += 1
            elif lam > 0:
                n_pos += 1
            else:
                n_neg += 1
        k += s

    return SymIndefFactorization(
        matrix=A,
        lower=L,
        block_diag=D,
        permutation=perm,
        pivot_sizes=tuple(sizes),
        inertia=(n_pos, n_neg, n_zero),
        singular=n_zero > 0,
        drop_tol=float(drop_tol),
    )


def solve(fact: SymIndefFactorization, b) -> np.ndarray:
    """Solve ``A y = b`` and verify ``||A y - b||_inf <= 1e-8 max(1, ||b||_inf)``."""
    if fact.singular:
        raise SingularSystem(f"matrix has {fact.inertia[2]} zero pivot(s)")
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != fact.dim:
        raise ValueError(f"rhs has length {b.shape[0]}, expected {fact.dim}")
    if fact.dim == 0:
        return np.zeros(0)

    perm = fact.permutation
    w = solve_triangular(fact.lower, b[perm], lower=True, unit_diagonal=True)
    v = np.empty_like(w)
    k = 0
    for s in fact.pivot_sizes:
        if s == 1:
            v[k] = w[k] / fact.block_diag[k, k]
        else:
            v[k:k + 2] = np.linalg.solve(fact.block_diag[k:k + 2, k:k + 2], w[k:k + 2])
        k += s
    u = solve_triangular(fact.lower.T, v, lower=False, unit_diagonal=True)
    y = np.empty_like(u)
    y[perm] = u

    resid = np.max(np.abs(fact.matrix @ y - b))
    bound = SOLVE_RTOL * max(1.0, np.max(np.abs(b)))
    if not resid <= bound:
        raise ResidualTooLarge(f"residual {resid:.3e} exceeds {bound:.3e}")
    return y


def project_box(x, lower, upper) -> np.ndarray:
    """Componentwise clamp of ``x`` onto ``[lower, upper]``."""
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not (x.shape == lower.shape == upper.shape):
        raise ValueError(f"shape mismatch: {x.shape}, {lower.shape}, {upper.shape}")
    return np.minimum(np.maximum(x, lower), upper)
