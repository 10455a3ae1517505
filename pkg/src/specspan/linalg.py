"""Dense real linear algebra kernel.

Jacobi symmetric eigendecomposition, Gram-Schmidt, orthogonal projection,
pseudo-inverse quadratic forms, the elementary-symmetric determinant det_k,
and the eigenvalue-tail order check between symmetric matrices.  Factorization
algorithms are implemented here directly on float64 arrays; numpy supplies
array arithmetic only.

Tolerances are module-level constants; override by assignment before use.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

EIG_OFFDIAG_REL = 1e-12   # Jacobi stop: off-diagonal Frobenius vs ||A||_F
EIG_SWEEP_CAP = 100       # sweep limit; breaching it is an internal failure
PSD_CLAMP_REL = 1e-8      # eigenvalue clamp window for nominally-PSD input
GS_DROP_REL = 1e-10       # Gram-Schmidt drop rule vs max input norm
PINV_CUTOFF_REL = 1e-10   # pseudo-inverse eigenvalue cutoff vs lambda_max
PINV_NULL_REL = 1e-7      # allowed null-space component of v vs ||v||
DEFAULT_ORDER_TOL = 1e-9  # default slack for preceq_k


class NotInRange(Exception):
    """v has a component outside the range of the PSD matrix."""


def as_vector(v) -> np.ndarray:
    out = np.asarray(v, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("vector has non-finite entries")
    return out


def as_sym_matrix(a) -> np.ndarray:
    """Validate and return an exactly-symmetric float64 copy of `a`."""
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if m.size and float(np.max(np.abs(m - m.T))) > 1e-8 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    # mirror the upper triangle so symmetry is exact bit-for-bit
    iu = np.triu_indices(m.shape[0], k=1)
    m[(iu[1], iu[0])] = m[iu]
    return m


def frob_norm(a: np.ndarray) -> float:
    return math.sqrt(float(np.sum(a * a)))


def vec_norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)))


class EigDecomp(NamedTuple):
    eigenvalues: np.ndarray   # sorted descending
    eigenvectors: np.ndarray  # orthonormal columns, aligned with eigenvalues


def sym_eig(a) -> EigDecomp:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate every (p, q) pair in fixed order until the off-diagonal
    Frobenius norm falls below EIG_OFFDIAG_REL * ||A||_F.  Deterministic.
    """
    m = as_sym_matrix(a)
    d = m.shape[0]
    vecs = np.eye(d)
    if d == 1:
        return EigDecomp(m[0].copy(), vecs)
    target = EIG_OFFDIAG_REL * frob_norm(m)
    converged = False
    for _ in range(EIG_SWEEP_CAP):
        off = math.sqrt(2.0 * float(np.sum(np.triu(m, k=1) ** 2)))
        if off <= target:
            converged = True
            break
        skip = off / (d * d) * 1e-2  # tiny pivots cannot reduce `off` usefully
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = m[p, q]
                if abs(apq) <= skip or apq == 0.0:
                    continue
                app, aqq = m[p, p], m[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = m[:, p].copy()
                colq = m[:, q].copy()
                m[:, p] = c * colp - s * colq
                m[:, q] = s * colp + c * colq
                rowp = m[p, :].copy()
                rowq = m[q, :].copy()
                m[p, :] = c * rowp - s * rowq
                m[q, :] = s * rowp + c * rowq
                m[p, p] = app - t * apq
                m[q, q] = aqq + t * apq
                m[p, q] = 0.0
                m[q, p] = 0.0
                vp = vecs[:, p].copy()
                vq = vecs[:, q].copy()
                vecs[:, p] = c * vp - s * vq
                vecs[:, q] = s * vp + c * vq
    else:
        converged = math.sqrt(2.0 * float(np.sum(np.triu(m, k=1) ** 2))) <= target
    if not converged:
        raise RuntimeError("Jacobi sweep cap breached; this is an internal failure")
    w = np.diag(m).copy()
    order = np.argsort(-w, kind="stable")
    return EigDecomp(w[order], vecs[:, order])


def _clamped_psd_eigenvalues(w: np.ndarray) -> np.ndarray:
    lam_max = max(float(w[0]), 0.0)
    if float(w[-1]) < -PSD_CLAMP_REL * lam_max - 1e-300:
        raise ValueError(
            f"matrix is not PSD within tolerance (lambda_min={w[-1]:.3e}, "
            f"lambda_max={lam_max:.3e})"
        )
    return np.maximum(w, 0.0)


def det_k(a, k: int) -> float:
    """k-th elementary symmetric polynomial of the eigenvalues of PSD `a`.

    Equals the sum of all k x k principal minors; all terms are nonnegative so
    the one-pass recurrence below has no cancellation.
    """
    w, _ = sym_eig(a)
    d = w.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    lam = _clamped_psd_eigenvalues(w)
    e = np.zeros(k + 1)
    e[0] = 1.0
    for i, x in enumerate(lam):
        top = min(i + 1, k)
        for j in range(top, 0, -1):
            e[j] += x * e[j - 1]
    return float(e[k])


def preceq_k(a, b, k: int, tol: float = DEFAULT_ORDER_TOL) -> bool:
    """A <=_k B: the d-k+1 smallest eigenvalues of B-A sum to >= 0 (within tol)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    am = as_sym_matrix(a)
    bm = as_sym_matrix(b)
    if am.shape != bm.shape:
        raise ValueError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    d = am.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    w, _ = sym_eig(bm - am)
    tail = float(np.sum(w[k - 1:]))
    return tail >= -tol * (1.0 + frob_norm(am) + frob_norm(bm))


def project_orth(v, basis) -> np.ndarray:
    """Component of v orthogonal to the span of an orthonormal basis (rows)."""
    vv = as_vector(v)
    b = np.atleast_2d(np.asarray(basis, dtype=np.float64))
    if b.size == 0:
        return vv.copy()
    return vv - b.T @ (b @ vv)


def gram_schmidt(vs) -> np.ndarray:
    """Orthonormalize rows of `vs`; near-dependent vectors are dropped.

    Modified Gram-Schmidt with one re-orthogonalization pass.  A vector whose
    residual norm is <= GS_DROP_REL * (max input norm) is dropped.
    """
    x = np.atleast_2d(np.asarray(vs, dtype=np.float64))
    if x.size == 0:
        return np.zeros((0, x.shape[1] if x.ndim == 2 else 0))
    max_norm = max(vec_norm(row) for row in x)
    if max_norm == 0.0:
        return np.zeros((0, x.shape[1]))
    basis: list[np.ndarray] = []
    for row in x:
        r = row.astype(np.float64, copy=True)
        for _ in range(2):
            for b in basis:
                r -= np.dot(r, b) * b
        nrm = vec_norm(r)
        if nrm > GS_DROP_REL * max_norm:
            basis.append(r / nrm)
    if not basis:
        return np.zeros((0, x.shape[1]))
    return np.array(basis)


def pinv_quadform(m, v) -> float:
    """v^T M^+ v for PSD M via eigen-cutoff pseudo-inverse.

    Raises NotInRange when v has a component of relative size > PINV_NULL_REL
    outside the numerical range of M.
    """
    w, vecs = sym_eig(m)
    vv = as_vector(v)
    if vv.shape[0] != w.shape[0]:
        raise ValueError("dimension mismatch between M and v")
    lam_max = max(float(w[0]), 0.0)
    cutoff = PINV_CUTOFF_REL * lam_max
    coeffs = vecs.T @ vv
    keep = w > cutoff
    null_norm = math.sqrt(float(np.sum(coeffs[~keep] ** 2)))
    if null_norm > PINV_NULL_REL * vec_norm(vv):
        raise NotInRange(
            f"null-space component {null_norm:.3e} exceeds "
            f"{PINV_NULL_REL:.0e} * ||v||"
        )
    if not np.any(keep):
        return 0.0
    return float(np.sum(coeffs[keep] ** 2 / w[keep]))


def pinv_psd(a) -> np.ndarray:
    """Eigen-cutoff pseudo-inverse of a PSD matrix."""
    w, vecs = sym_eig(a)
    lam_max = max(float(w[0]), 0.0)
    keep = w > PINV_CUTOFF_REL * lam_max
    if not np.any(keep):
        return np.zeros_like(np.asarray(a, dtype=np.float64))
    wk = vecs[:, keep]
    return (wk / w[keep]) @ wk.T


# -- Cholesky helpers (internal fast paths; PSD input assumed) --------------

def cholesky_spd(a, rel_tol: float = 1e-13) -> np.ndarray | None:
    """Lower Cholesky factor of a positive-definite matrix, or None.

    Returns None as soon as a pivot falls below rel_tol * max diagonal, which
    doubles as a singular/indefinite detector for Gram matrices.
    """
    m = np.asarray(a, dtype=np.float64)
    d = m.shape[0]
    low = np.zeros_like(m)
    floor = rel_tol * max(float(np.max(np.diag(m))), 0.0)
    for j in range(d):
        s = m[j, j] - float(np.dot(low[j, :j], low[j, :j]))
        if s <= floor:
            return None
        low[j, j] = math.sqrt(s)
        if j + 1 < d:
            low[j + 1:, j] = (m[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def solve_lower(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward substitution, L y = b (b may be a matrix)."""
    d = low.shape[0]
    y = np.array(b, dtype=np.float64)
    for i in range(d):
        if i:
            y[i] -= low[i, :i] @ y[:i]
        y[i] /= low[i, i]
    return y


def solve_spd(a, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A."""
    low = cholesky_spd(a)
    if low is None:
        raise ValueError("matrix is not positive definite")
    y = solve_lower(low, b)
    d = low.shape[0]
    x = y
    for i in range(d - 1, -1, -1):
        if i + 1 < d:
            x[i] -= low[i + 1:, i] @ x[i + 1:]
        x[i] /= low[i, i]
    return x


def inv_spd(a) -> np.ndarray:
    return solve_spd(a, np.eye(np.asarray(a).shape[0]))


def det_gram(g) -> float:
    """Determinant of a PSD Gram matrix; 0.0 when numerically singular."""
    m = np.asarray(g, dtype=np.float64)
    if m.shape[0] == 0:
        return 1.0
    low = cholesky_spd(m)
    if low is None:
        return 0.0
    return float(np.prod(np.diag(low)) ** 2)


def logdet_spd(a) -> float:
    low = cholesky_spd(a)
    if low is None:
        return -math.inf
    return 2.0 * float(np.sum(np.log(np.diag(low))))


def min_l2_coefficients(u_rows: np.ndarray, x_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-norm coefficients writing each row of x as a combination of u rows.

    Returns (C, R): C[i] solves min ||c||_2 s.t. U^T c = x_i (in least-squares
    sense), and R[i] is the representation residual x_i - U^T C[i].
    """
    gram_d = u_rows.T @ u_rows
    pinv = pinv_psd(gram_d)
    coeffs = x_rows @ pinv @ u_rows.T
    resid = coeffs @ u_rows - x_rows
    return coeffs, resid
