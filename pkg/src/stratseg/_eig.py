"""Extended-precision helpers for the generalized symmetric eigenproblem.

The discriminant pencil (U_b, U_w + eps*I) is extremely ill-conditioned when
the within-class scatter is nearly singular; double-precision LAPACK then
determines eigenvectors only to ~1e-4. Eigenpairs are therefore estimated
with LAPACK and polished by Rayleigh-quotient inverse iteration carried out
in numpy's extended-precision `longdouble`, which pins residuals and
cross-route agreement far below the verification tolerances.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh

LD = np.longdouble


def solve_ld(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting in longdouble."""
    a = np.array(a, dtype=LD, copy=True)
    b = np.array(b, dtype=LD, copy=True)
    n = a.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k]).astype(np.float64)))
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        if a[k, k] == 0:
            a[k, k] = np.finfo(LD).tiny
        m = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(m, a[k, k + 1 :])
        b[k + 1 :] -= m * b[k]
    x = np.zeros(n, dtype=LD)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def _rel_residual(a, b, x, lam) -> float:
    num = np.linalg.norm((a @ x - lam * (b @ x)).astype(np.float64))
    den = max(np.linalg.norm((a @ x).astype(np.float64)), 1e-300)
    return float(num / den)


def refine_pencil_eigenpair(a, b, x0, lam0, iters: int = 3):
    """Rayleigh-quotient iteration on the pencil a x = lam b x (longdouble).

    Keeps the best (lowest-residual) iterate, so a non-converging refinement
    can never degrade the LAPACK estimate.
    """
    x = np.array(x0, dtype=LD)
    x = x / np.sqrt(x @ x)
    lam = LD(lam0)
    best = (x, lam, _rel_residual(a, b, x, lam))
    for _ in range(iters):
        z = solve_ld(a - lam * b, b @ x)
        nz = np.sqrt(float(z @ z))
        if not np.isfinite(nz) or nz == 0:
            break
        z = z / np.sqrt(z @ z)
        lam_n = (z @ a @ z) / (z @ b @ z)
        r = _rel_residual(a, b, z, lam_n)
        if r < best[2]:
            best = (z, lam_n, r)
        x, lam = z, lam_n
    return best


def top_pencil_eigenpairs(a, b, k: int):
    """Largest-k eigenpairs of the symmetric-definite pencil, refined.

    Returns (eigenvalues, eigenvectors) with eigenvalues nonincreasing and
    eigenvectors as longdouble columns.
    """
    w, v = eigh(a.astype(np.float64), b.astype(np.float64))
    order = np.argsort(w)[::-1][:k]
    lams, vecs = [], []
    for i in order:
        x, lam, _ = refine_pencil_eigenpair(a, b, v[:, i].astype(LD), LD(w[i]))
        lams.append(lam)
        vecs.append(x)
    return np.array(lams, dtype=LD), np.column_stack(vecs)


def orthonormal_complement(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of span(columns of c).

    Modified Gram-Schmidt with reorthogonalization, in longdouble.
    """
    c = np.atleast_2d(np.asarray(c, dtype=LD))
    if c.shape[0] < c.shape[1]:
        raise ValueError("more constraint vectors than dimensions")
    m = c.shape[0]
    q = []
    for j in range(c.shape[1]):
        v = c[:, j].copy()
        for u in q:
            v -= (u @ v) * u
        nv = np.sqrt(v @ v)
        if float(nv) > 0:
            q.append(v / nv)
    basis = []
    want = m - len(q)
    for e in range(m):
        v = np.zeros(m, dtype=LD)
        v[e] = 1
        for u in q + basis:
            v -= (u @ v) * u
        for u in q + basis:
            v -= (u @ v) * u
        nv = np.sqrt(v @ v)
        if float(nv) > 1e-6:
            basis.append(v / nv)
        if len(basis) == want:
            break
    return np.column_stack(basis)
