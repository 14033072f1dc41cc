"""Dense complex linear-algebra kernels.

Matrices are plain numpy arrays of dtype complex128. Every public routine
validates its input (shape, finiteness) and returns freshly allocated
arrays, so results can be shared freely between threads.
"""

import numpy as np

__all__ = [
    "RankDeficientError",
    "NotPositiveDefiniteError",
    "as_matrix",
    "multiply",
    "adjoint",
    "upper_triangular_solve",
    "lower_triangular_solve",
    "cholesky",
    "qr_economy",
    "hermitian_evd",
    "pseudo_inverse",
]

# |R_ii| below this fraction of the largest diagonal entry flags rank
# deficiency; i.i.d. Gaussian channels are almost surely full rank, the
# guard exists for degenerate hand-built inputs.
RANK_RTOL = 1e-12

HERMITIAN_RTOL = 1e-10


class RankDeficientError(ValueError):
    """Input matrix does not have full column rank."""


class NotPositiveDefiniteError(ValueError):
    """Matrix is not Hermitian positive definite."""


def as_matrix(a, name="matrix"):
    """Validate and convert ``a`` to a 2-d complex128 array.

    Raises ValueError on wrong dimensionality, empty axes, or non-finite
    entries.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def multiply(a, b):
    """Matrix product A @ B with conformability check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a):
    """Conjugate transpose A^H."""
    return as_matrix(a).conj().T.copy()


def upper_triangular_solve(r, b):
    """Solve R x = b for upper-triangular R by back substitution.

    ``b`` may be a vector or a matrix of stacked right-hand sides.
    """
    r = as_matrix(r, "r")
    n = r.shape[0]
    if r.shape[1] != n:
        raise ValueError("triangular solve needs a square matrix")
    b = np.asarray(b, dtype=np.complex128)
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b[:, None]
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {n}")
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_RTOL * max(diag.max(), 1.0):
        raise RankDeficientError("triangular matrix is singular to working precision")
    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    return x[:, 0] if vector_rhs else x


def lower_triangular_solve(l, b):
    """Solve L x = b for lower-triangular L by forward substitution."""
    l = as_matrix(l, "l")
    n = l.shape[0]
    if l.shape[1] != n:
        raise ValueError("triangular solve needs a square matrix")
    b = np.asarray(b, dtype=np.complex128)
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b[:, None]
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {n}")
    diag = np.abs(np.diag(l))
    if diag.min() <= RANK_RTOL * max(diag.max(), 1.0):
        raise RankDeficientError("triangular matrix is singular to working precision")
    x = np.empty_like(b)
    for i in range(n):
        x[i] = (b[i] - l[i, :i] @ x[:i]) / l[i, i]
    return x[:, 0] if vector_rhs else x


def _check_hermitian(a, name="matrix"):
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ValueError(f"{name} is not Hermitian to working precision")


def cholesky(a):
    """Lower-triangular L with L L^H = A for Hermitian positive-definite A."""
    a = as_matrix(a, "a")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("cholesky needs a square matrix")
    _check_hermitian(a, "cholesky input")
    l = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        d = a[j, j].real - np.sum(np.abs(l[j, :j]) ** 2)
        if d <= 0.0:
            raise NotPositiveDefiniteError(
                f"leading minor of order {j + 1} is not positive definite"
            )
        l[j, j] = np.sqrt(d)
        if j + 1 < n:
            l[j + 1:, j] = (a[j + 1:, j] - l[j + 1:, :j] @ l[j, :j].conj()) / l[j, j]
    return l


def qr_economy(a):
    """Economy-size QR of an m x n matrix (m >= n) via Householder reflections.

    Returns (q, r) with a = q r, q^H q = I_n and r upper-triangular with
    real non-negative diagonal (pivot phases are folded into q).

    Raises RankDeficientError when the smallest |r_ii| falls below
    RANK_RTOL times the largest.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if m < n:
        raise ValueError(f"qr_economy needs m >= n, got {a.shape}")

    r = a.copy()
    reflectors = []
    for k in range(n):
        x = r[k:, k]
        norm_x = np.linalg.norm(x)
        if norm_x > 0.0:
            x0 = x[0]
            s = x0 / abs(x0) if x0 != 0.0 else 1.0 + 0.0j
            v = x.copy()
            v[0] += s * norm_x
            beta = 2.0 / np.real(v.conj() @ v)
            r[k:, k:] -= beta * np.outer(v, v.conj() @ r[k:, k:])
            reflectors.append((k, v, beta))
            r[k, k] = -s * norm_x
        r[k + 1:, k] = 0.0

    r = r[:n, :].copy()
    q = np.zeros((m, n), dtype=np.complex128)
    q[:n, :n] = np.eye(n)
    for k, v, beta in reversed(reflectors):
        q[k:, :] -= beta * np.outer(v, v.conj() @ q[k:, :])

    # Fold pivot phases so every diagonal entry of r is real >= 0.
    for k in range(n):
        d = r[k, k]
        if d != 0.0:
            phase = d.conj() / abs(d)
            r[k, k:] *= phase
            q[:, k] *= phase.conj()
        r[k, k] = r[k, k].real

    diag = np.abs(np.diag(r)).real
    max_diag = diag.max()
    if max_diag == 0.0 or diag.min() < RANK_RTOL * max_diag:
        raise RankDeficientError("matrix is rank deficient to working precision")
    return q, r


def hermitian_evd(a, max_sweeps=60):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (u, lam) with a = u diag(lam) u^H, u unitary and lam real,
    sorted in descending order. The input must be Hermitian within
    HERMITIAN_RTOL (relative Frobenius norm) or a ValueError is raised.
    """
    a = as_matrix(a, "a")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("hermitian_evd needs a square matrix")
    _check_hermitian(a, "hermitian_evd input")

    w = 0.5 * (a + a.conj().T)
    u = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(w)
    if scale == 0.0 or n == 1:
        lam = np.diag(w).real.copy()
        order = np.argsort(lam)[::-1]
        return u[:, order].copy(), lam[order]

    tol = 1e-14 * scale
    for _ in range(max_sweeps):
        off_part = w.copy()
        off_part[np.diag_indices(n)] = 0.0
        if np.sum(np.abs(off_part) ** 2) <= tol * tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = w[p, p].real
                aqq = w[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                sign = 1.0 if tau >= 0.0 else -1.0
                if abs(tau) > 1e8:
                    t = sign / (2.0 * abs(tau))
                else:
                    t = sign / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Two-sided rotation J with J[p,p]=c*phase, J[q,p]=-s,
                # J[p,q]=s*phase, J[q,q]=c zeroes w[p,q].
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * phase * col_p - s * col_q
                w[:, q] = s * phase * col_p + c * col_q
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * phase.conj() * row_p - s * row_q
                w[q, :] = s * phase.conj() * row_p + c * row_q
                w[p, q] = 0.0
                w[q, p] = 0.0
                w[p, p] = w[p, p].real
                w[q, q] = w[q, q].real
                vec_p = u[:, p].copy()
                vec_q = u[:, q].copy()
                u[:, p] = c * phase * vec_p - s * vec_q
                u[:, q] = s * phase * vec_p + c * vec_q
    else:
        raise RuntimeError("Jacobi eigensolver failed to converge")

    lam = np.diag(w).real.copy()
    order = np.argsort(lam, kind="stable")[::-1]
    return u[:, order].copy(), lam[order]


def pseudo_inverse(h):
    """Moore-Penrose pseudo-inverse of a full-column-rank m x n matrix (m >= n).

    Computed from the normal equations (H^H H)^-1 H^H via Cholesky, which
    keeps the route independent of qr_economy.
    """
    h = as_matrix(h, "h")
    m, n = h.shape
    if m < n:
        raise ValueError(f"pseudo_inverse needs m >= n, got {h.shape}")
    gram = h.conj().T @ h
    gram = 0.5 * (gram + gram.conj().T)
    try:
        l = cholesky(gram)
    except NotPositiveDefiniteError as exc:
        raise RankDeficientError("matrix is rank deficient to working precision") from exc
    y = lower_triangular_solve(l, h.conj().T)
    return upper_triangular_solve(l.conj().T, y)
