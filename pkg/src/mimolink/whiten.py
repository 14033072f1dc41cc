"""Noise whitening for the transmit-impaired channel.

The aggregate noise covariance K = sigma_t2 H H^H + sigma_r2 I is
coloured whenever sigma_t2 > 0. A whitening filter W satisfies
W K W^H = sigma_r2 I, restoring the white-noise assumption that ML and
APP detection rely on.

Two constructions are provided. The production route never forms K:
stack

    A = [sigma_t * H^H]      ((m_t + m_r) x m_r)
        [sigma_r * I   ]

and take the economy QR decomposition A = [Q_a; Q_c] R_t. Then
R_t^H R_t = A^H A = K, the lower block satisfies Q_c = sigma_r *
R_t^{-1}, and W = Q_c^H whitens. The upper block Q_a is a by-product and
is discarded. The oracle route computes the Hermitian square root
sigma_r * K^{-1/2} from the eigendecomposition of K; the two differ by a
left unitary factor, so tests compare them through the whitening
property, never entrywise.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, hermitian_evd, qr_economy

__all__ = [
    "stacked_qrd",
    "whitening_qrd",
    "whitening_oracle",
    "WhiteningPreproc",
    "preprocess",
    "apply_symbol_rate",
]


def _check_inputs(h, sigma_t2, sigma_r2):
    h = as_matrix(h, "h")
    if sigma_t2 < 0.0:
        raise ValueError("sigma_t2 must be non-negative")
    if sigma_r2 <= 0.0:
        raise ValueError("sigma_r2 must be positive (stacked matrix would lose rank)")
    return h


def stacked_qrd(h, sigma_t2, sigma_r2):
    """Economy QR of the stacked matrix [sigma_t H^H; sigma_r I].

    Returns (q_a, q_c, r_t) with q_a the m_t x m_r upper block, q_c the
    m_r x m_r lower block, and r_t the m_r x m_r triangular factor
    satisfying r_t^H r_t = K.
    """
    h = _check_inputs(h, sigma_t2, sigma_r2)
    m_r, m_t = h.shape
    stacked = np.vstack(
        [np.sqrt(sigma_t2) * h.conj().T, np.sqrt(sigma_r2) * np.eye(m_r)]
    )
    q, r_t = qr_economy(stacked)
    return q[:m_t, :].copy(), q[m_t:, :].copy(), r_t


def whitening_qrd(h, sigma_t2, sigma_r2):
    """Whitening filter W = Q_c^H from the stacked QR construction.

    Never forms K explicitly; the upper block Q_a is discarded.
    """
    _, q_c, _ = stacked_qrd(h, sigma_t2, sigma_r2)
    return q_c.conj().T.copy()


def whitening_oracle(h, sigma_t2, sigma_r2):
    """Hermitian whitening root sigma_r * K^{-1/2} via eigendecomposition.

    Slower and forms K explicitly; kept as the independent test oracle
    for whitening_qrd.
    """
    h = _check_inputs(h, sigma_t2, sigma_r2)
    k = sigma_t2 * (h @ h.conj().T)
    k = 0.5 * (k + k.conj().T)
    k[np.diag_indices(h.shape[0])] += sigma_r2
    u, lam = hermitian_evd(k)
    w = (u * (np.sqrt(sigma_r2) / np.sqrt(lam))) @ u.conj().T
    return 0.5 * (w + w.conj().T)


@dataclass(frozen=True)
class WhiteningPreproc:
    """Per-channel-realisation preprocessing products.

    w whitens the aggregate noise, h_eff = w @ h is the effective
    channel, and (q, r) is its economy QR. Symbol-rate work then reduces
    to y_hat = q^H w y and tree search on r.
    """

    w: np.ndarray
    h_eff: np.ndarray
    q: np.ndarray
    r: np.ndarray
    sigma_t2: float
    sigma_r2: float


def preprocess(h, sigma_t2, sigma_r2):
    """Compute the whitening filter and the QR of the whitened channel."""
    h = _check_inputs(h, sigma_t2, sigma_r2)
    w = whitening_qrd(h, sigma_t2, sigma_r2)
    h_eff = w @ h
    q, r = qr_economy(h_eff)
    return WhiteningPreproc(
        w=w, h_eff=h_eff, q=q, r=r, sigma_t2=float(sigma_t2), sigma_r2=float(sigma_r2)
    )


def apply_symbol_rate(y, preproc):
    """Reduce one observation (or a block) to y_hat = Q^H W y.

    For every candidate s, ||y_hat - R s||^2 differs from
    ||W y - W H s||^2 only by a constant independent of s, so detection
    metrics and argmins computed on (y_hat, R) match the whitened system.
    """
    y = np.asarray(y, dtype=np.complex128)
    m_r = preproc.w.shape[1]
    if y.shape[0] != m_r or y.ndim > 2:
        raise ValueError(f"observation must have {m_r} rows")
    return preproc.q.conj().T @ (preproc.w @ y)
