"""System model: flat Rayleigh MIMO channel with transmit-side impairment noise.

The received signal is

    y = H (s + n_t) + n_r

where s is the unit-energy transmit vector, n_t ~ CN(0, sigma_t2 I) is the
residual transmitter impairment (its variance equals the error vector
magnitude, EVM) and n_r ~ CN(0, sigma_r2 I) is thermal receive noise.
Because n_t passes through the channel, the aggregate noise seen at the
receiver is coloured:

    K = sigma_t2 * H H^H + sigma_r2 * I.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = [
    "SystemParams",
    "derive_noise_params",
    "draw_channel",
    "complex_gaussian",
    "transmit",
    "noise_covariance",
]


@dataclass(frozen=True)
class SystemParams:
    """Dimensions and noise levels of one operating point.

    snr_db is the ratio of total transmit power (m_t, unit energy per
    antenna) to per-receive-antenna thermal noise power, so
    sigma_r2 = m_t / 10^(snr_db/10). evm_db is the transmitter impairment
    power relative to unit signal power; -inf means an ideal transmitter.
    """

    m_t: int
    m_r: int
    snr_db: float
    evm_db: float

    def __post_init__(self):
        if not (self.m_r >= self.m_t >= 1):
            raise ValueError("need m_r >= m_t >= 1")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if np.isnan(self.evm_db) or self.evm_db == np.inf:
            raise ValueError("evm_db must be finite or -inf")

    @property
    def sigma_r2(self):
        return self.m_t / 10.0 ** (self.snr_db / 10.0)

    @property
    def sigma_t2(self):
        if self.evm_db == -np.inf:
            return 0.0
        return 10.0 ** (self.evm_db / 10.0)


def derive_noise_params(m_t, snr_db, evm_db):
    """Noise variances (sigma_r2, sigma_t2) for the given operating point.

    sigma_r2 = m_t / 10^(snr_db/10) (SNR counts total transmit power) and
    sigma_t2 = 10^(evm_db/10), with evm_db = -inf mapping to exactly 0.
    """
    if m_t < 1:
        raise ValueError("m_t must be positive")
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    if np.isnan(evm_db) or evm_db == np.inf:
        raise ValueError("evm_db must be finite or -inf")
    sigma_r2 = m_t / 10.0 ** (snr_db / 10.0)
    sigma_t2 = 0.0 if evm_db == -np.inf else 10.0 ** (evm_db / 10.0)
    return sigma_r2, sigma_t2


def complex_gaussian(rng, shape, variance):
    """Circularly-symmetric complex Gaussian samples with the given variance.

    Consumes the same number of draws from ``rng`` whatever ``variance``
    is, so streams stay aligned across operating points (variance 0 gives
    exact zeros).
    """
    if variance < 0.0:
        raise ValueError("variance must be non-negative")
    scale = np.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def draw_channel(rng, m_r, m_t):
    """i.i.d. CN(0, 1) flat-fading channel matrix of shape (m_r, m_t)."""
    if m_r < 1 or m_t < 1:
        raise ValueError("antenna counts must be positive")
    return complex_gaussian(rng, (m_r, m_t), 1.0)


def transmit(h, s, sigma_t2, sigma_r2, rng):
    """Pass symbol vectors through the impaired channel: y = H(s + n_t) + n_r.

    ``s`` is one length-m_t vector or a block of them with shape
    (m_t, n_vec). The impairment n_t and the thermal noise n_r come from
    two disjoint substreams spawned off ``rng``, so the thermal
    realisation is unchanged when the impairment level is toggled (and
    vice versa). Both are always drawn, scaled by their standard
    deviations, which keeps stream consumption independent of the
    variances.
    """
    h = as_matrix(h, "h")
    s = np.asarray(s, dtype=np.complex128)
    vector_in = s.ndim == 1
    if vector_in:
        s = s[:, None]
    if s.ndim != 2 or s.shape[0] != h.shape[1]:
        raise ValueError(f"symbol block {s.shape} does not match channel {h.shape}")

    rng_t, rng_r = rng.spawn(2)
    n_t = complex_gaussian(rng_t, s.shape, sigma_t2)
    n_r = complex_gaussian(rng_r, (h.shape[0], s.shape[1]), sigma_r2)
    y = h @ (s + n_t) + n_r
    return y[:, 0] if vector_in else y


def noise_covariance(h, sigma_t2, sigma_r2):
    """Aggregate noise covariance K = sigma_t2 * H H^H + sigma_r2 * I.

    Hermitian by construction; its smallest eigenvalue is at least
    sigma_r2 because sigma_t2 * H H^H is positive semidefinite.
    """
    h = as_matrix(h, "h")
    if sigma_t2 < 0.0 or sigma_r2 < 0.0:
        raise ValueError("variances must be non-negative")
    k = sigma_t2 * (h @ h.conj().T)
    k = 0.5 * (k + k.conj().T)
    k[np.diag_indices(h.shape[0])] += sigma_r2
    return k
