"""Capacity and outage analysis for the impaired-transmitter channel.

Two independent routes compute the mutual information of a channel
realisation: a determinant route working on the aggregate noise
covariance K, and an eigenvalue route that expands the same quantity over
the eigenmodes of H H^H. They must agree to tight tolerance; keeping both
is a deliberate cross-check, do not merge them.

With impairment variance sigma_t2 > 0 the per-mode SINR saturates at
1/sigma_t2, so the total is capped at m_t * log2(1 + 1/sigma_t2) no
matter the SNR.
"""

import io
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, cholesky, hermitian_evd
from .model import draw_channel
from .streams import PURPOSES, substream

__all__ = [
    "capacity_det",
    "capacity_eigen",
    "capacity_limit",
    "CapacityBreakdown",
    "OutageTable",
    "outage_cdf",
    "snr_at_outage",
]


def _check_variances(sigma_t2, sigma_r2):
    if sigma_t2 < 0.0:
        raise ValueError("sigma_t2 must be non-negative")
    if sigma_r2 <= 0.0:
        raise ValueError("sigma_r2 must be positive (K may be singular otherwise)")


def _logdet2(a):
    """log2 det(A) for Hermitian positive-definite A, via Cholesky and
    natural-log ratio."""
    l = cholesky(a)
    return 2.0 * np.sum(np.log(np.diag(l).real)) / np.log(2.0)


def _capacity_from_gram(gram, sigma_t2, sigma_r2):
    """log2 det(I + K^-1 G) for G = H H^H, evaluated as a logdet ratio.

    Shared by capacity_det and the outage Monte Carlo so both produce
    bit-identical values for the same channel.
    """
    m_r = gram.shape[0]
    k = sigma_t2 * gram
    k[np.diag_indices(m_r)] += sigma_r2
    total = k + gram
    c = _logdet2(total) - _logdet2(k)
    return max(float(c), 0.0)


def capacity_det(h, sigma_t2, sigma_r2):
    """Mutual information log2 det(I + K^-1 H H^H) in bits per channel use.

    Evaluated as log2 det(K + H H^H) - log2 det(K) so that only
    positive-definite matrices are factorised; clamped at zero to absorb
    rounding on near-degenerate channels.
    """
    h = as_matrix(h, "h")
    _check_variances(sigma_t2, sigma_r2)
    gram = h @ h.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    return _capacity_from_gram(gram, sigma_t2, sigma_r2)


@dataclass(frozen=True)
class CapacityBreakdown:
    """Eigenmode view of one channel's mutual information.

    per_mode lists (eigenvalue of H H^H, bits contributed by that mode),
    strongest mode first; total is their sum.
    """

    per_mode: tuple
    total: float


def capacity_eigen(h, sigma_t2, sigma_r2):
    """Same mutual information as capacity_det, via eigenmodes of H H^H.

    Each eigenvalue lam contributes log2(1 + lam / (lam*sigma_t2 +
    sigma_r2)), which makes the saturation of the per-mode SINR at
    1/sigma_t2 explicit.
    """
    h = as_matrix(h, "h")
    _check_variances(sigma_t2, sigma_r2)
    gram = h @ h.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    _, lam = hermitian_evd(gram)
    lam = np.maximum(lam, 0.0)
    bits = np.log2(1.0 + lam / (sigma_t2 * lam + sigma_r2))
    per_mode = tuple((float(l), float(c)) for l, c in zip(lam, bits))
    return CapacityBreakdown(per_mode=per_mode, total=float(np.sum(bits)))


def capacity_limit(m_t, sigma_t2):
    """High-SNR capacity ceiling m_t * log2(1 + 1/sigma_t2) in bpcu.

    For an ideal transmitter (sigma_t2 == 0) there is no ceiling; the
    explicit unbounded marker float('inf') is returned (never reached by
    overflow) and rendered as the literal token "inf" in text output.
    """
    if m_t < 1:
        raise ValueError("m_t must be positive")
    if sigma_t2 < 0.0:
        raise ValueError("sigma_t2 must be non-negative")
    if sigma_t2 == 0.0:
        return float("inf")
    return float(m_t * np.log2(1.0 + 1.0 / sigma_t2))


@dataclass(frozen=True)
class OutageTable:
    """Outage probabilities on a (rate, SNR) grid from one channel ensemble.

    rows holds (rate_bpcu, snr_db, p_out) tuples, rate-major in the order
    requested; trials and seed pin the Monte Carlo run.
    """

    rows: tuple
    trials: int
    seed: int

    def p_out(self, rate, snr_db):
        for r, s, p in self.rows:
            if r == rate and s == snr_db:
                return p
        raise KeyError(f"no row for rate={rate}, snr_db={snr_db}")

    def to_csv(self, path_or_buf):
        """Write rows under the header `rate_bpcu,snr_db,p_out,trials,seed`."""
        own = isinstance(path_or_buf, (str, bytes))
        f = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            f.write("rate_bpcu,snr_db,p_out,trials,seed\n")
            for rate, snr, p in self.rows:
                f.write(
                    f"{format_number(rate)},{format_number(snr)},"
                    f"{format_number(p)},{self.trials},{self.seed}\n"
                )
        finally:
            if own:
                f.close()

    def to_csv_text(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def format_number(x):
    """Stable text form for CSV fields: finite values via %.10g, the
    unbounded markers as literal inf / -inf."""
    x = float(x)
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return format(x, ".10g")


def outage_cdf(params, rates, snr_db_list, trials, seed):
    """Monte Carlo outage probability Pr[C(H) < R] over an SNR grid.

    One channel ensemble (keyed by ``seed``) is drawn up front and reused
    at every SNR point and rate, so curves from the same seed are
    directly comparable across the grid. Capacity of each draw comes from
    the determinant route (via the per-channel Gram matrix, computed
    once).
    """
    rates = [float(r) for r in rates]
    snr_db_list = [float(s) for s in snr_db_list]
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not rates:
        raise ValueError("need at least one rate")
    if not snr_db_list:
        raise ValueError("need at least one SNR point")

    rng = substream(seed, PURPOSES["channel"])
    grams = []
    for _ in range(trials):
        h = draw_channel(rng, params.m_r, params.m_t)
        gram = h @ h.conj().T
        grams.append(0.5 * (gram + gram.conj().T))

    sigma_t2 = params.sigma_t2
    cap = np.empty((trials, len(snr_db_list)), dtype=float)
    for j, snr in enumerate(snr_db_list):
        sigma_r2 = params.m_t / 10.0 ** (snr / 10.0)
        for t, gram in enumerate(grams):
            cap[t, j] = _capacity_from_gram(gram.copy(), sigma_t2, sigma_r2)

    rows = []
    for rate in rates:
        for j, snr in enumerate(snr_db_list):
            p = np.count_nonzero(cap[:, j] < rate) / trials
            rows.append((rate, snr, float(p)))
    return OutageTable(rows=tuple(rows), trials=trials, seed=seed)


def snr_at_outage(table, rate, target_p):
    """SNR (dB) where the outage curve for ``rate`` crosses ``target_p``.

    Linear interpolation between the bracketing grid points of the
    non-increasing outage curve; nan when the curve never crosses the
    target inside the grid.
    """
    pts = sorted((s, p) for r, s, p in table.rows if r == float(rate))
    if not pts:
        raise KeyError(f"no rows for rate={rate}")
    for (s0, p0), (s1, p1) in zip(pts, pts[1:]):
        if p0 >= target_p >= p1:
            if p0 == p1:
                return float(s0)
            return float(s0 + (p0 - target_p) / (p0 - p1) * (s1 - s0))
    return float("nan")
