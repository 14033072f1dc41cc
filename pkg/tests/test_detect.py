"""Hard and soft detection: linear equalizers, exact ML, max-log LLRs."""

import itertools

import numpy as np
import pytest

from mimolink.detect import (
    FrameDetector,
    maxlog_app_llrs,
    ml_detect,
    mmse_detect,
    zf_detect,
)
from mimolink.model import transmit
from mimolink.modem import bpsk, qam16, qpsk
from mimolink.streams import substream

from conftest import crandn


def _exhaustive_min(y, h, const):
    best = None
    for idx in itertools.product(range(const.points.size), repeat=h.shape[1]):
        s = const.points[list(idx)]
        m = float(np.sum(np.abs(y - h @ s) ** 2))
        if best is None or m < best[1]:
            best = (np.array(idx), m)
    return best


def test_zf_noiseless_recovery(rng):
    const = qam16()
    h = crandn(rng, 4, 4)
    idx = rng.integers(0, 16, 4)
    y = h @ const.points[idx]
    res = zf_detect(y, h, const)
    np.testing.assert_array_equal(res.hard_symbols, idx)
    assert res.metric == pytest.approx(0.0, abs=1e-18)


def test_zf_invariant_under_left_multiplication(rng):
    const = qam16()
    for _ in range(30):
        h = crandn(rng, 4, 4)
        y = crandn(rng, 4)
        w = crandn(rng, 4, 4) + 2.0 * np.eye(4)
        a = zf_detect(y, h, const)
        b = zf_detect(w @ y, w @ h, const)
        np.testing.assert_array_equal(a.hard_symbols, b.hard_symbols)


def test_mmse_closed_form(rng):
    const = qam16()
    y = crandn(rng, 4) * 2.0
    res = mmse_detect(y, np.eye(4, dtype=complex), 1.0, const)
    np.testing.assert_array_equal(res.hard_symbols, const.quantize(y / 2.0))


def test_mmse_approaches_zf(rng):
    const = qam16()
    for _ in range(20):
        h = crandn(rng, 4, 4)
        y = h @ const.points[rng.integers(0, 16, 4)] + 0.05 * crandn(rng, 4)
        a = zf_detect(y, h, const)
        b = mmse_detect(y, h, 1e-12, const)
        np.testing.assert_array_equal(a.hard_symbols, b.hard_symbols)


def test_ml_noiseless(rng):
    const = qam16()
    h = crandn(rng, 4, 4)
    idx = rng.integers(0, 16, 4)
    res = ml_detect(h @ const.points[idx], h, const)
    np.testing.assert_array_equal(res.hard_symbols, idx)
    assert res.metric == pytest.approx(0.0, abs=1e-18)


def test_ml_qpsk_2x2_exhaustive(rng):
    const = qpsk()
    for _ in range(60):
        h = crandn(rng, 2, 2)
        y = crandn(rng, 2) * 1.5
        res = ml_detect(y, h, const)
        want_idx, want_metric = _exhaustive_min(y, h, const)
        np.testing.assert_array_equal(res.hard_symbols, want_idx)
        assert res.metric == pytest.approx(want_metric, rel=1e-12)


def test_ml_sphere_equals_exhaustive(rng):
    const = qam16()
    for _ in range(120):
        h = crandn(rng, 4, 4)
        y = h @ const.points[rng.integers(0, 16, 4)] + 0.4 * crandn(rng, 4)
        a = ml_detect(y, h, const, method="sphere")
        b = ml_detect(y, h, const, method="exhaustive")
        np.testing.assert_array_equal(a.hard_symbols, b.hard_symbols)
        assert a.metric == b.metric  # bitwise identical by construction


def test_ml_beats_zf_metric(rng):
    const = qam16()
    for _ in range(40):
        h = crandn(rng, 4, 4)
        y = crandn(rng, 4) * 2.0
        ml = ml_detect(y, h, const)
        zf = zf_detect(y, h, const)
        assert ml.metric <= zf.metric + 1e-12


def test_ml_rectangular(rng):
    const = qpsk()
    h = crandn(rng, 5, 2)
    y = crandn(rng, 5)
    a = ml_detect(y, h, const, method="sphere")
    idx, metric = _exhaustive_min(y, h, const)
    np.testing.assert_array_equal(a.hard_symbols, idx)
    assert a.metric == pytest.approx(metric, rel=1e-12)


def test_llr_bpsk_closed_form(rng):
    const = bpsk()
    h = np.array([[1.0 + 0.0j]])
    for _ in range(25):
        y = crandn(rng, 1)
        for sigma2 in (0.5, 1.0, 2.0):
            llr = maxlog_app_llrs(y, h, sigma2, const)
            assert llr.shape == (1,)
            assert llr[0] == pytest.approx(4.0 * y[0].real / sigma2, rel=1e-9)


def test_llr_signs_match_ml(rng):
    const = qam16()
    for _ in range(60):
        h = crandn(rng, 4, 4)
        y = h @ const.points[rng.integers(0, 16, 4)] + 0.5 * crandn(rng, 4)
        llrs = maxlog_app_llrs(y, h, 0.3, const)
        ml_bits = const.indices_to_bits(ml_detect(y, h, const).hard_symbols)
        np.testing.assert_array_equal((llrs < 0).astype(int), ml_bits.reshape(-1))


def test_llr_sigma_scaling(rng):
    const = qam16()
    h = crandn(rng, 4, 4)
    y = crandn(rng, 4)
    base = maxlog_app_llrs(y, h, 1.0, const)
    half = maxlog_app_llrs(y, h, 2.0, const)
    np.testing.assert_allclose(half, base / 2.0, rtol=1e-12)


def test_llr_exhaustive_route(rng):
    const = qam16()
    for _ in range(25):
        h = crandn(rng, 4, 4)
        y = crandn(rng, 4) * 1.2
        a = maxlog_app_llrs(y, h, 0.7, const, method="sphere")
        b = maxlog_app_llrs(y, h, 0.7, const, method="exhaustive")
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


def test_llr_magnitude_is_constrained_metric_gap(rng):
    # |L_i| * sigma2 equals the metric gap between the two bit hypotheses
    const = qpsk()
    h = crandn(rng, 2, 2)
    y = crandn(rng, 2)
    sigma2 = 0.9
    llrs = maxlog_app_llrs(y, h, sigma2, const)
    n_bits = const.bits_per_symbol
    for i in range(llrs.size):
        ant, bit = divmod(i, n_bits)
        mins = {0: np.inf, 1: np.inf}
        for idx in itertools.product(range(const.points.size), repeat=2):
            s = const.points[list(idx)]
            m = float(np.sum(np.abs(y - h @ s) ** 2))
            b = const.bit_table[idx[ant], bit]
            mins[int(b)] = min(mins[int(b)], m)
        assert llrs[i] == pytest.approx((mins[1] - mins[0]) / sigma2, rel=1e-9)


def test_frame_detector_matches_single_shot(rng):
    const = qam16()
    h = crandn(rng, 4, 4)
    s_idx = rng.integers(0, 16, (4, 8))
    y = transmit(h, const.points[s_idx], 1e-3, 0.05, substream(3))
    for name, ref in (
        ("zf", lambda v: zf_detect(v, h, const).hard_symbols),
        ("mmse", lambda v: mmse_detect(v, h, 0.05, const).hard_symbols),
        ("ml", lambda v: ml_detect(v, h, const).hard_symbols),
    ):
        det = FrameDetector(h, const, name, sigma_r2=0.05)
        got = det.hard_indices(y)
        want = np.stack([ref(y[:, j]) for j in range(8)], axis=1)
        np.testing.assert_array_equal(got, want)
    det = FrameDetector(h, const, "app")
    llrs = det.llrs(y, 0.05)
    want = np.concatenate(
        [maxlog_app_llrs(y[:, j], h, 0.05, const) for j in range(8)]
    )
    np.testing.assert_allclose(llrs, want, rtol=1e-9, atol=1e-12)


def test_frame_detector_bit_order(rng):
    const = qam16()
    h = np.eye(4, dtype=complex)
    idx = rng.integers(0, 16, (4, 2))
    det = FrameDetector(h, const, "zf")
    bits = det.hard_bits(const.points[idx])
    want = const.indices_to_bits(idx.T.reshape(-1)).reshape(-1)
    np.testing.assert_array_equal(bits, want)
