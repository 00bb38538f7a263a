import numpy as np
import pytest

from vranphy.nr import (buffer_length, encode_tb, ldpc_decode, loopback_tb,
                        mcs_params, new_soft_buffer, noiseless_llrs,
                        rate_recover_and_combine, segment_tb)

# empirically calibrated: far inside the correction capability of the
# full-buffer configuration used below (the waterfall sits above 260)
CALIBRATED_FLIPS = 64


def _full_buffer_e(plan):
    ncb = buffer_length(plan.base_graph, plan.lifting_size)
    return 2 * ((ncb - plan.filler_per_cb) // 2)


def test_noiseless_round_trip_is_nearly_instant(rng):
    plan = segment_tb(300, 0.5)
    payload = rng.integers(0, 2, 300).astype(np.uint8)
    out = loopback_tb(payload, plan, _full_buffer_e(plan), qm=2, layers=1)
    assert out.all_ok
    np.testing.assert_array_equal(out.payload, payload)
    assert all(it <= 2 for it in out.iterations)


def test_calibrated_sign_flips_corrected():
    plan = segment_tb(300, 0.5)
    e = _full_buffer_e(plan)
    for seed in range(20):
        r = np.random.default_rng(seed)
        payload = r.integers(0, 2, 300).astype(np.uint8)
        enc = encode_tb(payload, plan, e, qm=2, layers=1)
        llrs = noiseless_llrs(enc.streams[0], magnitude=8.0)
        idx = r.choice(llrs.size, CALIBRATED_FLIPS, replace=False)
        llrs[idx] = -llrs[idx]
        buf = new_soft_buffer(plan)
        rate_recover_and_combine(llrs, plan, enc.params[0], buf)
        res = ldpc_decode(buf, plan)
        assert res.crc_ok, seed
        np.testing.assert_array_equal(
            res.info_bits[: plan.payload_bits], payload)


def test_uniform_random_llrs_rejected_by_crc():
    # multi-segment plan: every segment carries a 24-bit checksum
    qm, rate = mcs_params(28, "T1")
    plan = segment_tb(9000, float(rate))
    assert plan.cb_crc_present
    for seed in range(40):
        r = np.random.default_rng(1000 + seed)
        buf = new_soft_buffer(plan)
        lo = plan.k_prime - 2 * plan.lifting_size
        buf.llrs[:] = r.uniform(-10, 10, buf.llrs.size).astype(np.float32)
        res = ldpc_decode(buf, plan, max_iters=2)
        assert not res.crc_ok, seed


def test_iterations_reported_and_bounded(rng):
    plan = segment_tb(300, 0.5)
    e = _full_buffer_e(plan)
    payload = rng.integers(0, 2, 300).astype(np.uint8)
    enc = encode_tb(payload, plan, e, qm=2, layers=1)
    llrs = noiseless_llrs(enc.streams[0], magnitude=6.0)
    idx = rng.choice(llrs.size, CALIBRATED_FLIPS, replace=False)
    llrs[idx] = -llrs[idx]
    buf = new_soft_buffer(plan)
    rate_recover_and_combine(llrs, plan, enc.params[0], buf)
    res = ldpc_decode(buf, plan, max_iters=8)
    assert 1 <= res.iterations_used <= 8
    assert res.parity_ok


def test_quantized_buffer_round_trip(rng):
    plan = segment_tb(300, 0.5)
    e = _full_buffer_e(plan)
    payload = rng.integers(0, 2, 300).astype(np.uint8)
    enc = encode_tb(payload, plan, e, qm=2, layers=1)
    buf = new_soft_buffer(plan, quantized=True)
    rate_recover_and_combine(noiseless_llrs(enc.streams[0], 20.0), plan,
                             enc.params[0], buf)
    res = ldpc_decode(buf, plan)
    assert res.crc_ok
    np.testing.assert_array_equal(res.info_bits[: plan.payload_bits],
                                  payload)


def test_punctured_head_recovered_from_parity(rng):
    # the first 2Z information bits are never transmitted; the decoder
    # must reconstruct them exactly
    plan = segment_tb(300, 0.5)
    payload = rng.integers(0, 2, 300).astype(np.uint8)
    out = loopback_tb(payload, plan, _full_buffer_e(plan), qm=2, layers=1)
    head = out.payload[: 2 * plan.lifting_size]
    np.testing.assert_array_equal(head, payload[: 2 * plan.lifting_size])
