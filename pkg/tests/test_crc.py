import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vranphy.errors import InvalidConfigError
from vranphy.nr import crc_append, crc_check, crc_compute, crc_length

POLYS = {"CRC24A": (0x864CFB, 24), "CRC24B": (0x800063, 24),
         "CRC16": (0x1021, 16)}


def crc_long_division(bits, kind):
    """Independent oracle: bit-by-bit polynomial long division."""
    poly, length = POLYS[kind]
    reg = 0
    mask = (1 << length) - 1
    top = 1 << (length - 1)
    for b in bits:
        reg ^= int(b) << (length - 1)
        if reg & top:
            reg = ((reg << 1) ^ poly) & mask
        else:
            reg = (reg << 1) & mask
    return np.array([(reg >> (length - 1 - i)) & 1 for i in range(length)],
                    dtype=np.uint8)


@pytest.mark.parametrize("kind", ["CRC24A", "CRC24B", "CRC16"])
def test_zero_payload_zero_checksum(kind):
    out = crc_compute(np.zeros(64, dtype=np.uint8), kind)
    assert not out.any()


@pytest.mark.parametrize("kind", ["CRC24A", "CRC24B", "CRC16"])
def test_append_then_verify(kind, rng):
    payload = rng.integers(0, 2, 313).astype(np.uint8)
    assert crc_check(crc_append(payload, kind), kind)


def test_seeded_1024_bits_against_long_division_oracle():
    rng = np.random.default_rng(1024)
    payload = rng.integers(0, 2, 1024).astype(np.uint8)
    for kind in POLYS:
        expected = crc_long_division(payload, kind)
        np.testing.assert_array_equal(crc_compute(payload, kind), expected)


@settings(max_examples=50, deadline=None)
@given(data=st.binary(min_size=0, max_size=96),
       kind=st.sampled_from(sorted(POLYS)))
def test_matches_oracle_on_arbitrary_payloads(data, kind):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    np.testing.assert_array_equal(crc_compute(bits, kind),
                                  crc_long_division(bits, kind))


@settings(max_examples=30, deadline=None)
@given(data=st.binary(min_size=1, max_size=64),
       kind=st.sampled_from(sorted(POLYS)))
def test_single_bit_flip_always_detected(data, kind):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    block = crc_append(bits, kind)
    flip = len(block) // 2
    block[flip] ^= 1
    assert not crc_check(block, kind)


def test_empty_payload_checksum_is_zero():
    assert not crc_compute(np.array([], dtype=np.uint8), "CRC16").any()


def test_unknown_kind_rejected():
    with pytest.raises(InvalidConfigError):
        crc_compute(np.zeros(8, dtype=np.uint8), "CRC32")
    with pytest.raises(InvalidConfigError):
        crc_length("CRC32")


def test_short_block_fails_check():
    assert not crc_check(np.zeros(10, dtype=np.uint8), "CRC24A")
