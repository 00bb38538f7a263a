"""Flooding normalized min-sum LDPC decoding.

Message passing runs vectorized over all lifted edges at once: check-local
views are gathered with precomputed indices, per-check sign parities and
two-smallest magnitudes come from grouped reductions, and variable totals
are rebuilt by a grouped scatter-sum. Iteration stops early as soon as the
hard decision satisfies every parity check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError
from . import crc
from .basegraph import PUNCTURED_BLOCKS, lifted
from .segmentation import CB_CRC, SegmentationPlan
from .softbuffer import SoftBuffer

NORMALIZATION = 0.75
DEFAULT_MAX_ITERS = 8
_MSG_CLAMP = float(1 << 24)
# values at or above this magnitude are treated as exactly known, which
# enables erasure peeling of punctured/untransmitted positions
_CERTAIN_LLR = float(1 << 19)
_MAX_PEEL_PASSES = 16


@dataclass(frozen=True)
class DecodeResult:
    info_bits: np.ndarray     # K' bits: segment data incl. its CRC field
    crc_ok: bool
    iterations_used: int
    parity_ok: bool


def ldpc_decode(buffer: SoftBuffer, plan: SegmentationPlan,
                max_iters: int = DEFAULT_MAX_ITERS) -> DecodeResult:
    """Decode one code block from its soft buffer."""
    st = lifted(plan.base_graph, plan.lifting_size)
    z = plan.lifting_size
    ncb_full = st.n_full - PUNCTURED_BLOCKS * z
    if buffer.llrs.size > ncb_full:
        raise InvalidConfigError("buffer longer than the circular buffer")
    channel = np.zeros(st.n_full, dtype=np.float32)
    channel[PUNCTURED_BLOCKS * z:PUNCTURED_BLOCKS * z + buffer.llrs.size] = \
        buffer.llrs

    totals, iters = _min_sum(st, channel, max_iters)
    hard = (totals < 0).astype(np.uint8)
    parity_ok = st.syndrome_ok(hard)
    info = hard[: plan.k_prime]
    crc_ok = _crc_verdict(info, plan)
    return DecodeResult(info_bits=info, crc_ok=crc_ok,
                        iterations_used=iters, parity_ok=parity_ok)


def _crc_verdict(info: np.ndarray, plan: SegmentationPlan) -> bool:
    if plan.cb_crc_present:
        return crc.crc_check(info, CB_CRC)
    # single-segment block: the TB-level CRC sits at the segment tail
    return crc.crc_check(info[: plan.tb_size_bits], plan.tb_crc_kind)


def _peel_erasures(st, totals: np.ndarray) -> None:
    """Resolve zero-LLR positions whose checks are otherwise fully certain.

    A parity check with exactly one unknown neighbour and every other
    neighbour at certainty magnitude determines the unknown bit exactly.
    Runs to a fixpoint; noiseless inputs resolve the punctured head here
    without any min-sum iteration. No-op for noisy (sub-certainty) inputs.
    """
    clamp = np.float32(_CERTAIN_LLR * 2)
    for _ in range(_MAX_PEEL_PASSES):
        unknown = totals == 0
        certain = np.abs(totals) >= _CERTAIN_LLR
        if not unknown.any() or not certain.any():
            return
        lu = unknown[st.var_index]
        lc = certain[st.var_index]
        n_unknown = np.add.reduceat(lu.astype(np.int16), st.row_starts,
                                    axis=0)
        n_soft = np.add.reduceat((~lu & ~lc).astype(np.int16),
                                 st.row_starts, axis=0)
        solvable = (n_unknown == 1) & (n_soft == 0)
        if not solvable.any():
            return
        neg_known = ((totals[st.var_index] < 0) & ~lu).astype(np.uint8)
        parity = np.bitwise_xor.reduceat(neg_known, st.row_starts, axis=0)
        sel = lu & solvable[st.rows]
        flat_idx = st.var_index[sel]
        bit = parity[st.rows][sel]
        totals[flat_idx] = np.where(bit, -clamp, clamp)


def _min_sum(st, channel: np.ndarray, max_iters: int
             ) -> tuple[np.ndarray, int]:
    totals = channel.copy()
    _peel_erasures(st, totals)
    if st.syndrome_ok((totals < 0).astype(np.uint8)):
        return totals, 0
    n_edges = st.n_edges
    z = st.z
    c2v = np.zeros((n_edges, z), dtype=np.float32)
    edge_rows = np.arange(n_edges)[:, None]
    row_of_edge = st.rows
    for it in range(1, max_iters + 1):
        v = totals[st.var_index] - c2v
        mag = np.abs(v)
        neg = (v < 0).astype(np.uint8)
        parity = np.bitwise_xor.reduceat(neg, st.row_starts, axis=0)
        m1 = np.minimum.reduceat(mag, st.row_starts, axis=0)
        m1_edge = m1[row_of_edge]
        at_min = mag == m1_edge
        n_min = np.add.reduceat(at_min.astype(np.int32), st.row_starts,
                                axis=0)
        masked = np.where(at_min, np.float32(np.inf), mag)
        m2 = np.minimum.reduceat(masked, st.row_starts, axis=0)
        unique_min = at_min & (n_min[row_of_edge] == 1)
        out_mag = np.where(unique_min, m2[row_of_edge], m1_edge)
        sign = 1.0 - 2.0 * (parity[row_of_edge] ^ neg).astype(np.float32)
        c2v = NORMALIZATION * sign * out_mag
        np.clip(c2v, -_MSG_CLAMP, _MSG_CLAMP, out=c2v)
        # back to variable coordinates and per-column sums
        contrib = c2v[edge_rows, st.to_var_pos]
        col_sums = np.add.reduceat(contrib[st.col_perm], st.col_starts,
                                   axis=0)
        totals = channel + col_sums.reshape(-1)
        if st.syndrome_ok((totals < 0).astype(np.uint8)):
            return totals, it
    return totals, max_iters
