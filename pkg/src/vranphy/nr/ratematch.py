"""Circular-buffer rate matching and the modulation-order interleaver.

The circular buffer is the lifted codeword minus its punctured 2Z head.
Selection starts at the redundancy-version offset, skips filler positions
and wraps; the selected stream is then block-interleaved with Qm rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError
from .basegraph import PUNCTURED_BLOCKS, buffer_length
from .segmentation import SegmentationPlan

MAX_E_FACTOR = 8  # cap on repetition: E may wrap the buffer at most this often

_K0_NUM = {1: {0: 0, 1: 17, 2: 33, 3: 56},
           2: {0: 0, 1: 13, 2: 25, 3: 43}}
_N_BLOCKS = {1: 66, 2: 50}


@dataclass(frozen=True)
class RateMatchParams:
    e: int              # output bits for this code block
    rv: int             # redundancy version 0..3
    qm: int             # modulation order
    ncb: int            # circular-buffer length

    def __post_init__(self):
        if self.e <= 0:
            raise InvalidConfigError("E must be positive")
        if self.rv not in (0, 1, 2, 3):
            raise InvalidConfigError("rv must be one of 0..3")
        if self.qm not in (2, 4, 6, 8):
            raise InvalidConfigError("Qm must be one of 2,4,6,8")


def k0_offset(base_graph: int, z: int, rv: int, ncb: int | None = None) -> int:
    """Circular-buffer start position for a redundancy version."""
    if rv not in (0, 1, 2, 3):
        raise InvalidConfigError("rv must be one of 0..3")
    if ncb is None:
        ncb = buffer_length(base_graph, z)
    num = _K0_NUM[base_graph][rv]
    den = _N_BLOCKS[base_graph] * z
    return (num * ncb // den) * z


def filler_range(plan: SegmentationPlan) -> tuple[int, int]:
    """[start, end) of filler positions inside the circular buffer."""
    z = plan.lifting_size
    start = plan.k_prime - PUNCTURED_BLOCKS * z
    end = plan.k - PUNCTURED_BLOCKS * z
    return start, end


def selection_positions(plan: SegmentationPlan, params: RateMatchParams
                        ) -> np.ndarray:
    """Buffer positions read for E output bits (filler skipped, wrapping)."""
    z = plan.lifting_size
    ncb = params.ncb
    full = buffer_length(plan.base_graph, z)
    if ncb > full or ncb <= 0:
        raise InvalidConfigError(f"Ncb={ncb} outside (0, {full}]")
    if params.e > MAX_E_FACTOR * ncb:
        raise InvalidConfigError(
            f"E={params.e} exceeds {MAX_E_FACTOR}x the circular buffer")
    if params.e % params.qm:
        raise InvalidConfigError("E must be a multiple of Qm")
    k0 = k0_offset(plan.base_graph, z, params.rv, ncb)
    ring = (k0 + np.arange(ncb)) % ncb
    f_lo, f_hi = filler_range(plan)
    keep = ring[(ring < f_lo) | (ring >= f_hi)]
    if keep.size == 0:
        raise InvalidConfigError("buffer is all filler")
    return np.resize(keep, params.e)


def interleave(selected: np.ndarray, qm: int) -> np.ndarray:
    """f[i*Qm + j] = e[j*(E/Qm) + i]: write row-wise in Qm rows, read columns."""
    e = np.asarray(selected)
    if e.size % qm:
        raise InvalidConfigError("E must be a multiple of Qm")
    return e.reshape(qm, e.size // qm).T.reshape(-1)


def deinterleave(received: np.ndarray, qm: int) -> np.ndarray:
    f = np.asarray(received)
    if f.size % qm:
        raise InvalidConfigError("length must be a multiple of Qm")
    return f.reshape(f.size // qm, qm).T.reshape(-1)


def rate_match(codeword: np.ndarray, plan: SegmentationPlan,
               params: RateMatchParams) -> np.ndarray:
    """E transmitted bits for one code block's full lifted codeword."""
    cw = np.asarray(codeword, dtype=np.uint8)
    z = plan.lifting_size
    expected = buffer_length(plan.base_graph, z) + PUNCTURED_BLOCKS * z
    if cw.size != expected:
        raise InvalidConfigError(
            f"codeword length {cw.size} != {expected}")
    buffer = cw[PUNCTURED_BLOCKS * z:][: params.ncb]
    positions = selection_positions(plan, params)
    return interleave(buffer[positions], params.qm)
