"""Slot-batched coding calls across the three interface generations.

Every generation produces bit-identical coded output because all of them
run the same per-segment primitives; they differ only in how the slot's
segments are grouped into coding-library calls (one call per segment or
8-segment batch, one per transport block, or one for the whole slot) and
therefore in call count and timing.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from math import ceil

import numpy as np

from .errors import (BackendUnavailableError, HarqBufferMissingError,
                     InvalidConfigError)
from .lpu import (CodingOpDescriptor, Granularity, OpKind, QueueHandle,
                  route_interface)
from .nr.basegraph import buffer_length
from .nr.mcs import compute_tbs, mcs_params, resource_elements
from .nr.pipeline import e_splits
from .nr.ratematch import RateMatchParams
from .nr.segmentation import segment_tb, split_payload
from .nr.softbuffer import (BufferLocation, SoftBuffer, new_soft_buffer,
                            noiseless_llrs)

MAX_PRBS = 273


class Direction(Enum):
    UL = "ul"
    DL = "dl"


class InterfaceGeneration(Enum):
    PER_CB = "per_cb"
    PER_TB = "per_tb"
    PER_SLOT = "per_slot"


@dataclass
class TransportBlockJob:
    """One UE's transport block within a slot."""

    ue_id: int
    payload: np.ndarray | None
    mcs_index: int
    mcs_table: str
    layers: int
    rv: int = 0
    harq_pid: int = 0
    prb_share: int = 1
    new_data: bool = True
    llr_streams: list[np.ndarray] | None = None   # UL soft input per CB

    def __post_init__(self):
        if self.prb_share < 1:
            raise InvalidConfigError("prb_share must be >= 1")
        if self.payload is not None:
            self.payload = np.asarray(self.payload, dtype=np.uint8)


@dataclass
class SlotCodingRequest:
    slot_id: int
    direction: Direction
    jobs: list[TransportBlockJob]
    interface_generation: InterfaceGeneration = InterfaceGeneration.PER_SLOT
    symbols: int = 12
    overhead: int = 0

    def validate(self) -> None:
        if not self.jobs:
            raise InvalidConfigError("a processed slot needs at least one job")
        if sum(j.prb_share for j in self.jobs) > MAX_PRBS:
            raise InvalidConfigError(
                f"PRB shares exceed the {MAX_PRBS}-PRB grid")
        for job in self.jobs:
            expected = compute_tbs(job.prb_share, self.symbols, job.layers,
                                   job.mcs_index, job.mcs_table,
                                   self.overhead)
            if job.payload is not None and job.payload.size != expected:
                raise InvalidConfigError(
                    f"job ue={job.ue_id}: payload {job.payload.size} != "
                    f"TBS {expected}")


@dataclass
class JobResult:
    ue_id: int
    streams: list[np.ndarray] | None = None      # DL rate-matched bits per CB
    payload: np.ndarray | None = None            # UL decoded payload
    tb_crc_ok: bool | None = None
    cb_crc_ok: list[bool] = field(default_factory=list)
    num_cbs: int = 0


@dataclass
class SlotCodingResult:
    slot_id: int
    direction: Direction
    generation: InterfaceGeneration
    job_results: list[JobResult]
    per_call_us: list[float]
    total_elapsed_us: float
    calls_made: int

    @property
    def all_crc_ok(self) -> bool:
        return all(j.tb_crc_ok and all(j.cb_crc_ok)
                   for j in self.job_results)


class HarqPool:
    """Soft buffers keyed by (ue, HARQ process, segment index)."""

    def __init__(self, location: BufferLocation = BufferLocation.HOST):
        self.location = location
        self._buffers: dict[tuple[int, int, int], SoftBuffer] = {}

    def fresh(self, key, plan) -> SoftBuffer:
        buf = new_soft_buffer(plan, location=self.location,
                              harq_pid=key[1])
        self._buffers[key] = buf
        return buf

    def existing(self, key) -> SoftBuffer:
        try:
            return self._buffers[key]
        except KeyError:
            raise HarqBufferMissingError(
                f"no soft buffer for ue={key[0]} pid={key[1]} cb={key[2]}")

    def release(self, ue_id: int, harq_pid: int) -> None:
        for key in [k for k in self._buffers
                    if k[0] == ue_id and k[1] == harq_pid]:
            del self._buffers[key]


@dataclass
class _TbWork:
    """Per-TB precomputed coding state shared by every generation."""
    job: TransportBlockJob
    plan: object
    params: list[RateMatchParams]
    qm: int
    items: list[dict]            # per-CB work units
    granularity: Granularity


def _prepare_tb(job: TransportBlockJob, request: SlotCodingRequest,
                caps, direction: Direction,
                harq: HarqPool | None) -> _TbWork:
    qm, rate = mcs_params(job.mcs_index, job.mcs_table)
    tbs = compute_tbs(job.prb_share, request.symbols, job.layers,
                      job.mcs_index, job.mcs_table, request.overhead)
    plan = segment_tb(tbs, rate)
    g_total = resource_elements(job.prb_share, request.symbols,
                                request.overhead) * qm * job.layers
    splits = e_splits(plan.num_cbs, g_total, qm, job.layers)
    ncb = buffer_length(plan.base_graph, plan.lifting_size)
    params = [RateMatchParams(e=e, rv=job.rv, qm=qm, ncb=ncb)
              for e in splits]
    granularity = route_interface(caps, plan.num_cbs)
    items = []
    if direction is Direction.DL:
        cbs = split_payload(job.payload, plan)
        for idx, (bits, rm) in enumerate(zip(cbs, params)):
            items.append({"plan": plan, "bits": bits, "param": rm,
                          "kbits": tbs / plan.num_cbs / 1000.0})
    else:
        streams = job.llr_streams
        if streams is None:
            if job.payload is None:
                raise InvalidConfigError(
                    "UL job needs llr_streams or a loopback payload")
            from .nr.pipeline import encode_tb
            enc = encode_tb(job.payload, plan, g_total, qm, job.layers,
                            job.rv)
            streams = [noiseless_llrs(s) for s in enc.streams]
        if len(streams) != plan.num_cbs:
            raise InvalidConfigError("llr stream count != segment count")
        for idx, (llrs, rm) in enumerate(zip(streams, params)):
            key = (job.ue_id, job.harq_pid, idx)
            if not job.new_data:
                if harq is None:
                    raise HarqBufferMissingError(
                        f"ue={job.ue_id}: combining needs a HARQ pool")
                buf = harq.existing(key)
            elif harq is not None:
                buf = harq.fresh(key, plan)
            else:
                buf = new_soft_buffer(plan)
            items.append({"plan": plan, "llrs": llrs, "param": rm,
                          "buffer": buf,
                          "kbits": tbs / plan.num_cbs / 1000.0})
    return _TbWork(job=job, plan=plan, params=params, qm=qm, items=items,
                   granularity=granularity)


def _group_calls(works: list[_TbWork], generation: InterfaceGeneration,
                 direction: Direction) -> list[list[tuple[int, dict]]]:
    """Call batches as (tb_index, item) lists, per the generation."""
    flat = [(t, item) for t, w in enumerate(works) for item in w.items]
    if generation is InterfaceGeneration.PER_SLOT:
        return [flat]
    if generation is InterfaceGeneration.PER_TB:
        return [[(t, item) for item in w.items]
                for t, w in enumerate(works)]
    if direction is Direction.DL:
        from .backends.model import ENCODE_CB_BATCH
        return [flat[i:i + ENCODE_CB_BATCH]
                for i in range(0, len(flat), ENCODE_CB_BATCH)]
    return [[entry] for entry in flat]


def _run_calls(executor: QueueHandle, direction: Direction,
               generation: InterfaceGeneration, works: list[_TbWork],
               calls: list[list[tuple[int, dict]]]
               ) -> tuple[list[list[dict | None]], list[float]]:
    """Execute call batches; returns per-TB outputs and per-call times."""
    device = executor.device
    if device is None:
        raise BackendUnavailableError("executor handle has no device")
    kind = OpKind.ENCODE if direction is Direction.DL else OpKind.DECODE
    op_name = "encode_cbs" if direction is Direction.DL else "decode_cbs"
    n_tb = len(works)
    n_calls = len(calls)
    outputs_per_tb: list[list] = [[] for _ in works]
    per_call_us: list[float] = []
    from .backends.emulated import EmulatedDevice
    emulated = isinstance(device, EmulatedDevice)
    for batch in calls:
        tbs_in_call = sorted({t for t, _ in batch})
        gran = Granularity.TB if all(
            works[t].granularity is Granularity.TB for t in tbs_in_call) \
            else Granularity.CB
        payload = None
        compute = (not emulated) or device.compute_payloads
        if compute:
            payload = {"op": op_name,
                       "items": [item for _, item in batch]}
        op = CodingOpDescriptor(kind=kind, granularity=gran,
                                payload=payload,
                                harq_location=None, op_id=len(per_call_us))
        if emulated:
            from .backends.software import execute_descriptor
            outs = execute_descriptor(op) if compute else None
            kbits = sum(item["kbits"] for _, item in batch)
            call = device.run_call_sync(
                executor.queue_index, direction_name(direction),
                generation.value, n_tb / n_calls, len(batch), kbits)
            per_call_us.append(call.service_us)
        else:
            t0 = time.perf_counter()
            outs = execute_descriptor_soft(device, op)
            per_call_us.append((time.perf_counter() - t0) * 1e6)
        for pos, (t, item) in enumerate(batch):
            outputs_per_tb[t].append(
                None if outs is None else _slice_output(outs, pos))
    return outputs_per_tb, per_call_us


def execute_descriptor_soft(device, op):
    completions = device.process([op])
    return completions[0].outputs


def _slice_output(outs: dict, pos: int) -> dict:
    return {k: v[pos] for k, v in outs.items()}


def direction_name(direction: Direction) -> str:
    return "encode" if direction is Direction.DL else "decode"


def encode_slot(request: SlotCodingRequest, executor: QueueHandle
                ) -> SlotCodingResult:
    """Encode all transport blocks of one downlink slot."""
    if request.direction is not Direction.DL:
        raise InvalidConfigError("encode_slot processes DL slots")
    return _process_slot(request, executor, None)


def decode_slot(request: SlotCodingRequest, executor: QueueHandle,
                harq: HarqPool | None = None) -> SlotCodingResult:
    """Decode all transport blocks of one uplink slot."""
    if request.direction is not Direction.UL:
        raise InvalidConfigError("decode_slot processes UL slots")
    return _process_slot(request, executor, harq)


def _process_slot(request: SlotCodingRequest, executor: QueueHandle,
                  harq: HarqPool | None) -> SlotCodingResult:
    request.validate()
    device = executor.device
    caps = device.capabilities
    works = [_prepare_tb(job, request, caps, request.direction, harq)
             for job in request.jobs]
    calls = _group_calls(works, request.interface_generation,
                         request.direction)
    outputs_per_tb, per_call_us = _run_calls(
        executor, request.direction, request.interface_generation, works,
        calls)
    results = []
    for w, outs in zip(works, outputs_per_tb):
        jr = JobResult(ue_id=w.job.ue_id, num_cbs=w.plan.num_cbs)
        if request.direction is Direction.DL:
            if outs and outs[0] is not None:
                jr.streams = [o["streams"] for o in outs]
            jr.tb_crc_ok = True
            jr.cb_crc_ok = [True] * w.plan.num_cbs
        else:
            if outs and outs[0] is not None:
                infos = [o["info_bits"] for o in outs]
                cb_ok = [bool(o["crc_ok"]) for o in outs]
                from .nr.segmentation import assemble_payload
                payload, tb_ok, seg_ok = assemble_payload(infos, w.plan)
                jr.payload = payload
                jr.tb_crc_ok = bool(tb_ok)
                jr.cb_crc_ok = [a and b for a, b in zip(cb_ok, seg_ok)]
            else:
                jr.tb_crc_ok = True
                jr.cb_crc_ok = [True] * w.plan.num_cbs
        results.append(jr)
    return SlotCodingResult(
        slot_id=request.slot_id, direction=request.direction,
        generation=request.interface_generation, job_results=results,
        per_call_us=per_call_us, total_elapsed_us=float(sum(per_call_us)),
        calls_made=len(calls))


BENCH_REPETITIONS = 100


def run_interface_bench(executor: QueueHandle,
                        directions=("decode", "encode"),
                        generations=tuple(InterfaceGeneration),
                        tb_counts=range(1, 9),
                        repetitions: int = BENCH_REPETITIONS,
                        bench_config=None) -> list[dict]:
    """Mean slot coding time per (direction, generation, TB count).

    The benchmark slot is a full grid equally shared between the TBs. On an
    emulated device the per-call shapes run straight through the timing
    model (deterministic in virtual time); per-slot samples are retained
    and summarized with nearest-rank percentiles.
    """
    from .backends.emulated import EmulatedDevice
    from .backends.model import BenchConfig, calls_for
    from .metrics import summarize

    device = executor.device
    if not isinstance(device, EmulatedDevice):
        raise InvalidConfigError(
            "the interface bench runs on an emulated device")
    cfg = bench_config or BenchConfig()
    gens = [g if isinstance(g, InterfaceGeneration)
            else InterfaceGeneration(g) for g in generations]
    rows = []
    for direction in directions:
        for gen in gens:
            for n_tb in tb_counts:
                shapes = cfg.tb_shapes(n_tb)
                n_cb = sum(c for _, c in shapes)
                kbits = sum(t for t, _ in shapes) / 1000.0
                n_calls = calls_for(gen.value, direction, n_tb, n_cb)
                samples = []
                for _ in range(repetitions):
                    total = 0.0
                    for call_shape in _bench_call_shapes(
                            gen.value, direction, n_tb, shapes):
                        call = device.run_call_sync(
                            executor.queue_index, direction, gen.value,
                            *call_shape)
                        total += call.service_us
                    samples.append(total)
                dist = summarize(samples)
                rows.append({
                    "direction": direction,
                    "generation": gen.value,
                    "n_tb": int(n_tb),
                    "mean_us": dist.mean,
                    "p50_us": dist.median,
                    "p90_us": dist.p90,
                    "calls_made": int(n_calls),
                })
    return rows


def _bench_call_shapes(generation: str, direction: str, n_tb: int,
                       tb_shapes: list[tuple[int, int]]
                       ) -> list[tuple[float, int, float]]:
    """(n_tb share, n_cb, kbits) per call for a benchmark slot."""
    from .backends.model import ENCODE_CB_BATCH, calls_for
    n_cb = sum(c for _, c in tb_shapes)
    kbits = sum(t for t, _ in tb_shapes) / 1000.0
    n_calls = calls_for(generation, direction, n_tb, n_cb)
    if generation == "per_slot":
        return [(float(n_tb), n_cb, kbits)]
    if generation == "per_tb":
        return [(1.0, c, t / 1000.0) for t, c in tb_shapes]
    # per_cb: spread TB bookkeeping evenly over the segment-granular calls
    tb_frac = n_tb / n_calls
    out = []
    if direction == "decode":
        for tbs, c in tb_shapes:
            out.extend([(tb_frac, 1, tbs / c / 1000.0)] * c)
        return out
    per_cb_kbits = kbits / n_cb
    remaining = n_cb
    for _ in range(n_calls):
        batch = min(ENCODE_CB_BATCH, remaining)
        out.append((tb_frac, batch, batch * per_cb_kbits))
        remaining -= batch
    return out
