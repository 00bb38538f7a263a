"""Emulated coding accelerators with calibrated timing and contention.

The device runs a single-threaded virtual-time event engine. Each queue
serves its calls in order, one at a time; across queues, up to
``parallel_servers`` calls hold a server at once, granted in global FIFO
order of arrival. Base call latencies come from the calibrated linear
models; only a fraction of that latency occupies a server (the rest is
transfer/driver latency that does not consume the shared cores), so the
rated capacity sits well above the offered load. A heavy-tail delay is
added to calls arriving while the device-wide outstanding count exceeds
the server count, which is what turns instance sharing into latency
spikes while leaving medians nearly unchanged.
"""
from __future__ import annotations

import heapq
import itertools
import time as _time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import InvalidConfigError
from ..lpu import (Completion, CodingOpDescriptor, DEFAULT_QUEUE_DEPTH,
                   LpuCapabilities, QueueAllocator, QueueHandle, discover,
                   validate_granularity, validate_harq_placement)
from .model import (BenchConfig, JitterSpec, ServiceTimeModel,
                    calibrate_per_generation)


class ClockMode(Enum):
    VIRTUAL = "virtual"
    WALL = "wall"


@dataclass
class CallRecord:
    queue_index: int
    direction: str
    generation: str
    n_tb: int
    n_cb: int
    kbits: float
    arrival_us: float
    base_us: float = 0.0
    spike_us: float = 0.0
    start_us: float | None = None
    completion_us: float | None = None
    op: CodingOpDescriptor | None = None
    outputs: object = None
    seq: int = -1

    @property
    def elapsed_us(self) -> float:
        return self.completion_us - self.arrival_us

    @property
    def service_us(self) -> float:
        return self.base_us + self.spike_us


@dataclass
class EmulatedDevice:
    """A shared coding accelerator behind per-instance queues."""

    device_id: str
    capabilities: LpuCapabilities
    models: dict[tuple[str, str], ServiceTimeModel]
    parallel_servers: int = 8
    spike: JitterSpec = field(default_factory=JitterSpec)
    seed: int = 0
    clock_mode: ClockMode = ClockMode.VIRTUAL
    queue_depth: int = DEFAULT_QUEUE_DEPTH
    compute_payloads: bool = True
    occupancy_fraction: float = 0.25   # share of call latency a core is held

    def __post_init__(self):
        if not 0.0 < self.occupancy_fraction <= 1.0:
            raise InvalidConfigError("occupancy_fraction must be in (0, 1]")
        self.allocator = QueueAllocator(self.device_id,
                                        self.capabilities.num_queues,
                                        self.queue_depth)
        self._rng = np.random.default_rng(self.seed)
        self._seq = itertools.count()
        self.now_us = 0.0
        # events: (time, phase, seq, call); phase 0 = core release,
        # phase 1 = completion (result visible)
        self._events: list[tuple[float, int, int, CallRecord]] = []
        self._pending: dict[int, list[CallRecord]] = {}
        self._in_service: dict[int, CallRecord | None] = {}
        self._done: dict[int, list[CallRecord]] = {}
        self._q_outstanding: dict[int, int] = {}
        self._outstanding = 0
        self._servers_busy = 0

    # -- service model ----------------------------------------------------
    @property
    def model_decode(self) -> ServiceTimeModel:
        return self.models[("decode", "per_slot")]

    @property
    def model_encode(self) -> ServiceTimeModel:
        return self.models[("encode", "per_slot")]

    def service_model(self, direction: str, generation: str
                      ) -> ServiceTimeModel:
        try:
            return self.models[(direction, generation)]
        except KeyError:
            raise InvalidConfigError(
                f"{self.device_id}: no model for {direction}/{generation}")

    def base_service_us(self, direction: str, generation: str, n_tb: int,
                        n_cb: int, kbits: float) -> float:
        if n_cb == 0:
            return 0.0
        model = self.service_model(direction, generation)
        return model.call_time_us(n_tb, n_cb, kbits)

    # -- event engine ------------------------------------------------------
    def _queue_state(self, qidx: int):
        pend = self._pending.setdefault(qidx, [])
        self._in_service.setdefault(qidx, None)
        done = self._done.setdefault(qidx, [])
        return pend, done

    def submit(self, qidx: int, arrival_us: float, direction: str,
               generation: str, n_tb: int, n_cb: int, kbits: float,
               op: CodingOpDescriptor | None = None) -> CallRecord:
        """Add one call at the given virtual arrival time."""
        if arrival_us < self.now_us - 1e-9:
            raise InvalidConfigError("arrivals must be non-decreasing")
        self.advance_to(arrival_us)
        call = CallRecord(queue_index=qidx, direction=direction,
                          generation=generation, n_tb=n_tb, n_cb=n_cb,
                          kbits=kbits, arrival_us=arrival_us, op=op)
        call.seq = next(self._seq)
        call.base_us = self.base_service_us(direction, generation, n_tb,
                                            n_cb, kbits)
        occupancy = self._outstanding + 1
        if self.spike.enabled and occupancy > self.parallel_servers:
            draw = self._rng.standard_normal()
            call.spike_us = float(
                self.spike.scale_us * np.exp(self.spike.sigma * draw))
        pend, _ = self._queue_state(qidx)
        pend.append(call)
        self._outstanding += 1
        self._q_outstanding[qidx] = self._q_outstanding.get(qidx, 0) + 1
        self._try_start()
        return call

    def _try_start(self) -> None:
        while self._servers_busy < self.parallel_servers:
            best = None
            for qidx, pend in self._pending.items():
                if pend and self._in_service.get(qidx) is None:
                    head = pend[0]
                    key = (head.arrival_us, head.seq)
                    if best is None or key < best[0]:
                        best = (key, qidx)
            if best is None:
                return
            qidx = best[1]
            call = self._pending[qidx].pop(0)
            call.start_us = max(self.now_us, call.arrival_us)
            hold = self.occupancy_fraction * call.base_us
            call.completion_us = call.start_us + call.service_us
            release = min(call.start_us + hold, call.completion_us)
            self._in_service[qidx] = call
            self._servers_busy += 1
            heapq.heappush(self._events, (release, 0, call.seq, call))
            heapq.heappush(self._events,
                           (call.completion_us, 1, call.seq, call))

    def advance_to(self, t_us: float) -> list[CallRecord]:
        """Process events up to ``t_us``; returns the completed calls."""
        finished = []
        while self._events and self._events[0][0] <= t_us + 1e-9:
            when, phase, _, call = heapq.heappop(self._events)
            self.now_us = max(self.now_us, when)
            if phase == 0:
                self._in_service[call.queue_index] = None
                self._servers_busy -= 1
                self._try_start()
            else:
                self._outstanding -= 1
                self._q_outstanding[call.queue_index] -= 1
                self._done[call.queue_index].append(call)
                finished.append(call)
        self.now_us = max(self.now_us, t_us)
        return finished

    def drain(self) -> list[CallRecord]:
        return self.advance_to(float("inf"))

    def pop_completed(self) -> list[CallRecord]:
        """Empty every queue's done list (completion order).

        Completions can be produced by the implicit clock advance inside
        ``submit``, so harness code must collect from here rather than from
        ``advance_to`` return values.
        """
        out = []
        for done in self._done.values():
            out.extend(done)
            done.clear()
        out.sort(key=lambda c: (c.completion_us, c.seq))
        return out

    def run_call_sync(self, qidx: int, direction: str, generation: str,
                      n_tb: int, n_cb: int, kbits: float,
                      op: CodingOpDescriptor | None = None) -> CallRecord:
        """Submit at the current clock and advance until completion."""
        call = self.submit(qidx, self.now_us, direction, generation, n_tb,
                           n_cb, kbits, op=op)
        while call.completion_us is None or self.now_us < call.completion_us:
            if not self._events:
                raise InvalidConfigError("event engine stalled")
            self.advance_to(self._events[0][0])
        if self.clock_mode is ClockMode.WALL:
            _time.sleep(call.service_us / 1e6)
        return call

    # -- lpu surface --------------------------------------------------------
    def enqueue(self, handle: QueueHandle, ops: list[CodingOpDescriptor]
                ) -> int:
        self._queue_state(handle.queue_index)
        free = handle.depth - self._q_outstanding.get(handle.queue_index, 0)
        accepted = 0
        for op in ops:
            if accepted >= free:
                break
            validate_granularity(self.capabilities, op)
            validate_harq_placement(self.capabilities, op)
            shape = op.shape or {}
            outputs = None
            if self.compute_payloads and op.payload is not None:
                from .software import execute_descriptor
                outputs = execute_descriptor(op)
            call = self.submit(handle.queue_index, self.now_us,
                               "decode" if op.kind.value == "decode"
                               else "encode",
                               shape.get("generation", "per_slot"),
                               shape.get("n_tb", 1), shape.get("n_cb", 1),
                               shape.get("kbits", 0.0), op=op)
            call.outputs = outputs
            accepted += 1
        return accepted

    def dequeue(self, handle: QueueHandle, max_completions: int
                ) -> list[Completion]:
        """Poll completions; in virtual mode waits (jumps the clock) for
        the queue's in-flight ops up to the requested count."""
        pend, done = self._queue_state(handle.queue_index)
        while (len(done) < max_completions and
               self._q_outstanding.get(handle.queue_index, 0) > 0):
            if not self._events:
                break
            self.advance_to(self._events[0][0])
        out = []
        for call in done[:max_completions]:
            op_id = call.op.op_id if call.op is not None else call.seq
            out.append(Completion(op_id=op_id, status="ok",
                                  outputs=call.outputs,
                                  service_time_us=call.elapsed_us))
        del done[:max_completions]
        return out


def emulated_service_time(device: EmulatedDevice, shape: dict) -> float:
    """Deterministic full-request service time on an idle device.

    The request's calls run back to back through one queue, so the virtual
    elapsed time is the serialized sum of per-call times.
    """
    from .model import calls_for
    n_tb = int(shape.get("n_tb", 1))
    n_cb = int(shape.get("n_cb", 0))
    kbits = float(shape.get("total_bits", 0)) / 1000.0
    generation = shape.get("generation", "per_slot")
    direction = shape.get("direction", "decode")
    if n_cb == 0:
        return 0.0
    calls = calls_for(generation, direction, n_tb, n_cb)
    per_call_tb = n_tb / calls
    per_call_cb = n_cb / calls
    per_call_kbits = kbits / calls
    model = device.service_model(direction, generation)
    return calls * model.call_time_us(per_call_tb, per_call_cb,
                                      per_call_kbits)


# -- shipped device profiles -------------------------------------------------

# Heavy-tail spike defaults; frozen by the contention calibration run.
DEFAULT_SPIKE = JitterSpec(kind="lognormal", scale_us=20.0, sigma=1.5)


def make_emulated_t2(seed: int = 0, spike: JitterSpec | None = None,
                     compute_payloads: bool = True,
                     device_id: str = "t2-emulated") -> EmulatedDevice:
    """RFSoC profile: 8 forward-error-correction cores, calibrated on the
    bundled interface benchmark measurements."""
    models = calibrate_per_generation()
    return EmulatedDevice(device_id=device_id, capabilities=discover("t2"),
                          models=models, parallel_servers=8,
                          spike=DEFAULT_SPIKE if spike is None else spike,
                          seed=seed, compute_payloads=compute_payloads)


def make_emulated_acc100(seed: int = 0, **kw) -> EmulatedDevice:
    """Stand-alone accelerator profile: interface quirks of the in-package
    part, internal HARQ memory, timing reused from the RFSoC calibration
    (no public measurements; convenience profile)."""
    models = calibrate_per_generation()
    return EmulatedDevice(device_id=kw.pop("device_id", "acc100-emulated"),
                          capabilities=discover("acc100"), models=models,
                          parallel_servers=8, spike=JitterSpec(), seed=seed,
                          **kw)


def _flat_rate_models(dec_per_kbit: float, enc_per_kbit: float
                      ) -> dict[tuple[str, str], ServiceTimeModel]:
    out = {}
    for gen in ("per_cb", "per_tb", "per_slot"):
        out[("decode", gen)] = ServiceTimeModel(
            fixed_per_call_us=0.0, per_tb_us=0.0, per_cb_us=0.0,
            per_kbit_us=dec_per_kbit)
        out[("encode", gen)] = ServiceTimeModel(
            fixed_per_call_us=0.0, per_tb_us=0.0, per_cb_us=0.0,
            per_kbit_us=enc_per_kbit)
    return out


def make_emulated_vran_boost(seed: int = 0, parallel_servers: int = 32,
                             **kw) -> EmulatedDevice:
    """In-package accelerator profile. Throughput anchored to the observed
    single-instance medians of the deployment traffic; the larger server
    count is a configurable assumption (no contention was observed on this
    part) rather than a measured property."""
    models = _flat_rate_models(dec_per_kbit=273.590 / 303.240,
                               enc_per_kbit=110.658 / 1081.512)
    return EmulatedDevice(device_id=kw.pop("device_id",
                                           "vran-boost-emulated"),
                          capabilities=discover("vran_boost"), models=models,
                          parallel_servers=parallel_servers,
                          spike=JitterSpec(), seed=seed, **kw)


def make_emulated_hpp_software(seed: int = 0, **kw) -> EmulatedDevice:
    """Per-instance software coding on a high-performance processor,
    anchored to observed single-instance medians. Used one device per
    instance: pool cores are not shared, so no cross-instance queueing."""
    models = _flat_rate_models(dec_per_kbit=485.961 / 303.240,
                               enc_per_kbit=101.269 / 1081.512)
    return EmulatedDevice(device_id=kw.pop("device_id", "hpp-sw-emulated"),
                          capabilities=discover("software"), models=models,
                          parallel_servers=kw.pop("parallel_servers", 4),
                          spike=JitterSpec(), seed=seed, **kw)


EMULATED_FACTORIES = {
    "t2-emulated": make_emulated_t2,
    "acc100-emulated": make_emulated_acc100,
    "vran-boost-emulated": make_emulated_vran_boost,
    "hpp-sw-emulated": make_emulated_hpp_software,
}


def make_emulated(name: str, **kw) -> EmulatedDevice:
    try:
        return EMULATED_FACTORIES[name](**kw)
    except KeyError:
        raise InvalidConfigError(f"unknown emulated backend {name!r}")
