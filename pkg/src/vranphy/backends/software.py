"""Pure-software coding backend running the channel-coding primitives.

Descriptors execute bit-exactly through the same code paths regardless of
worker count; a persistent process pool provides real parallelism for
multi-segment batches (the per-segment work releases no lock it needs to
share). Elapsed times are wall clock.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfigError
from ..lpu import (Completion, CodingOpDescriptor, DEFAULT_QUEUE_DEPTH,
                   QueueAllocator, QueueHandle, discover,
                   validate_granularity, validate_harq_placement)
from ..nr import pipeline
from ..nr.encoder import CodeBlock, ldpc_encode
from ..nr.ratematch import rate_match
from ..nr.decoder import ldpc_decode
from ..nr.softbuffer import new_soft_buffer, rate_recover_and_combine


def execute_descriptor(op: CodingOpDescriptor):
    """Run one coding descriptor; returns its outputs dict.

    Payloads carry per-segment work items so the same primitives run for
    every interface generation:
      encode_cbs: items of {plan, bits, param} -> {streams}
      decode_cbs: items of {plan, llrs, param, buffer} ->
                  {info_bits, crc_ok, iterations, buffers}
    """
    p = op.payload
    kind = p.get("op")
    if kind == "encode_cbs":
        streams = []
        for item in p["items"]:
            plan = item["plan"]
            cb = CodeBlock(bits=item["bits"], index=0,
                           lifting_size=plan.lifting_size,
                           base_graph=plan.base_graph,
                           filler_count=plan.filler_per_cb)
            streams.append(rate_match(ldpc_encode(cb), plan, item["param"]))
        return {"streams": streams}
    if kind == "decode_cbs":
        infos, oks, iters, buffers = [], [], [], []
        for item in p["items"]:
            plan = item["plan"]
            buf = item.get("buffer")
            if buf is None:
                buf = new_soft_buffer(plan)
            rate_recover_and_combine(item["llrs"], plan, item["param"], buf)
            res = ldpc_decode(buf, plan, **(
                {"max_iters": item["max_iters"]}
                if "max_iters" in item else {}))
            infos.append(res.info_bits)
            oks.append(res.crc_ok)
            iters.append(res.iterations_used)
            buffers.append(buf)
        return {"info_bits": infos, "crc_ok": oks, "iterations": iters,
                "buffers": buffers}
    raise InvalidConfigError(f"unknown descriptor op {kind!r}")


def _chunks(items, n):
    k, m = divmod(len(items), n)
    out, start = [], 0
    for i in range(n):
        size = k + (1 if i < m else 0)
        if size:
            out.append(items[start:start + size])
        start += size
    return out


def _run_chunk(ops):
    return [execute_descriptor(op) for op in ops]


class SoftwareBackend:
    """Worker-pooled software LPU; results identical to sequential runs."""

    def __init__(self, worker_count: int = 1, device_id: str = "software",
                 queue_depth: int = DEFAULT_QUEUE_DEPTH):
        if worker_count < 1:
            raise InvalidConfigError("worker_count must be >= 1")
        self.device_id = device_id
        self.capabilities = discover("software")
        self.worker_count = worker_count
        self.allocator = QueueAllocator(device_id,
                                        self.capabilities.num_queues,
                                        queue_depth)
        self._pool: ProcessPoolExecutor | None = None
        self._done: dict[int, list[Completion]] = {}
        self._queued: dict[int, int] = {}

    def _ensure_pool(self) -> ProcessPoolExecutor:
        if self._pool is None:
            import multiprocessing as mp
            self._pool = ProcessPoolExecutor(
                max_workers=self.worker_count,
                mp_context=mp.get_context("fork"))
        return self._pool

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def process(self, ops: list[CodingOpDescriptor]) -> list[Completion]:
        """Execute a batch; one completion per op, submission order."""
        if not ops:
            return []
        t0 = time.perf_counter()
        if self.worker_count == 1 or len(ops) == 1:
            outputs = [execute_descriptor(op) for op in ops]
        else:
            pool = self._ensure_pool()
            futures = [pool.submit(_run_chunk, chunk)
                       for chunk in _chunks(ops, self.worker_count)]
            outputs = []
            for fut in futures:
                outputs.extend(fut.result())
        elapsed_us = (time.perf_counter() - t0) * 1e6
        per_op = elapsed_us / len(ops)
        return [Completion(op_id=op.op_id, status="ok", outputs=out,
                           service_time_us=per_op)
                for op, out in zip(ops, outputs)]

    # -- lpu surface -------------------------------------------------------
    def enqueue(self, handle: QueueHandle, ops: list[CodingOpDescriptor]
                ) -> int:
        done = self._done.setdefault(handle.queue_index, [])
        free = handle.depth - self._queued.get(handle.queue_index, 0)
        accepted = ops[: max(0, free)]
        for op in accepted:
            validate_granularity(self.capabilities, op)
            validate_harq_placement(self.capabilities, op)
        done.extend(self.process(list(accepted)))
        return len(accepted)

    def dequeue(self, handle: QueueHandle, max_completions: int
                ) -> list[Completion]:
        done = self._done.setdefault(handle.queue_index, [])
        out = done[:max_completions]
        del done[:max_completions]
        return out


def software_process(ops: list[CodingOpDescriptor], worker_count: int = 1
                     ) -> list[Completion]:
    """One-shot batch execution on a throwaway software backend."""
    backend = SoftwareBackend(worker_count=worker_count)
    try:
        return backend.process(ops)
    finally:
        backend.close()
