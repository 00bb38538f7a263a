"""Accelerator-abstraction layer: capability discovery, queue lifecycle,
operation descriptors and the CB/TB interface routing quirks.

Devices expose static capability descriptors; work is submitted as coding
operation descriptors through per-owner queues with bounded depth and FIFO
order. Routing between code-block and transport-block descriptor
granularity honours each device's advertised quirks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import (CapabilityMismatchError, InvalidConfigError,
                     ResourceExhaustedError)
from .nr.softbuffer import BufferLocation

DEFAULT_QUEUE_DEPTH = 128


class OpKind(Enum):
    ENCODE = "encode"
    DECODE = "decode"


class Granularity(Enum):
    CB = "cb"
    TB = "tb"


@dataclass(frozen=True)
class LpuCapabilities:
    name: str
    supports_cb_interface: bool
    supports_tb_interface: bool
    tb_required_when_single_cb: bool
    internal_harq_memory: bool
    num_queues: int
    rated_dl_gbps: float
    rated_ul_gbps: float

    def __post_init__(self):
        if not (self.supports_cb_interface or self.supports_tb_interface):
            raise InvalidConfigError(
                f"{self.name}: at least one interface must be supported")
        if self.tb_required_when_single_cb and not self.supports_tb_interface:
            raise InvalidConfigError(
                f"{self.name}: single-CB TB quirk requires the TB interface")


# Shipped capability profiles. The RFSoC card only ever talks CB and keeps
# retransmission state on board; the in-package accelerator has no internal
# memory and insists on TB descriptors for single-segment blocks. The
# stand-alone PCIe accelerator shares the latter's interface quirks but
# keeps HARQ state internally (coarse profile, interface flags only).
_PROFILES = {
    "t2": LpuCapabilities(
        name="t2", supports_cb_interface=True, supports_tb_interface=False,
        tb_required_when_single_cb=False, internal_harq_memory=True,
        num_queues=16, rated_dl_gbps=35.0, rated_ul_gbps=12.0),
    "acc100": LpuCapabilities(
        name="acc100", supports_cb_interface=True, supports_tb_interface=True,
        tb_required_when_single_cb=True, internal_harq_memory=True,
        num_queues=16, rated_dl_gbps=35.0, rated_ul_gbps=12.0),
    "vran_boost": LpuCapabilities(
        name="vran_boost", supports_cb_interface=True,
        supports_tb_interface=True, tb_required_when_single_cb=True,
        internal_harq_memory=False, num_queues=16, rated_dl_gbps=38.0,
        rated_ul_gbps=19.0),
    "software": LpuCapabilities(
        name="software", supports_cb_interface=True,
        supports_tb_interface=True, tb_required_when_single_cb=False,
        internal_harq_memory=False, num_queues=64, rated_dl_gbps=0.0,
        rated_ul_gbps=0.0),
}


def discover(backend_id: str) -> LpuCapabilities:
    """Static capability descriptor of a registered backend."""
    try:
        return _PROFILES[backend_id]
    except KeyError:
        raise InvalidConfigError(f"unknown backend {backend_id!r}")


def registered_backends() -> tuple[str, ...]:
    return tuple(_PROFILES)


def route_interface(caps: LpuCapabilities, num_cbs_in_tb: int) -> Granularity:
    """Descriptor granularity for a TB of the given segment count."""
    if num_cbs_in_tb < 1:
        raise InvalidConfigError("num_cbs_in_tb must be >= 1")
    if num_cbs_in_tb == 1 and caps.tb_required_when_single_cb:
        return Granularity.TB
    if caps.supports_cb_interface:
        return Granularity.CB
    if caps.supports_tb_interface:
        return Granularity.TB
    raise CapabilityMismatchError(
        f"{caps.name}: no permitted interface for {num_cbs_in_tb} CBs")


@dataclass
class CodingOpDescriptor:
    kind: OpKind
    granularity: Granularity
    payload: Any = None
    rate_params: Any = None
    harq_location: BufferLocation | None = None
    harq_token: Any = None
    op_id: int = -1
    shape: Any = None          # backend timing hints (bits, cbs, tbs)


@dataclass
class Completion:
    op_id: int
    status: str
    outputs: Any
    service_time_us: float


@dataclass
class QueueHandle:
    device_id: str
    queue_index: int
    depth: int
    owner_instance: int
    _device: Any = field(repr=False, default=None)
    _closed: bool = False

    @property
    def device(self):
        return self._device


class QueueAllocator:
    """Exclusive queue-index bookkeeping for one device."""

    def __init__(self, device_id: str, num_queues: int,
                 depth: int = DEFAULT_QUEUE_DEPTH):
        self.device_id = device_id
        self.num_queues = num_queues
        self.depth = depth
        self._in_use: dict[int, int] = {}

    def open_queue(self, instance_id: int, device=None) -> QueueHandle:
        for idx in range(self.num_queues):
            if idx not in self._in_use:
                self._in_use[idx] = instance_id
                return QueueHandle(device_id=self.device_id, queue_index=idx,
                                   depth=self.depth,
                                   owner_instance=instance_id,
                                   _device=device)
        raise ResourceExhaustedError(
            f"{self.device_id}: all {self.num_queues} queues in use")

    def close_queue(self, handle: QueueHandle) -> None:
        self._in_use.pop(handle.queue_index, None)
        handle._closed = True


class DeviceRegistry:
    """Live device instances addressable by id (configured by name)."""

    def __init__(self):
        self._devices: dict[str, Any] = {}

    def register(self, device) -> None:
        self._devices[device.device_id] = device

    def get(self, device_id: str):
        try:
            return self._devices[device_id]
        except KeyError:
            raise InvalidConfigError(f"no live device {device_id!r}")

    def clear(self) -> None:
        self._devices.clear()


registry = DeviceRegistry()


def open_queue(device_id: str, instance_id: int) -> QueueHandle:
    """Exclusive queue on a live device (models one virtual function)."""
    device = registry.get(device_id)
    return device.allocator.open_queue(instance_id, device=device)


def enqueue(handle: QueueHandle, ops: list[CodingOpDescriptor]) -> int:
    """Submit up to free-depth ops; returns the number accepted."""
    if handle._closed or handle.device is None:
        raise InvalidConfigError("queue handle is closed or unbound")
    return handle.device.enqueue(handle, ops)


def dequeue(handle: QueueHandle, max_completions: int) -> list[Completion]:
    """Poll completed ops, at most ``max_completions``, completion order."""
    if handle._closed or handle.device is None:
        raise InvalidConfigError("queue handle is closed or unbound")
    return handle.device.dequeue(handle, max_completions)


def validate_harq_placement(caps: LpuCapabilities,
                            op: CodingOpDescriptor) -> None:
    """Reject device-side HARQ tokens on devices without internal memory."""
    if op.harq_location is BufferLocation.DEVICE \
            and not caps.internal_harq_memory:
        raise CapabilityMismatchError(
            f"{caps.name}: device-side HARQ buffer on a host-memory device")


def validate_granularity(caps: LpuCapabilities,
                         op: CodingOpDescriptor) -> None:
    if op.granularity is Granularity.CB and not caps.supports_cb_interface:
        raise CapabilityMismatchError(f"{caps.name}: CB interface unsupported")
    if op.granularity is Granularity.TB and not caps.supports_tb_interface:
        raise CapabilityMismatchError(f"{caps.name}: TB interface unsupported")
