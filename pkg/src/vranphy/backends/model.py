"""Service-time models for emulated coding accelerators.

A call's base service time is linear in its shape:

    t = fixed_per_call + per_tb * n_tb + per_cb * n_cb + per_kbit * kbits

Calibration fits the four coefficients per (direction, generation) with
non-negative least squares on relative residuals, so fitted models are
monotone in every feature and reproduce measured curves within a small
relative envelope.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from importlib import resources
from math import ceil

import numpy as np
from scipy.optimize import nnls

from ..errors import CalibrationError, InvalidConfigError
from ..nr.mcs import compute_tbs, mcs_params, resource_elements
from ..nr.segmentation import segment_tb

GENERATIONS = ("per_cb", "per_tb", "per_slot")
ENCODE_CB_BATCH = 8   # legacy encoder interface: 8 segments per call


@dataclass(frozen=True)
class JitterSpec:
    kind: str = "lognormal"
    scale_us: float = 0.0     # median of the added tail delay
    sigma: float = 0.0

    @property
    def enabled(self) -> bool:
        return self.scale_us > 0.0


@dataclass(frozen=True)
class ServiceTimeModel:
    fixed_per_call_us: float
    per_tb_us: float
    per_cb_us: float
    per_kbit_us: float
    parallel_servers: int = 1
    jitter: JitterSpec = field(default_factory=JitterSpec)
    seed: int = 0
    max_rel_residual: float = 0.0

    def __post_init__(self):
        for name in ("fixed_per_call_us", "per_tb_us", "per_cb_us",
                     "per_kbit_us"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be >= 0")
        if self.parallel_servers < 1:
            raise InvalidConfigError("parallel_servers must be >= 1")

    def call_time_us(self, n_tb: float, n_cb: float, kbits: float) -> float:
        if n_cb == 0 and n_tb == 0 and kbits == 0:
            return 0.0
        return (self.fixed_per_call_us + self.per_tb_us * n_tb
                + self.per_cb_us * n_cb + self.per_kbit_us * kbits)


@dataclass(frozen=True)
class BenchConfig:
    """Geometry of the interface benchmark: a full slot equally shared."""
    prbs: int = 273
    symbols: int = 12
    overhead: int = 0
    layers: int = 1
    mcs_index: int = 28
    mcs_table: str = "T1"

    def prb_split(self, n_tb: int) -> list[int]:
        base, rem = divmod(self.prbs, n_tb)
        return [base + (1 if i < rem else 0) for i in range(n_tb)]

    def tb_shapes(self, n_tb: int) -> list[tuple[int, int]]:
        """Per-TB (tbs_bits, num_cbs) for the slot split n_tb ways."""
        qm, rate = mcs_params(self.mcs_index, self.mcs_table)
        shapes = []
        for prbs in self.prb_split(n_tb):
            tbs = compute_tbs(prbs, self.symbols, self.layers,
                              self.mcs_index, self.mcs_table, self.overhead)
            plan = segment_tb(tbs, rate)
            shapes.append((tbs, plan.num_cbs))
        return shapes

    def slot_shape(self, n_tb: int) -> tuple[int, float]:
        """(total CBs, total kbits) of the benchmark slot."""
        shapes = self.tb_shapes(n_tb)
        return (sum(c for _, c in shapes),
                sum(t for t, _ in shapes) / 1000.0)


def calls_for(generation: str, direction: str, n_tb: int, n_cb: int) -> int:
    """Coding-library calls one slot needs under an interface generation."""
    if generation == "per_slot":
        return 1
    if generation == "per_tb":
        return n_tb
    if generation == "per_cb":
        return n_cb if direction == "decode" else ceil(n_cb / ENCODE_CB_BATCH)
    raise InvalidConfigError(f"unknown generation {generation!r}")


def _design_row(generation: str, direction: str, n_tb: int, n_cb: int,
                kbits: float) -> list[float]:
    return [calls_for(generation, direction, n_tb, n_cb),
            float(n_tb), float(n_cb), kbits]


def calibrate_model(observations, direction: str = "decode",
                    bench: BenchConfig | None = None,
                    parallel_servers: int = 1,
                    jitter: JitterSpec | None = None,
                    seed: int = 0) -> ServiceTimeModel:
    """Fit one coefficient set to (generation, n_tb, mean_us) observations.

    Features per observation are completed from the benchmark geometry.
    Raises when the data is underdetermined (fewer than four points or a
    design without at least two distinct shapes).
    """
    obs = list(observations)
    if len(obs) < 4:
        raise CalibrationError(
            f"need at least 4 observations, got {len(obs)}")
    bench = bench or BenchConfig()
    rows, y = [], []
    for generation, n_tb, us in obs:
        if generation not in GENERATIONS:
            raise CalibrationError(f"unknown generation {generation!r}")
        if us <= 0:
            raise CalibrationError("observed times must be positive")
        n_cb, kbits = bench.slot_shape(int(n_tb))
        rows.append(_design_row(generation, direction, int(n_tb), n_cb,
                                kbits))
        y.append(float(us))
    x = np.asarray(rows, dtype=float)
    yv = np.asarray(y, dtype=float)
    if np.linalg.matrix_rank(x) < 2:
        raise CalibrationError("degenerate design matrix")
    coef, _ = nnls(x / yv[:, None], np.ones_like(yv))
    resid = np.abs(x @ coef - yv) / yv
    return ServiceTimeModel(
        fixed_per_call_us=float(coef[0]), per_tb_us=float(coef[1]),
        per_cb_us=float(coef[2]), per_kbit_us=float(coef[3]),
        parallel_servers=parallel_servers,
        jitter=jitter or JitterSpec(), seed=seed,
        max_rel_residual=float(resid.max()))


def load_reference_observations() -> list[tuple[str, str, int, float]]:
    """(direction, generation, n_tb, mean_us) rows bundled with the package."""
    ref = resources.files("vranphy.backends").joinpath(
        "data/fig1_ep_rfsoc.csv")
    out = []
    with ref.open() as f:
        for row in csv.DictReader(f):
            out.append((row["direction"], row["generation"],
                        int(row["n_tb"]), float(row["mean_us"])))
    return out


def calibrate_per_generation(observations=None, bench: BenchConfig | None
                             = None, **model_kwargs
                             ) -> dict[tuple[str, str], ServiceTimeModel]:
    """One fitted model per (direction, generation), encode and decode
    calibrated separately since the measured slopes differ."""
    if observations is None:
        observations = load_reference_observations()
    groups: dict[tuple[str, str], list] = {}
    for direction, generation, n_tb, us in observations:
        groups.setdefault((direction, generation), []).append(
            (generation, n_tb, us))
    return {key: calibrate_model(rows, direction=key[0], bench=bench,
                                 **model_kwargs)
            for key, rows in groups.items()}
