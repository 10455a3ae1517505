"""Composable core-set pipeline: partition, per-part spanners, union, solve.

Each machine's core-set is exactly its k-spanner; the union is solved offline
by the requested solver and compared against the same solver on the full data.
The report carries the certified lower bound (e * alpha)^(-k) next to the
measured ratio, plus communication and timing accounting.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import detmax
from .rng import derive_seed, generator
from .spanner import SpannerParams, build_k_spanner
from .util import ordered_map
from .vectorset import VectorSet, as_vector_set


class PartitionScheme(Enum):
    ROUND_ROBIN = "rr"
    HASH = "hash"
    FROM_FILE = "file"


class Solver(Enum):
    BRUTE = "brute"
    GREEDY_LOCAL = "greedy"
    FW_ROUND = "fw-round"


class BadPartColumn(Exception):
    pass


@dataclass
class PartitionedInput:
    parts: list[VectorSet]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for p in self.parts:
            for lbl in p.labels:
                if int(lbl) in seen:
                    raise ValueError(f"label {int(lbl)} appears in two parts")
                seen.add(int(lbl))

    @property
    def union(self) -> VectorSet:
        return VectorSet.concat(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


@dataclass
class PipelineReport:
    coreset_sizes: list[int]
    union_size: int
    objective: float
    reference_kind: str
    reference_value: float
    ratio: float
    guarantee: float
    comm_bytes: int
    timings_ms: dict[str, float]
    seed: int
    config: dict = field(default_factory=dict)
    peak_retained: int | None = None

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "parts": [{"coreset_size": s} for s in self.coreset_sizes],
            "coreset_sizes": list(self.coreset_sizes),
            "union_size": self.union_size,
            "objective": self.objective,
            "reference": {"kind": self.reference_kind, "value": self.reference_value},
            "ratio": self.ratio,
            "guarantee": self.guarantee,
            "comm_bytes": self.comm_bytes,
            "timings_ms": self.timings_ms,
            "seed": self.seed,
            "version": "1",
        }
        if self.peak_retained is not None:
            out["peak_retained"] = self.peak_retained
        return out


def partition(vs, p: int, scheme: PartitionScheme = PartitionScheme.ROUND_ROBIN,
              seed: int = 0, part_ids=None) -> PartitionedInput:
    """Split a vector set into p machines, deterministically per scheme+seed."""
    v = as_vector_set(vs)
    n = len(v)
    if p < 1:
        raise ValueError("p must be >= 1")
    if scheme is PartitionScheme.FROM_FILE:
        if part_ids is None:
            raise BadPartColumn("no part column available")
        ids = np.asarray(part_ids)
        if ids.shape != (n,) or np.any(ids < 0) or not np.issubdtype(ids.dtype, np.integer):
            raise BadPartColumn("part column must hold one nonnegative integer per row")
        groups = sorted(set(int(i) for i in ids))
        return PartitionedInput(
            [v.subset(np.flatnonzero(ids == g)) for g in groups]
        )
    if scheme is PartitionScheme.ROUND_ROBIN:
        assign = np.arange(n) % p
    else:
        assign = generator(seed, "partition").integers(0, p, size=n)
    return PartitionedInput(
        [v.subset(np.flatnonzero(assign == i)) for i in range(p)]
    )


def _solve(vs: VectorSet, k: int, solver: Solver, seed: int, trials: int) -> detmax.Solution:
    if solver is Solver.BRUTE:
        return detmax.brute_force_detmax(vs, k)
    if solver is Solver.GREEDY_LOCAL:
        return detmax.greedy_local_search(vs, k)
    frac = detmax.fractional_detmax(vs, k)
    return detmax.nikolov_round(vs, frac, k, trials, derive_seed(seed, "round")).best


def run_pipeline(pinput: PartitionedInput, k: int,
                 params: SpannerParams | None = None,
                 solver: Solver = Solver.GREEDY_LOCAL,
                 seed: int = 0, trials: int = 1000,
                 coreset_cap: int | None = None) -> PipelineReport:
    """Per-part k-spanners, union in (part, local) order, offline solve."""
    params = params or SpannerParams(k=k)
    full = pinput.union
    d = full.dim
    if k > d:
        raise ValueError(f"k={k} exceeds dimension {d}")
    t0 = time.perf_counter()
    spanners = ordered_map(
        lambda part: build_k_spanner(part, k, params=params, max_size=coreset_cap)
        if len(part) else None,
        pinput.parts,
    )
    t_span = time.perf_counter()
    label_pos = {int(lbl): i for i, lbl in enumerate(full.labels)}
    union_positions = [label_pos[lbl] for sp in spanners if sp is not None
                       for lbl in sp.indices]
    union = full.subset(union_positions)
    sol = _solve(union, k, solver, seed, trials)
    t_solve = time.perf_counter()
    ref = _solve(full, k, solver, derive_seed(seed, "reference"), trials)
    t_ref = time.perf_counter()
    alpha = next((sp.alpha for sp in spanners if sp is not None),
                 params.resolve_alpha(d))
    ratio = (sol.value / ref.value if ref.value > 0
             else (1.0 if sol.value <= 0 else math.inf))
    sizes = [sp.size if sp is not None else 0 for sp in spanners]
    report = PipelineReport(
        coreset_sizes=sizes,
        union_size=len(union),
        objective=sol.value,
        reference_kind=solver.value if solver is not Solver.BRUTE else "brute",
        reference_value=ref.value,
        ratio=ratio,
        guarantee=(math.e * alpha) ** (-k),
        comm_bytes=8 * d * sum(sizes),
        timings_ms={
            "spanner": (t_span - t0) * 1e3,
            "solve": (t_solve - t_span) * 1e3,
            "reference": (t_ref - t_solve) * 1e3,
            "total": (t_ref - t0) * 1e3,
        },
        seed=seed,
        config={
            "k": k,
            "alpha": alpha,
            "solver": solver.value,
            "parts": len(pinput),
            "n": len(full),
            "d": d,
            "union_labels": [int(lbl) for sp in spanners if sp is not None
                             for lbl in sp.indices],
        },
    )
    return report


def stream_pipeline(vs, block_size: int, k: int,
                    params: SpannerParams | None = None,
                    solver: Solver = Solver.GREEDY_LOCAL,
                    seed: int = 0, trials: int = 1000) -> PipelineReport:
    """One-pass variant: a core-set per block, final solve on their union."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    v = as_vector_set(vs)
    n = len(v)
    params = params or SpannerParams(k=k)
    t0 = time.perf_counter()
    retained: list[VectorSet] = []
    retained_count = 0
    peak = 0
    sizes = []
    for start in range(0, n, block_size):
        block = v.subset(np.arange(start, min(start + block_size, n)))
        peak = max(peak, retained_count + len(block))
        sp = build_k_spanner(block, k, params=params)
        label_pos = {int(lbl): i for i, lbl in enumerate(block.labels)}
        retained.append(block.subset([label_pos[lbl] for lbl in sp.indices]))
        retained_count += sp.size
        sizes.append(sp.size)
    t_span = time.perf_counter()
    union = VectorSet.concat(retained)
    peak = max(peak, len(union))
    sol = _solve(union, k, solver, seed, trials)
    t_solve = time.perf_counter()
    ref = _solve(v, k, solver, derive_seed(seed, "reference"), trials)
    t_ref = time.perf_counter()
    alpha = params.resolve_alpha(v.dim)
    ratio = (sol.value / ref.value if ref.value > 0
             else (1.0 if sol.value <= 0 else math.inf))
    return PipelineReport(
        coreset_sizes=sizes,
        union_size=len(union),
        objective=sol.value,
        reference_kind=solver.value if solver is not Solver.BRUTE else "brute",
        reference_value=ref.value,
        ratio=ratio,
        guarantee=(math.e * alpha) ** (-k),
        comm_bytes=8 * v.dim * len(union),
        timings_ms={
            "spanner": (t_span - t0) * 1e3,
            "solve": (t_solve - t_span) * 1e3,
            "reference": (t_ref - t_solve) * 1e3,
            "total": (t_ref - t0) * 1e3,
        },
        seed=seed,
        config={
            "k": k,
            "alpha": alpha,
            "solver": solver.value,
            "block_size": block_size,
            "n": n,
            "d": v.dim,
        },
        peak_retained=peak,
    )
