"""3GPP/ITU urban-micro LOS probability baseline.

The baseline knows two states only, LOS and a generic blocked state that is
mapped to NLOSb here (its blockage is assumed static). Each step is drawn
independently of the previous state, which is exactly the memoryless
behavior the distance-dependent chain is compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError
from .markov import DistanceTrace, StateTrace
from .rng import RngSeed, SplitMix64, derive_subseed
from .states import LosState

UMI_SCENARIO_TAG = "umi"


@dataclass(frozen=True)
class UmiParams:
    d1: float = 18.0
    d2: float = 36.0

    def __post_init__(self):
        if not (self.d1 > 0.0 and self.d2 > 0.0):
            raise ValueError("d1 and d2 must be positive")


def umi_los_probability(d: float, p: UmiParams = UmiParams()) -> float:
    """P(LOS) = min(d1/d, 1) * (1 - exp(-d/d2)) + exp(-d/d2)."""
    if not (isinstance(d, (int, float)) and math.isfinite(d)):
        raise DomainError(f"distance must be finite, got {d!r}")
    if d <= 0.0:
        raise DomainError(f"distance must be positive, got {d!r}")
    e = math.exp(-d / p.d2)
    return min(p.d1 / d, 1.0) * (1.0 - e) + e


def generate_states_umi(
    trace: DistanceTrace,
    p: UmiParams = UmiParams(),
    seed: RngSeed = 0,
    _prob_cache: dict | None = None,
) -> StateTrace:
    """Per-step independent LOS/NLOSb draw; NLOSv is never emitted."""
    rng = SplitMix64(seed)
    ds = trace.distances.tolist()
    out = np.empty(len(ds), dtype=np.int8)
    cache = _prob_cache if _prob_cache is not None else {}
    blocked = int(LosState.NLOSb)
    for k, d in enumerate(ds):
        prob = cache.get(d)
        if prob is None:
            prob = umi_los_probability(d, p)
            cache[d] = prob
        out[k] = 0 if rng.next_float() < prob else blocked
    return StateTrace(trace.times, trace.distances, out, scenario=UMI_SCENARIO_TAG, seed=seed)


def iter_generate_batch_umi(
    traces: Iterable[DistanceTrace],
    p: UmiParams = UmiParams(),
    seed: RngSeed = 0,
) -> Iterator[StateTrace]:
    """Lazy batch with the same per-index sub-seeding as the chain engine."""
    cache: dict = {}
    for i, trace in enumerate(traces):
        yield generate_states_umi(trace, p, derive_subseed(seed, i), _prob_cache=cache)


def generate_batch_umi(
    traces: Sequence[DistanceTrace],
    p: UmiParams = UmiParams(),
    seed: RngSeed = 0,
) -> list[StateTrace]:
    return list(iter_generate_batch_umi(traces, p, seed))
