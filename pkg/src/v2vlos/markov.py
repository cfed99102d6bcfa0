"""Seeded generation of visibility-state sequences over a distance trace.

The first state is drawn from the state probabilities at the first distance.
Every later state is drawn from the transition-matrix row selected by the
previous state, with the matrix assembled at the distance of the step being
generated. The sampler consults nothing but (previous state, current
distance), so the output is a Markov chain by construction.

Each trace is a strict one-second grid; the transition probabilities are
per-second quantities and traces at other spacings are rejected. A single
generation is inherently sequential; batches give every trace its own
sub-seeded generator, so traces may be processed in any order or in
parallel without changing the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import assembly
from .errors import BatchError, DomainError
from .params import ScenarioModel
from .rng import RngSeed, SplitMix64, derive_subseed
from .states import LosState

# Row memo bound; beyond this the rows are recomputed instead of cached.
_ROW_CACHE_MAX = 1 << 18


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DistanceTrace:
    """Tx-Rx distance per one-second time step."""

    times: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        d = np.asarray(self.distances, dtype=float)
        if t.ndim != 1 or d.ndim != 1 or t.size != d.size or t.size == 0:
            raise DomainError("trace needs matching, non-empty time and distance vectors")
        if t.size > 1 and np.any(np.diff(t) != 1):
            raise DomainError("time steps must increase by exactly one second")
        if np.any(~np.isfinite(d)) or np.any(d <= 0.0):
            raise DomainError("distances must be finite and positive")
        object.__setattr__(self, "times", _as_readonly(t))
        object.__setattr__(self, "distances", _as_readonly(d))

    @classmethod
    def from_distances(cls, distances: Sequence[float], t0: int = 0) -> "DistanceTrace":
        d = np.asarray(distances, dtype=float)
        return cls(np.arange(t0, t0 + d.size, dtype=np.int64), d)

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class StateTrace:
    """Distance trace plus one visibility state per step."""

    times: np.ndarray
    distances: np.ndarray
    states: np.ndarray
    scenario: str = ""
    seed: RngSeed = 0

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int8)
        if s.shape != np.asarray(self.times).shape:
            raise DomainError("states must align with time steps")
        if s.size and (s.min() < 0 or s.max() > 2):
            raise DomainError("states must be LOS, NLOSv or NLOSb")
        object.__setattr__(self, "times", _as_readonly(np.asarray(self.times, dtype=np.int64)))
        object.__setattr__(self, "distances", _as_readonly(np.asarray(self.distances, dtype=float)))
        object.__setattr__(self, "states", _as_readonly(s))

    def __len__(self) -> int:
        return int(self.times.size)

    def state(self, i: int) -> LosState:
        return LosState(int(self.states[i]))

    def occupancy(self) -> dict[LosState, float]:
        n = max(len(self), 1)
        return {s: float(np.count_nonzero(self.states == int(s))) / n for s in LosState}


def sample_initial_state(probs: assembly.StateProbVector, rng: SplitMix64) -> LosState:
    """Inverse-CDF draw over (LOS, NLOSv, NLOSb)."""
    u = rng.next_float()
    if u < probs.los:
        return LosState.LOS
    if u < probs.los + probs.nlosv:
        return LosState.NLOSv
    return LosState.NLOSb


def _cumulative_row(model, origin_idx, d, over_range, cache):
    key = (origin_idx, d)
    cum = cache.get(key)
    if cum is None:
        p0, p1, _ = assembly.transition_row(model, LosState(origin_idx), d, over_range=over_range)
        cum = (p0, p0 + p1)
        if len(cache) < _ROW_CACHE_MAX:
            cache[key] = cum
    return cum


def generate_states(
    model: ScenarioModel,
    trace: DistanceTrace,
    seed: RngSeed,
    over_range: str = "error",
    _row_cache: dict | None = None,
) -> StateTrace:
    """Generate one state sequence. Equal inputs and seed give equal output."""
    rng = SplitMix64(seed)
    ds = trace.distances.tolist()
    n = len(ds)
    out = np.empty(n, dtype=np.int8)
    cache = _row_cache if _row_cache is not None else {}

    first = assembly.state_probabilities(model, ds[0], over_range=over_range)
    s = int(sample_initial_state(first, rng))
    out[0] = s
    for k in range(1, n):
        c0, c1 = _cumulative_row(model, s, ds[k], over_range, cache)
        u = rng.next_float()
        s = 0 if u < c0 else (1 if u < c1 else 2)
        out[k] = s
    return StateTrace(trace.times, trace.distances, out, scenario=model.tag, seed=seed)


def iter_generate_batch(
    model: ScenarioModel,
    traces: Iterable[DistanceTrace],
    seed: RngSeed,
    over_range: str = "error",
) -> Iterator[StateTrace]:
    """Lazily generate one state trace per input trace.

    Trace ``i`` uses sub-seed ``derive_subseed(seed, i)``, so each output
    depends only on its own input and index. Raises on the first failure;
    use :func:`generate_batch` for aggregated error reporting.
    """
    cache: dict = {}
    for i, trace in enumerate(traces):
        yield generate_states(model, trace, derive_subseed(seed, i), over_range=over_range, _row_cache=cache)


def generate_batch(
    model: ScenarioModel,
    traces: Sequence[DistanceTrace],
    seed: RngSeed,
    over_range: str = "error",
) -> list[StateTrace]:
    """Generate state traces for a whole batch.

    All traces are attempted; failures are collected and raised together as
    a :class:`BatchError` carrying (index, error) pairs.
    """
    cache: dict = {}
    out: list[StateTrace] = []
    failures: list[tuple[int, Exception]] = []
    for i, trace in enumerate(traces):
        try:
            out.append(generate_states(model, trace, derive_subseed(seed, i), over_range=over_range, _row_cache=cache))
        except DomainError as exc:
            failures.append((i, exc))
    if failures:
        raise BatchError(failures)
    return out
