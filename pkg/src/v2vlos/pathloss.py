"""Path loss per visibility state.

LOS and NLOSb follow log-distance curves (intercept at 1 m plus
10*exponent*log10(d)). NLOSv uses the simplified vehicle-blockage rule: free
space plus a constant extra attenuation (8 dB by default). Shadow fading is
deliberately not added; callers wanting it can add a fading term on top of
the returned series.

The shipped default LOS/NLOSb parameters are illustrative only, chosen to
give a plausible curve separation. Measurement-backed values should be
supplied through :meth:`PathLossParams.from_file`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DomainError
from .markov import StateTrace
from .states import LosState

# 20*log10(4*pi/c) with c in m/s; free space in dB at 1 m and 1 Hz.
FREE_SPACE_CONSTANT_DB = -147.55

DEFAULT_PARAMS_RESOURCE = "pathloss_defaults.json"


def free_space_pl(d: float, f: float = 2.0e9) -> float:
    """Friis free-space path loss in dB: 20*log10(d) + 20*log10(f) - 147.55."""
    if not (isinstance(d, (int, float)) and math.isfinite(d)) or d < 1.0:
        raise DomainError(f"distance must be >= 1 m, got {d!r}")
    if not (isinstance(f, (int, float)) and math.isfinite(f)) or f <= 0.0:
        raise DomainError(f"frequency must be positive, got {f!r}")
    return 20.0 * math.log10(d) + 20.0 * math.log10(f) + FREE_SPACE_CONSTANT_DB


@dataclass(frozen=True)
class LogDistance:
    """Log-distance curve: intercept_db + 10 * exponent * log10(d)."""

    intercept_db: float
    exponent: float

    def __post_init__(self):
        if not (self.exponent > 0.0 and math.isfinite(self.intercept_db)):
            raise ValueError("need finite intercept and positive exponent")

    def at(self, d: float) -> float:
        return self.intercept_db + 10.0 * self.exponent * math.log10(d)


@dataclass(frozen=True)
class PathLossParams:
    los: LogDistance
    nlosb: LogDistance
    nlosv_extra_db: float = 8.0
    carrier_freq_hz: float = 2.0e9

    def __post_init__(self):
        if self.nlosv_extra_db < 0.0:
            raise ValueError("nlosv_extra_db must be non-negative")
        if self.carrier_freq_hz <= 0.0:
            raise ValueError("carrier frequency must be positive")

    @classmethod
    def from_dict(cls, obj: dict) -> "PathLossParams":
        expected = {"los", "nlosb", "nlosv_extra_db", "carrier_freq_hz"}
        if set(obj) != expected:
            raise ValueError(f"path-loss keys {sorted(obj)} do not match expected {sorted(expected)}")
        def curve(o: dict) -> LogDistance:
            if set(o) != {"intercept_db", "exponent"}:
                raise ValueError(f"log-distance keys {sorted(o)} invalid")
            return LogDistance(float(o["intercept_db"]), float(o["exponent"]))
        return cls(
            los=curve(obj["los"]),
            nlosb=curve(obj["nlosb"]),
            nlosv_extra_db=float(obj["nlosv_extra_db"]),
            carrier_freq_hz=float(obj["carrier_freq_hz"]),
        )

    def to_dict(self) -> dict:
        return {
            "carrier_freq_hz": self.carrier_freq_hz,
            "los": {"exponent": self.los.exponent, "intercept_db": self.los.intercept_db},
            "nlosb": {"exponent": self.nlosb.exponent, "intercept_db": self.nlosb.intercept_db},
            "nlosv_extra_db": self.nlosv_extra_db,
        }

    @classmethod
    def from_file(cls, path: str | Path) -> "PathLossParams":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def defaults(cls) -> "PathLossParams":
        text = resources.files("v2vlos").joinpath("data", DEFAULT_PARAMS_RESOURCE).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


def state_path_loss(state: LosState, d: float, p: PathLossParams) -> float:
    """Path loss in dB for one state at distance ``d`` (d >= 1 m)."""
    if not (isinstance(d, (int, float)) and math.isfinite(d)) or d < 1.0:
        raise DomainError(f"distance must be >= 1 m, got {d!r}")
    state = LosState(state)
    if state is LosState.LOS:
        return p.los.at(d)
    if state is LosState.NLOSb:
        return p.nlosb.at(d)
    return free_space_pl(d, p.carrier_freq_hz) + p.nlosv_extra_db


def render_path_loss(
    trace: StateTrace,
    p: PathLossParams,
) -> list[tuple[int, float, LosState, float]]:
    """Pointwise (t, d, state, path loss dB) series for a state trace."""
    out = []
    for k in range(len(trace)):
        d = float(trace.distances[k])
        s = trace.state(k)
        out.append((int(trace.times[k]), d, s, state_path_loss(s, d, p)))
    return out
