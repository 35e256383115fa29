"""Stiff integration of polynomial ODEs and post-processing of sampled traces."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .crn import PolynomialOde
from .errors import IntegrationError

__all__ = [
    "OdeSystem",
    "SolverConfig",
    "Trace",
    "CrossingEvent",
    "Direction",
    "integrate",
    "detect_crossings",
    "settle_value",
    "UNDERSHOOT",
]

# tolerated negative excursion before clamping turns into an error
UNDERSHOOT = 1e-9


@dataclass(frozen=True)
class OdeSystem:
    """Autonomous system ``ds/dt = rhs(t, s)`` over named species."""

    species: tuple[str, ...]
    rhs: Callable[[float, np.ndarray], np.ndarray]
    jacobian: Callable[[float, np.ndarray], np.ndarray] | None = None
    polynomials: PolynomialOde | None = field(default=None, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.species)

    @classmethod
    def from_polynomials(cls, ode: PolynomialOde) -> "OdeSystem":
        f = ode.rhs_function()
        J = ode.jacobian_function()
        return cls(tuple(ode.species), lambda t, s: f(s), lambda t, s: J(s), ode)


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = 1.0
    clamp_nonnegative: bool = True
    sample_interval: float = 0.01
    method: str = "Radau"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True, eq=False)
class Trace:
    """Samples ``states[k]`` of all species at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    species: tuple[str, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float).reshape(len(times), -1)
        if states.shape[1] != len(self.species):
            raise ValueError("state width does not match species list")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("trace times must be strictly increasing")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "species", tuple(self.species))

    def __len__(self):
        return len(self.times)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.states[:, self.column(name)]

    def column(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise KeyError(f"unknown species {name!r}; trace has {list(self.species)}") from None

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def window(self, t0: float = -np.inf, t1: float = np.inf) -> "Trace":
        keep = (self.times >= t0) & (self.times <= t1)
        return Trace(self.times[keep], self.states[keep], self.species)

    def relabel(self, mapping: dict[str, str]) -> "Trace":
        return Trace(self.times, self.states, tuple(mapping.get(s, s) for s in self.species))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.species])
        for t, row in zip(self.times, self.states):
            w.writerow([f"{t:.12g}", *(f"{v:.12g}" for v in row)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        rows = list(csv.reader(io.StringIO(text)))
        header, data = rows[0], np.array(rows[1:], dtype=float)
        return cls(data[:, 0], data[:, 1:], tuple(header[1:]))

    def to_dict(self) -> dict:
        return {
            "species": list(self.species),
            "t": [float(f"{t:.12g}") for t in self.times],
            "values": {s: [float(f"{v:.12g}") for v in self.states[:, i]] for i, s in enumerate(self.species)},
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        species = tuple(d["species"])
        states = np.column_stack([d["values"][s] for s in species])
        return cls(np.asarray(d["t"]), states, species)


class Direction(str, Enum):
    RISING = "rising"
    FALLING = "falling"


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    species: str
    direction: Direction

    def to_dict(self) -> dict:
        return {"time": self.time, "species": self.species, "direction": self.direction.value}


def _sample_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(np.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if t1 - grid[-1] > 1e-9 * max(1.0, abs(t1)):
        grid = np.append(grid, t1)
    return grid


def integrate(sys: OdeSystem, s0: Sequence[float], t_span: Sequence[float], cfg: SolverConfig | None = None) -> Trace:
    """Integrate ``sys`` from ``s0`` and sample every ``cfg.sample_interval``.

    The default solver is implicit (Radau IIA) with the system's analytic
    Jacobian; the oscillator's fastest scale is eps1*eps2 ~ 1e-6.

    Raises:
        ValueError: negative initial state or empty time span.
        IntegrationError: solver failure, non-finite values, or an
            undershoot below ``-UNDERSHOOT`` while clamping is on.
    """
    cfg = cfg or SolverConfig()
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (sys.dimension,):
        raise ValueError(f"initial state has shape {s0.shape}, expected ({sys.dimension},)")
    if np.any(s0 < 0):
        raise ValueError("initial state must be non-negative")
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must satisfy t1 > t0")
    grid = _sample_grid(t0, t1, cfg.sample_interval)
    kwargs = {}
    if sys.jacobian is not None and cfg.method in ("Radau", "BDF", "LSODA"):
        kwargs["jac"] = sys.jacobian
    sol = solve_ivp(
        sys.rhs,
        (t0, t1),
        s0,
        method=cfg.method,
        t_eval=grid,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        **kwargs,
    )
    if sol.status != 0:
        raise IntegrationError(f"integration failed at t={sol.t[-1] if sol.t.size else t0:g}: {sol.message}")
    states = sol.y.T.copy()
    if not np.all(np.isfinite(states)):
        raise IntegrationError("non-finite state encountered")
    if cfg.clamp_nonnegative:
        worst = states.min()
        if worst < -UNDERSHOOT:
            raise IntegrationError(
                f"undershoot {worst:.3g} below -{UNDERSHOOT:g}; tighten abs_tol/rel_tol"
            )
        np.clip(states, 0.0, None, out=states)
    return Trace(sol.t, states, sys.species)


def _crossing_time(times, values, j, threshold):
    v0, v1 = values[j], values[j + 1]
    if v1 == v0:
        return float(times[j + 1])
    frac = (threshold - v0) / (v1 - v0)
    return float(times[j] + frac * (times[j + 1] - times[j]))


def detect_crossings(trace: Trace, species: str, threshold: float, hysteresis_band: float = 0.0) -> list[CrossingEvent]:
    """Threshold crossings of one species with a Schmitt-trigger band.

    A rising event needs the signal to pass ``threshold + band`` after last
    being below ``threshold - band`` (falling is symmetric).  The event time
    is the linearly interpolated crossing of ``threshold`` itself.
    """
    if hysteresis_band < 0:
        raise ValueError("hysteresis_band must be non-negative")
    values = trace[species]
    times = trace.times
    hi, lo = threshold + hysteresis_band, threshold - hysteresis_band
    state = None
    events = []
    for k, val in enumerate(values):
        if val > hi or (hysteresis_band == 0 and val > threshold):
            new = True
        elif val < lo or (hysteresis_band == 0 and val < threshold):
            new = False
        else:
            continue
        if state is not None and new != state:
            # last sample still on the old side of the threshold itself
            j = k - 1
            while j > 0 and ((values[j] > threshold) == new) and values[j] != threshold:
                j -= 1
            t = _crossing_time(times, values, j, threshold)
            events.append(CrossingEvent(t, species, Direction.RISING if new else Direction.FALLING))
        state = new
    return events


def settle_value(trace: Trace, species: str, window: float, tol: float) -> float | None:
    """Mean of ``species`` over the final ``window`` if it varies by at most ``tol`` there, else None."""
    if window >= trace.duration:
        raise ValueError("window must be shorter than the trace")
    values = trace[species][trace.times >= trace.times[-1] - window]
    mean = float(values.mean())
    if np.max(np.abs(values - mean)) > tol:
        return None
    return mean
