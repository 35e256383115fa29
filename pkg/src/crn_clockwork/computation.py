"""Computation modules and the clock-driven loop ``s1 = s1 + 1``.

Ungated modules (all rates 1 by default)::

    addition M1:  S1 -> S1 + S2,  S3 -> S3 + S2,  S2 -> 0      s2* = s1 + s3
    load M2:      S2 -> S1 + S2,  S1 -> 0                      s1* = s2

Gating adds a clock species as catalyst to every reaction (U for the
addition, V for the load); the counter-gated variants additionally carry W.
The counter itself is a truncated subtraction,

    L + W -> L + 2W,  S1 + W -> S1,  2W -> W     (all at eta3)

so ``dw/dt = eta3 (l - s1 - w) w`` and W dies out once s1 reaches l.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .crn import PolynomialOde, Reaction, ReactionNetwork, build_network, network_to_polynomials
from .dynamics import Direction, OdeSystem, SolverConfig, Trace, detect_crossings, integrate
from .errors import CRNError
from .oscillator import OscillatorConfig, clock_threshold, oscillator_network

__all__ = [
    "ModuleKind",
    "ModuleSpec",
    "DEFAULT_BINDINGS",
    "build_module",
    "counter_closed_form",
    "ComposedSystem",
    "compose_loop",
    "compose_terminating_loop",
    "staircase",
]


class ModuleKind(str, Enum):
    ADDITION = "addition"
    LOAD = "load"
    GATED_ADDITION = "gated-addition"
    GATED_LOAD = "gated-load"
    COUNTER_GATED_ADDITION = "counter-gated-addition"
    COUNTER_GATED_LOAD = "counter-gated-load"
    TRUNCATED_SUBTRACTION = "truncated-subtraction"
    COUNTER = "counter"


DEFAULT_BINDINGS = {
    "S1": "s1",
    "S2": "s2",
    "S3": "s3",
    "U": "u",
    "V": "v",
    "W": "w",
    "L": "l",
    "P": "p",
    "X": "x",
}

_ROLES = {
    ModuleKind.ADDITION: ("S1", "S2", "S3"),
    ModuleKind.LOAD: ("S1", "S2"),
    ModuleKind.GATED_ADDITION: ("S1", "S2", "S3", "U"),
    ModuleKind.GATED_LOAD: ("S1", "S2", "V"),
    ModuleKind.COUNTER_GATED_ADDITION: ("S1", "S2", "S3", "U", "W"),
    ModuleKind.COUNTER_GATED_LOAD: ("S1", "S2", "V", "W"),
    ModuleKind.TRUNCATED_SUBTRACTION: ("P", "X", "U", "V"),
    ModuleKind.COUNTER: ("L", "W", "S1"),
}

# catalysts attached to every reaction of a gated kind
_GATES = {
    ModuleKind.GATED_ADDITION: ("U",),
    ModuleKind.GATED_LOAD: ("V",),
    ModuleKind.COUNTER_GATED_ADDITION: ("U", "W"),
    ModuleKind.COUNTER_GATED_LOAD: ("V", "W"),
}


@dataclass(frozen=True)
class ModuleSpec:
    """A module kind, its rate constant and the global names of its roles.

    ``rate`` is the constant shared by all reactions of the module (``k``,
    or ``eta3`` for the counter; default 1 and 50 respectively).
    ``bindings`` override :data:`DEFAULT_BINDINGS`; binding a role to None
    removes it, which is an error if the kind needs that role.
    """

    kind: ModuleKind
    rate: float | None = None
    bindings: Mapping[str, str | None] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModuleKind(self.kind))
        unknown = set(self.bindings) - set(DEFAULT_BINDINGS)
        if unknown:
            raise CRNError(f"unknown roles {sorted(unknown)}; roles are {sorted(DEFAULT_BINDINGS)}")
        if self.rate is not None and not self.rate > 0:
            raise CRNError(f"module rate must be positive, got {self.rate!r}")

    @property
    def rate_constant(self) -> float:
        if self.rate is not None:
            return float(self.rate)
        return 50.0 if self.kind is ModuleKind.COUNTER else 1.0

    def resolved(self) -> dict[str, str]:
        """Role -> species name for the roles this kind uses.

        Raises:
            CRNError: a required role is unbound or two roles share a name.
        """
        merged = {**DEFAULT_BINDINGS, **self.bindings}
        out = {}
        for role in _ROLES[self.kind]:
            name = merged.get(role)
            if not name:
                raise CRNError(f"missing binding for role {role} of {self.kind.value} module")
            out[role] = str(name)
        if len(set(out.values())) != len(out):
            raise CRNError(f"bindings must be injective, got {out}")
        return out


def _gate(complex_: dict[str, int], gates: Sequence[str]) -> dict[str, int]:
    out = dict(complex_)
    for g in gates:
        out[g] = out.get(g, 0) + 1
    return out


def build_module(spec: ModuleSpec) -> ReactionNetwork:
    """Reaction list of one module with its roles renamed per ``spec.bindings``."""
    b = spec.resolved()
    k = spec.rate_constant
    kind = spec.kind
    if kind is ModuleKind.TRUNCATED_SUBTRACTION:
        P, X, U, V = b["P"], b["X"], b["U"], b["V"]
        rxns = [
            Reaction({P: 1}, {P: 1, U: 1}, k),
            Reaction({U: 1}, {}, k),
            Reaction({X: 1}, {X: 1, V: 1}, k),
            Reaction({U: 1, V: 1}, {}, k),
        ]
        return build_network([P, X, U, V], rxns)
    if kind is ModuleKind.COUNTER:
        L, W, S1 = b["L"], b["W"], b["S1"]
        rxns = [
            Reaction({L: 1, W: 1}, {L: 1, W: 2}, k, "eta3"),
            Reaction({S1: 1, W: 1}, {S1: 1}, k, "eta3"),
            Reaction({W: 2}, {W: 1}, k, "eta3"),
        ]
        return build_network([S1, W, L], rxns)

    gates = [b[g] for g in _GATES.get(kind, ())]
    S1, S2 = b["S1"], b["S2"]
    if kind in (ModuleKind.ADDITION, ModuleKind.GATED_ADDITION, ModuleKind.COUNTER_GATED_ADDITION):
        S3 = b["S3"]
        base = [
            ({S1: 1}, {S1: 1, S2: 1}),
            ({S3: 1}, {S3: 1, S2: 1}),
            ({S2: 1}, {}),
        ]
        names = [S1, S2, S3]
    else:
        base = [
            ({S2: 1}, {S1: 1, S2: 1}),
            ({S1: 1}, {}),
        ]
        names = [S1, S2]
    rxns = [Reaction(_gate(r, gates), _gate(p, gates), k) for r, p in base]
    return build_network(names + gates, rxns)


def counter_closed_form(l: float, s1: float, w0: float, eta3: float, t):
    """Exact ``w(t)`` of ``dw/dt = eta3 (l - s1 - w) w`` with ``s1`` and ``l`` fixed.

    Vectorised over ``t``.  The exponential is always arranged to decay so
    that long horizons do not overflow, and ``expm1`` keeps the denominator
    free of cancellation as ``l - s1`` approaches zero.
    """
    if w0 < 0:
        raise ValueError("w0 must be non-negative")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    d = l - s1
    if abs(d) < 1e-300:
        out = w0 / (1.0 + eta3 * w0 * t)
    elif d > 0:
        a = eta3 * d * t
        out = d * w0 / (d * np.exp(-a) - w0 * np.expm1(-a))
    else:
        b = eta3 * d * t
        out = d * w0 * np.exp(b) / (w0 * np.expm1(b) + d)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ComposedSystem:
    """Oscillator plus gated computation modules as one network and one ODE.

    ``polynomials`` is the mass-action system of ``network`` with the
    catalyst P replaced by its constant concentration ``config.p``.
    """

    network: ReactionNetwork
    polynomials: PolynomialOde
    system: OdeSystem
    config: OscillatorConfig
    initial: tuple[float, ...]
    bindings: Mapping[str, str]
    iteration_target: float | None = None

    @property
    def species(self) -> tuple[str, ...]:
        return self.system.species

    def simulate(self, t_end: float, solver: SolverConfig | None = None, initial: Sequence[float] | None = None) -> Trace:
        s0 = self.initial if initial is None else tuple(initial)
        return integrate(self.system, s0, (0.0, t_end), solver)


def _check_inputs(cfg: OscillatorConfig, s_init, osc_init):
    if not cfg.oscillatory:
        warnings.warn(f"ell={cfg.ell} outside (2, 4): the clock will not oscillate", RuntimeWarning, stacklevel=3)
    s_init = tuple(float(v) for v in s_init)
    osc_init = tuple(float(v) for v in osc_init)
    if len(s_init) != 3 or len(osc_init) != 4:
        raise ValueError("s_init needs (s1, s2, s3) and osc_init needs (x, y, u, v)")
    if min(s_init + osc_init) < 0:
        raise ValueError("initial concentrations must be non-negative")
    return s_init, osc_init


def _assemble(cfg, modules, extra_species, initial, bindings, target=None) -> ComposedSystem:
    net = oscillator_network(cfg)
    for spec in modules:
        net = net + build_module(spec)
    order = ["x", "y", "u", "v", "s1", "s2", "s3", *extra_species, "p"]
    net = build_network(order, net.reactions)
    poly = network_to_polynomials(net).substitute({"p": cfg.p})
    return ComposedSystem(net, poly, OdeSystem.from_polynomials(poly), cfg, initial, dict(bindings), target)


def compose_loop(
    cfg: OscillatorConfig | None = None,
    s_init: Sequence[float] = (0.0, 0.0, 1.0),
    osc_init: Sequence[float] = (5.0, 5.0, 0.0, 0.0),
    rate: float = 1.0,
) -> ComposedSystem:
    """Clock plus U-gated addition and V-gated load over (x, y, u, v, s1, s2, s3).

    While u is high, ``s2 -> s1 + s3``; while v is high, ``s1 -> s2``, so
    every full clock cycle adds ``s3`` to ``s1``.
    """
    cfg = cfg or OscillatorConfig()
    s_init, osc_init = _check_inputs(cfg, s_init, osc_init)
    modules = [
        ModuleSpec(ModuleKind.GATED_ADDITION, rate),
        ModuleSpec(ModuleKind.GATED_LOAD, rate),
    ]
    return _assemble(cfg, modules, [], osc_init + s_init, {"U": "u", "V": "v", "S1": "s1", "S2": "s2", "S3": "s3"})


def compose_terminating_loop(
    cfg: OscillatorConfig | None = None,
    s_init: Sequence[float] = (0.0, 0.0, 1.0),
    l: float = 4.0,
    w0: float | None = None,
    eta3: float = 50.0,
    osc_init: Sequence[float] = (5.0, 5.0, 0.0, 0.0),
    rate: float = 1.0,
) -> ComposedSystem:
    """Loop whose modules also need W, with W counting down ``l - s1``.

    Species order is (x, y, u, v, s1, s2, s3, w, l).  ``w0`` defaults to
    ``l``.
    """
    cfg = cfg or OscillatorConfig()
    s_init, osc_init = _check_inputs(cfg, s_init, osc_init)
    w0 = float(l) if w0 is None else float(w0)
    if l < 0 or w0 <= 0 or eta3 <= 0:
        raise ValueError("need l >= 0, w0 > 0 and eta3 > 0 (pass w0 explicitly when l is 0)")
    modules = [
        ModuleSpec(ModuleKind.COUNTER_GATED_ADDITION, rate),
        ModuleSpec(ModuleKind.COUNTER_GATED_LOAD, rate),
        ModuleSpec(ModuleKind.COUNTER, eta3),
    ]
    bindings = {"U": "u", "V": "v", "W": "w", "L": "l", "S1": "s1", "S2": "s2", "S3": "s3"}
    return _assemble(cfg, modules, ["w", "l"], osc_init + s_init + (w0, float(l)), bindings, float(l))


def staircase(trace: Trace, p: float, threshold: float | None = None) -> list[tuple[float, float]]:
    """``(time, s1)`` at each rising edge of u after the first.

    The k-th entry is taken after k complete clock cycles: the first rise
    opens cycle one, and each later rise closes the previous cycle.
    """
    if threshold is None:
        threshold = clock_threshold(p)
    rises = [e.time for e in detect_crossings(trace, "u", threshold, 0.1 * threshold) if e.direction is Direction.RISING]
    s1 = trace["s1"]
    return [(t, float(np.interp(t, trace.times, s1))) for t in rises[1:]]
