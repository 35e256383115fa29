"""The 4-species chemical relaxation oscillator and its clock-signal checks.

The driver is the mass-action form of a shifted van der Pol system,

    eps1 dx/dt = eta1 (phi(x) - y) x,      phi(x) = -x^3 + 9x^2 - 24x + 21
         dy/dt = eta1 (x - ell) y,

whose S-shaped critical manifold y = phi(x) has folds at x=2 (y=1) and
x=4 (y=5).  Two fast species shape it into complementary clock signals:

    eps1 eps2 du/dt = eta1 (eps1 (p - u) - u v)
    eps1 eps2 dv/dt = eta1 (eps1 (x - v) - u v)

so that u ~ p - x while x sits on the low branch and v ~ x - p on the
high branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from .crn import PolynomialOde, Reaction, ReactionNetwork, build_network, realize_network
from .dynamics import Direction, OdeSystem, Trace, detect_crossings

__all__ = [
    "CubicGeometry",
    "GEOMETRY",
    "OscillatorConfig",
    "BasinRegion",
    "EquilibriumKind",
    "ClockThresholds",
    "ClockReport",
    "subsystem_polynomials",
    "build_subsystem_xy",
    "van_der_pol_2d",
    "oscillator_polynomials",
    "build_oscillator",
    "oscillator_network",
    "clock_shaping_reactions",
    "manifold_uv_exact",
    "manifold_uv_approx",
    "manifold_residuals",
    "fast_eigenvalues",
    "classify_initial",
    "equilibrium_character",
    "clock_threshold",
    "validate_clock",
    "first_high_signal",
    "first_branch",
    "jump_mask",
]


@dataclass(frozen=True)
class CubicGeometry:
    """The cubic phi and the singular cycle it defines."""

    phi_coeffs: tuple[float, float, float, float] = (-1.0, 9.0, -24.0, 21.0)
    x_m: float = 2.0
    x_M: float = 4.0
    x_l: float = 1.0
    x_r: float = 5.0
    y_m: float = 1.0
    y_M: float = 5.0

    def phi(self, x):
        a3, a2, a1, a0 = self.phi_coeffs
        return ((a3 * x + a2) * x + a1) * x + a0

    def dphi(self, x):
        a3, a2, a1, _ = self.phi_coeffs
        return (3 * a3 * x + 2 * a2) * x + a1

    def check(self, tol: float = 1e-12) -> None:
        """Assert folds, fold values and jump targets are mutually consistent."""
        assert abs(self.dphi(self.x_m)) <= tol and abs(self.dphi(self.x_M)) <= tol
        assert abs(self.phi(self.x_m) - self.y_m) <= tol
        assert abs(self.phi(self.x_M) - self.y_M) <= tol
        assert abs(self.phi(self.x_l) - self.y_M) <= tol
        assert abs(self.phi(self.x_r) - self.y_m) <= tol

    def phi_re_inverse(self, y: float, xtol: float = 1e-10) -> float:
        """x on the repelling middle branch with phi(x) = y, for y_m < y < y_M."""
        if not self.y_m < y < self.y_M:
            raise ValueError(f"y={y} outside the repelling branch range ({self.y_m}, {self.y_M})")
        return bisect(lambda x: self.phi(x) - y, self.x_m, self.x_M, xtol=xtol)


GEOMETRY = CubicGeometry()


@dataclass(frozen=True)
class OscillatorConfig:
    """Parameters of the standard oscillator; the defaults give a 20-unit clock with p=3."""

    eps1: float = 1e-3
    eps2: float = 1e-3
    eta1: float = 0.1
    p: float = 3.0
    ell: float = 3.0

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            val = getattr(self, name)
            if not 0 < val < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")
            if val > 0.05:
                warnings.warn(f"{name}={val} is not small; slow-fast separation is weak", stacklevel=3)
        if self.eta1 <= 0:
            raise ValueError("eta1 must be positive")
        if self.p <= 0:
            raise ValueError("p must be positive")

    @property
    def kappa(self) -> float:
        """Rate constant of the clock-shaping reactions, eta1/eps2."""
        return self.eta1 / self.eps2

    @property
    def annihilation_rate(self) -> float:
        """Rate constant of U + V -> 0, kappa/eps1."""
        return self.kappa / self.eps1

    @property
    def oscillatory(self) -> bool:
        return 2.0 < self.ell < 4.0

    def replace(self, **changes) -> "OscillatorConfig":
        d = asdict(self)
        d.update(changes)
        return OscillatorConfig(**d)


def subsystem_polynomials(cfg: OscillatorConfig, geometry: CubicGeometry = GEOMETRY) -> PolynomialOde:
    """The (x, y) driver with equilibrium abscissa ``cfg.ell``."""
    a3, a2, a1, a0 = geometry.phi_coeffs
    c = cfg.eta1 / cfg.eps1
    return PolynomialOde.from_terms(
        ("x", "y"),
        {
            "x": [(a3 * c, (4, 0)), (a2 * c, (3, 0)), (a1 * c, (2, 0)), (a0 * c, (1, 0)), (-c, (1, 1))],
            "y": [(cfg.eta1, (1, 1)), (-cfg.eta1 * cfg.ell, (0, 1))],
        },
    )


def build_subsystem_xy(cfg: OscillatorConfig) -> OdeSystem:
    return OdeSystem.from_polynomials(subsystem_polynomials(cfg))


def van_der_pol_2d(eps: float = 1e-3) -> OdeSystem:
    """Modified van der Pol model: eps dx/dt = (phi(x) - y) x, dy/dt = (x - 3) y."""
    return build_subsystem_xy(OscillatorConfig(eps1=eps, eta1=1.0, ell=3.0))


def xy_rate_labels(cfg: OscillatorConfig) -> dict:
    """Display strings for the reactions realized from the (x, y) driver."""
    ell = f"{cfg.ell:g}"
    return {
        ("x", (4, 0)): "eta1/eps1",
        ("x", (3, 0)): "9*eta1/eps1",
        ("x", (2, 0)): "24*eta1/eps1",
        ("x", (1, 0)): "21*eta1/eps1",
        ("x", (1, 1)): "eta1/eps1",
        ("y", (1, 1)): "eta1",
        ("y", (0, 1)): f"{ell}*eta1",
    }


def oscillator_polynomials(cfg: OscillatorConfig, geometry: CubicGeometry = GEOMETRY) -> PolynomialOde:
    """Four-species system over (x, y, u, v) with the catalyst P held at ``cfg.p``."""
    xy = subsystem_polynomials(cfg, geometry)
    lin = cfg.kappa
    ann = cfg.annihilation_rate
    terms = {
        "x": [(c, e + (0, 0)) for e, c in xy.equations["x"].items()],
        "y": [(c, e + (0, 0)) for e, c in xy.equations["y"].items()],
        "u": [(lin * cfg.p, (0, 0, 0, 0)), (-lin, (0, 0, 1, 0)), (-ann, (0, 0, 1, 1))],
        "v": [(lin, (1, 0, 0, 0)), (-lin, (0, 0, 0, 1)), (-ann, (0, 0, 1, 1))],
    }
    return PolynomialOde.from_terms(("x", "y", "u", "v"), terms)


def build_oscillator(cfg: OscillatorConfig) -> OdeSystem:
    return OdeSystem.from_polynomials(oscillator_polynomials(cfg))


def clock_shaping_reactions(cfg: OscillatorConfig, x="x", u="u", v="v", p="p") -> list[Reaction]:
    """Modified truncated subtraction driving U and V from X, all rates kappa except U+V (kappa/eps1)."""
    k = cfg.kappa
    return [
        Reaction({p: 1}, {p: 1, u: 1}, k, "kappa"),
        Reaction({u: 1}, {}, k, "kappa"),
        Reaction({x: 1}, {x: 1, v: 1}, k, "kappa"),
        Reaction({v: 1}, {}, k, "kappa"),
        Reaction({u: 1, v: 1}, {}, cfg.annihilation_rate, "kappa/eps1"),
    ]


def oscillator_network(cfg: OscillatorConfig) -> ReactionNetwork:
    """Whole oscillator as one abstract CRN over (x, y, u, v, p).

    The driver is realized monomial by monomial; U and V come from the
    clock-shaping reaction list with P as a catalyst.
    """
    driver = realize_network(subsystem_polynomials(cfg), xy_rate_labels(cfg))
    return build_network(("x", "y", "u", "v", "p"), list(driver.reactions) + clock_shaping_reactions(cfg))


def manifold_uv_exact(x: float, p: float, eps1: float) -> tuple[float, float]:
    """Non-negative (u, v) on eps1 (p - u) = u v = eps1 (x - v)."""
    bu = p - x - eps1
    bv = p - x + eps1
    # rationalized roots avoid cancellation when the linear term dominates
    du = math.sqrt(bu * bu + 4 * eps1 * p)
    dv = math.sqrt(bv * bv + 4 * eps1 * x)
    u = (bu + du) / 2 if bu >= 0 else 2 * eps1 * p / (du - bu)
    v = (dv - bv) / 2 if bv <= 0 else 2 * eps1 * x / (dv + bv)
    return u, v


def manifold_uv_approx(x: float, p: float) -> tuple[float, float]:
    """Leading-order clock levels: (0, x - p) above p, (p - x, 0) below."""
    if x > p:
        return 0.0, x - p
    if x < p:
        return p - x, 0.0
    raise ValueError("approximation undefined at x == p; use manifold_uv_exact")


def manifold_residuals(trace: Trace, cfg: OscillatorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Residuals eps1 (p - u) - u v and eps1 (x - v) - u v along a trace."""
    x, u, v = trace["x"], trace["u"], trace["v"]
    uv = u * v
    return cfg.eps1 * (cfg.p - u) - uv, cfg.eps1 * (x - v) - uv


def fast_eigenvalues(u, v, eta1: float, eps1: float):
    """Eigenvalues of the fast (u, v) Jacobian: -eta1 and -eta1 - eta1 (u + v)/eps1."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.full_like(u, -eta1), -eta1 - eta1 * (u + v) / eps1


class BasinRegion(str, Enum):
    A1 = "A1"
    A2 = "A2"
    EQUILIBRIUM = "Equilibrium"


def classify_initial(x0: float, y0: float, geometry: CubicGeometry = GEOMETRY, tol: float = 1e-6, ell: float = 3.0) -> BasinRegion:
    """Which part of the relaxation cycle a start point (x0, y0) joins first.

    A1 starts join the low-x branch (u high first), A2 starts the high-x
    branch (v high first).  Points on the repelling branch are split at the
    equilibrium height: above it y grows, so they fall into A1.
    """
    if x0 <= 0 or y0 <= 0:
        raise ValueError("initial point must lie in the open first quadrant")
    y_eq = geometry.phi(ell)
    if math.hypot(x0 - ell, y0 - y_eq) <= tol:
        return BasinRegion.EQUILIBRIUM
    if y0 >= geometry.y_M:
        return BasinRegion.A1
    if y0 <= geometry.y_m:
        return BasinRegion.A2
    x_re = geometry.phi_re_inverse(y0)
    if abs(x0 - x_re) <= 1e-10:
        return BasinRegion.A1 if y0 > y_eq else BasinRegion.A2
    return BasinRegion.A1 if x0 < x_re else BasinRegion.A2


class EquilibriumKind(str, Enum):
    STABLE = "stable"
    OSCILLATORY = "oscillatory"
    FOLD_DEGENERATE = "fold-degenerate"


class EquilibriumInfo(NamedTuple):
    kind: EquilibriumKind
    point: tuple[float, float]


def equilibrium_character(ell: float, geometry: CubicGeometry = GEOMETRY) -> EquilibriumInfo:
    point = (float(ell), float(geometry.phi(ell)))
    if ell in (geometry.x_m, geometry.x_M):
        return EquilibriumInfo(EquilibriumKind.FOLD_DEGENERATE, point)
    if geometry.x_m < ell < geometry.x_M:
        return EquilibriumInfo(EquilibriumKind.OSCILLATORY, point)
    return EquilibriumInfo(EquilibriumKind.STABLE, point)


def clock_threshold(p: float, geometry: CubicGeometry = GEOMETRY) -> float:
    """Half the smaller high level of u (p - x_m) and v (x_M - p)."""
    lowest_high = min(p - geometry.x_m, geometry.x_M - p)
    if lowest_high <= 0:
        raise ValueError(f"p={p} must lie strictly between the folds {geometry.x_m} and {geometry.x_M}")
    return 0.5 * lowest_high


@dataclass(frozen=True)
class ClockThresholds:
    """Numerical reading of the three clock-signal requirements.

    ``level_factor=None`` means max(10*eps1, 1e-3).
    """

    abrupt_fraction: float = 0.02
    level_factor: float | None = None
    high_fraction: float = 0.5
    segment_fraction: float = 0.2
    band_fraction: float = 0.05
    edge_window: float = 0.01


@dataclass
class ClockReport:
    passes: bool
    abruptness: bool
    levels: bool
    complementarity: bool
    period: float | None = None
    u_high_amplitude: float | None = None
    v_high_amplitude: float | None = None
    max_low_residual: float | None = None
    max_transition_fraction: float | None = None
    complementarity_residual: float | None = None
    level_factor: float | None = None
    reason: str = ""
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _edge_interval(t, s, tc, rising, T, window, eps=1e-12):
    """[start, end] of one transition between 10% and 90% of the local plateau."""
    if rising:
        side = (t > tc) & (t <= tc + window * T)
    else:
        side = (t < tc) & (t >= tc - window * T)
    if not side.any():
        return tc, tc
    A = s[side].max()
    lo, hi = 0.1 * A, 0.9 * A
    k = np.searchsorted(t, tc)
    before, after = np.arange(0, k), np.arange(k, len(t))
    if rising:
        cand_a = before[s[before] <= lo + eps]
        cand_b = after[s[after] >= hi - eps]
    else:
        cand_a = before[s[before] >= hi - eps]
        cand_b = after[s[after] <= lo + eps]
    ta = t[cand_a[-1]] if cand_a.size else t[0]
    tb = t[cand_b[0]] if cand_b.size else t[-1]
    return float(ta), float(tb)


def _state_from_events(t, events, initial_high):
    state = np.full(t.shape, initial_high, dtype=bool)
    for ev in events:
        state[t >= ev.time] = ev.direction is Direction.RISING
    return state


def _no_oscillation(trace, level, reason):
    u, v = trace["u"], trace["v"]
    amp = max(u.max(), v.max(), 0.0)
    resid = float(np.minimum(u, v).max())
    comp = amp > 0 and resid <= level * amp
    return ClockReport(
        passes=False,
        abruptness=False,
        levels=False,
        complementarity=bool(comp),
        complementarity_residual=float(resid / amp) if amp > 0 else None,
        level_factor=level,
        reason=reason,
    )


def validate_clock(trace: Trace, cfg: OscillatorConfig, thresholds: ClockThresholds | None = None) -> ClockReport:
    """Check that u and v in ``trace`` behave as a pair of symmetric clock signals.

    Data before the second rising edge of u is discarded as transient, and
    at least two full periods must remain.  Edges are found by a Schmitt
    trigger at ``segment_fraction`` of each signal's range.

    1. abruptness: every u/v transition (10%-90% of the local plateau) spans
       at most ``abrupt_fraction`` of the period, and every u edge has an
       opposite v edge within that span;
    2. levels: low phases stay below ``level_factor`` times the peak, high
       phases stay above ``high_fraction`` times their median;
    3. complementarity: outside transitions, min(u, v) stays below
       ``level_factor`` times the peak and the two are never high together.
    """
    th = thresholds or ClockThresholds()
    level = th.level_factor if th.level_factor is not None else max(10 * cfg.eps1, 1e-3)
    t = trace.times
    u, v = trace["u"], trace["v"]
    edges = {}
    for name, s in (("u", u), ("v", v)):
        lo, hi = float(s.min()), float(s.max())
        span = hi - lo
        if span <= 1e-9 * max(1.0, hi):
            return _no_oscillation(trace, level, f"no oscillation detected: {name} is constant")
        theta = lo + th.segment_fraction * span
        edges[name] = (theta, detect_crossings(trace, name, theta, th.band_fraction * span))
    rises = [e.time for e in edges["u"][1] if e.direction is Direction.RISING]
    if len(rises) < 2:
        return _no_oscillation(trace, level, "no oscillation detected: fewer than two rising edges of u")
    t_start = rises[1]
    rises = [r for r in rises if r >= t_start]
    if len(rises) < 3:
        return _no_oscillation(trace, level, "no oscillation detected: fewer than 2 full periods after the transient")
    T = float(np.median(np.diff(rises)))
    t_end = rises[-1]
    in_win = (t >= t_start) & (t <= t_end)

    transition = np.zeros(t.shape, dtype=bool)
    widths = []
    win_edges = {}
    for name, s in (("u", u), ("v", v)):
        theta, evs = edges[name]
        evs_w = [e for e in evs if t_start <= e.time <= t_end]
        win_edges[name] = evs_w
        for e in evs_w:
            ta, tb = _edge_interval(t, s, e.time, e.direction is Direction.RISING, T, th.edge_window)
            widths.append(tb - ta)
            transition |= (t >= ta) & (t <= tb)
    # one sample of padding on each side of every transition
    transition = transition | np.roll(transition, 1) | np.roll(transition, -1)
    max_frac = max(widths) / T if widths else float("inf")
    synced = True
    for e in win_edges["u"]:
        want = Direction.FALLING if e.direction is Direction.RISING else Direction.RISING
        if not any(f.direction is want and abs(f.time - e.time) <= th.abrupt_fraction * T for f in edges["v"][1]):
            synced = False
    abrupt = bool(max_frac <= th.abrupt_fraction and synced)

    notes = []
    if not synced:
        notes.append("u and v edges are not synchronous")
    states = {}
    levels_ok = True
    low_res = 0.0
    highs = {}
    for name, s in (("u", u), ("v", v)):
        theta, evs = edges[name]
        state = _state_from_events(t, evs, bool(s[0] > theta))
        states[name] = state
        peak = s[in_win].max()
        high = in_win & state & ~transition
        low = in_win & ~state & ~transition
        if not high.any() or not low.any():
            levels_ok = False
            notes.append(f"{name}: empty high or low phase")
            continue
        med = float(np.median(s[high]))
        highs[name] = med
        low_max = float(s[low].max())
        low_res = max(low_res, float(low_max / peak))
        if low_max > level * peak:
            levels_ok = False
            notes.append(f"{name}: low phase reaches {low_max:.3g} > {level:g} x peak {peak:.3g}")
        hmin = float(s[high].min())
        if not (hmin > 0 and hmin >= th.high_fraction * med):
            levels_ok = False
            notes.append(f"{name}: high phase dips to {hmin:.3g} < {th.high_fraction:g} x median {med:.3g}")

    steady = in_win & ~transition
    amp = float(max(u[in_win].max(), v[in_win].max()))
    if steady.any():
        comp_res = float(np.minimum(u, v)[steady].max()) / amp
        both_high = bool(np.any(states["u"] & states["v"] & steady))
        comp = bool(comp_res <= level and not both_high)
    else:
        comp_res, both_high, comp = float("nan"), False, False
        notes.append("no steady samples outside transitions")
    if both_high:
        notes.append("u and v are high at the same time")

    return ClockReport(
        passes=bool(abrupt and levels_ok and comp),
        abruptness=abrupt,
        levels=bool(levels_ok),
        complementarity=comp,
        period=T,
        u_high_amplitude=highs.get("u"),
        v_high_amplitude=highs.get("v"),
        max_low_residual=low_res,
        max_transition_fraction=max_frac,
        complementarity_residual=comp_res,
        level_factor=level,
        reason="" if abrupt and levels_ok and comp else "clock criteria not met",
        notes=notes,
    )


def _runs(mask: np.ndarray, t: np.ndarray):
    """(start, end) times of maximal runs of True samples."""
    if not mask.any():
        return []
    d = np.diff(mask.astype(int))
    starts = list(np.nonzero(d == 1)[0] + 1)
    ends = list(np.nonzero(d == -1)[0])
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(len(mask) - 1)
    return [(t[a], t[b]) for a, b in zip(starts, ends)]


def first_high_signal(trace: Trace, threshold: float = 0.5, min_dwell: float = 0.1) -> str | None:
    """'u' or 'v', whichever first stays above ``threshold`` for ``min_dwell``."""
    best = None
    for name in ("u", "v"):
        for a, b in _runs(trace[name] > threshold, trace.times):
            if b - a >= min_dwell:
                if best is None or a < best[0]:
                    best = (a, name)
                break
    return best[1] if best else None


def first_branch(trace: Trace, geometry: CubicGeometry = GEOMETRY, min_dwell: float = 0.1) -> str | None:
    """'left' or 'right': the first attracting branch where x dwells ``min_dwell``."""
    x, t = trace["x"], trace.times
    best = None
    for side, mask in (("left", x < geometry.x_m), ("right", x > geometry.x_M)):
        for a, b in _runs(mask, t):
            if b - a >= min_dwell:
                if best is None or a < best[0]:
                    best = (a, side)
                break
    return best[1] if best else None


def jump_mask(trace: Trace, p: float, guard: float) -> np.ndarray:
    """True for samples within ``guard`` of an x-crossing of ``p`` (the fast jumps)."""
    t = trace.times
    mask = np.zeros(t.shape, dtype=bool)
    for e in detect_crossings(trace, "x", p):
        mask |= np.abs(t - e.time) <= guard
    return mask
