"""Predicted and measured clock periods.

Along an attracting branch of the driver, y = phi(x) and dy/dt =
eta1 (x - ell) y, so the dwell time on a branch is the integral of
phi'(x) / (eta1 (x - ell) phi(x)) dx.  The low phase of x (u high) runs
from x_l=1 to the fold x_m=2, the high phase (v high) from x_r=5 down to
x_M=4; the fast jumps between them are neglected.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .dynamics import Direction, Trace, detect_crossings
from .errors import NoOscillationError
from .oscillator import GEOMETRY, CubicGeometry, OscillatorConfig, clock_threshold

__all__ = ["PeriodReport", "branch_integrand", "predict_periods", "measure_periods", "period_report", "sweep_table"]


def branch_integrand(x, ell: float, eta1: float, geometry: CubicGeometry = GEOMETRY):
    """dt/dx along the critical manifold: phi'(x) / (eta1 (x - ell) phi(x))."""
    return geometry.dphi(x) / (eta1 * (x - ell) * geometry.phi(x))


def predict_periods(ell: float, eta1: float, quad_tol: float = 1e-10, geometry: CubicGeometry = GEOMETRY, full_output: bool = False):
    """Low- and high-phase durations ``(T_l, T_h)`` of the driver.

    With ``full_output=True`` a third element, the summed absolute error
    estimate of the adaptive quadrature, is returned.

    Raises:
        ValueError: ``ell`` outside (x_m, x_M), where the integrand's pole
            would fall inside a branch (or there is no oscillation), or
            non-positive ``eta1``/``quad_tol``.
    """
    if not geometry.x_m < ell < geometry.x_M:
        raise ValueError(f"ell={ell} outside ({geometry.x_m}, {geometry.x_M}): no relaxation oscillation")
    if eta1 <= 0 or quad_tol <= 0:
        raise ValueError("eta1 and quad_tol must be positive")
    args = (ell, eta1, geometry)
    T_l, err_l = quad(branch_integrand, geometry.x_l, geometry.x_m, args=args, epsabs=quad_tol, epsrel=0, limit=200)
    T_h, err_h = quad(branch_integrand, geometry.x_r, geometry.x_M, args=args, epsabs=quad_tol, epsrel=0, limit=200)
    if full_output:
        return T_l, T_h, err_l + err_h
    return T_l, T_h


def _high_phases(trace: Trace, name: str, threshold: float, band: float):
    events = detect_crossings(trace, name, threshold, band)
    phases = []
    start = None
    for e in events:
        if e.direction is Direction.RISING:
            start = e.time
        elif start is not None:
            phases.append((start, e.time))
            start = None
    return events, phases


def measure_periods(trace: Trace, p: float, threshold: float | None = None, band: float | None = None) -> tuple[float, float]:
    """Mean durations ``(T1, T2)`` of the u-high and v-high phases.

    Phases start and end at Schmitt-trigger crossings of ``threshold``
    (default :func:`~crn_clockwork.oscillator.clock_threshold` of ``p``)
    with a band of 10% of the threshold.  Everything before the second
    rising edge of u is treated as transient.

    Raises:
        NoOscillationError: fewer than two complete u-high or v-high phases
            after the transient.
    """
    if threshold is None:
        threshold = clock_threshold(p)
    if band is None:
        band = 0.1 * threshold
    u_events, u_phases = _high_phases(trace, "u", threshold, band)
    rises = [e.time for e in u_events if e.direction is Direction.RISING]
    if len(rises) < 2:
        raise NoOscillationError("insufficient oscillation: u rises fewer than twice")
    t_start = rises[1]
    _, v_phases = _high_phases(trace, "v", threshold, band)
    u_phases = [ph for ph in u_phases if ph[0] >= t_start]
    v_phases = [ph for ph in v_phases if ph[0] >= t_start]
    if len(u_phases) < 2 or len(v_phases) < 2:
        raise NoOscillationError(
            f"insufficient oscillation: {len(u_phases)} u-high and {len(v_phases)} v-high phases after transient"
        )
    T1 = float(np.mean([b - a for a, b in u_phases]))
    T2 = float(np.mean([b - a for a, b in v_phases]))
    return T1, T2


@dataclass
class PeriodReport:
    ell: float
    eta1: float
    T_l_predicted: float
    T_h_predicted: float
    T1_measured: float | None = None
    T2_measured: float | None = None
    rel_error_T1: float | None = None
    rel_error_T2: float | None = None
    quadrature_error_estimate: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def period_report(cfg: OscillatorConfig, trace: Trace | None = None, quad_tol: float = 1e-10) -> PeriodReport:
    """Prediction for ``cfg`` and, when a trace is given, the measured phase durations."""
    T_l, T_h, err = predict_periods(cfg.ell, cfg.eta1, quad_tol, full_output=True)
    rep = PeriodReport(cfg.ell, cfg.eta1, T_l, T_h, quadrature_error_estimate=err)
    if trace is not None:
        T1, T2 = measure_periods(trace, cfg.p)
        rep.T1_measured, rep.T2_measured = T1, T2
        rep.rel_error_T1 = abs(T1 - T_l) / T_l
        rep.rel_error_T2 = abs(T2 - T_h) / T_h
    return rep


def sweep_table(reports) -> str:
    """CSV with columns ell,eta1,T_l_pred,T_h_pred,T1_meas,T2_meas."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "eta1", "T_l_pred", "T_h_pred", "T1_meas", "T2_meas"])
    fmt = lambda v: "" if v is None else f"{v:.10g}"
    for r in reports:
        w.writerow([fmt(r.ell), fmt(r.eta1), fmt(r.T_l_predicted), fmt(r.T_h_predicted), fmt(r.T1_measured), fmt(r.T2_measured)])
    return buf.getvalue()
