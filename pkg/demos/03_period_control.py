"""ell and eta1 set the phase durations; the slow-branch integrals predict them.

Run: python3 demos/03_period_control.py
"""

from crn_clockwork import OscillatorConfig, build_oscillator, integrate, period_report, predict_periods

print("ell   T_low   T_high  (eta1 = 0.1, predicted)")
for ell in (2.2, 2.5, 3.0, 3.5, 3.8):
    T_l, T_h = predict_periods(ell, 0.1)
    print(f"{ell:3.1f}  {T_l:6.3f}  {T_h:6.3f}")

print("\nDoubling eta1 halves both:", predict_periods(3.0, 0.2))

print("\nprediction vs simulation:")
for ell in (2.5, 3.0, 3.5):
    cfg = OscillatorConfig(ell=ell)
    trace = integrate(build_oscillator(cfg), (5.0, 5.0, 0.0, 0.0), (0.0, 100.0))
    r = period_report(cfg, trace)
    print(f"ell={ell}: T1 {r.T1_measured:.2f} vs {r.T_l_predicted:.2f} ({100 * r.rel_error_T1:.1f}%),"
          f" T2 {r.T2_measured:.2f} vs {r.T_h_predicted:.2f} ({100 * r.rel_error_T2:.1f}%)")
print("The ~1% excess is the O(eps) delay at each fold, which the singular limit ignores.")
