"""The standard oscillator and the two clock signals it produces.

Run: python3 demos/02_clock_signals.py [out.csv]
"""

import sys

import numpy as np

from crn_clockwork import OscillatorConfig, build_oscillator, integrate, oscillator_network, validate_clock
from crn_clockwork.oscillator import manifold_residuals

cfg = OscillatorConfig()
print(f"eps1={cfg.eps1}, eps2={cfg.eps2}, eta1={cfg.eta1}, p={cfg.p}, ell={cfg.ell}, kappa={cfg.kappa:g}")
print("\nThe whole oscillator as one reaction network:")
print(oscillator_network(cfg))

trace = integrate(build_oscillator(cfg), (5.0, 5.0, 0.0, 0.0), (0.0, 100.0))
print(f"\nintegrated {len(trace)} samples")

# a coarse text plot of u and v over one period
for t in np.arange(20.0, 40.0, 1.0):
    k = int(round(t / 0.01))
    u, v = trace["u"][k], trace["v"][k]
    print(f"t={t:5.1f}  u {'#' * int(10 * u):<22} v {'#' * int(10 * v)}")

rep = validate_clock(trace, cfg)
print("\nclock checks:", {k: rep.to_dict()[k] for k in ("passes", "abruptness", "levels", "complementarity")})
print(f"period {rep.period:.3f}, widest edge {100 * rep.max_transition_fraction:.2f}% of period,"
      f" low-phase residual {rep.max_low_residual:.2e}")

r1, r2 = manifold_residuals(trace.window(1.0), cfg)
print(f"fast-manifold residuals after t=1: {np.abs(r1).max():.2e}, {np.abs(r2).max():.2e}")

if len(sys.argv) > 1:
    trace.to_csv(sys.argv[1])
    print("trace written to", sys.argv[1])
