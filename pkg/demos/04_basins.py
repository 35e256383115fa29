"""Where the oscillation starts decides which clock signal fires first.

Run: python3 demos/04_basins.py
"""

from crn_clockwork import OscillatorConfig, SolverConfig, build_oscillator, classify_initial, equilibrium_character, integrate
from crn_clockwork.oscillator import first_high_signal

cfg = OscillatorConfig()
system = build_oscillator(cfg)
for x0, y0 in [(6, 6), (2, 2), (0.5, 0.5), (4, 4), (3, 3)]:
    region = classify_initial(x0, y0)
    trace = integrate(system, (x0, y0, 0.0, 0.0), (0.0, 15.0), SolverConfig(method="LSODA"))
    print(f"start ({x0}, {y0}): region {region.value:<11} first high signal: {first_high_signal(trace)}")

print("\nOutside 2 < ell < 4 the equilibrium is stable and nothing oscillates:")
for ell in (1.5, 3.0, 4.5):
    info = equilibrium_character(ell)
    print(f"ell={ell}: {info.kind.value} equilibrium at ({info.point[0]}, {info.point[1]:.4g})")
