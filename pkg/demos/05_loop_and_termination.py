"""The clock schedules s1 = s1 + 1; a counter species stops it at l.

Run: python3 demos/05_loop_and_termination.py
"""

from crn_clockwork import OscillatorConfig, compose_loop, compose_terminating_loop, staircase

cfg = OscillatorConfig()
loop = compose_loop(cfg, s_init=(0.0, 0.0, 1.0))
print(f"loop network: {loop.network.n_reactions} reactions over {', '.join(loop.network.names)}")
print(loop.polynomials)

trace = loop.simulate(105.0)
print("\ns1 after each full clock cycle:")
for k, (t, s1) in enumerate(staircase(trace, cfg.p), start=1):
    print(f"  cycle {k} (t={t:6.2f}): s1 = {s1:.4f}")
print("Each step is about 1 + 22.6*eps1: the switched-off module still runs at the O(eps1) low level.")

print("\nwith a counter, l = 4:")
for eta3 in (1.0, 50.0):
    run = compose_terminating_loop(cfg, l=4.0, w0=4.0, eta3=eta3).simulate(100.0)
    print(f"  eta3={eta3:>4}: final s1 = {run['s1'][-1]:.4f}, final w = {run['w'][-1]:.2e}")
print("A slow counter lets one more partial step through before w has died out.")

zero = compose_terminating_loop(cfg, l=0.0, w0=4.0).simulate(100.0)
print(f"\nl = 0: max s1 = {zero['s1'].max():.4f}")
