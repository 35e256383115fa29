"""Export the terminating loop as one abstract reaction network (JSON).

Run: python3 demos/06_export_network.py [network.json]
"""

import sys

from crn_clockwork import ReactionNetwork, compose_terminating_loop

system = compose_terminating_loop(l=4.0, eta3=50.0)
net = system.network
print(f"{net.n_reactions} reactions, species {', '.join(net.names)}")
print(net)

text = net.to_json(indent=2)
assert ReactionNetwork.from_json(text) == net
path = sys.argv[1] if len(sys.argv) > 1 else None
if path:
    with open(path, "w") as fh:
        fh.write(text)
    print("written to", path)
