"""Mass-action basics: from a reaction list to polynomial ODEs and back.

Run: python3 demos/01_mass_action_basics.py
"""

import numpy as np

from crn_clockwork import (
    PolynomialOde,
    Reaction,
    build_network,
    network_to_polynomials,
    ode_rhs,
    realize_network,
    stoichiometric_matrix,
)
from crn_clockwork.errors import KineticConditionError

# The addition module: S2 settles at s1 + s3.
net = build_network(
    ["s1", "s2", "s3"],
    [
        Reaction({"s1": 1}, {"s1": 1, "s2": 1}, 1.0),
        Reaction({"s3": 1}, {"s3": 1, "s2": 1}, 1.0),
        Reaction({"s2": 1}, {}, 1.0),
    ],
)
print("Reactions:")
print(net)
print("\nStoichiometric matrix (species x reactions):")
print(stoichiometric_matrix(net))

ode = network_to_polynomials(net)
print("\nCollected mass-action ODEs:")
print(ode)
print("\nrhs at s = (2, 0, 3):", ode_rhs(net, np.array([2.0, 0.0, 3.0])))

# Going the other way, one reaction per monomial.
back = realize_network(ode)
print("\nRealized again:")
print(back)
print("round trip exact:", network_to_polynomials(back) == ode)

# A negative term must contain its own species, or no reaction can produce it.
bad = PolynomialOde.from_terms(["a", "b"], {"a": [(-1.0, {"b": 1})]})
try:
    realize_network(bad)
except KineticConditionError as exc:
    print("\nas expected:", exc)
