"""Reaction networks under mass-action kinetics and their polynomial ODEs.

A network is an ordered species list plus reactions with integer complexes
and positive rate constants.  Its mass-action dynamics is the polynomial
system ``ds/dt = Xi . r(s)`` with ``Xi[i, j] = b_ji - a_ji`` and
``r_j(s) = k_j * prod_i s_i**a_ji``.

The reverse direction, :func:`realize_network`, is the naive monomial
transform: every term ``c * s**a`` in ``ds_i/dt`` becomes the reaction
``a -> a + sign(c) e_i`` with rate ``|c|``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CRNError, KineticConditionError

__all__ = [
    "Species",
    "Reaction",
    "ReactionNetwork",
    "PolynomialOde",
    "build_network",
    "stoichiometric_matrix",
    "reactant_matrix",
    "mass_action_rates",
    "ode_rhs",
    "network_to_polynomials",
    "realize_network",
]

# monomials whose merged coefficient falls below this are dropped
COEFF_EPS = 1e-15


def _clean_complex(complex_: Mapping[str, int], what: str) -> dict[str, int]:
    out = {}
    for name, coeff in complex_.items():
        if int(coeff) != coeff or coeff < 0:
            raise CRNError(f"{what} coefficient of {name!r} must be a non-negative integer, got {coeff!r}")
        if coeff:
            out[str(name)] = int(coeff)
    return out


def _format_complex(complex_: Mapping[str, int]) -> str:
    if not complex_:
        return "0"
    return " + ".join(name if c == 1 else f"{c}{name}" for name, c in complex_.items())


@dataclass(frozen=True)
class Species:
    id: str
    index: int


@dataclass(frozen=True)
class Reaction:
    """One reaction ``sum a_i S_i -> sum b_i S_i`` with rate constant ``rate``.

    ``label`` is an optional display form of the rate (e.g. ``"9*eta1/eps1"``);
    it never enters the numerics.
    """

    reactants: Mapping[str, int]
    products: Mapping[str, int]
    rate: float
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "reactants", _clean_complex(self.reactants, "reactant"))
        object.__setattr__(self, "products", _clean_complex(self.products, "product"))
        rate = float(self.rate)
        if not np.isfinite(rate) or rate <= 0:
            raise CRNError(f"rate constant must be positive, got {self.rate!r}")
        object.__setattr__(self, "rate", rate)
        if not self.reactants and not self.products:
            raise CRNError("reaction 0 -> 0 is not allowed")

    @property
    def species(self) -> set[str]:
        return set(self.reactants) | set(self.products)

    def __str__(self):
        rate = self.label if self.label is not None else f"{self.rate:g}"
        return f"{_format_complex(self.reactants)} -> {_format_complex(self.products)}  [{rate}]"

    def to_dict(self) -> dict:
        d = {"reactants": dict(self.reactants), "products": dict(self.products), "rate": self.rate}
        if self.label is not None:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Reaction":
        return cls(d.get("reactants", {}), d.get("products", {}), d["rate"], d.get("label"))


@dataclass(frozen=True)
class ReactionNetwork:
    """Validated network; build it with :func:`build_network`."""

    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.species)

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def index(self, name: str) -> int:
        for s in self.species:
            if s.id == name:
                return s.index
        raise KeyError(name)

    def __str__(self):
        return "\n".join(str(r) for r in self.reactions)

    def __add__(self, other: "ReactionNetwork") -> "ReactionNetwork":
        names = list(self.names) + [n for n in other.names if n not in self.names]
        return build_network(names, list(self.reactions) + list(other.reactions))

    def to_dict(self) -> dict:
        return {"species": list(self.names), "reactions": [r.to_dict() for r in self.reactions]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReactionNetwork":
        return build_network(d["species"], [Reaction.from_dict(r) for r in d["reactions"]])

    @classmethod
    def from_json(cls, text: str) -> "ReactionNetwork":
        return cls.from_dict(json.loads(text))


def build_network(species: Sequence[str], reactions: Iterable[Reaction]) -> ReactionNetwork:
    """Validate species names and reactions and freeze them into a network.

    Raises:
        CRNError: duplicate species, a reaction naming an unlisted species,
            an empty species or reaction list.
    """
    names = [str(s) for s in species]
    if not names:
        raise CRNError("a network needs at least one species")
    seen = set()
    for n in names:
        if n in seen:
            raise CRNError(f"duplicate species {n!r}")
        seen.add(n)
    reactions = tuple(reactions)
    if not reactions:
        raise CRNError("a network needs at least one reaction")
    for r in reactions:
        if not isinstance(r, Reaction):
            raise CRNError(f"expected Reaction, got {type(r).__name__}")
        missing = r.species - seen
        if missing:
            raise CRNError(f"unknown species {sorted(missing)} in reaction {r}")
    return ReactionNetwork(tuple(Species(n, i) for i, n in enumerate(names)), reactions)


def reactant_matrix(net: ReactionNetwork) -> np.ndarray:
    """Reactant coefficients ``a_ji`` as an (m, n) integer array."""
    A = np.zeros((net.n_reactions, net.n_species), dtype=int)
    idx = {n: i for i, n in enumerate(net.names)}
    for j, r in enumerate(net.reactions):
        for name, c in r.reactants.items():
            A[j, idx[name]] = c
    return A


def stoichiometric_matrix(net: ReactionNetwork) -> np.ndarray:
    """Integer (n, m) matrix with entry ``b_ji - a_ji``."""
    Xi = np.zeros((net.n_species, net.n_reactions), dtype=int)
    idx = {n: i for i, n in enumerate(net.names)}
    for j, r in enumerate(net.reactions):
        for name, c in r.products.items():
            Xi[idx[name], j] += c
        for name, c in r.reactants.items():
            Xi[idx[name], j] -= c
    return Xi


def _check_state(net: ReactionNetwork, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (net.n_species,):
        raise CRNError(f"state has shape {s.shape}, expected ({net.n_species},)")
    if np.any(s < 0):
        raise CRNError("negative concentration in state vector")
    return s


def mass_action_rates(net: ReactionNetwork, s) -> np.ndarray:
    """Reaction rates ``k_j * prod s_i**a_ji`` (with ``0**0 == 1``)."""
    s = _check_state(net, s)
    k = np.array([r.rate for r in net.reactions])
    return k * np.prod(s[None, :] ** reactant_matrix(net), axis=1)


def ode_rhs(net: ReactionNetwork, s) -> np.ndarray:
    return stoichiometric_matrix(net) @ mass_action_rates(net, s)


Exponents = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PolynomialOde:
    """Polynomial right-hand sides in collected form.

    ``equations[name]`` maps an exponent tuple (aligned with ``species``) to
    its coefficient.  Construct through :meth:`from_terms`, which merges
    duplicate exponents and drops coefficients below ``COEFF_EPS``.
    Equality is coefficient-exact and ignores monomial order.
    """

    species: tuple[str, ...]
    equations: Mapping[str, Mapping[Exponents, float]]

    @classmethod
    def from_terms(cls, species: Sequence[str], terms: Mapping[str, Iterable]) -> "PolynomialOde":
        """Collect ``terms[name] = [(coeff, exps), ...]``.

        ``exps`` is either a mapping species -> power or a tuple aligned with
        ``species``.  Species absent from ``terms`` get ``ds/dt = 0``.
        """
        species = tuple(str(s) for s in species)
        if len(set(species)) != len(species):
            raise CRNError("duplicate species in polynomial system")
        pos = {n: i for i, n in enumerate(species)}
        unknown = set(terms) - set(species)
        if unknown:
            raise CRNError(f"equations for unknown species {sorted(unknown)}")
        eqs = {}
        for name in species:
            acc: dict[Exponents, float] = {}
            for coeff, exps in terms.get(name, ()):
                key = cls._exponent_key(exps, species, pos)
                acc[key] = acc.get(key, 0.0) + float(coeff)
            eqs[name] = {k: c for k, c in acc.items() if abs(c) >= COEFF_EPS}
        return cls(species, eqs)

    @staticmethod
    def _exponent_key(exps, species, pos) -> Exponents:
        if isinstance(exps, Mapping):
            key = [0] * len(species)
            for name, e in exps.items():
                if name not in pos:
                    raise CRNError(f"unknown species {name!r} in monomial")
                key[pos[name]] += int(e)
        else:
            key = [int(e) for e in exps]
            if len(key) != len(species):
                raise CRNError("exponent tuple length does not match species")
        if any(e < 0 for e in key):
            raise CRNError("negative exponent in monomial")
        return tuple(key)

    def __eq__(self, other):
        if not isinstance(other, PolynomialOde):
            return NotImplemented
        return self.species == other.species and all(
            dict(self.equations[n]) == dict(other.equations[n]) for n in self.species
        )

    def monomials(self, name: str) -> list[tuple[float, dict[str, int]]]:
        """Terms of ``d name/dt`` as ``(coeff, {species: power})`` with zero powers omitted."""
        return [
            (c, {s: e for s, e in zip(self.species, exps) if e})
            for exps, c in self.equations[name].items()
        ]

    def substitute(self, values: Mapping[str, float]) -> "PolynomialOde":
        """Fix the listed species at constant values and drop them from the system.

        Only species whose own equation is identically zero (catalysts such
        as P) may be substituted.
        """
        for name in values:
            if name not in self.species:
                raise CRNError(f"unknown species {name!r}")
            if self.equations[name]:
                raise CRNError(f"cannot substitute {name!r}: its rate of change is not zero")
        keep = [i for i, n in enumerate(self.species) if n not in values]
        fixed = [(i, float(values[n])) for i, n in enumerate(self.species) if n in values]
        terms = {}
        for i in keep:
            name = self.species[i]
            out = []
            for exps, c in self.equations[name].items():
                for j, val in fixed:
                    c *= val ** exps[j]
                out.append((c, tuple(exps[k] for k in keep)))
            terms[name] = out
        return PolynomialOde.from_terms([self.species[i] for i in keep], terms)

    def _arrays(self):
        rows, coeffs, exps = [], [], []
        for i, name in enumerate(self.species):
            for e, c in self.equations[name].items():
                rows.append(i)
                coeffs.append(c)
                exps.append(e)
        n = len(self.species)
        E = np.array(exps, dtype=float).reshape(-1, n)
        return np.array(rows, dtype=int), np.array(coeffs, dtype=float), E

    def rhs_function(self):
        """Vectorised ``f(s)``; does not check signs, so it tolerates tiny undershoot."""
        rows, coeffs, E = self._arrays()
        n = len(self.species)

        def f(s):
            mono = coeffs * np.prod(np.asarray(s, dtype=float)[None, :] ** E, axis=1)
            return np.bincount(rows, weights=mono, minlength=n)

        return f

    def jacobian_function(self):
        """Analytic Jacobian ``J[i, k] = d f_i / d s_k`` of the polynomial system."""
        rows, coeffs, E = self._arrays()
        n = len(self.species)
        m_idx, k_idx = np.nonzero(E > 0)
        d_coeff = coeffs[m_idx] * E[m_idx, k_idx]
        d_exps = E[m_idx].copy()
        d_exps[np.arange(len(m_idx)), k_idx] -= 1
        d_rows = rows[m_idx]
        flat = d_rows * n + k_idx

        def jac(s):
            vals = d_coeff * np.prod(np.asarray(s, dtype=float)[None, :] ** d_exps, axis=1)
            return np.bincount(flat, weights=vals, minlength=n * n).reshape(n, n)

        return jac

    def evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != (len(self.species),):
            raise CRNError(f"state has shape {s.shape}, expected ({len(self.species)},)")
        return self.rhs_function()(s)

    def __str__(self):
        lines = []
        for name in self.species:
            parts = []
            for c, exps in self.monomials(name):
                mono = "*".join(s if e == 1 else f"{s}^{e}" for s, e in exps.items())
                parts.append(f"{c:+g}" + (f"*{mono}" if mono else ""))
            lines.append(f"d{name}/dt = " + (" ".join(parts) if parts else "0"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "species": list(self.species),
            "equations": {
                n: [{"coeff": c, "exps": exps} for c, exps in self.monomials(n)] for n in self.species
            },
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: Mapping) -> "PolynomialOde":
        terms = {
            n: [(t["coeff"], t.get("exps", {})) for t in mons] for n, mons in d.get("equations", {}).items()
        }
        return cls.from_terms(d["species"], terms)

    @classmethod
    def from_json(cls, text: str) -> "PolynomialOde":
        return cls.from_dict(json.loads(text))


def network_to_polynomials(net: ReactionNetwork) -> PolynomialOde:
    """Collected mass-action polynomial system of ``net``."""
    Xi = stoichiometric_matrix(net)
    A = reactant_matrix(net)
    terms: dict[str, list] = {n: [] for n in net.names}
    for j, r in enumerate(net.reactions):
        for i, name in enumerate(net.names):
            if Xi[i, j]:
                terms[name].append((Xi[i, j] * r.rate, tuple(A[j])))
    return PolynomialOde.from_terms(net.names, terms)


def realize_network(ode: PolynomialOde, labels: Mapping[tuple[str, Exponents], str] | None = None) -> ReactionNetwork:
    """One reaction per monomial: ``c*s**a`` in ``ds_i/dt`` -> ``a -> a +/- e_i`` at rate ``|c|``.

    ``labels`` optionally maps ``(species, exponents)`` to a display string
    for the rate of the reaction generated from that monomial.

    Raises:
        KineticConditionError: a negative term of ``ds_i/dt`` has no ``s_i``
            factor, so no mass-action reaction can produce it.
    """
    labels = labels or {}
    reactions = []
    for i, name in enumerate(ode.species):
        for exps, c in ode.equations[name].items():
            if c < 0 and exps[i] < 1:
                raise KineticConditionError(name, dict(zip(ode.species, exps)), c)
            reactant = dict(zip(ode.species, exps))
            product = dict(reactant)
            product[name] += 1 if c > 0 else -1
            reactions.append(Reaction(reactant, product, abs(c), labels.get((name, exps))))
    if not reactions:
        raise CRNError("polynomial system is identically zero; nothing to realize")
    return build_network(ode.species, reactions)
