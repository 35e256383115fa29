"""Exception types shared across the package."""


class CRNError(ValueError):
    """Malformed reaction network or polynomial system."""


class KineticConditionError(CRNError):
    """A negative monomial in ds_i/dt does not contain s_i as a factor."""

    def __init__(self, species, exponents, coefficient):
        self.species = species
        self.exponents = dict(exponents)
        self.coefficient = coefficient
        mono = "*".join(f"{k}^{e}" for k, e in self.exponents.items() if e) or "1"
        super().__init__(
            f"kinetic condition violated: d{species}/dt has term "
            f"{coefficient:g}*{mono} without {species} as a factor"
        )


class IntegrationError(RuntimeError):
    """The stiff integrator failed (step-size underflow, non-finite state, undershoot)."""


class NoOscillationError(RuntimeError):
    """A trace holds too few clock periods for the requested analysis."""
