"""Chemical reaction networks that keep time: a mass-action relaxation
oscillator, the clock signals it produces, and the loop computations those
clocks can schedule."""

from .computation import (
    ComposedSystem,
    ModuleKind,
    ModuleSpec,
    build_module,
    compose_loop,
    compose_terminating_loop,
    counter_closed_form,
    staircase,
)
from .crn import (
    PolynomialOde,
    Reaction,
    ReactionNetwork,
    Species,
    build_network,
    mass_action_rates,
    network_to_polynomials,
    ode_rhs,
    reactant_matrix,
    realize_network,
    stoichiometric_matrix,
)
from .dynamics import CrossingEvent, Direction, OdeSystem, SolverConfig, Trace, detect_crossings, integrate, settle_value
from .errors import CRNError, IntegrationError, KineticConditionError, NoOscillationError
from .oscillator import (
    GEOMETRY,
    BasinRegion,
    ClockReport,
    ClockThresholds,
    CubicGeometry,
    OscillatorConfig,
    build_oscillator,
    build_subsystem_xy,
    classify_initial,
    equilibrium_character,
    oscillator_network,
    oscillator_polynomials,
    subsystem_polynomials,
    validate_clock,
    van_der_pol_2d,
)
from .periods import PeriodReport, measure_periods, period_report, predict_periods, sweep_table

__version__ = "0.1.0"
