import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crn_clockwork import (
    GEOMETRY,
    BasinRegion,
    OscillatorConfig,
    Trace,
    build_oscillator,
    classify_initial,
    equilibrium_character,
    integrate,
    network_to_polynomials,
    oscillator_network,
    oscillator_polynomials,
    validate_clock,
    van_der_pol_2d,
)
from crn_clockwork.oscillator import (
    EquilibriumKind,
    clock_threshold,
    fast_eigenvalues,
    manifold_uv_approx,
    manifold_uv_exact,
)


def test_geometry_is_consistent():
    GEOMETRY.check()
    assert GEOMETRY.phi(3.0) == 3.0
    assert GEOMETRY.phi_re_inverse(3.0) == pytest.approx(3.0, abs=1e-9)
    with pytest.raises(ValueError):
        GEOMETRY.phi_re_inverse(5.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.001, 4.999))
def test_phi_re_inverse_lands_on_middle_branch(y):
    x = GEOMETRY.phi_re_inverse(y)
    assert 2.0 <= x <= 4.0
    assert GEOMETRY.phi(x) == pytest.approx(y, abs=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        OscillatorConfig(eps1=0.0)
    with pytest.raises(ValueError):
        OscillatorConfig(eps2=1.0)
    with pytest.raises(ValueError):
        OscillatorConfig(eta1=-0.1)
    with pytest.warns(UserWarning, match="not small"):
        OscillatorConfig(eps1=0.1)
    cfg = OscillatorConfig()
    assert cfg.kappa == pytest.approx(100.0)
    assert cfg.replace(ell=2.5).ell == 2.5


def test_oscillator_network_matches_direct_polynomials():
    cfg = OscillatorConfig()
    net = oscillator_network(cfg)
    assert net.names == ("x", "y", "u", "v", "p")
    assert net.n_reactions == 12
    assert network_to_polynomials(net).substitute({"p": cfg.p}) == oscillator_polynomials(cfg)


def test_oscillator_polynomial_coefficients():
    cfg = OscillatorConfig(eps1=2e-3, eps2=5e-3, eta1=0.3, p=2.5, ell=3.2)
    ode = oscillator_polynomials(cfg)
    s = np.array([1.3, 2.1, 0.7, 0.2])
    x, y, u, v = s
    phi = -x**3 + 9 * x**2 - 24 * x + 21
    e1, e2, h = cfg.eps1, cfg.eps2, cfg.eta1
    expected = [
        h * (phi - y) * x / e1,
        h * (x - cfg.ell) * y,
        h * (e1 * (cfg.p - u) - u * v) / (e1 * e2),
        h * (e1 * (x - v) - u * v) / (e1 * e2),
    ]
    np.testing.assert_allclose(ode.evaluate(s), expected, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.5, 3.5), st.floats(1e-4, 1e-2))
def test_exact_manifold_solves_fast_equations(x, p, eps1):
    u, v = manifold_uv_exact(x, p, eps1)
    assert u >= 0 and v >= 0
    assert eps1 * (p - u) - u * v == pytest.approx(0.0, abs=1e-12 * max(1.0, p))
    assert eps1 * (x - v) - u * v == pytest.approx(0.0, abs=1e-12 * max(1.0, x))


def test_approximate_manifold():
    assert manifold_uv_approx(1.0, 3.0) == (2.0, 0.0)
    assert manifold_uv_approx(5.0, 3.0) == (0.0, 2.0)
    with pytest.raises(ValueError):
        manifold_uv_approx(3.0, 3.0)
    u, v = manifold_uv_exact(1.0, 3.0, 1e-3)
    assert u == pytest.approx(2.0, abs=2e-3) and v == pytest.approx(0.0, abs=1e-3)


def test_fast_eigenvalues_are_negative():
    lam1, lam2 = fast_eigenvalues([0.0, 2.0], [1.0, 0.0], 0.1, 1e-3)
    assert np.all(lam1 < 0) and np.all(lam2 < 0)
    assert lam2[0] == pytest.approx(-0.1 - 100.0)


@pytest.mark.parametrize(
    "point, region",
    [
        ((6, 6), BasinRegion.A1),
        ((2, 2), BasinRegion.A1),
        ((4, 4), BasinRegion.A2),
        ((0.5, 0.5), BasinRegion.A2),
        ((3, 3), BasinRegion.EQUILIBRIUM),
    ],
)
def test_classify_initial(point, region):
    assert classify_initial(*point) is region


def test_classify_rejects_axes():
    with pytest.raises(ValueError):
        classify_initial(0.0, 2.0)


@pytest.mark.parametrize(
    "ell, kind",
    [(1.5, EquilibriumKind.STABLE), (3.0, EquilibriumKind.OSCILLATORY), (4.5, EquilibriumKind.STABLE), (2.0, EquilibriumKind.FOLD_DEGENERATE)],
)
def test_equilibrium_character(ell, kind):
    info = equilibrium_character(ell)
    assert info.kind is kind
    assert info.point[1] == pytest.approx(GEOMETRY.phi(ell))


def test_clock_threshold():
    assert clock_threshold(3.0) == 0.5
    assert clock_threshold(2.5) == 0.25
    with pytest.raises(ValueError):
        clock_threshold(4.5)


def test_standard_trace_is_a_clock(standard_trace, std_cfg):
    rep = validate_clock(standard_trace, std_cfg)
    assert rep.passes, rep
    assert rep.period == pytest.approx(19.66, rel=0.05)


def test_relabelled_driver_is_not_a_clock():
    """x and y of the plain driver never go near zero, so they fail as clock signals."""
    tr = integrate(van_der_pol_2d(), (5.0, 5.0), (0.0, 30.0)).relabel({"x": "u", "y": "v"})
    rep = validate_clock(tr, OscillatorConfig())
    assert not rep.passes
    assert not rep.levels


def test_constant_trace_reports_no_oscillation(std_cfg):
    t = np.linspace(0, 50, 501)
    tr = Trace(t, np.tile([3.0, 3.0, 0.03, 0.03], (t.size, 1)), ("x", "y", "u", "v"))
    rep = validate_clock(tr, std_cfg)
    assert not rep.passes
    assert "no oscillation" in rep.reason


def test_stable_regime_is_no_clock():
    cfg = OscillatorConfig(ell=1.5)
    tr = integrate(build_oscillator(cfg), (5.0, 5.0, 0.0, 0.0), (0.0, 60.0))
    assert not validate_clock(tr, cfg).passes
    assert math.isclose(tr["x"][-1], 1.5, abs_tol=0.05)
