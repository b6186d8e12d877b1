import math
import warnings

import numpy as np
import pytest

from jacobi_gap import ode_solver as od
from jacobi_gap.errors import BreakdownWarning, DomainError, SingularRhs
from jacobi_gap.params import HamiltonianState, derive, t_to_phi


def test_rhs_example():
    dE, dh, dhp = od.rhs(0.5, (1.0, 1.0, 1.0), derive(0, 0, 2))
    assert dE == pytest.approx(-4.0)
    assert dh == 1.0
    assert dhp == pytest.approx(4 * math.sqrt(21), rel=1e-14)


def test_rhs_accepts_state_object():
    p = derive(0, 0, 2)
    H = HamiltonianState(t=0.5, E=1.0, h=1.0, hp=1.0)
    assert od.rhs(0.5, H, p) == od.rhs(0.5, (1.0, 1.0, 1.0), p)


def test_rhs_singular_contract():
    p = derive(0, 0, 2)
    with pytest.raises(SingularRhs) as info:
        od.rhs(0.5, (1.0, 1.0, 0.0), p)
    assert info.value.t == 0.5
    # h' = 1, h = 5: prod = 25 < cross^2 = 100, a negative radicand
    with pytest.raises(SingularRhs):
        od.rhs(0.5, (1.0, 5.0, 1.0), p)


@pytest.mark.parametrize("t", [0.0, 1.0, 1.5])
def test_rhs_domain(t):
    with pytest.raises(DomainError):
        od.rhs(t, (1.0, 1.0, 1.0), derive(0, 0, 2))


@pytest.mark.parametrize(
    "kwargs",
    [{"eps": 0.0}, {"eps": 0.2}, {"t_end": 1.0}, {"t_end": 0.0}, {"reltol": 0.0}, {"max_steps": 0}, {"radicand_clamp": -1.0}],
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        od.OdeConfig(**kwargs)


def test_initial_state_uniform_closed_form():
    cfg = od.OdeConfig()
    t0 = cfg.t0
    phi0 = t_to_phi(t0)
    H = od.initial_state(derive("-1/2", "-1/2", 1), cfg)
    assert H.t == t0
    assert H.E == pytest.approx(1 - phi0 / math.pi, rel=1e-14)
    expect = -t0 / 4 + 1 / 8 - math.sqrt(t0 * (1 - t0)) / (math.pi - phi0)
    assert H.h == pytest.approx(expect, rel=1e-12)


def test_zero_a_tracks_exact_solution():
    # a = 0, b = 0, N = 2: h = -2 and E~ = t^4 exactly
    sol = od.solve(derive(0, 0, 2))
    t = np.linspace(sol.t_stop, sol.t_start, 60)
    H = sol(t)
    assert np.max(np.abs(H[:, 1] + 2)) < 1e-9
    assert np.max(np.abs(H[:, 0] - t**4)) < 1e-5


def test_uniform_density_is_flat():
    g = od.integrate(derive("-1/2", "-1/2", 1), od.OdeConfig(t_end=1e-3), np.linspace(0.05, 3.0, 300))
    assert np.max(np.abs(g.nu - 1 / math.pi)) < 5e-5
    assert np.allclose(g.E, 1 - g.phi / math.pi, atol=5e-5)


@pytest.mark.parametrize("args", [(0, 0, 2), ("-1/2", "1/2", 3), ("-1/4", 0, 2)])
def test_density_integrates_to_one(args):
    g = od.integrate(derive(*args))
    assert g.integral(tails=True) == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("args", [(0, 0, 2), ("-1/2", "1/2", 3)])
def test_E_nondecreasing_in_t(args):
    sol = od.solve(derive(*args))
    t = np.linspace(sol.t_stop, sol.t_start, 500)
    # only up to the absolute tolerance: E~ is ~1e-7 near t_end
    assert np.all(np.diff(sol(t)[:, 0]) >= -sol.config.abstol)


@pytest.mark.parametrize("args", [(0, 0, 2), ("-1/2", "1/2", 3)])
def test_halving_tolerances_changes_little(args):
    p = derive(*args)
    phis = np.linspace(0.1, 2.5, 200)
    base = od.integrate(p, od.OdeConfig(), phis)
    fine = od.integrate(p, od.OdeConfig(reltol=5e-6, abstol=5e-7), phis)
    assert np.max(np.abs(base.nu - fine.nu)) < 5e-5


def test_positive_a_warns():
    with pytest.warns(BreakdownWarning):
        od.initial_state(derive("1/2", "-1/2", 2))


def test_nonpositive_a_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error", BreakdownWarning)
        od.initial_state(derive("-1/2", "1/2", 2))


def test_dense_output_domain():
    sol = od.solve(derive(0, 0, 2))
    with pytest.raises(DomainError):
        sol(0.5 * sol.t_stop)


def test_grid_meta():
    g = od.integrate(derive(0, 0, 2))
    assert g.method == "rk"
    assert g.meta["reltol"] == 1e-5
    assert g.meta["steps"] > 10
    assert np.all(np.diff(g.phi) > 0)
