from fractions import Fraction as F

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chemchaos import catalog
from chemchaos.polysys import AffineMap, Poly, PolySystem, apply_affine, evaluate, variables
from chemchaos.sim import (
    find_equilibria,
    integrate,
    integrate_fixed,
    monitor_positivity,
)


def one_dim(p):
    return PolySystem.from_polys([p], ("x",))


(X1,) = variables(1)


def test_exponential_decay():
    traj = integrate(one_dim(-X1), [1.0], 1.0, samples=11)
    assert abs(traj.final[0] - np.exp(-1)) < 1e-8
    assert abs(traj.states[-1, 0] - np.exp(-1)) < 1e-8


def test_rossler_stays_bounded():
    traj = integrate(catalog.instantiate("rossler"), [5, -5, 5], 1000.0, samples=20001)
    assert not traj.truncated
    assert np.max(np.linalg.norm(traj.states, axis=1)) < 100


def test_dense_output_matches_independent_integrator():
    s = catalog.instantiate("rossler")
    t = np.linspace(0, 20, 401)
    ours = integrate(s, [5, -5, 5], 20.0, t_eval=t, rtol=1e-11, atol=1e-13).states
    ref = solve_ivp(lambda _t, u: evaluate(s, u), (0, 20), [5, -5, 5], method="DOP853", t_eval=t,
                    rtol=1e-13, atol=1e-15).y.T
    assert np.max(np.abs(ours - ref)) < 1e-6


def test_fixed_step_fifth_order():
    s = catalog.instantiate("rossler")
    ref = integrate_fixed(s, [5, -5, 5], 10.0, 64000)
    errs = [np.max(np.abs(integrate_fixed(s, [5, -5, 5], 10.0, n) - ref)) for n in (1000, 2000)]
    assert errs[0] / errs[1] >= 8


def test_recentering_improves_accuracy_at_large_offsets():
    e = catalog.get("chemical-rossler")
    s = e.system()
    x0 = [float(v) for v in e.ic()]
    ref = integrate(s, x0, 5.0, samples=51, rtol=1e-13, atol=1e-15).states
    shifted = integrate(s, x0, 5.0, samples=51).states
    plain = integrate(s, x0, 5.0, samples=51, recenter=False).states
    spread = np.ptp(ref, axis=0)
    err_shifted = np.max(np.abs(shifted - ref) / spread)
    err_plain = np.max(np.abs(plain - ref) / spread)
    assert err_shifted < 1e-6
    assert err_shifted <= err_plain


def test_affine_equivariance():
    s = catalog.instantiate("rossler")
    amap = AffineMap((2, 0, 1), (1, -1, 1), (F(2), F(1, 3), F(5, 4)), (F(1, 2), F(-3), F(7)))
    x0 = [5.0, -5.0, 5.0]
    t = np.linspace(0, 50, 501)
    direct = integrate(s, x0, 50.0, t_eval=t).states
    mapped = np.array([amap(list(row)) for row in direct])
    image = integrate(apply_affine(s, amap), amap(x0), 50.0, t_eval=t).states
    assert np.max(np.abs(image - mapped)) < 1e-6


def test_blow_up_is_reported_not_raised():
    traj = integrate(one_dim(X1 * X1), [1.0], 2.0, samples=21)
    assert traj.truncated
    assert traj.times[-1] < 1.0 + 1e-6
    assert np.all(np.isfinite(traj.states))


def test_max_steps_truncates():
    traj = integrate(catalog.instantiate("rossler"), [5, -5, 5], 100.0, max_steps=50)
    assert traj.truncated and "step" in traj.event


@pytest.mark.parametrize("kwargs", [{"t_eval": [0.5, 0.2]}, {"samples": 1}, {"rtol": 0}])
def test_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        integrate(one_dim(-X1), [1.0], 1.0, **kwargs)


def test_initial_condition_length_checked():
    with pytest.raises(ValueError):
        integrate(catalog.instantiate("rossler"), [1.0, 2.0], 1.0)


# -- positivity -----------------------------------------------------------------------

@pytest.mark.parametrize("entry_id", catalog.CDS_IDS)
def test_chemical_trajectories_stay_positive(entry_id):
    e = catalog.get(entry_id)
    x0 = [float(v) for v in e.ic()]
    traj = integrate(e.system(), x0, 200.0, samples=2001)
    assert not traj.truncated
    assert monitor_positivity(traj) is None
    assert np.all(traj.step_min > 0)


def test_linear_decline_crosses_zero():
    traj = integrate(one_dim(Poly.const(1, -1)), [0.5], 1.0, samples=1001)
    t, idx, val = monitor_positivity(traj)
    assert idx == 0 and abs(t - 0.5) < 2e-3 and val < 0


def test_rossler_initial_condition_already_negative():
    traj = integrate(catalog.instantiate("rossler"), [5, -5, 5], 1.0, samples=11)
    t, idx, _ = monitor_positivity(traj)
    assert t == 0.0 and idx == 1


# -- equilibria ---------------------------------------------------------------------------

def test_hidden_perturbed_equilibrium_closed_form():
    mu = F(1, 10**5)
    s = catalog.se17_perturbed(F(1, 10**5), mu, 2, 2)
    eqs = find_equilibria(s, [(-10, 10)] * 3)
    expected = np.array([float(v) for v in catalog.se17_perturbed_equilibrium(mu, 2)])
    assert len(eqs) == 1
    assert np.allclose(eqs[0].point, expected, rtol=0, atol=1e-12)
    assert eqs[0].residual < 1e-12 and eqs[0].stable


def test_logistic_production_equilibrium():
    eqs = find_equilibria(one_dim(1 - X1), [(-5, 5)])
    assert len(eqs) == 1
    assert eqs[0].point[0] == pytest.approx(1, abs=1e-14)
    assert eqs[0].jacobian_eigenvalues[0] == pytest.approx(-1)
    assert eqs[0].stable


def test_hidden_chemical_system_has_one_stable_equilibrium():
    e = catalog.get("cds-hidden")
    eqs = find_equilibria(e.system(), catalog.search_box("cds-hidden"))
    assert len(eqs) == 1 and eqs[0].stable
    # cross-check: the image of the closed-form equilibrium under the construction map
    image = catalog.plan_for("cds-hidden").affine_map()(catalog.se17_perturbed_equilibrium(e.default_params[1]))
    assert np.allclose(eqs[0].point, [float(v) for v in image], rtol=1e-12)


@pytest.mark.parametrize("entry_id,count", [("sprott-p-perm", 2), ("sprott-c-variant", 2), ("se17-variant", 1)])
def test_base_system_equilibria(entry_id, count):
    eqs = find_equilibria(catalog.instantiate(entry_id), catalog.search_box(entry_id))
    assert len(eqs) == count
    assert all(e.relative_residual < 1e-10 for e in eqs)


def test_sprott_p_equilibria_values():
    pts = sorted(tuple(np.round(e.point, 12)) for e in find_equilibria(catalog.instantiate("sprott-p-perm"),
                                                                         [(-10, 10)] * 3))
    assert np.allclose(pts, [(-1, 1, 2.7), (0, 0, 0)], atol=1e-12)


def test_equilibrium_search_is_deterministic():
    s = catalog.instantiate("sprott-c-variant")
    a = find_equilibria(s, [(-3, 3)] * 3, seed=5)
    b = find_equilibria(s, [(-3, 3)] * 3, seed=5)
    assert [tuple(e.point) for e in a] == [tuple(e.point) for e in b]


def test_bad_box_rejected():
    with pytest.raises(ValueError):
        find_equilibria(catalog.instantiate("rossler"), [(1, 0)] * 3)
