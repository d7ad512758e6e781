"""Integrator tests: formula identities, conserved quantities, cross-checks."""

import numpy as np
import numpy.testing as npt
import pytest

from bordernet import geodesics as g


def random_full_states(rng, n, p_max=2.0):
    states = np.empty((n, 6))
    states[:, 0:2] = rng.uniform(-1.0, 1.0, size=(n, 2))
    states[:, 2] = rng.uniform(0.0, g.TWO_PI, size=n)
    states[:, 3:6] = rng.uniform(-p_max, p_max, size=(n, 3))
    return states


def circular_distance(a, b):
    d = np.abs(a - b) % g.TWO_PI
    return np.minimum(d, g.TWO_PI - d)


# ---------------------------------------------------------------------------
# Right-hand sides and algebraic identities

def test_hamiltonian_value():
    st = g.GeodesicState(x=0.3, y=-1.0, theta=0.5, p1=0.6, p2=-0.8, p3=2.0)
    npt.assert_allclose(g.hamiltonian(st.as_array()), 0.5 * (0.36 + 0.64))
    assert st.energy == pytest.approx(1.0)


def test_full_rhs_matches_componentwise_formulas(rng):
    states = random_full_states(rng, 40)
    x, y, th, p1, p2, p3 = states.T
    deriv = g.full_rhs(states)
    npt.assert_allclose(deriv[:, 0], np.cos(th) * p1)
    npt.assert_allclose(deriv[:, 1], np.sin(th) * p1)
    npt.assert_allclose(deriv[:, 2], p2)
    npt.assert_allclose(deriv[:, 3], p2 * p3)
    npt.assert_allclose(deriv[:, 4], -p1 * p3)
    npt.assert_allclose(deriv[:, 5], -p1 * p2)


def test_reduced_rhs_matches_componentwise_formulas(rng):
    states = rng.uniform(-2.0, 2.0, size=(40, 5))
    E = 1.7
    deriv = g.reduced_rhs(states, E)
    x, y, th, gam, gdot = states.T
    root = np.sqrt(E)
    npt.assert_allclose(deriv[:, 0], root * np.sin(gam / 2) * np.cos(th))
    npt.assert_allclose(deriv[:, 1], root * np.sin(gam / 2) * np.sin(th))
    npt.assert_allclose(deriv[:, 2], root * np.cos(gam / 2))
    npt.assert_allclose(deriv[:, 3], gdot)
    npt.assert_allclose(deriv[:, 4], -E * np.sin(gam))


def test_reduced_rhs_rejects_negative_energy():
    with pytest.raises(ValueError):
        g.reduced_rhs(np.zeros(5), -0.5)


def test_phase_map_lands_on_energy_shell(rng):
    gam = rng.uniform(-8.0, 8.0, size=30)
    gdot = rng.uniform(-3.0, 3.0, size=30)
    for E in (0.5, 1.0, 4.0):
        p1, p2, p3 = g.phase_to_momenta(gam, gdot, E)
        npt.assert_allclose(p1 ** 2 + p2 ** 2, np.full(30, E))
        npt.assert_allclose(p3, gdot / 2)


def test_phase_map_intertwines_dynamics(rng):
    # Differentiating the momentum substitution must reproduce the
    # momentum equations; checked pointwise on random reduced states.
    states = rng.uniform(-2.0, 2.0, size=(25, 5))
    E = 2.3
    gam, gdot = states[:, 3], states[:, 4]
    p1, p2, p3 = g.phase_to_momenta(gam, gdot, E)
    deriv = g.reduced_rhs(states, E)
    dgam, dgdot = deriv[:, 3], deriv[:, 4]
    dp1 = np.sqrt(E) * np.cos(gam / 2) * dgam / 2
    dp2 = -np.sqrt(E) * np.sin(gam / 2) * dgam / 2
    dp3 = dgdot / 2
    npt.assert_allclose(dp1, p2 * p3, atol=1e-12)
    npt.assert_allclose(dp2, -p1 * p3, atol=1e-12)
    npt.assert_allclose(dp3, -p1 * p2, atol=1e-12)


# ---------------------------------------------------------------------------
# Conservation along rollouts

def test_energy_conserved_on_full_rollouts(rng):
    states = random_full_states(rng, 20)
    times, rollout = g.integrate_batch(states, system=g.FULL, t_end=5.0, dt=1e-3)
    H = 0.5 * (rollout[..., 3] ** 2 + rollout[..., 4] ** 2)
    rel_drift = np.abs(H - H[0]) / np.maximum(H[0], 1e-12)
    assert rel_drift.max() < 1e-8


def test_pendulum_energy_conserved_on_reduced_rollouts(rng):
    states = np.zeros((20, 5))
    states[:, 2] = rng.uniform(0, g.TWO_PI, size=20)
    states[:, 3] = rng.uniform(-np.pi, 3 * np.pi, size=20)
    states[:, 4] = rng.uniform(-2.0, 2.0, size=20)
    E = 1.5
    times, rollout = g.integrate_batch(states, system=g.REDUCED, t_end=5.0, dt=1e-3, E=E)
    K = 0.5 * rollout[..., 4] ** 2 - E * np.cos(rollout[..., 3])
    assert np.abs(K - K[0]).max() < 1e-8


def test_planar_canonical_momenta_conserved(rng):
    y0 = random_full_states(rng, 1)[0]
    traj = g.integrate(y0, system=g.FULL, t_end=5.0, dt=1e-3)
    st = g.GeodesicState(*traj.states.T)
    px, py, pth = st.canonical_momenta()
    assert np.abs(px - px[0]).max() < 1e-10
    assert np.abs(py - py[0]).max() < 1e-10
    npt.assert_allclose(pth, traj.states[:, 4])


# ---------------------------------------------------------------------------
# Exact solutions and cross-validation

@pytest.mark.parametrize("E", [1.0, 2.25])
def test_straight_line_solution(E):
    # Phase pi freezes the pendulum at its unstable equilibrium: the
    # curve is a straight line along x at speed sqrt(E).
    t_end = 5.0
    traj = g.integrate([0, 0, 0, np.pi, 0.0], system=g.REDUCED,
                       t_end=t_end, dt=1e-3, E=E)
    target = np.sqrt(E) * t_end
    assert abs(traj.x[-1] - target) < 1e-10
    assert abs(traj.y[-1]) < 1e-10
    assert circular_distance(traj.theta[-1], 0.0) < 1e-10


def test_straight_line_full_system():
    E = 1.0
    p1, p2, p3 = g.phase_to_momenta(np.pi, 0.0, E)
    traj = g.integrate([0, 0, 0, p1, p2, p3], system=g.FULL, t_end=5.0, dt=1e-3)
    assert abs(traj.x[-1] - 5.0) < 1e-10
    assert abs(traj.y[-1]) < 1e-10


def test_full_and_reduced_systems_agree(rng):
    n = 10
    gam0 = rng.uniform(0.2, g.TWO_PI - 0.2, size=n)
    gdot0 = rng.uniform(-1.5, 1.5, size=n)
    Es = rng.uniform(0.25, 4.0, size=n)
    for i in range(n):
        reduced = g.integrate([0, 0, 0, gam0[i], gdot0[i]], system=g.REDUCED,
                              t_end=5.0, dt=1e-3, E=Es[i])
        p1, p2, p3 = g.phase_to_momenta(gam0[i], gdot0[i], Es[i])
        full = g.integrate([0, 0, 0, p1, p2, p3], system=g.FULL,
                           t_end=5.0, dt=1e-3)
        assert np.abs(full.x - reduced.x).max() < 1e-6
        assert np.abs(full.y - reduced.y).max() < 1e-6
        assert circular_distance(full.theta, reduced.theta).max() < 1e-6


@pytest.mark.parametrize("system", [g.FULL, g.REDUCED])
def test_rk4_global_error_shrinks_sixteenfold(system):
    if system == g.FULL:
        y0 = np.array([0, 0, 0, 0.9, 0.435, -0.7])
        kw = {}
    else:
        y0 = np.array([0, 0, 0, 2.4, 0.9])
        kw = {"E": 2.0}
    ref = g.integrate(y0, system=system, t_end=2.0, dt=1.25e-3, **kw).states[-1]
    errs = []
    for dt in (0.04, 0.02):
        end = g.integrate(y0, system=system, t_end=2.0, dt=dt, **kw).states[-1]
        errs.append(np.abs(end - ref).max())
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0


# ---------------------------------------------------------------------------
# Batch API, trajectory container, fans

def test_integrate_batch_shapes(rng):
    states = random_full_states(rng, 7)
    times, rollout = g.integrate_batch(states, system=g.FULL, t_end=0.1, dt=1e-2)
    assert times.shape == (11,)
    assert rollout.shape == (11, 7, 6)
    npt.assert_allclose(rollout[0], states)


def test_theta_stays_wrapped(rng):
    states = random_full_states(rng, 5, p_max=2.0)
    _, rollout = g.integrate_batch(states, system=g.FULL, t_end=3.0, dt=1e-2)
    assert rollout[..., 2].min() >= 0.0
    assert rollout[..., 2].max() < g.TWO_PI


def test_reduced_integration_requires_energy():
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(5), system=g.REDUCED, t_end=1.0, dt=0.1)
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(5), system=g.REDUCED, t_end=1.0, dt=0.1, E=-1.0)


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        g.integrate_batch(np.full(6, np.nan), system=g.FULL, t_end=1.0, dt=0.1)
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(6), system=g.FULL, t_end=-1.0, dt=0.1)
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(6), system=g.FULL, t_end=1.0, dt=0.0)
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(4), system=g.FULL, t_end=1.0, dt=0.1)
    with pytest.raises(ValueError):
        g.integrate_batch(np.zeros(6), system="spiral", t_end=1.0, dt=0.1)


def test_trajectory_series_and_csv(tmp_path):
    traj = g.integrate([0, 0, 0, 1.2, -0.3], system=g.REDUCED,
                       t_end=0.5, dt=1e-2, E=1.0)
    H = traj.pendulum_energy_series()
    assert H.shape == traj.times.shape
    out = tmp_path / "curve.csv"
    traj.to_csv(out)
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "t,x,y,theta,gamma,gammadot"
    assert len(rows) == len(traj.times) + 1
    first = [float(tok) for tok in rows[1].split(",")]
    npt.assert_allclose(first, [0, 0, 0, 0, 1.2, -0.3])


def test_fan_gammas_spacing():
    gammas = g.fan_gammas(5)
    npt.assert_allclose(gammas, g.TWO_PI * np.arange(1, 6) / 6)
    assert gammas.min() > 0.0
    assert gammas.max() < g.TWO_PI
    with pytest.raises(ValueError):
        g.fan_gammas(0)


def test_association_fan_starts_at_origin():
    fan = g.association_fan(1.0, g.fan_gammas(8), t_end=1.0, dt=1e-2)
    assert len(fan) == 8
    for traj in fan:
        assert traj.x[0] == 0.0 and traj.y[0] == 0.0 and traj.theta[0] == 0.0
    assert g.association_fan(1.0, [], t_end=1.0, dt=1e-2) == []


def test_association_fan_symmetric_pairs():
    # Phases gamma0 and 2*pi - gamma0 give mirror-image curves in y.
    fan = g.association_fan(1.0, [1.0, g.TWO_PI - 1.0], t_end=2.0, dt=1e-3)
    npt.assert_allclose(fan[0].x, fan[1].x, atol=1e-12)
    npt.assert_allclose(fan[0].y, -fan[1].y, atol=1e-12)


def test_association_fan_full_system_matches_reduced():
    gammas = [1.0, 3.0, 5.0]
    red = g.association_fan(1.0, gammas, t_end=2.0, dt=1e-3, system=g.REDUCED)
    ful = g.association_fan(1.0, gammas, t_end=2.0, dt=1e-3, system=g.FULL)
    for a, b in zip(red, ful):
        assert np.abs(a.x - b.x).max() < 1e-6
        assert np.abs(a.y - b.y).max() < 1e-6
