"""Numeric master-equation integration against the closed form."""

import io
import json

import numpy as np
import pytest

from dickepair.analytic import ModelParams, evolve_x
from dickepair.lindblad import (
    EXCHANGE,
    SIGMA_MINUS,
    SIGMA_Z,
    IntegrationError,
    build_generator,
    integrate,
    integrate_grid,
    omega0_invariance_check,
    rhs,
    trajectory_to_csv,
    trajectory_to_json,
)
from dickepair.qstate import (
    InvalidStateError,
    XState,
    ground,
    random_x_state,
    rho_tilde,
    singlet,
    validate,
    werner,
)

P = ModelParams()
P_SHIFT = ModelParams(gamma_decay=1.0, gamma_shift=1.0)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def test_collective_operators():
    # S- maps |++> down one rung on both sides and kills the singlet
    ee = np.array([1, 0, 0, 0], dtype=complex)
    np.testing.assert_allclose(SIGMA_MINUS @ ee, [0, 1, 1, 0], atol=1e-16)
    dark = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    assert np.max(np.abs(SIGMA_MINUS @ dark)) == 0.0
    assert np.allclose(np.diag(SIGMA_Z), [2, 0, 0, -2])
    np.testing.assert_allclose(EXCHANGE @ np.array([0, 1, 0, 0], dtype=complex),
                               [0, 0, 1, 0], atol=1e-16)


def test_build_generator_scales_rates():
    g = build_generator(ModelParams(gamma_decay=2.0, gamma_shift=3.0, omega0=5.0))
    assert g.jump_rate == 1.0
    expected_ham = (5.0 + 1.5) * SIGMA_Z / 2.0 + 1.5 * EXCHANGE
    assert np.max(np.abs(g.hamiltonian_eff - expected_ham)) == 0.0
    assert np.max(np.abs(g.collective_raising - SIGMA_MINUS.conjugate().T)) == 0.0


def test_rhs_is_traceless_and_hermitian():
    rng = np.random.default_rng(31)
    g = build_generator(ModelParams(1.0, 2.0, 0.5))
    for _ in range(25):
        rho = random_x_state(rng).to_matrix()
        out = rhs(rho, g)
        assert abs(np.trace(out)) <= 1e-14
        assert np.max(np.abs(out - out.conjugate().T)) <= 1e-14


def test_rhs_dark_states():
    g = build_generator(P_SHIFT)
    assert np.max(np.abs(rhs(ground(), g))) <= 1e-14
    assert np.max(np.abs(rhs(singlet(), g))) <= 1e-14


def test_rhs_matches_closed_form_derivative():
    """Central difference of the closed form is an independent oracle
    for the generator itself."""
    rng = np.random.default_rng(32)
    h = 1e-6
    for p in (P, ModelParams(1.0, 4.0)):
        g = build_generator(p)
        for _ in range(5):
            x = random_x_state(rng, symmetric=True)
            t0 = 0.37
            plus = evolve_x(x, p, t0 + h).to_matrix()
            minus = evolve_x(x, p, t0 - h).to_matrix()
            derivative = (plus - minus) / (2.0 * h)
            state = evolve_x(x, p, t0).to_matrix()
            assert np.max(np.abs(rhs(state, g) - derivative)) <= 1e-8


def test_integrate_tracks_closed_form():
    rng = np.random.default_rng(33)
    x0 = random_x_state(rng, symmetric=True)
    traj = integrate_grid(x0, P_SHIFT, 10.0, 11, dt=1e-3)
    worst = 0.0
    for t, rho in zip(traj.times, traj.states):
        worst = max(worst, np.max(np.abs(rho - evolve_x(x0, P_SHIFT, t).to_matrix())))
    assert worst <= 1e-8


def test_integrate_is_fourth_order():
    """Halving the step must cut the defect by about 2^4."""
    ref = evolve_x(werner(0.75), P_SHIFT, 2.0).to_matrix()

    def defect(dt):
        traj = integrate(werner(0.75), P_SHIFT, 2.0, dt, store_every=10 ** 9)
        return np.max(np.abs(traj.final - ref))

    coarse, fine = defect(0.02), defect(0.01)
    assert coarse / fine >= 12.0


def test_trace_and_validity_along_trajectory():
    rng = np.random.default_rng(34)
    x0 = random_x_state(rng)  # asymmetric is fine for the integrator
    traj = integrate_grid(x0, P_SHIFT, 8.0, 17, dt=1e-3)
    for rho in traj.states:
        assert abs(np.trace(rho) - 1.0) <= 1e-10
        assert np.max(np.abs(rho - rho.conjugate().T)) == 0.0
        assert validate(rho).passed


def test_singlet_is_numerically_dark():
    traj = integrate_grid(singlet(), P_SHIFT, 50.0, 26, dt=1e-3)
    target = singlet().to_matrix()
    for rho in traj.states:
        assert np.max(np.abs(rho - target)) <= 1e-12


def test_exchange_symmetry_is_preserved():
    # swap-invariant initial state (symmetric populations, real rho23)
    x0 = XState(0.2, 0.3, 0.3, 0.2, -0.15)
    traj = integrate_grid(x0, P_SHIFT, 5.0, 11, dt=1e-3)
    for rho in traj.states:
        assert np.max(np.abs(SWAP @ rho @ SWAP - rho)) <= 1e-10


def test_population_beat_for_single_excitation():
    """|+-><+-| is population-asymmetric: only the integrator can evolve
    it.  The inner population difference is e^{-gamma t} cos(gamma_shift t)."""
    x0 = XState(0.0, 1.0, 0.0, 0.0, 0.0)
    p = ModelParams(gamma_decay=1.0, gamma_shift=2.0)
    traj = integrate_grid(x0, p, 4.0, 9, dt=1e-3)
    for t, rho in zip(traj.times, traj.states):
        expected = np.exp(-t) * np.cos(2.0 * t)
        assert abs((rho[1, 1] - rho[2, 2]).real - expected) <= 1e-10


def test_omega0_cannot_move_x_states():
    assert omega0_invariance_check(
        werner(0.5), ModelParams(gamma_decay=1.0, omega0=10.0), 2.0) <= 1e-9
    assert omega0_invariance_check(
        singlet(), ModelParams(gamma_decay=1.0, omega0=10.0), 2.0) <= 1e-12
    assert omega0_invariance_check(
        rho_tilde(0.5), ModelParams(gamma_decay=1.0, omega0=3.0), 1.0) <= 1e-9


def test_time_dependent_rates_against_quadrature():
    """With f_R(t) = (1 + 0.3 cos t)/2 the top population obeys
    rho11(t) = rho11(0) * exp(-4 * integral of f_R), and the integral
    has the closed form (t + 0.3 sin t)/2."""
    x0 = XState(0.3, 0.3, 0.3, 0.1, 0.1)
    rate_r = lambda t: 0.5 * (1.0 + 0.3 * np.cos(t))
    rate_i = lambda t: 0.5
    traj = integrate(x0, P, 5.0, 1e-3, rate_fns=(rate_r, rate_i), store_every=500)
    for t, rho in zip(traj.times, traj.states):
        expected = 0.3 * np.exp(-2.0 * (t + 0.3 * np.sin(t)))
        assert abs(rho[0, 0].real - expected) <= 1e-12


def test_constant_rate_fns_match_constant_path():
    # the same physics through the two code paths
    x0 = werner(0.7)
    a = integrate_grid(x0, P_SHIFT, 3.0, 7, dt=1e-3)
    b = integrate(
        x0, P, 3.0, 1e-3,
        rate_fns=(lambda t: 0.5, lambda t: 0.5), store_every=500,
    )
    np.testing.assert_allclose(a.times, b.times, atol=1e-12)
    for ra, rb in zip(a.states, b.states):
        assert np.max(np.abs(ra - rb)) <= 1e-12


def test_trajectory_shape_and_final():
    traj = integrate(werner(0.4), P, 1.0, 1e-2, store_every=20)
    assert len(traj) == len(traj.times) == len(traj.states)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(1.0, abs=1e-12)
    assert traj.states[0].dtype == np.complex128
    assert np.max(np.abs(traj.final - traj.states[-1])) == 0.0
    assert traj.step == pytest.approx(1e-2, abs=1e-15)


def test_integrate_zero_duration():
    traj = integrate(werner(0.4), P, 0.0, 1e-3)
    assert len(traj) == 1
    assert traj.times[0] == 0.0
    assert np.max(np.abs(traj.states[0] - werner(0.4).to_matrix())) <= 1e-15


def test_integrate_grid_layout():
    traj = integrate_grid(werner(0.4), P, 2.0, 9, dt=1e-3)
    assert len(traj.times) == 9
    np.testing.assert_allclose(np.diff(traj.times), 0.25, atol=1e-12)


def test_unstable_step_raises_with_diagnostics():
    with pytest.raises(IntegrationError) as err:
        integrate(werner(0.5), P, 10.0, 2.0)
    assert err.value.time > 0.0
    assert not err.value.report.passed


def test_integrate_rejects_bad_arguments():
    with pytest.raises(InvalidStateError):
        integrate(XState(0.5, 0.5, 0.5, -0.5, 0.0), P, 1.0, 1e-3)
    with pytest.raises(ValueError):
        integrate(werner(0.5), P, -1.0, 1e-3)
    with pytest.raises(ValueError):
        integrate(werner(0.5), P, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(werner(0.5), P, 1.0, 1e-3, store_every=0)


def test_trajectory_csv_round_trip():
    traj = integrate_grid(werner(0.7), P_SHIFT, 1.0, 3, dt=1e-3)
    buf = io.StringIO()
    trajectory_to_csv(traj, buf)
    lines = buf.getvalue().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t"
    assert "rho11_re" in header and "rho23_im" in header
    assert len(lines) == 1 + len(traj)
    row = lines[-1].split(",")
    t = float(row[0])
    assert t == traj.times[-1]
    re23 = float(row[header.index("rho23_re")])
    im23 = float(row[header.index("rho23_im")])
    # 17 significant digits: exact round trip
    assert complex(re23, im23) == traj.final[1, 2]


def test_trajectory_json_schema():
    traj = integrate_grid(werner(0.7), P_SHIFT, 1.0, 3, dt=1e-3)
    payload = trajectory_to_json(traj)
    payload = json.loads(json.dumps(payload))  # must be pure-JSON serializable
    assert payload["schema"] == "dickepair/trajectory-v1"
    assert payload["engine"] == "numeric"
    assert payload["basis_order"] == ["++", "+-", "-+", "--"]
    assert payload["params"]["gamma_shift"] == 1.0
    assert len(payload["times"]) == len(payload["states"]) == 3
    re, im = payload["states"][-1][1][2]
    assert complex(re, im) == traj.final[1, 2]
