import numpy as np
import pytest

from higs import (ConfigError, DiffusionSampler, DivergenceError, GaussianOracle, HiGSGuidance,
                  build_time_grid, euler_higs_sample, euler_history_theory_sample, euler_sample,
                  fit_order, heun_sample, initial_noise)
from higs.metrics import trajectory_error

SOLVERS = [euler_sample, heun_sample, euler_history_theory_sample,
           lambda d, z, g, **kw: euler_higs_sample(d, z, g, HiGSGuidance(w_higs=2.0), **kw)]


def test_euler_single_step_by_hand(gaussian):
    out = euler_sample(gaussian, np.array([[1.0]]), build_time_grid("uniform", 1, 0.002))
    # D = z/2, u = -z/2, z1 = 1 - 0.998/2 = 0.501, sample = 0.501 / (1 + 0.002^2)
    assert out.state[0, 0] == pytest.approx(0.501, abs=1e-15)
    assert out.samples[0, 0] == pytest.approx(0.501 / 1.000004, abs=1e-15)


def test_heun_single_step_by_hand(gaussian):
    out = heun_sample(gaussian, np.array([[1.0]]), build_time_grid("uniform", 1, 0.002))
    t = 0.002
    u0 = -0.5
    z_e = 1 + 0.998 * u0
    u1 = -z_e * t / (1 + t * t)
    assert out.state[0, 0] == pytest.approx(1 + 0.998 * (u0 + u1) / 2, abs=1e-13)


@pytest.mark.parametrize("solver", SOLVERS[:3])
def test_identity_denoiser_keeps_state(identity, solver, rng):
    z0 = rng.normal(size=(4, 3))
    out = solver(identity, z0, build_time_grid("uniform", 6, 0.01))
    np.testing.assert_array_equal(out.state, z0)


def test_euler_fine_grid_matches_exact(gaussian):
    z0 = initial_noise((1,), 8, seed=3)
    out = euler_sample(gaussian, z0, build_time_grid("uniform", 10_000, 0.002))
    np.testing.assert_allclose(out.state, gaussian.exact_trajectory(z0, 1.0, 0.002), atol=1e-3)


def test_history_theory_uniform_weight_is_half(gaussian):
    """On a uniform grid the correction is the two-step Adams-Bashforth update."""
    z0 = initial_noise((1,), 3, seed=0)
    grid = build_time_grid("uniform", 5, 0.1)
    t = np.array(grid.times)
    h = t[0] - t[1]
    u = lambda z, s: (gaussian(z, s) - z) / s
    z = z0 + h * u(z0, t[0])
    prev = u(z0, t[0])
    for k in range(1, 5):
        cur = u(z, t[k])
        z, prev = z + h * (1.5 * cur - 0.5 * prev), cur
    out = euler_history_theory_sample(gaussian, z0, grid)
    np.testing.assert_allclose(out.state, z, rtol=1e-13)


def _order(solver, oracle, grid_kind="uniform"):
    z0 = initial_noise(oracle.shape, 64, seed=0)
    pairs = []
    for m in (10, 20, 40, 80, 160):
        g = build_time_grid(grid_kind, m, 0.002)
        out = solver(oracle, z0, g)
        pairs.append((g.h_max, trajectory_error(out.state, oracle.exact_trajectory(z0, 1.0, 0.002))))
    return fit_order(pairs).slope


@pytest.mark.parametrize("solver,expected,tol", [(euler_sample, 1.0, 0.2),
                                                 (euler_history_theory_sample, 2.0, 0.3),
                                                 (heun_sample, 2.0, 0.3)])
def test_convergence_order(gaussian, solver, expected, tol):
    assert abs(_order(solver, gaussian) - expected) <= tol


def test_history_theory_second_order_on_nonuniform_grid():
    oracle = GaussianOracle([0.4, -0.3], 0.7)
    assert abs(_order(euler_history_theory_sample, oracle, "power-rho") - 2.0) <= 0.3


@pytest.mark.parametrize("solver", SOLVERS[:3])
def test_linearity(solver, rng):
    g = GaussianOracle([0.0, 0.0], 0.6)
    grid = build_time_grid("uniform", 7, 0.01)
    z, zp = rng.normal(size=(2, 5, 2))
    lhs = solver(g, 2.0 * z - 0.5 * zp, grid).samples
    rhs = 2.0 * solver(g, z, grid).samples - 0.5 * solver(g, zp, grid).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_higs_linearity_without_projection_or_filter(rng):
    g = GaussianOracle([0.0], 1.0)
    grid = build_time_grid("uniform", 7, 0.01)
    cfg = HiGSGuidance(w_higs=1.5, projection_enabled=False, filter_enabled=False)
    z, zp = rng.normal(size=(2, 5, 1))
    run = lambda x: euler_higs_sample(g, x, grid, cfg).samples
    np.testing.assert_allclose(run(z + 3 * zp), run(z) + 3 * run(zp), atol=1e-12)


@pytest.mark.parametrize("oracle_kind", ["gaussian", "mixture", "dctfield"])
def test_zero_weight_bit_identical(oracle_kind, mixture):
    from higs import DctFieldOracle
    oracle = {"gaussian": GaussianOracle([0.5, -1.0]), "mixture": mixture,
              "dctfield": DctFieldOracle((2, 8, 8))}[oracle_kind]
    z0 = initial_noise(oracle.shape, 16, seed=5)
    grid = build_time_grid("uniform", 12, 0.002)
    base = euler_sample(oracle, z0, grid)
    higs = euler_higs_sample(oracle, z0, grid, HiGSGuidance(w_higs=0.0))
    assert base.samples.tobytes() == higs.samples.tobytes()


def test_single_step_higs_equals_euler(mixture):
    z0 = initial_noise((1,), 32, seed=2)
    grid = build_time_grid("uniform", 1, 0.002)
    a = euler_sample(mixture, z0, grid)
    b = euler_higs_sample(mixture, z0, grid, HiGSGuidance(w_higs=5.0, schedule="constant"))
    assert a.samples.tobytes() == b.samples.tobytes()


def test_higs_changes_output(mixture):
    z0 = initial_noise((1,), 32, seed=2)
    grid = build_time_grid("uniform", 8, 0.002)
    a = euler_sample(mixture, z0, grid).samples
    b = euler_higs_sample(mixture, z0, grid, HiGSGuidance(w_higs=1.0)).samples
    assert not np.array_equal(a, b)


def test_cfg_w1_equals_conditional(mixture):
    z0 = initial_noise((1,), 32, seed=4)
    grid = build_time_grid("uniform", 10, 0.002)
    guided = euler_sample(mixture, z0, grid, label=1, w_cfg=1.0)
    cond_only = euler_sample(lambda z, t, y=None: mixture(z, t, 1), z0, grid)
    assert guided.samples.tobytes() == cond_only.samples.tobytes()
    assert guided.nfe == 11


def test_cfg_nfe_and_effect(mixture):
    z0 = initial_noise((1,), 32, seed=4)
    grid = build_time_grid("uniform", 10, 0.002)
    out = euler_sample(mixture, z0, grid, label=0, w_cfg=3.0)
    assert out.nfe == 22
    plain = euler_sample(mixture, z0, grid, label=0)
    assert not np.array_equal(out.samples, plain.samples)


def test_divergence_reports_step():
    def bad(z, t, y=None):
        return z * (np.inf if t < 0.5 else 1.0)
    with pytest.raises(DivergenceError) as exc:
        euler_sample(bad, np.ones((1, 1)), build_time_grid("uniform", 4, 0.1))
    # grid 1.0, 0.775, 0.55, 0.325: first t < 0.5 is step 3
    assert exc.value.step == 3


def test_trace_records_every_step(gaussian):
    s = DiffusionSampler(n_steps=5, batch_size=2, trace=True)
    out = s.sample(gaussian)
    assert len(out.trace) == 6
    assert [r[0] for r in out.trace] == list(s.time_grid().times)


def test_sampler_deterministic(mixture):
    s = DiffusionSampler(solver="euler_higs", n_steps=6, batch_size=8, seed=11,
                         higs=HiGSGuidance(w_higs=1.0))
    np.testing.assert_array_equal(s.sample(mixture).samples, s.sample(mixture).samples)


def test_initial_noise_streams_are_per_element():
    a = initial_noise((2,), 4, seed=7)
    b = initial_noise((2,), 6, seed=7)
    np.testing.assert_array_equal(a, b[:4])
    assert not np.array_equal(initial_noise((2,), 4, seed=8)[1:], a[:3])


def test_sigma_max_scales_physical_time(gaussian):
    wide = GaussianOracle([0.0], 1.0)
    z0 = initial_noise((1,), 4, seed=1, t0=5.0)
    grid = build_time_grid("uniform", 400, 0.002)
    out = euler_sample(wide, z0, grid, sigma_max=5.0)
    np.testing.assert_allclose(out.state, wide.exact_trajectory(z0, 5.0, 0.01), atol=1e-2)


def test_sampler_config_errors(gaussian):
    with pytest.raises(ConfigError):
        DiffusionSampler(solver="euler_higs").sample(gaussian)
    with pytest.raises(ConfigError):
        DiffusionSampler(solver="euler_history_theory", n_steps=1).sample(gaussian)
    with pytest.raises(ConfigError):
        DiffusionSampler(solver="rk4").sample(gaussian)
    with pytest.raises(ConfigError):
        DiffusionSampler(w_cfg=0.5).sample(gaussian)
