import numpy as np
import pytest

from rotflow import fixtures
from rotflow.composer import AnalyticField, Bump, FlowSpec, phi_jet
from rotflow.profiles import BumpProfile
from rotflow.spectral import (
    SolverConfig,
    SolverError,
    SpectralGrid,
    VorticityState,
    enstrophy,
    kinetic_energy,
    rhs,
    rotate_clockwise,
    rotate_reference,
    run,
    step,
    velocity_from_vorticity,
)


class TestGrid:
    def test_resolution_validation(self):
        with pytest.raises(ValueError):
            SpectralGrid(8, 1.0)
        with pytest.raises(ValueError):
            SpectralGrid(100, 1.0)

    def test_padding_rule(self):
        g = SpectralGrid(32, 2.8125)
        assert g.fits(fixtures.two_bump_spec())
        tight = FlowSpec(angular_velocity=0.0, gluing_radius=1.3)
        assert not g.fits(tight)
        with pytest.raises(ValueError, match="does not fit"):
            g.require_fits(tight)


class TestInversion:
    def test_zero_field(self):
        g = SpectralGrid(32, 1.0)
        st = VorticityState(g, np.zeros((32, 32)))
        vx, vy = velocity_from_vorticity(st)
        assert np.all(vx == 0.0) and np.all(vy == 0.0)

    def test_single_mode(self):
        # w = sin(pi x / L) inverts to v = (0, -(L/pi) cos(pi x / L))
        g = SpectralGrid(64, 2.0)
        L = g.half_width
        w = np.sin(np.pi * g.X / L)
        st = VorticityState(g, w)
        vx, vy = velocity_from_vorticity(st)
        assert np.max(np.abs(vx)) <= 1e-13
        expected = -(L / np.pi) * np.cos(np.pi * g.X / L)
        assert np.max(np.abs(vy - expected)) <= 1e-12

    def test_matches_analytic_velocity(self):
        # cross-module oracle at moderate resolution
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(256, 2.8125)
        st = VorticityState.from_spec(spec, g)
        vx, vy = velocity_from_vorticity(st)
        va = AnalyticField(spec).velocity(g.points())
        vmax = float(np.max(np.abs(va)))
        err = max(np.max(np.abs(vx - va[..., 0])), np.max(np.abs(vy - va[..., 1])))
        assert err <= 1e-4 * vmax

    def test_nonzero_mean_rejected(self):
        g = SpectralGrid(32, 1.0)
        st = VorticityState(g, np.ones((32, 32)))
        with pytest.raises(SolverError, match="mean"):
            velocity_from_vorticity(st)

    def test_laplacian_roundtrip(self):
        # lap applied to lap^-1 returns the zero-mean field to 1e-10
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(128, 2.8125)
        st = VorticityState.from_spec(spec, g)
        psi_hat = -st.spectrum * g.inv_k2
        back = g.irfft(-g.k2 * psi_hat)
        assert np.max(np.abs(back - st.omega)) <= 1e-10 * np.max(np.abs(st.omega))


class TestTendency:
    def test_zero_field_zero_tendency(self):
        g = SpectralGrid(32, 1.0)
        st = VorticityState(g, np.zeros((32, 32)))
        assert np.all(rhs(st) == 0.0)

    def test_radial_field_is_stationary(self):
        spec = fixtures.radial_spec()
        g = SpectralGrid(256, 3.6)
        st = VorticityState.from_spec(spec, g)
        td = rhs(st)
        vx, vy = velocity_from_vorticity(st)
        wx = g.irfft(1j * g.kx * st.spectrum)
        wy = g.irfft(1j * g.ky * st.spectrum)
        scale = float(np.max(np.hypot(vx, vy)) * np.max(np.hypot(wx, wy)))
        assert np.sqrt(np.mean(td**2)) <= 1e-10 * scale

    def test_two_bump_tendency_matches_analytic_advection(self):
        # cross-check against the analytic -(v . grad) w
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(256, 2.8125)
        st = VorticityState.from_spec(spec, g)
        td = rhs(st)
        field = AnalyticField(spec)
        jet = phi_jet(spec, g.X, g.Y, order=3)
        gwx, gwy = jet.grad_laplacian
        v = field.velocity(g.points())
        analytic = -(v[..., 0] * gwx + v[..., 1] * gwy)
        scale = float(np.max(np.abs(analytic))) or 1.0
        # agreement is limited by the spectral resolution of the gluing
        # annulus at this N
        assert np.max(np.abs(td - analytic)) <= 1e-3 * scale


class TestStep:
    def test_zero_field_fixed_point(self):
        g = SpectralGrid(32, 1.0)
        st = VorticityState(g, np.zeros((32, 32)))
        out = step(st, 0.01)
        assert np.all(out.omega == 0.0)
        assert out.time == pytest.approx(0.01)

    def test_single_mode_stationary(self):
        # one Fourier mode induces a velocity parallel to its level sets,
        # so the state is numerically invariant
        g = SpectralGrid(64, 2.0)
        w0 = np.sin(np.pi * g.X / g.half_width)
        st = VorticityState(g, w0)
        for _ in range(10):
            st = step(st, 0.01)
        assert np.max(np.abs(st.omega - w0)) <= 1e-12

    def test_mean_preserved(self):
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(128, 2.8125)
        st = VorticityState.from_spec(spec, g)
        for _ in range(20):
            st = step(st, 0.002)
        assert st.mean_ratio() <= 1e-12

    def test_richardson_self_convergence(self):
        # halving dt reduces the one-step-family error by ~2^4
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(128, 2.8125)
        st0 = VorticityState.from_spec(spec, g)

        def advance(dt, horizon=0.1):
            st = st0
            for _ in range(int(round(horizon / dt))):
                st = step(st, dt)
            return st.omega

        w1, w2, w4 = advance(0.005), advance(0.0025), advance(0.00125)
        ratio = np.linalg.norm(w1 - w2) / np.linalg.norm(w2 - w4)
        assert 12.0 <= ratio <= 20.0

    def test_nan_detection(self):
        g = SpectralGrid(32, 1.0)
        w = np.zeros((32, 32))
        w[0, 0] = np.nan
        w -= np.nanmean(w)
        st = VorticityState(g, w)
        with pytest.raises(SolverError, match="non-finite"):
            step(st, 0.01)


class TestRotateReference:
    def test_full_revolution_identity(self):
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(64, 2.8125)
        ref0 = rotate_reference(spec, 0.0, g)
        ref1 = rotate_reference(spec, 2.0 * np.pi, g)
        assert np.max(np.abs(ref1 - ref0)) <= 1e-10 * np.max(np.abs(ref0))

    def test_radial_invariance(self):
        spec = FlowSpec(angular_velocity=1.0, gluing_radius=1.6,
                        bumps=fixtures.radial_spec().bumps)
        g = SpectralGrid(64, 3.6)
        ref0 = rotate_reference(spec, 0.0, g)
        ref = rotate_reference(spec, 0.7321, g)
        assert np.max(np.abs(ref - ref0)) <= 1e-9 * np.max(np.abs(ref0))

    def test_half_revolution_moves_centers_to_minus_q(self):
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(128, 2.8125)
        ref = rotate_reference(spec, np.pi, g)
        w_at = AnalyticField(spec).vorticity
        i = int(np.argmin(np.abs(g.x + 0.75)))
        j = int(np.argmin(np.abs(g.x)))
        direct = float(w_at(np.array([g.x[i], g.x[j]])))
        mirrored = float(w_at(np.array([-g.x[i], -g.x[j]])))
        assert ref[i, j] == pytest.approx(mirrored, rel=1e-12)
        assert ref[i, j] != pytest.approx(direct, rel=1e-3)

    def test_group_property(self):
        # rotating by t1 then t2 equals rotating by t1 + t2
        rng = np.random.default_rng(1)
        pts = rng.uniform(-3.0, 3.0, size=(100, 2))
        a1, a2 = 0.37, 1.11
        x1, y1 = rotate_clockwise(pts[:, 0], pts[:, 1], a1)
        x12, y12 = rotate_clockwise(x1, y1, a2)
        xs, ys = rotate_clockwise(pts[:, 0], pts[:, 1], a1 + a2)
        assert np.max(np.abs(x12 - xs)) <= 1e-12
        assert np.max(np.abs(y12 - ys)) <= 1e-12
        spec = fixtures.two_bump_spec()
        w = AnalyticField(spec).vorticity
        wa = w(np.stack([x12, y12], axis=-1))
        wb = w(np.stack([xs, ys], axis=-1))
        assert np.allclose(wa, wb, rtol=1e-9, atol=1e-9)


class TestRun:
    def test_radial_run_is_stationary(self):
        # quick check at half the acceptance resolution; the tight 1e-8
        # bound is exercised at N = 256 in the acceptance suite
        spec = fixtures.radial_spec()
        g = SpectralGrid(128, 3.6)
        res = run(spec, g, SolverConfig(), horizon=0.25)
        assert res.max_rotation_error() <= 1e-5
        assert res.relative_drift("energy") <= 1e-10
        assert res.relative_drift("enstrophy") <= 1e-10

    def test_stationary_two_bump_no_rotation(self):
        # Omega = 0 multi-center flows are stationary; with no rotating
        # exterior the error is set by the bump spectral tails alone
        spec = FlowSpec(angular_velocity=0.0, gluing_radius=1.25, bumps=(
            Bump((0.75, 0.0), BumpProfile(0.2, 0.45, 11)),
            Bump((-0.75, 0.0), BumpProfile(0.15, 0.45, 12)),
        ))
        g = SpectralGrid(256, 2.8125)
        res = run(spec, g, SolverConfig(), horizon=1.0)
        assert res.max_rotation_error() <= 1e-6

    def test_conservation_in_stable_window(self):
        # energy and enstrophy drift stay small while the run tracks the
        # rotating reference (half revolution of the shipped fixture)
        spec = fixtures.two_bump_spec()
        g = SpectralGrid(128, 2.8125)
        res = run(spec, g, SolverConfig(), horizon=np.pi)
        assert res.relative_drift("energy") <= 1e-6
        assert res.relative_drift("enstrophy") <= 1e-6

    def test_diagnostics_energy_enstrophy_values(self):
        spec = fixtures.radial_spec()
        g = SpectralGrid(128, 3.6)
        st = VorticityState.from_spec(spec, g)
        assert kinetic_energy(st) > 0.0
        assert enstrophy(st) == pytest.approx(
            float(np.sum(st.omega**2)) * g.spacing**2)

    def test_dt_cap_resolves_revolution(self):
        # dt <= 2 pi / (1000 |Omega|)
        cfg = SolverConfig(cfl=10.0)
        g = SpectralGrid(32, 2.8125)
        dt = cfg.resolve_dt(g, max_speed=0.01, angular_velocity=2.0)
        assert dt <= 2.0 * np.pi / 2000.0 + 1e-15

    def test_cfl_violation_rejected(self):
        cfg = SolverConfig(dt=1.0)
        g = SpectralGrid(32, 2.8125)
        with pytest.raises(SolverError, match="CFL"):
            cfg.resolve_dt(g, max_speed=10.0, angular_velocity=0.0)
