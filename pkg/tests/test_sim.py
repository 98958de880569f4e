import dataclasses

import numpy as np
import pytest

from magpilot.sim import (
    InvalidActionError,
    SimConfig,
    SimState,
    check_success,
    init_state,
    magnetic_force,
    step_sim,
)
from magpilot.sim.kernels import nearest_on_polyline


def force_oracle(arms, bead, cfg):
    """Closed-form recomputation of the two-magnet attraction, vectorized;
    independent of the scalar kernel implementation."""
    magnets = np.asarray(arms, dtype=float).reshape(2, 2)
    bead = np.asarray(bead, dtype=float)
    rel = magnets - bead
    d = np.linalg.norm(rel, axis=1)
    d_eff = np.maximum(d, cfg.eps_dist)
    keep = d > 0
    scale = cfg.coupling / d_eff[keep] ** cfg.force_exponent / d[keep]
    return (rel[keep] * scale[:, None]).sum(axis=0)


def mkstate(arms, bead, cargo=(1000.0, 100.0), attached=False, t=0, **kw):
    return SimState(arms=np.asarray(arms, float), bead=np.asarray(bead, float),
                    cargo=np.asarray(cargo, float), attached=attached, t=t, **kw)


def dist_to_centerline(ws, p):
    *_, dist, _ = nearest_on_polyline(ws.poly_xs, ws.poly_ys, float(p[0]), float(p[1]))
    return dist


class TestForce:
    def test_symmetric_cancellation(self, cfg):
        f, sat = magnetic_force(np.array([100.0, 480.0, 300.0, 480.0]),
                                np.array([200.0, 480.0]), cfg)
        assert np.allclose(f, 0.0, atol=1e-12)
        assert not sat

    def test_inverse_square_ratio(self, cfg):
        # single-magnet magnitudes at d and 2d differ by 4x for q=2
        far = 1e9  # park the second magnet effectively at infinity
        f1, _ = magnetic_force(np.array([150.0, 100.0, far, far]),
                               np.array([100.0, 100.0]), cfg)
        f2, _ = magnetic_force(np.array([200.0, 100.0, far, far]),
                               np.array([100.0, 100.0]), cfg)
        ratio = np.linalg.norm(f1) / np.linalg.norm(f2)
        assert ratio == pytest.approx(4.0, rel=1e-9)
        assert np.linalg.norm(f1) == pytest.approx(cfg.coupling / 50.0 ** 2, rel=1e-9)

    def test_matches_closed_form_oracle(self, cfg, rng):
        for _ in range(1000):
            arms = rng.uniform(0, 1280, size=4)
            bead = rng.uniform(0, 960, size=2)
            f, _ = magnetic_force(arms, bead, cfg)
            ref = force_oracle(arms, bead, cfg)
            assert np.allclose(f, ref, rtol=1e-12, atol=1e-9)

    def test_saturation_clamp(self, cfg):
        # distance below eps_dist: magnitude clamps to c/eps^q
        f, sat = magnetic_force(np.array([100.5, 100.0, 1e9, 1e9]),
                                np.array([100.0, 100.0]), cfg)
        assert sat
        assert np.linalg.norm(f) == pytest.approx(cfg.coupling, rel=1e-12)

    def test_magnet_on_bead_contributes_nothing(self, cfg):
        f, sat = magnetic_force(np.array([100.0, 100.0, 1e9, 1e9]),
                                np.array([100.0, 100.0]), cfg)
        assert sat
        assert np.allclose(f, 0.0)


class TestStep:
    def test_zero_action_at_equilibrium(self, ws_a, cfg):
        bead = np.array([400.0, 420.0])
        st = mkstate([300.0, 420.0, 500.0, 420.0], bead)
        nxt = step_sim(st, np.zeros(4), ws_a, cfg)
        assert np.array_equal(nxt.bead, bead)
        assert nxt.t == 1

    def test_action_clipping_exact(self, ws_a, cfg):
        st = mkstate([600.0, 480.0, 700.0, 480.0], [400.0, 420.0])
        nxt = step_sim(st, np.array([999.0, -999.0, 10.0, 0.0]), ws_a, cfg)
        delta = nxt.arms - st.arms
        assert delta[0] == cfg.max_arm_delta
        assert delta[1] == -cfg.max_arm_delta
        assert delta[2] == 10.0
        assert delta[3] == 0.0

    def test_arm_bounds_clamp(self, ws_a, cfg):
        st = mkstate([10.0, 10.0, 1270.0, 950.0], [400.0, 420.0])
        nxt = step_sim(st, np.array([-50.0, -50.0, 50.0, 50.0]), ws_a, cfg)
        assert nxt.arms[0] == 0.0 and nxt.arms[1] == 0.0
        assert nxt.arms[2] == ws_a.width and nxt.arms[3] == ws_a.height

    def test_bead_moves_toward_nearer_magnet(self, ws_a, cfg, rng):
        # sign check against the independent force oracle
        for _ in range(100):
            bead = np.array([rng.uniform(300, 800), rng.uniform(400, 440)])
            arms = np.concatenate([bead + rng.uniform(30, 80, 2),
                                   bead + rng.uniform(90, 160, 2)])
            st = mkstate(arms, bead)
            nxt = step_sim(st, np.zeros(4), ws_a, cfg)
            ref = force_oracle(arms, bead, cfg)
            moved = nxt.bead - bead
            if np.linalg.norm(moved) > 1e-12:
                assert moved @ ref > 0.0

    def test_nonfinite_action_rejected(self, ws_a, cfg):
        st = mkstate([300.0, 420.0, 500.0, 420.0], [400.0, 420.0])
        with pytest.raises(InvalidActionError):
            step_sim(st, np.array([np.nan, 0.0, 0.0, 0.0]), ws_a, cfg)
        with pytest.raises(InvalidActionError):
            step_sim(st, np.array([np.inf, 0.0, 0.0, 0.0]), ws_a, cfg)

    def test_containment_under_random_actions(self, ws_c, cfg, rng):
        st = init_state(ws_c, rng)
        for _ in range(300):
            action = rng.uniform(-50, 50, size=4)
            st = step_sim(st, action, ws_c, cfg)
            assert dist_to_centerline(ws_c, st.bead) <= ws_c.half_width + 1e-9
            assert dist_to_centerline(ws_c, st.cargo) <= ws_c.half_width + 1e-9
            assert 0.0 <= st.arms[0] <= ws_c.width
            assert 0.0 <= st.arms[2] <= ws_c.width
            assert 0.0 <= st.arms[1] <= ws_c.height
            assert 0.0 <= st.arms[3] <= ws_c.height

    def test_determinism_bit_identical(self, ws_b, cfg):
        rng1 = np.random.Generator(np.random.PCG64(7))
        rng2 = np.random.Generator(np.random.PCG64(7))
        actions = np.random.Generator(np.random.PCG64(9)).uniform(-20, 20, size=(100, 4))
        s1, s2 = init_state(ws_b, rng1), init_state(ws_b, rng2)
        for a in actions:
            s1 = step_sim(s1, a, ws_b, cfg)
            s2 = step_sim(s2, a, ws_b, cfg)
            assert np.array_equal(s1.bead, s2.bead)
            assert np.array_equal(s1.cargo, s2.cargo)
            assert np.array_equal(s1.arms, s2.arms)


class TestAttachment:
    def drive_to_attach(self, ws, cfg):
        st = init_state(ws)
        from magpilot.sim import expert_action
        for _ in range(200):
            a, _ = expert_action(st, ws, cfg)
            st = step_sim(st, a, ws, cfg)
            if st.attached:
                return st
        raise AssertionError("never attached")

    def test_attach_offset_invariant(self, ws_a, cfg):
        from magpilot.sim import expert_action
        st = self.drive_to_attach(ws_a, cfg)
        # while attached the grasp offset is held exactly
        for _ in range(50):
            assert np.linalg.norm(st.bead - st.cargo) == pytest.approx(
                cfg.attach_radius, abs=1e-9)
            a, _ = expert_action(st, ws_a, cfg)
            st = step_sim(st, a, ws_a, cfg)
            if not st.attached:
                break

    def test_slip_on_violent_yank(self, ws_a, cfg):
        st = self.drive_to_attach(ws_a, cfg)
        # park both magnets right next to the bead: force blows past the
        # slip threshold on the next tick
        yanked = dataclasses.replace(
            st, arms=np.concatenate([st.bead + [5.0, 0.0], st.bead + [0.0, 5.0]]))
        nxt = step_sim(yanked, np.zeros(4), ws_a, cfg)
        assert nxt.bead_disp > cfg.slip_threshold
        assert nxt.slipped and not nxt.attached
        assert np.array_equal(nxt.cargo, st.cargo)  # cargo left behind
        assert nxt.ever_attached  # approach stays latched

    def test_success_flags(self, ws_a, cfg):
        st = init_state(ws_a)
        flags = check_success(st, ws_a)
        assert flags == {"approach_done": False, "transport_done": False}
        at_goal = dataclasses.replace(st, cargo=ws_a.goal_center.copy())
        assert check_success(at_goal, ws_a)["transport_done"]
        latched = dataclasses.replace(st, ever_attached=True)
        assert check_success(latched, ws_a)["approach_done"]


class TestConfig:
    def test_validation(self):
        SimConfig().validate()
        with pytest.raises(ValueError):
            SimConfig(dt=0.0).validate()
        with pytest.raises(ValueError):
            SimConfig(force_exponent=0.5).validate()
        with pytest.raises(ValueError):
            SimConfig(max_arm_delta=-1.0).validate()

    def test_roundtrip(self):
        cfg = SimConfig(coupling=1e5, rng_seed=42)
        assert SimConfig.from_dict(cfg.to_dict()) == cfg
