"""Hand plant tests: quasi-static equilibrium, contact, grasp outcomes, and
the two bench characterizations."""
import math

import numpy as np
import pytest

from prosim.config import default_run_config
from prosim.plant import (
    OBJECT_CATALOG,
    CharacterizationResult,
    FingerModel,
    GraspState,
    HandPlant,
    ObjectKind,
    ObjectModel,
    ProbeProfile,
    characterize_position,
    characterize_stiffness,
)
from prosim.vsa import MotorCommand, VsaParams, inverse_vsa

from oracles import series_spring

CFG = default_run_config()
VSA = CFG.vsa
FINGER = CFG.finger
DT = 0.002


def settle(plant, cmd, force=0.0, seconds=1.0):
    st = None
    for _ in range(int(seconds / DT)):
        st = plant.step(cmd, force, DT)
    return st


class TestFingerModel:
    def test_tip_gain_defaults_to_geometry(self):
        f = FingerModel(tip_radius_m=0.05)
        assert f.tip_gain == pytest.approx(1.0 / (1000.0 * 0.05**2))

    def test_device_range_for_reported_slopes(self):
        floor, scale = FINGER.device_range_for_tip_slopes(0.091, 1.7)
        assert floor == pytest.approx(0.2275)
        assert floor + scale == pytest.approx(4.25)


class TestStepPlant:
    def test_rest_stays_at_rest(self):
        plant = HandPlant(VSA, FINGER)
        st = settle(plant, MotorCommand(0.0, 0.0), seconds=0.5)
        assert st.theta == 0.0
        assert st.fingertip_force_n == 0.0

    def test_tracks_commanded_position_within_300ms(self):
        plant = HandPlant(VSA, FINGER)
        s_ref, theta_ref = 0.75, 0.6
        cmd = inverse_vsa(s_ref, theta_ref, 0.0, VSA)
        n = int(0.3 / DT)
        theta = [plant.step(cmd, 0.0, DT).theta for _ in range(n)]
        assert abs(theta[-1] - theta_ref) / theta_ref < 0.02

    def test_rigid_contact_force_matches_tip_stiffness_formula(self):
        rigid = OBJECT_CATALOG["rigid_block"]
        plant = HandPlant(VSA, FINGER, rigid)
        s_ref, theta_ref = 0.75, 0.9
        cmd = inverse_vsa(s_ref, theta_ref, 0.0, VSA)
        st = settle(plant, cmd, seconds=1.5)
        k_tip = FINGER.tip_gain * s_ref
        expected = k_tip * (theta_ref - rigid.contact_theta_rad) * FINGER.tip_radius_m * 1e3
        assert st.fingertip_force_n == pytest.approx(expected, rel=0.05)

    def test_dt_bounds_enforced(self):
        plant = HandPlant(VSA, FINGER)
        with pytest.raises(ValueError):
            plant.step(MotorCommand(0, 0), 0.0, 0.02)


class TestSeriesCompliance:
    def test_measured_stiffness_is_series_of_finger_and_object(self):
        obj = ObjectModel(ObjectKind.SPONGE, surface_stiffness_n_per_mm=0.2,
                          contact_theta_rad=0.3)
        s_level = 0.75
        k_tip = FINGER.tip_gain * s_level
        forces, engagements = [], []
        for theta_ref in (0.5, 0.7, 0.9):
            plant = HandPlant(VSA, FINGER, obj)
            cmd = inverse_vsa(s_level, theta_ref, 0.0, VSA)
            st = settle(plant, cmd, seconds=2.0)
            forces.append(st.fingertip_force_n)
            engagements.append((theta_ref - obj.contact_theta_rad) * FINGER.tip_radius_m * 1e3)
        slope = np.polyfit(engagements, forces, 1)[0]
        expected = series_spring(k_tip, obj.surface_stiffness_n_per_mm)
        assert slope == pytest.approx(expected, rel=0.02)


class TestGraspStateMachine:
    def test_monotone_transitions_gentle_hold(self):
        plant = HandPlant(VSA, FINGER, OBJECT_CATALOG["egg"])
        cmd = inverse_vsa(0.45, 0.8, 0.0, VSA)
        seen = [GraspState.NONE]
        for _ in range(int(3.0 / DT)):
            st = plant.step(cmd, 0.0, DT)
            if st.grasp is not seen[-1]:
                seen.append(st.grasp)
        assert seen == [GraspState.NONE, GraspState.HOLDING]
        assert st.fingertip_force_n < OBJECT_CATALOG["egg"].break_force_n

    def test_crush_is_absorbing(self):
        plant = HandPlant(VSA, FINGER, OBJECT_CATALOG["egg"])
        cmd = inverse_vsa(4.0, 1.4, 0.0, VSA)
        for _ in range(int(3.0 / DT)):
            st = plant.step(cmd, 0.0, DT)
        assert st.grasp is GraspState.CRUSHED
        # backing off does not un-crush
        st = settle(plant, inverse_vsa(0.3, 0.0, 0.0, VSA), seconds=1.0)
        assert st.grasp is GraspState.CRUSHED

    def test_weak_grip_slips(self):
        block = OBJECT_CATALOG["rigid_block"]
        plant = HandPlant(VSA, FINGER, block)
        cmd = inverse_vsa(0.2275 + 1e-6, 0.56, 0.0, VSA)
        for _ in range(int(3.0 / DT)):
            st = plant.step(cmd, 0.0, DT)
        assert st.grasp is GraspState.SLIPPED

    def test_reset_clears_outcome(self):
        plant = HandPlant(VSA, FINGER, OBJECT_CATALOG["egg"])
        cmd = inverse_vsa(4.0, 1.4, 0.0, VSA)
        for _ in range(int(2.0 / DT)):
            plant.step(cmd, 0.0, DT)
        plant.reset()
        assert plant.state.grasp is GraspState.NONE
        assert plant.state.theta == 0.0


class TestNoHysteresis:
    def test_force_single_valued_in_deflection(self):
        plant = HandPlant(VSA, FINGER)
        cmd = inverse_vsa(0.75, 0.0, 0.0, VSA)
        plant.reset(cmd=cmd)
        up, down = {}, {}
        for f in np.linspace(0.0, 2.0, 21):
            st = settle(plant, cmd, force=float(f), seconds=0.05)
            up[round(float(f), 3)] = st.theta
        for f in np.linspace(2.0, 0.0, 21):
            st = settle(plant, cmd, force=float(f), seconds=0.05)
            down[round(float(f), 3)] = st.theta
        for k in up:
            assert up[k] == pytest.approx(down[k], abs=1e-9)


FIG10A_TARGETS = [0.091, 0.12, 0.16, 0.3, 1.7]


class TestCharacterizeStiffness:
    def test_noise_free_slopes_exact(self):
        levels = [FINGER.stiffness_for_tip_slope(k) for k in FIG10A_TARGETS]
        results = characterize_stiffness(VSA, FINGER, levels)
        for res, target in zip(results, FIG10A_TARGETS):
            assert res.slope_n_per_mm == pytest.approx(target, rel=0.01)
            assert res.r_squared > 0.999
            assert res.flag is None

    def test_doubling_stiffness_doubles_slope(self):
        r1, r2 = characterize_stiffness(VSA, FINGER, [0.5, 1.0])
        assert r2.slope_n_per_mm == pytest.approx(2.0 * r1.slope_n_per_mm, rel=0.02)

    def test_zero_probe_flags_empty_sweep(self):
        res = characterize_stiffness(
            VSA, FINGER, [0.75], probe=ProbeProfile("ramp", 0.0, 1.0)
        )[0]
        assert res.flag == "empty_sweep"

    def test_probe_past_range_flags_truncated(self):
        tight = FingerModel(tip_radius_m=0.05, theta_range_rad=(0.0, 0.2))
        res = characterize_stiffness(
            VSA, tight, [0.2275 + 1e-6], probe=ProbeProfile("ramp", 3.0, 2.0)
        )[0]
        assert res.flag == "truncated"

    def test_noisy_fits_stay_in_paper_regime(self):
        rng = np.random.default_rng(40)
        levels = [FINGER.stiffness_for_tip_slope(k) for k in FIG10A_TARGETS]
        results = characterize_stiffness(VSA, FINGER, levels, noise_sigma=0.02, rng=rng)
        for res in results:
            assert res.r_squared > 0.97


class TestCharacterizePosition:
    POSITIONS = [0.0, math.radians(30), math.radians(60)]

    def test_slopes_independent_of_position(self):
        hold = FINGER.stiffness_for_tip_slope(0.16)
        results = characterize_position(VSA, FINGER, self.POSITIONS, hold)
        slopes = [r.slope_n_per_mm for r in results]
        assert max(slopes) / min(slopes) - 1.0 < 0.02
        for r in results:
            assert r.r_squared > 0.98

    def test_zero_probe_no_deflection(self):
        hold = FINGER.stiffness_for_tip_slope(0.16)
        results = characterize_position(
            VSA, FINGER, self.POSITIONS, hold, probe=ProbeProfile("constant", 0.0, 1.0)
        )
        for r in results:
            assert r.flag == "empty_sweep"
            assert float(np.max(np.abs(r.deflection_mm))) < 1e-9
