import math

import pytest

from torloop.geometry import (
    BoxShape,
    ColliderShape,
    ColliderTag,
    PathSpline,
    TriggerKind,
    TriggerVolume,
    Vec3,
)
from torloop.scenario import polyline_to_segments
from torloop.traffic import (
    NO_LEAD,
    FollowPolicy,
    LeadInfo,
    PedestrianState,
    SpeedTarget,
    ai_drive,
    apply_speed_limit,
    step_pedestrian,
    target_gap,
)
from torloop.vehicle import DT, ControlInput, VehicleParams, VehicleState, step_vehicle

from helpers import straight_path


def make_state(**kw):
    defaults = dict(x=0.0, y=0.0, z=0.0, heading=0.0, speed=0.0)
    defaults.update(kw)
    return VehicleState(**defaults)


class TestTargetGap:
    def test_formula(self):
        assert target_gap(20.0, FollowPolicy(min_gap=5.0, time_headway=1.5)) == 35.0

    def test_standstill(self):
        assert target_gap(0.0, FollowPolicy(min_gap=5.0, time_headway=1.5)) == 5.0

    def test_zero_headway(self):
        policy = FollowPolicy(min_gap=5.0, time_headway=0.0)
        for v in (0.0, 10.0, 30.0):
            assert target_gap(v, policy) == 5.0


class TestAiDrive:
    def setup_method(self):
        self.path = straight_path(2000.0, 11)
        self.params = VehicleParams()
        self.policy = FollowPolicy()

    def test_equilibrium(self):
        v = 20.0
        state = make_state(x=100.0, speed=v)
        cmd = ai_drive(state, self.path, 100.0, SpeedTarget(v), NO_LEAD,
                       self.policy, self.params)
        assert abs(cmd.control.steering) < 1e-3
        assert cmd.control.brake == 0.0
        expected_throttle = self.params.drag * v / self.params.max_accel
        assert cmd.control.throttle == pytest.approx(expected_throttle, rel=1e-6)

    def test_close_stationary_lead_forces_braking(self):
        state = make_state(x=100.0, speed=20.0)
        lead = LeadInfo(present=True, gap=10.0, lead_speed=0.0)
        cmd = ai_drive(state, self.path, 100.0, SpeedTarget(20.0), lead,
                       self.policy, self.params)
        assert cmd.control.brake > 0.0
        assert cmd.control.throttle == 0.0

    def test_beyond_path_end(self):
        cmd = ai_drive(make_state(x=2000.0, speed=10.0), self.path, 2000.0,
                       SpeedTarget(20.0), NO_LEAD, self.policy, self.params)
        assert cmd.end_of_path
        assert cmd.control.brake == 1.0
        assert cmd.control.throttle == 0.0

    def test_never_throttle_and_brake_together(self):
        state = make_state(x=50.0, y=1.0, speed=15.0)
        for gap in (5.0, 20.0, 80.0):
            cmd = ai_drive(state, self.path, 50.0,
                           SpeedTarget(20.0),
                           LeadInfo(present=True, gap=gap, lead_speed=10.0),
                           self.policy, self.params)
            assert not (cmd.control.throttle > 0.05 and cmd.control.brake > 0.05)

    def test_lateral_offset_converges(self):
        # +2 m off a straight path at 50 km/h: back within 0.2 m inside 10 s
        v = 50.0 / 3.6
        state = make_state(x=100.0, y=2.0, speed=v)
        s = 100.0
        for tick in range(int(10.0 / DT)):
            cmd = ai_drive(state, self.path, s, SpeedTarget(v), NO_LEAD,
                           self.policy, self.params)
            if tick == 0:
                first_steer = cmd.control.steering
            new = step_vehicle(state, cmd.control, self.params, DT)
            s += math.cos(state.heading) * (new.x - state.x) + \
                math.sin(state.heading) * (new.y - state.y)
            state = new
        # initial steering pushes back toward the path (right turn, negative)
        assert first_steer < 0.0
        _, lateral = self.path.project_to_path(Vec3(state.x, state.y, 0.0))
        assert abs(lateral) < 0.2

    def test_circular_path_steady_state_steering(self):
        # pure pursuit around radius R: steady steering consistent with R
        R = 80.0
        pts = [
            Vec3(R * math.cos(a), R * math.sin(a), 0.0)
            for a in [i * 2 * math.pi / 72 for i in range(73)]
        ]
        path = PathSpline(polyline_to_segments(pts))
        params = VehicleParams()
        v = 10.0
        state = make_state(x=R, y=0.0, heading=math.pi / 2, speed=v)
        s = 0.0
        steers = []
        for tick in range(int(20.0 / DT)):
            cmd = ai_drive(state, path, s, SpeedTarget(v), NO_LEAD,
                           FollowPolicy(), params)
            new = step_vehicle(state, cmd.control, params, DT)
            (px, py, _), (tx, ty, _) = path.point_at_distance_fast(s)
            s = min(s + tx * (new.x - state.x) + ty * (new.y - state.y),
                    path.total_length)
            state = new
            if tick > int(5.0 / DT):
                steers.append(cmd.control.steering)
        mean_steer = sum(steers) / len(steers)
        implied_r = params.wheelbase / math.tan(abs(mean_steer) * params.max_steer_angle)
        assert abs(implied_r - R) / R < 0.05

    def test_convoy_safety_stop_and_go(self):
        # follower never comes within min_gap/2 of a stop-and-go lead
        path = straight_path(8000.0, 17)
        params = VehicleParams()
        policy = FollowPolicy(min_gap=5.0, time_headway=1.5)
        lead_state = make_state(x=60.0, speed=15.0)
        lead_s = 60.0
        fol_state = make_state(x=0.0, speed=15.0)
        fol_s = 0.0
        min_gap_seen = math.inf
        for tick in range(int(120.0 / DT)):
            t = tick * DT
            lead_inp = (
                ControlInput(0.0, 0.8, 0.0) if (t % 30.0) < 8.0
                else ControlInput(0.6, 0.0, 0.0)
            )
            new_lead = step_vehicle(lead_state, lead_inp, params, DT)
            lead_s += new_lead.x - lead_state.x
            lead_state = new_lead
            gap = max(0.0, lead_s - fol_s - params.length)
            cmd = ai_drive(fol_state, path, fol_s, SpeedTarget(20.0),
                           LeadInfo(present=True, gap=gap, lead_speed=lead_state.speed),
                           policy, params)
            new_fol = step_vehicle(fol_state, cmd.control, params, DT)
            fol_s += new_fol.x - fol_state.x
            fol_state = new_fol
            min_gap_seen = min(min_gap_seen, lead_s - fol_s - params.length)
        assert min_gap_seen > policy.min_gap / 2.0


class TestApplySpeedLimit:
    def _collider(self, x):
        return ColliderShape(
            "car", BoxShape(Vec3(x, 0, 0.75), Vec3(2.25, 0.9, 0.75), 0.0),
            ColliderTag.VEHICLE,
        )

    def _limit(self, trig_id, x, limit, s):
        vol = TriggerVolume(Vec3(x, 0, 1.0), Vec3(1.0, 8.0, 2.0), 0.0,
                            TriggerKind.SPEED_LIMIT)
        return (trig_id, vol, limit, s)

    def test_crossing_sets_target(self):
        limits = [self._limit("t30", 50.0, 30.0 / 3.6, 50.0)]
        target, inside = apply_speed_limit(
            SpeedTarget(20.0), self._collider(50.0), set(), limits
        )
        assert target.value == pytest.approx(8.3333, abs=1e-3)
        assert target.source == "t30"
        assert inside == {"t30"}

    def test_no_crossing_keeps_default(self):
        limits = [self._limit("t30", 50.0, 8.33, 50.0)]
        target, inside = apply_speed_limit(
            SpeedTarget(20.0), self._collider(200.0), set(), limits
        )
        assert target.value == 20.0
        assert inside == set()

    def test_persists_while_inside(self):
        limits = [self._limit("t30", 50.0, 8.33, 50.0)]
        target, inside = apply_speed_limit(
            SpeedTarget(8.33, source="t30"), self._collider(50.5), {"t30"}, limits
        )
        assert target.source == "t30"

    def test_two_triggers_in_one_tick_later_wins(self):
        limits = [
            self._limit("early", 50.0, 10.0, 50.0),
            self._limit("late", 52.0, 25.0, 52.0),
        ]
        target, _ = apply_speed_limit(
            SpeedTarget(20.0), self._collider(51.0), set(), limits
        )
        assert target.source == "late"
        assert target.value == 25.0


class TestStepPedestrian:
    def test_advances_by_speed_dt(self):
        path = straight_path(100.0)
        state = PedestrianState(s=0.0, x=0.0, y=0.0, z=0.0, heading=0.0)
        for _ in range(90):
            state = step_pedestrian(path, state, 1.4, DT)
        assert state.s == pytest.approx(1.4, abs=1e-9)

    def test_holds_at_end(self):
        path = straight_path(10.0)
        state = PedestrianState(s=10.0, x=10.0, y=0.0, z=0.0, heading=0.0, done=True)
        new = step_pedestrian(path, state, 1.4, DT, loop=False)
        assert new == state

    def test_loop_wraps(self):
        path = straight_path(10.0)
        state = PedestrianState(s=9.99, x=9.99, y=0.0, z=0.0, heading=0.0)
        new = step_pedestrian(path, state, 2.0, DT, loop=True)
        assert new.s == pytest.approx(9.99 + 2.0 * DT - 10.0, abs=1e-9)
