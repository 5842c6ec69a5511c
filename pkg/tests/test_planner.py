import json
import math

import numpy as np
import pytest

from omnipipe import (CommandVector, MissionStep, PlanError, PlannerConfig,
                      RatioMode, StepKind, drive_sign, elbow,
                      forward_kinematics, holonomic_rotate_step,
                      in_singularity, module_linear_velocities, plan_elbow,
                      plan_from_dict, plan_mission, plan_straight, plan_tee,
                      plan_to_dict, plan_to_json, radius_of_curvature,
                      region_for_tee, rolling_gain, straight, tee)
from omnipipe import PipeNetwork, TeeExit
from omnipipe import intervals as iv

D = 160.0


def tee_region(cfg, geom):
    return region_for_tee(tee(D), cfg, geom)


# -- straight runs -------------------------------------------------------------

def test_plan_straight_speed_and_duration(cfg, geom):
    step = plan_straight(1000.0, cfg, geom)
    assert step.kind is StepKind.DRIVE
    assert step.duration_s == pytest.approx(10.0)
    rate = 100.0 / 15.0
    assert step.command == CommandVector(rate, rate, rate, 0.0)
    twist = forward_kinematics(step.command, geom)
    assert twist.v_cz == pytest.approx(100.0, rel=1e-12)
    assert twist.angular_norm() < 1e-15


def test_plan_straight_rejects_zero_length(cfg, geom):
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(PlanError):
            plan_straight(bad, cfg, geom)


# -- holonomic rotation ---------------------------------------------------------

def test_rotate_step_sets_rate_sign_and_duration(geom):
    step = holonomic_rotate_step(30.0, 0.5, geom, D)
    assert step.kind is StepKind.HOLONOMIC_ROTATE
    assert step.command == CommandVector(0.0, 0.0, 0.0, 0.5)
    assert step.duration_s == pytest.approx(math.radians(30.0) / 0.5)
    assert step.roll_delta_deg() == pytest.approx(30.0)
    down = holonomic_rotate_step(-10.0, 0.5, geom, D)
    assert down.command.theta_dot_4 == -0.5
    assert down.roll_delta_deg() == pytest.approx(-10.0)


def test_rotate_step_zero_delta_is_no_step(geom):
    assert holonomic_rotate_step(0.0, 0.5, geom, D) is None


def test_rotate_step_bounds(geom):
    with pytest.raises(PlanError):
        holonomic_rotate_step(60.1, 0.5, geom, D)
    with pytest.raises(PlanError):
        holonomic_rotate_step(10.0, 0.0, geom, D)
    assert holonomic_rotate_step(60.0, 0.5, geom, D) is not None


def test_rotate_hazard_marks_drive_line_crossings(geom):
    # gain is 4, so 22.5 deg of roll re-aims the wheels by 90 deg
    assert rolling_gain(D, geom) == pytest.approx(4.0)
    assert holonomic_rotate_step(22.5, 0.5, geom, D).hazard_self_rotation
    assert holonomic_rotate_step(30.0, 0.5, geom, D).hazard_self_rotation
    assert not holonomic_rotate_step(22.0, 0.5, geom, D).hazard_self_rotation


# -- elbows ----------------------------------------------------------------------

def test_elbow_plan_when_already_aligned(cfg, geom):
    seg = elbow(D, 240.0, 90.0)
    steps = plan_elbow(seg, 0.0, cfg, geom)
    assert [s.kind for s in steps] == [StepKind.TURN_ELBOW]
    cmd = steps[0].command
    speeds = [15.0 * v for v in (cmd.theta_dot_1, cmd.theta_dot_2,
                                 cmd.theta_dot_3)]
    assert speeds == pytest.approx([100.0 * 160.0 / 240.0,
                                    100.0 * 280.0 / 240.0,
                                    100.0 * 280.0 / 240.0], rel=1e-12)
    assert sum(speeds) / 3.0 == pytest.approx(100.0, rel=1e-12)
    assert cmd.theta_dot_4 == 0.0
    assert steps[0].duration_s == pytest.approx(seg.arc_length() / 100.0)


def test_elbow_plan_rotates_onto_inner_module_grid(cfg, geom):
    seg = elbow(D, 240.0, 90.0)
    steps = plan_elbow(seg, 60.0, cfg, geom)
    assert [s.kind for s in steps] == [StepKind.HOLONOMIC_ROTATE,
                                       StepKind.TURN_ELBOW]
    assert steps[0].roll_delta_deg() == pytest.approx(-60.0)
    # 60 deg of roll self-rotates the wheels 240 deg, so forward drive
    # needs reversed spin commands
    drive = steps[1].command
    assert drive.theta_dot_1 < 0 and drive.theta_dot_2 < 0
    ratios = sorted(abs(v) for v in (drive.theta_dot_1, drive.theta_dot_2,
                                     drive.theta_dot_3))
    assert ratios[1] / ratios[0] == pytest.approx(280.0 / 160.0, rel=1e-12)


def test_elbow_speed_mean_holds_across_roll_grid(cfg, geom):
    seg = elbow(D, 240.0, 90.0)
    local = PlannerConfig(align_elbow=False)
    for theta5 in np.arange(2.0, 120.0, 7.0):
        steps = plan_elbow(seg, float(theta5), local, geom)
        cmd = steps[-1].command
        mean = 15.0 * (cmd.theta_dot_1 + cmd.theta_dot_2
                       + cmd.theta_dot_3) / 3.0
        assert abs(mean) == pytest.approx(100.0, rel=1e-12)


def test_elbow_ratio_mode_flows_through(geom):
    seg = elbow(D, 300.0, 90.0)
    gen = plan_elbow(seg, 0.0, PlannerConfig(ratio_mode=RatioMode.GENERALIZED),
                     geom)[-1].command
    fixed = plan_elbow(seg, 0.0,
                        PlannerConfig(ratio_mode=RatioMode.FIXED_RATIO),
                        geom)[-1].command
    assert gen.theta_dot_2 / gen.theta_dot_1 == pytest.approx(340.0 / 220.0,
                                                              rel=1e-12)
    assert fixed.theta_dot_2 / fixed.theta_dot_1 == pytest.approx(
        280.0 / 160.0, rel=1e-12)


def test_elbow_rejects_other_segments(cfg, geom):
    with pytest.raises(PlanError):
        plan_elbow(straight(D, 100.0), 0.0, cfg, geom)


def test_alignment_dodges_the_no_motion_line(cfg, geom):
    # a -22.5 deg roll would park the wheels exactly on the 90 deg line;
    # the planner nudges the target so drive authority survives
    steps = plan_elbow(elbow(D, 240.0, 90.0), 22.5, cfg, geom)
    assert steps[0].kind is StepKind.HOLONOMIC_ROTATE
    applied = steps[0].roll_delta_deg()
    assert applied != pytest.approx(-22.5, abs=1e-6)
    assert abs(applied + 22.5) < 1.0
    alpha = -math.radians(applied) * rolling_gain(D, geom)
    assert drive_sign(alpha, cfg.deadband_rad) != 0
    drive = steps[1].command
    assert abs(drive.theta_dot_1) > 0


# -- tees ------------------------------------------------------------------------

def test_tee_branch_plan_from_gap_center(cfg, geom):
    region = tee_region(cfg, geom)
    steps = plan_tee(tee(D), 30.0, region, cfg, geom)
    assert [s.kind for s in steps] == [StepKind.DRIVE, StepKind.TURN_TEE,
                                       StepKind.DRIVE]
    approach, turn, exit_ = steps
    assert approach.duration_s == pytest.approx(0.25 * D / 100.0)
    twist = forward_kinematics(turn.command, geom)
    assert twist.v_cz == pytest.approx(100.0, rel=1e-12)
    mv = module_linear_velocities(turn.command, geom)
    assert radius_of_curvature(mv, twist) == pytest.approx(80.0, rel=1e-12)
    assert twist.omega_z == pytest.approx(0.0, abs=1e-12)
    assert turn.duration_s == pytest.approx((math.pi / 2.0)
                                            / (100.0 / 80.0), rel=1e-12)
    assert turn.trigger == "head_fraction"
    assert turn.trigger_fraction == 0.25
    # approach + turn arc + exit covers the whole segment
    total = 100.0 * (approach.duration_s + turn.duration_s
                     + exit_.duration_s)
    assert total == pytest.approx(tee(D).arc_length(), rel=1e-12)


def test_tee_turn_axis_follows_roll(cfg, geom):
    region = tee_region(cfg, geom)
    for theta5 in (30.0, 90.0):
        turn = [s for s in plan_tee(tee(D), theta5, region, cfg, geom)
                if s.kind is StepKind.TURN_TEE][0]
        twist = forward_kinematics(turn.command, geom)
        expect = (-math.sin(math.radians(theta5)),
                  math.cos(math.radians(theta5)))
        norm = twist.angular_norm()
        assert (twist.omega_x / norm, twist.omega_y / norm) \
            == pytest.approx(expect, rel=1e-9)


def test_tee_plan_escapes_singular_start(cfg, geom):
    region = tee_region(cfg, geom)
    steps = plan_tee(tee(D), 0.0, region, cfg, geom)
    assert steps[0].kind is StepKind.HOLONOMIC_ROTATE
    assert steps[0].roll_delta_deg() == pytest.approx(30.0)
    assert steps[0].hazard_self_rotation


def test_tee_plan_without_holonomic_never_rotates(cfg, geom):
    region = tee_region(cfg, geom)
    for theta5 in (0.0, 30.0, 58.0, 117.0):
        steps = plan_tee(tee(D), theta5, region, cfg, geom,
                         with_holonomic=False)
        assert all(s.kind is not StepKind.HOLONOMIC_ROTATE for s in steps)


def test_tee_turn_onset_clears_singularity_for_any_start(cfg, geom):
    region = tee_region(cfg, geom)
    for theta5 in np.arange(0.0, 120.0, 1.0):
        steps = plan_tee(tee(D), float(theta5), region, cfg, geom)
        applied = sum(s.roll_delta_deg() for s in steps)
        assert not in_singularity(float(theta5) + applied, region)


def test_tee_through_plan_straddles_branch(cfg, geom):
    region = tee_region(cfg, geom)
    seg = tee(D, exit=TeeExit.THROUGH)
    aligned = plan_tee(seg, 60.0, region, cfg, geom)
    assert [s.kind for s in aligned] == [StepKind.DRIVE]
    assert aligned[0].duration_s == pytest.approx(D / 100.0)
    offset = plan_tee(seg, 40.0, region, cfg, geom)
    assert offset[0].kind is StepKind.HOLONOMIC_ROTATE
    assert offset[0].roll_delta_deg() == pytest.approx(20.0)


def test_tee_unreachable_equivalent_radius(cfg, geom):
    region = tee_region(cfg, geom)
    with pytest.raises(PlanError):
        plan_tee(tee(D, equivalent_radius_mm=10.0), 30.0, region, cfg, geom)


def test_tee_trigger_fraction_is_configurable(geom):
    cfg = PlannerConfig(tee_trigger_fraction=0.4)
    region = tee_region(cfg, geom)
    steps = plan_tee(tee(D), 30.0, region, cfg, geom)
    approach = steps[0]
    turn = [s for s in steps if s.kind is StepKind.TURN_TEE][0]
    assert approach.duration_s == pytest.approx(0.4 * D / 100.0)
    assert turn.trigger_fraction == 0.4


# -- whole missions ---------------------------------------------------------------

def test_mission_tags_segments_and_tracks_roll(cfg, geom, tee_net):
    steps = plan_mission(tee_net, 0.0, cfg, geom)
    assert steps[0].segment_index == 0
    assert steps[-1].segment_index == 2
    kinds = [s.kind for s in steps]
    assert StepKind.TURN_TEE in kinds
    assert kinds[0] is StepKind.DRIVE


def test_mission_reverses_drive_after_quarter_wheel_roll(cfg, geom):
    net = PipeNetwork((straight(D, 500.0), elbow(D, 240.0, 90.0),
                       straight(D, 300.0)))
    steps = plan_mission(net, 60.0, cfg, geom)
    assert steps[0].command.theta_dot_1 > 0
    rotates = [s for s in steps if s.kind is StepKind.HOLONOMIC_ROTATE]
    assert len(rotates) == 1
    assert rotates[0].roll_delta_deg() == pytest.approx(-60.0)
    # -60 deg of roll self-rotates the wheels +240 deg; every later drive
    # command is pre-flipped so the robot still advances
    after = [s for s in steps[steps.index(rotates[0]) + 1:]
             if s.kind is not StepKind.HOLONOMIC_ROTATE]
    assert after and all(s.command.theta_dot_1 < 0 for s in after)


def test_mission_shifts_roll_reference_between_turns(cfg, geom):
    # first turn plane at 45 deg, second at 30: after the elbow the frame
    # reference changes by 15 deg and the tee alignment must absorb it
    net = PipeNetwork((
        straight(D, 400.0),
        elbow(D, 240.0, 90.0, turn_plane_roll_deg=45.0),
        straight(D, 300.0),
        tee(D, branch_roll_deg=30.0),
        straight(D, 200.0),
    ))
    steps = plan_mission(net, 30.0, cfg, geom)
    region = region_for_tee(net.segments[3], cfg, geom)
    theta5 = 30.0
    refs = [45.0, 45.0, 30.0, 30.0, 30.0]
    seg_of = {}
    for s in steps:
        seg_of.setdefault(s.segment_index, []).append(s)
    for i in range(1, 4):
        theta5 += refs[i - 1] - refs[i]
        for s in seg_of.get(i, []):
            theta5 += s.roll_delta_deg()
    turn = [s for s in seg_of[3] if s.kind is StepKind.TURN_TEE][0]
    assert turn is not None
    assert not in_singularity(theta5, region)
    gaps = sorted(abs(iv.signed_delta(theta5, c, 120.0))
                  for c in (30.0, 90.0))
    assert gaps[0] < 1e-6  # lands on a free-gap center


def test_mission_plan_survives_json_round_trip(cfg, geom, tee_net):
    steps = plan_mission(tee_net, 15.0, cfg, geom)
    doc = plan_to_dict(steps)
    assert plan_from_dict(doc) == steps
    assert json.loads(plan_to_json(steps)) == doc


def test_mission_plan_is_deterministic(cfg, geom, tee_net):
    a = plan_to_json(plan_mission(tee_net, 41.0, cfg, geom))
    b = plan_to_json(plan_mission(tee_net, 41.0, cfg, geom))
    assert a == b


# -- step validation ---------------------------------------------------------------

def test_mission_step_validates_fields():
    cmd = CommandVector(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(PlanError):
        MissionStep(kind=StepKind.DRIVE, command=cmd, duration_s=0.0)
    with pytest.raises(PlanError):
        MissionStep(kind=StepKind.DRIVE, command=cmd, duration_s=1.0,
                    trigger="whenever")
    with pytest.raises(PlanError):
        MissionStep(kind=StepKind.DRIVE, command=cmd, duration_s=1.0,
                    trigger="head_fraction", trigger_fraction=1.5)
