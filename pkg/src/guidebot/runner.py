"""Scenario execution: the 10 Hz loop from utterance to goal.

Per tick: sensors (lidar, torso render) -> perception -> MCL -> footprint
merge -> replan check -> DWA -> actuate robot -> step user -> dialogue
scheduler -> log.  All randomness flows through five named streams
(lidar, depth, odometry, user, mcl) derived from the scenario seed, so a
run is a pure function of (scenario, seed).
"""
from __future__ import annotations

import hashlib
import json
import math
import os

import numpy as np

from .config import HarnessConfig, LidarConfig, MappingConfig
from .dialogue import (
    Ambiguous,
    NoDestination,
    describe_scene,
    description_due,
    extract_intent,
    load_lexicon_file,
    validate_lexicon_goals,
)
from .geometry import Pose2D, Twist2D, pad_polygon, transform_polygon
from .grid import OccupancyGrid, load_map_file
from .localization import estimate_pose, init_gaussian, mcl_step
from .mapping import LogOddsGrid, build_likelihood_field, update_map
from .metrics import RunMetrics, compute_metrics
from .perception import (
    DegenerateObservation,
    NoUserDetected,
    UserLost,
    estimate_user_pose,
    track_user,
)
from .planning import (
    GoalBlocked,
    NoPath,
    StartBlocked,
    astar,
    default_user_box,
    dwa_plan_info,
    inflate,
    merge_footprint,
)
from .scenario import Scenario
from .trace import TraceRecord, dumps_record, write_trace
from .world import (
    SensorInsideObstacle,
    UserState,
    cast_lidar,
    clamp_twist,
    rate_limit_twist,
    render_torso,
    step_robot,
    step_user,
)

STREAM_NAMES = ("lidar", "depth", "odometry", "user", "mcl")


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent named generators derived from one scenario seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {n: np.random.default_rng(s) for n, s in zip(STREAM_NAMES, children)}


_MAP_CACHE: dict[bytes, OccupancyGrid] = {}


def build_planning_map(
    grid: OccupancyGrid,
    hcfg: HarnessConfig,
    mapping_cfg: MappingConfig,
    max_range: float,
) -> OccupancyGrid:
    """Noiseless log-odds mapping pass from a stride grid of free poses
    (the simulation's stand-in for the SLAM front end), thresholded into
    the navigation map.  Cached per map content and parameters."""
    key = hashlib.sha256(
        grid.cells.tobytes()
        + json.dumps(
            [grid.width, grid.height, grid.resolution, hcfg.mapping_stride_m,
             hcfg.mapping_beams, mapping_cfg.l_occ, mapping_cfg.l_free,
             mapping_cfg.l_clamp, max_range]
        ).encode()
    ).digest()
    cached = _MAP_CACHE.get(key)
    if cached is not None:
        return cached
    stride = max(1, int(round(hcfg.mapping_stride_m / grid.resolution)))
    spec = LidarConfig(
        n_beams=hcfg.mapping_beams,
        angle_min=-math.pi,
        angle_max=math.pi,
        max_range=max_range,
        noise_sigma=0.0,
    )
    log = LogOddsGrid.like(grid, clamp=mapping_cfg.l_clamp)
    for ix in range(stride // 2, grid.width, stride):
        for iy in range(stride // 2, grid.height, stride):
            if not grid.is_free(ix, iy):
                continue
            cx, cy = grid.cell_center(ix, iy)
            pose = Pose2D(cx, cy, 0.0)
            scan = cast_lidar(grid, pose, spec, None)
            log = update_map(log, pose, scan, mapping_cfg)
    result = log.threshold()
    _MAP_CACHE[key] = result
    return result


def _early_exit(
    sc: Scenario, grid, body_map, status: str, events: list[dict]
) -> tuple[list[TraceRecord], RunMetrics]:
    rec = TraceRecord(
        tick=0,
        t=0.0,
        robot=sc.robot_start,
        mcl=sc.robot_start,
        user=sc.user_start,
        user_est=None,
        cmd=Twist2D(0.0, 0.0),
        footprint=(body_map,),
        events=tuple(events),
    )
    cfgs = sc.configs()
    metrics = compute_metrics([rec], grid, None, cfgs.harness, status=status)
    return [rec], metrics


def run_scenario(sc: Scenario) -> tuple[list[TraceRecord], RunMetrics]:
    cfgs = sc.configs()
    hcfg = cfgs.harness
    robot = cfgs.robot
    dt = hcfg.dt

    grid, entities = load_map_file(sc.map_path)
    lexicon = load_lexicon_file(sc.lexicon_path)
    validate_lexicon_goals(lexicon, grid)
    if not grid.free_at_point(sc.robot_start.x, sc.robot_start.y):
        raise ValueError("robot start is not on a free cell")
    if not grid.free_at_point(sc.user_start.x, sc.user_start.y):
        raise ValueError("user start is not on a free cell")

    streams = make_streams(sc.seed)
    body_map0 = transform_polygon(robot.body_polygon, sc.robot_start)

    try:
        intent = extract_intent(sc.utterance, lexicon)
    except (NoDestination, Ambiguous) as e:
        events = [{"type": "clarify", "reason": type(e).__name__, "detail": str(e)}]
        return _early_exit(sc, grid, body_map0, "clarify", events)
    goal = lexicon.get(intent.destination_id).goal_pose
    first_events = [
        {"type": "intent", "destination": intent.destination_id, "score": intent.score},
        {"type": "confirmation", "text": intent.confirmation},
    ]

    planning_map = build_planning_map(grid, hcfg, cfgs.mapping, cfgs.lidar.max_range)
    costmap = inflate(planning_map, hcfg.inflation_radius)
    field = build_likelihood_field(planning_map, cfgs.mcl.sigma_hit, cfgs.mcl.p_rand)
    ps = init_gaussian(sc.robot_start, cfgs.mcl, streams["mcl"])

    try:
        path = astar(costmap, sc.robot_start, goal)
    except (StartBlocked, GoalBlocked, NoPath) as e:
        events = first_events + [
            {"type": "unreachable", "reason": type(e).__name__, "detail": str(e)}
        ]
        return _early_exit(sc, grid, body_map0, "unreachable", events)

    body_padded = pad_polygon(robot.body_polygon, hcfg.footprint_padding)
    lost_box = default_user_box(
        robot.anchor_offset, cfgs.reach_box.depth, cfgs.reach_box.width,
        hcfg.lost_box_scale,
    )
    lost_box_padded = pad_polygon(lost_box, hcfg.footprint_padding)

    true_pose = sc.robot_start
    prev_pose = sc.robot_start
    user = UserState(sc.user_start, cfgs.user_follow.torso_width)
    current = Twist2D(0.0, 0.0)
    tracked = None
    first_lost_t: float | None = None
    last_emit = 0.0
    records: list[TraceRecord] = []
    status = "timeout"
    max_ticks = int(round(sc.duration_max / dt))

    for k in range(max_ticks):
        t = k * dt
        events: list[dict] = list(first_events) if k == 0 else []

        # --- sensing at the current true pose
        scan = None
        lidar_pose = true_pose.compose(robot.lidar_extrinsics)
        try:
            scan = cast_lidar(
                grid, lidar_pose, cfgs.lidar,
                streams["lidar"] if sc.noise.lidar else None,
            )
        except SensorInsideObstacle:
            events.append({"type": "warning", "what": "lidar_inside_obstacle"})
        cam_pose = true_pose.compose(robot.camera_extrinsics)
        obs = render_torso(
            cfgs.camera, cam_pose, user, grid,
            streams["depth"] if sc.noise.depth else None,
        )

        # --- perception
        try:
            raw = estimate_user_pose(obs, cfgs.tracker.k_min)
        except (NoUserDetected, DegenerateObservation):
            raw = None
        user_est = None
        try:
            tracked = track_user(
                tracked, raw, t, cfgs.reach_box, robot.camera_extrinsics, cfgs.tracker
            )
            user_est = tracked
            first_lost_t = None
        except UserLost:
            if first_lost_t is None:
                first_lost_t = t
            events.append({"type": "warning", "what": "user_lost"})

        # --- localization
        delta = true_pose.relative_to(prev_pose)
        if sc.noise.odometry:
            trans = math.hypot(delta.x, delta.y)
            g = streams["odometry"]
            s_xy = hcfg.odom_alpha_trans * trans
            s_th = hcfg.odom_alpha_rot * (abs(delta.theta) + trans)
            delta = Pose2D(
                delta.x + s_xy * g.standard_normal(),
                delta.y + s_xy * g.standard_normal(),
                delta.theta + s_th * g.standard_normal(),
            )
        ps, mcl_events = mcl_step(
            ps, delta, scan, field, planning_map, cfgs.mcl, streams["mcl"],
            robot.lidar_extrinsics,
        )
        for ev in mcl_events:
            events.append({"type": "mcl", "what": ev})
        est_pose = estimate_pose(ps)
        prev_pose = true_pose

        # --- abort when the user has been lost too long
        if first_lost_t is not None and t - first_lost_t > hcfg.lost_user_abort:
            records.append(
                TraceRecord(
                    k, t, true_pose, est_pose, user.pose, None, Twist2D(0.0, 0.0),
                    (transform_polygon(robot.body_polygon, true_pose),),
                    tuple(events + [{"type": "status", "status": "lost_user"}]),
                )
            )
            status = "lost_user"
            break

        # --- footprint merge
        user_poly = None
        fallback = None
        if hcfg.user_footprint_enabled:
            if user_est is not None:
                user_poly = pad_polygon(user_est.boundary_robot, hcfg.footprint_padding)
            else:
                fallback = lost_box_padded
        fp = merge_footprint(body_padded, user_poly, fallback)

        # --- replan when strayed from the path or the path got blocked
        d_path = np.min(
            np.hypot(path.waypoints[:, 0] - est_pose.x, path.waypoints[:, 1] - est_pose.y)
        )
        blocked = any(costmap.is_lethal(ix, iy) for ix, iy in path.cells)
        if d_path > hcfg.replan_stray or blocked:
            try:
                path = astar(costmap, est_pose, goal)
                events.append({"type": "replan"})
            except (StartBlocked, GoalBlocked, NoPath):
                events.append({"type": "warning", "what": "replan_failed"})

        # --- local planning and actuation
        cmd, dwa_info = dwa_plan_info(
            est_pose, current, path.waypoints, costmap, fp, cfgs.dwa, dt
        )
        if dwa_info["recovery"]:
            events.append({"type": "warning", "what": "dwa_recovery"})
        cmd, clamped = clamp_twist(cmd, robot)
        if clamped:
            events.append({"type": "warning", "what": "cmd_clamped"})
        # the base tracks commands only within its acceleration envelope
        cmd, limited = rate_limit_twist(cmd, current, robot, dt)
        if limited:
            events.append({"type": "warning", "what": "cmd_rate_limited"})
        true_pose = step_robot(true_pose, cmd, dt)
        current = cmd

        # --- user follows the moving grip point
        user = step_user(
            user, true_pose, robot, cfgs.user_follow, dt,
            streams["user"] if sc.noise.user else None,
        )

        # --- periodic scene description from the post-move camera pose
        if description_due(last_emit, t, cfgs.describe.period):
            cam_now = true_pose.compose(robot.camera_extrinsics)
            desc = describe_scene(entities, cam_now, grid, cfgs.describe, tick=t)
            events.append(
                {
                    "type": "description",
                    "text": desc.text,
                    "entities": [e.label for e in desc.entities_mentioned],
                }
            )
            last_emit = t

        # --- physical footprint for the trace (unpadded, at the true pose)
        polys = [transform_polygon(robot.body_polygon, true_pose)]
        if hcfg.user_footprint_enabled:
            if user_est is not None:
                polys.append(transform_polygon(user_est.boundary_robot, true_pose))
            else:
                polys.append(transform_polygon(lost_box, true_pose))

        est_tuple = (
            (user_est.x_cam, user_est.y_cam, user_est.phi) if user_est else None
        )
        records.append(
            TraceRecord(
                k, t, true_pose, est_pose, user.pose, est_tuple, cmd,
                tuple(polys), tuple(events),
            )
        )

        if math.hypot(true_pose.x - goal.x, true_pose.y - goal.y) <= hcfg.goal_tolerance:
            status = "reached"
            break

    metrics = compute_metrics(records, grid, (goal.x, goal.y), hcfg, status=status)
    return records, metrics


def run_batch(
    sc: Scenario, seeds, out_dir: str | None = None
) -> list[RunMetrics]:
    """Run one scenario across many seeds; optionally write per-seed trace
    and metrics files plus a summary."""
    results = []
    for seed in seeds:
        records, metrics = run_scenario(sc.with_seed(int(seed)))
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            write_trace(records, os.path.join(out_dir, f"seed_{seed}.trace.jsonl"))
            with open(
                os.path.join(out_dir, f"seed_{seed}.metrics.json"), "w",
                encoding="utf-8", newline="\n",
            ) as f:
                json.dump(metrics.to_json_dict(), f, indent=2)
                f.write("\n")
        results.append(metrics)
    if out_dir is not None:
        summary = {
            "runs": len(results),
            "successes": sum(1 for m in results if m.success),
            "collision_free": sum(1 for m in results if m.collision_count == 0),
        }
        with open(
            os.path.join(out_dir, "summary.json"), "w", encoding="utf-8", newline="\n"
        ) as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
    return results


def trace_bytes(records: list[TraceRecord]) -> bytes:
    """Canonical byte serialization of a trace (what write_trace writes)."""
    return ("".join(dumps_record(r) + "\n" for r in records)).encode("utf-8")
