"""Declarative scenario files (JSON) and the config bundle they resolve to."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .config import (
    CameraConfig,
    DescribeConfig,
    DwaConfig,
    HarnessConfig,
    LidarConfig,
    MappingConfig,
    MclConfig,
    ReachBox,
    RobotConfig,
    TrackerConfig,
    UserFollowConfig,
    apply_overrides,
)
from .geometry import Pose2D


@dataclass(frozen=True)
class NoiseToggles:
    lidar: bool = True
    depth: bool = True
    odometry: bool = True
    user: bool = True


@dataclass
class ConfigBundle:
    robot: RobotConfig = field(default_factory=RobotConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    user_follow: UserFollowConfig = field(default_factory=UserFollowConfig)
    reach_box: ReachBox = field(default_factory=ReachBox)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    mapping: MappingConfig = field(default_factory=MappingConfig)
    mcl: MclConfig = field(default_factory=MclConfig)
    dwa: DwaConfig = field(default_factory=DwaConfig)
    describe: DescribeConfig = field(default_factory=DescribeConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)

    def __post_init__(self):
        # DWA limits mirror the robot's unless explicitly overridden.
        self.dwa = DwaConfig.from_robot(
            self.robot,
            **{
                k: getattr(self.dwa, k)
                for k in (
                    "alpha", "beta", "gamma", "v_samples", "omega_samples",
                    "horizon", "dt_rollout", "lookahead", "recover_omega",
                )
            },
        )


@dataclass
class Scenario:
    """One experiment: world files, starts, the request, and determinism seed."""

    map_path: str
    lexicon_path: str
    robot_start: Pose2D
    user_start: Pose2D
    utterance: str
    duration_max: float = 60.0
    seed: int = 0
    noise: NoiseToggles = field(default_factory=NoiseToggles)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.duration_max <= 0:
            raise ValueError("duration_max must be positive")

    def configs(self) -> ConfigBundle:
        bundle = ConfigBundle()
        sections = {
            "robot": "robot", "camera": "camera", "lidar": "lidar",
            "user_follow": "user_follow", "reach_box": "reach_box",
            "tracker": "tracker", "mapping": "mapping", "mcl": "mcl",
            "dwa": "dwa", "describe": "describe", "harness": "harness",
        }
        unknown = set(self.overrides) - set(sections)
        if unknown:
            raise ValueError(f"unknown override sections: {sorted(unknown)}")
        for name in sections:
            if name in self.overrides:
                setattr(
                    bundle, name,
                    apply_overrides(getattr(bundle, name), self.overrides[name]),
                )
        bundle.__post_init__()
        return bundle

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(
            self.map_path, self.lexicon_path, self.robot_start, self.user_start,
            self.utterance, self.duration_max, seed, self.noise,
            json.loads(json.dumps(self.overrides)),
        )


def _pose(values) -> Pose2D:
    x, y, theta = (float(v) for v in values)
    return Pose2D(x, y, theta)


def parse_scenario(obj: dict, base_dir: str = ".") -> Scenario:
    required = {"map", "lexicon", "robot_start", "user_start", "utterance"}
    missing = required - set(obj)
    if missing:
        raise ValueError(f"scenario missing keys: {sorted(missing)}")
    noise = NoiseToggles(**obj.get("noise", {}))
    return Scenario(
        map_path=os.path.join(base_dir, obj["map"]),
        lexicon_path=os.path.join(base_dir, obj["lexicon"]),
        robot_start=_pose(obj["robot_start"]),
        user_start=_pose(obj["user_start"]),
        utterance=str(obj["utterance"]),
        duration_max=float(obj.get("duration_max", 60.0)),
        seed=int(obj.get("seed", 0)),
        noise=noise,
        overrides=obj.get("overrides", {}),
    )


def load_scenario_file(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    return parse_scenario(obj, base_dir=os.path.dirname(os.path.abspath(path)))
