"""Per-tick trace records and their JSON-lines serialization.

Field order (one JSON object per line): tick, t, robot, mcl, user,
user_est, cmd, footprint, events.  Poses are [x, y, theta]; user_est is
[x_cam, y_cam, phi] or null; footprint is a list of map-frame polygons.
Serialization is deterministic, so equal runs give byte-equal files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose2D, Twist2D


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    t: float
    robot: Pose2D
    mcl: Pose2D
    user: Pose2D
    user_est: tuple[float, float, float] | None
    cmd: Twist2D
    footprint: tuple[np.ndarray, ...]
    events: tuple[dict, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "tick": self.tick,
            "t": self.t,
            "robot": [self.robot.x, self.robot.y, self.robot.theta],
            "mcl": [self.mcl.x, self.mcl.y, self.mcl.theta],
            "user": [self.user.x, self.user.y, self.user.theta],
            "user_est": list(self.user_est) if self.user_est is not None else None,
            "cmd": [self.cmd.v, self.cmd.omega],
            "footprint": [np.asarray(p, dtype=float).tolist() for p in self.footprint],
            "events": list(self.events),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TraceRecord":
        return cls(
            tick=int(obj["tick"]),
            t=float(obj["t"]),
            robot=Pose2D(*obj["robot"]),
            mcl=Pose2D(*obj["mcl"]),
            user=Pose2D(*obj["user"]),
            user_est=tuple(obj["user_est"]) if obj["user_est"] is not None else None,
            cmd=Twist2D(*obj["cmd"]),
            footprint=tuple(np.array(p) for p in obj["footprint"]),
            events=tuple(obj["events"]),
        )


def dumps_record(rec: TraceRecord) -> str:
    return json.dumps(rec.to_json_dict(), separators=(",", ":"))


def write_trace(records: list[TraceRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(dumps_record(rec))
            f.write("\n")


def read_trace(path: str) -> list[TraceRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(TraceRecord.from_json_dict(json.loads(line)))
    return out
