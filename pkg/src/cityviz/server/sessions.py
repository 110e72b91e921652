"""Per-user semantic-zoom recomputation pipeline.

A camera update triggers a recomputation only when the pose moved more
than MOVE_THRESHOLD since the last computed pose and at least
MIN_COMPUTE_INTERVAL elapsed; otherwise the pose is buffered (newest
wins) and picked up by the next tick, so the final pose after input
quiesces is always computed. At most one computation is in flight per
session because the caller serializes per-session message handling.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import CameraPose, ValidationError, pose_distance
from ..semzoom import AppearanceDelta, AppearanceState, appearance_diff, entity_levels, resolve_appearance
from .store import Scene

MOVE_THRESHOLD = 0.5  # world units
MIN_COMPUTE_INTERVAL = 0.1  # seconds (10 Hz)


@dataclass
class SessionView:
    user_id: str
    scene_version: int = -1
    last_pose: CameraPose | None = None
    last_appearance: AppearanceState | None = None
    last_compute_time: float = float("-inf")
    pending_pose: CameraPose | None = None
    screen: tuple[float, float] = (1920.0, 1080.0)


def _compute(session: SessionView, pose: CameraPose, now: float, scene: Scene) -> AppearanceDelta:
    levels = entity_levels(pose, scene.clusters, scene.zoom.level_thresholds)
    state = resolve_appearance(scene.structure, scene.layout, levels, scene.zoom, scene.table)
    base = session.last_appearance if session.scene_version == scene.version else None
    delta = appearance_diff(base, state)
    session.last_appearance = state
    session.last_pose = pose
    session.last_compute_time = now
    session.pending_pose = None
    session.scene_version = scene.version
    return delta


def handle_camera_update(
    session: SessionView, pose: CameraPose, now: float, scene: Scene
) -> AppearanceDelta | None:
    """Recompute appearance for a camera move, or buffer it for the tick.

    The first pose after a landscape or settings change always computes
    and yields a full delta.
    """
    if scene is None:
        raise ValidationError("no landscape loaded for this session")
    first = session.last_appearance is None or session.scene_version != scene.version
    if first:
        return _compute(session, pose, now, scene)
    moved = pose_distance(pose, session.last_pose) > MOVE_THRESHOLD
    ready = (now - session.last_compute_time) >= MIN_COMPUTE_INTERVAL
    if moved and ready:
        return _compute(session, pose, now, scene)
    session.pending_pose = pose
    return None


def flush_pending(session: SessionView, now: float, scene: Scene) -> AppearanceDelta | None:
    """Compute the buffered pose once the throttle window has passed."""
    if session.pending_pose is None:
        return None
    if (now - session.last_compute_time) < MIN_COMPUTE_INTERVAL:
        return None
    return _compute(session, session.pending_pose, now, scene)
