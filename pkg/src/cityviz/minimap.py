"""Mini-map: orthographic top-view frame, markers, picking.

The map is a north-up square anchored in the top-right corner, sized as
a fraction of the screen. At zoom 1 it is world-centered over the whole
landscape; zoomed in it follows the active marker, with panning clamped
so some part of the landscape always stays visible (no whiteout). An
enlarged mode fills most of the screen height and always fits the whole
landscape regardless of zoom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .collab import RoomState
from .layout import CityLayout
from .model import ValidationError

VIEWPORT_MARGIN_PX = 8.0
MARKER_HIT_FRACTION = 0.04  # of the viewport side
MARKER_HIT_MIN_PX = 8.0
SELF_MARKER_COLOR = "#808080"

#: Layer tags the renderer understands; config.hidden_layers filters them.
LAYERS = ("foundation", "districts", "buildings", "methods", "communication", "labels", "markers")


@dataclass
class MinimapConfig:
    area_fraction: float = 0.04
    corner: str = "top-right"
    zoom: float = 1.0
    marker_mode: str = "camera"
    hidden_layers: frozenset[str] = field(default_factory=frozenset)
    enlarged_fraction: float = 0.7

    def validate(self) -> "MinimapConfig":
        if not 0.0 < self.area_fraction <= 0.25:
            raise ValidationError("areaFraction must lie in (0, 0.25]")
        if self.corner != "top-right":
            raise ValidationError("only the top-right corner is supported")
        if not 0.5 <= self.zoom <= 10.0:
            raise ValidationError("zoom must lie in [0.5, 10]")
        if self.marker_mode not in ("camera", "target"):
            raise ValidationError("markerMode must be 'camera' or 'target'")
        unknown = set(self.hidden_layers) - set(LAYERS)
        if unknown:
            raise ValidationError(f"unknown layers: {', '.join(sorted(unknown))}")
        if not 0.0 < self.enlarged_fraction <= 1.0:
            raise ValidationError("enlargedFraction must lie in (0, 1]")
        return self

    def to_dict(self) -> dict:
        return {
            "areaFraction": self.area_fraction,
            "corner": self.corner,
            "zoom": self.zoom,
            "markerMode": self.marker_mode,
            "hiddenLayers": sorted(self.hidden_layers),
            "enlargedFraction": self.enlarged_fraction,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MinimapConfig":
        cfg = cls(
            area_fraction=doc.get("areaFraction", 0.04),
            corner=doc.get("corner", "top-right"),
            zoom=doc.get("zoom", 1.0),
            marker_mode=doc.get("markerMode", "camera"),
            hidden_layers=frozenset(doc.get("hiddenLayers", ())),
            enlarged_fraction=doc.get("enlargedFraction", 0.7),
        )
        return cfg.validate()


@dataclass(frozen=True)
class ViewportRect:
    x: float
    y: float
    width: float
    height: float

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "width": self.width, "height": self.height}


@dataclass(frozen=True)
class MinimapFrame:
    world_center: tuple[float, float]  # ground plane (x, z)
    half_extents: tuple[float, float]
    viewport: ViewportRect
    enlarged: bool

    def to_dict(self) -> dict:
        return {
            "worldCenter": list(self.world_center),
            "halfExtents": list(self.half_extents),
            "viewport": self.viewport.to_dict(),
            "enlarged": self.enlarged,
        }


@dataclass(frozen=True)
class Marker:
    user_id: str
    color: str
    world: tuple[float, float]
    uv: tuple[float, float]
    off_map: bool
    is_self: bool = False

    def to_dict(self) -> dict:
        return {
            "userId": self.user_id,
            "color": self.color,
            "world": list(self.world),
            "uv": list(self.uv),
            "offMap": self.off_map,
            "isSelf": self.is_self,
        }


def _landscape_bounds(layout: CityLayout) -> tuple[float, float, float, float]:
    return layout.bounds_xz()


def compute_frame(
    layout: CityLayout,
    config: MinimapConfig,
    screen: tuple[float, float],
    focus_world: tuple[float, float] | None = None,
    enlarged: bool = False,
) -> MinimapFrame:
    """Compute the map's world window and its on-screen viewport.

    `focus_world` is the active marker's ground position; it is only
    honored when zoomed in (the enlarged view and zoom <= 1 stay
    world-centered). Panning is clamped so the view always overlaps the
    landscape bounding box with positive area.
    """
    config.validate()
    screen_w, screen_h = float(screen[0]), float(screen[1])
    if screen_w <= 0 or screen_h <= 0:
        raise ValidationError("screen dimensions must be positive")
    min_x, min_z, max_x, max_z = _landscape_bounds(layout)
    land_cx, land_cz = (min_x + max_x) / 2, (min_z + max_z) / 2
    base_half = max(max_x - min_x, max_z - min_z) / 2 * 1.05

    if enlarged:
        side = config.enlarged_fraction * screen_h
        viewport = ViewportRect((screen_w - side) / 2, (screen_h - side) / 2, side, side)
        return MinimapFrame((land_cx, land_cz), (base_half, base_half), viewport, True)

    side = math.sqrt(config.area_fraction * screen_w * screen_h)
    viewport = ViewportRect(
        screen_w - side - VIEWPORT_MARGIN_PX, VIEWPORT_MARGIN_PX, side, side
    )
    half = base_half / config.zoom
    if config.zoom <= 1.0 or focus_world is None:
        center = (land_cx, land_cz)
    else:
        center = _clamp_center(focus_world, (min_x, min_z, max_x, max_z), half)
    return MinimapFrame(center, (half, half), viewport, False)


def _clamp_center(
    focus: tuple[float, float],
    bounds: tuple[float, float, float, float],
    half: float,
) -> tuple[float, float]:
    """Clamp the view center so the landscape stays visible on both axes."""
    min_x, min_z, max_x, max_z = bounds
    cx, cz = float(focus[0]), float(focus[1])
    overlap_x = 0.1 * min(2 * half, max(max_x - min_x, 1e-9))
    overlap_z = 0.1 * min(2 * half, max(max_z - min_z, 1e-9))
    cx = min(max(cx, min_x - half + overlap_x), max_x + half - overlap_x)
    cz = min(max(cz, min_z - half + overlap_z), max_z + half - overlap_z)
    return (cx, cz)


def project(world: tuple[float, float], frame: MinimapFrame) -> tuple[float, float]:
    """World ground point to map uv; (0,0) is the map's top-left = (minX, maxZ)."""
    cx, cz = frame.world_center
    hx, hz = frame.half_extents
    u = (world[0] - (cx - hx)) / (2 * hx)
    v = ((cz + hz) - world[1]) / (2 * hz)
    return (u, v)


def unproject(uv: tuple[float, float], frame: MinimapFrame) -> tuple[float, float]:
    cx, cz = frame.world_center
    hx, hz = frame.half_extents
    x = (cx - hx) + uv[0] * (2 * hx)
    z = (cz + hz) - uv[1] * (2 * hz)
    return (x, z)


def _ground(position: tuple[float, float, float]) -> tuple[float, float]:
    return (position[0], position[2])


def marker_positions(
    room: RoomState,
    self_id: str,
    config: MinimapConfig,
    frame: MinimapFrame,
) -> list[Marker]:
    """Project every connected user onto the map.

    The viewer's own marker honors markerMode (camera vs. orbit target);
    other users are always placed at their camera. Positions outside the
    window are clamped to the border and flagged off-map instead of being
    dropped.
    """
    config.validate()
    if self_id not in room.users:
        raise ValidationError(f"unknown user: {self_id}")
    markers: list[Marker] = []
    for user_id in [self_id] + sorted(u for u in room.users if u != self_id):
        user = room.users[user_id]
        is_self = user_id == self_id
        if is_self and config.marker_mode == "target":
            world = _ground(user.pose.target)
        else:
            world = _ground(user.pose.position)
        u, v = project(world, frame)
        off = not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0)
        markers.append(
            Marker(
                user_id=user_id,
                color=SELF_MARKER_COLOR if is_self else user.color,
                world=world,
                uv=(min(max(u, 0.0), 1.0), min(max(v, 0.0), 1.0)),
                off_map=off,
                is_self=is_self,
            )
        )
    return markers


# ---------------------------------------------------------------------------
# Picking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkerHit:
    user_id: str


@dataclass(frozen=True)
class EntityHit:
    entity_id: str


@dataclass(frozen=True)
class MapBody:
    pass


HitResult = MarkerHit | EntityHit | MapBody


def marker_hit_radius_px(frame: MinimapFrame) -> float:
    return max(MARKER_HIT_FRACTION * frame.viewport.width, MARKER_HIT_MIN_PX)


def hit_test(
    frame: MinimapFrame,
    click_uv: tuple[float, float],
    markers: list[Marker],
    layout: CityLayout,
) -> HitResult:
    """Resolve a map click: markers first, then entities, else map body.

    Among overlapping markers the nearest center wins (ties break on the
    lower user id); the viewer's own marker is never a hit target. Entity
    hits pick the deepest box whose ground footprint contains the
    unprojected point.
    """
    if not (0.0 <= click_uv[0] <= 1.0 and 0.0 <= click_uv[1] <= 1.0):
        raise ValidationError("click must lie inside the map (uv in [0,1]^2)")
    side = frame.viewport.width
    radius = marker_hit_radius_px(frame)
    best: tuple[float, str] | None = None
    for marker in markers:
        if marker.is_self:
            continue
        dist = math.hypot(
            (click_uv[0] - marker.uv[0]) * side, (click_uv[1] - marker.uv[1]) * side
        )
        if dist <= radius and (best is None or (dist, marker.user_id) < best):
            best = (dist, marker.user_id)
    if best is not None:
        return MarkerHit(best[1])

    x, z = unproject(click_uv, frame)
    candidate: tuple[int, str] | None = None
    for entity_id, box in layout.boxes.items():
        if box.contains_ground(x, z):
            key = (-box.depth, entity_id)
            if candidate is None or key < candidate:
                candidate = key
    if candidate is not None:
        return EntityHit(candidate[1])
    return MapBody()
