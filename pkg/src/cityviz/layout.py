"""Deterministic world-space city layout.

Applications become grey foundations on a grid; packages nest as stacked
district slabs (one height step per nesting level); classes are buildings
on top of their package. Children are packed with a row treemap: sorted
by footprint, then filled into near-square rows. Communication becomes
quadratic arcs between class roofs.

World units are y-up; the ground plane is x/z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    CommunicationLink,
    LandscapeStructure,
    ValidationError,
    app_entity_id,
    class_entity_id,
    link_entity_id,
    package_entity_id,
)


class LayoutError(ValidationError):
    """A layout lookup failed, e.g. an arc endpoint was never laid out."""


@dataclass(frozen=True)
class LayoutConfig:
    margin: float = 0.25
    class_footprint: float = 1.0
    base_class_height: float = 1.0
    package_height_step: float = 0.5
    foundation_gap: float = 2.0
    color_depth_palette: tuple[str, str] = ("#43a047", "#1e88e5")
    foundation_color: str = "#9e9e9e"
    building_color: str = "#30409a"
    arc_color: str = "#e6c229"

    def validate(self) -> "LayoutConfig":
        for name in ("margin", "class_footprint", "base_class_height",
                     "package_height_step", "foundation_gap"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"layout config {name} must be positive")
        if self.margin < 0.2:
            raise ValidationError("margin must be at least 0.2 world units")
        return self

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "classFootprint": self.class_footprint,
            "baseClassHeight": self.base_class_height,
            "packageHeightStep": self.package_height_step,
            "foundationGap": self.foundation_gap,
            "colorDepthPalette": list(self.color_depth_palette),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LayoutConfig":
        cfg = cls(
            margin=doc.get("margin", 0.25),
            class_footprint=doc.get("classFootprint", 1.0),
            base_class_height=doc.get("baseClassHeight", 1.0),
            package_height_step=doc.get("packageHeightStep", 0.5),
            foundation_gap=doc.get("foundationGap", 2.0),
            color_depth_palette=tuple(doc.get("colorDepthPalette", ("#43a047", "#1e88e5"))),
        )
        return cfg.validate()


@dataclass(frozen=True)
class EntityBox:
    entity_id: str
    kind: str  # application | package | class
    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]
    depth: int

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple((a + b) / 2 for a, b in zip(self.min_corner, self.max_corner))

    @property
    def roof_center(self) -> tuple[float, float, float]:
        cx, _, cz = self.center
        return (cx, self.max_corner[1], cz)

    def contains_ground(self, x: float, z: float) -> bool:
        return (self.min_corner[0] <= x <= self.max_corner[0]
                and self.min_corner[2] <= z <= self.max_corner[2])

    def to_dict(self) -> dict:
        return {
            "entityId": self.entity_id,
            "kind": self.kind,
            "min": list(self.min_corner),
            "max": list(self.max_corner),
            "depth": self.depth,
        }


@dataclass(frozen=True)
class LabelSlot:
    entity_id: str
    text: str
    anchor: tuple[float, float, float]
    max_width: float
    orientation: str = "+x"

    def to_dict(self) -> dict:
        return {
            "entityId": self.entity_id,
            "text": self.text,
            "anchor": list(self.anchor),
            "maxWidth": self.max_width,
            "orientation": self.orientation,
        }


@dataclass(frozen=True)
class ArcGeometry:
    link_id: str
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    apex_height: float
    polyline: tuple[tuple[float, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "linkId": self.link_id,
            "start": list(self.start),
            "end": list(self.end),
            "apexHeight": self.apex_height,
            "polyline": [list(p) for p in self.polyline],
        }


@dataclass
class CityLayout:
    boxes: dict[str, EntityBox] = field(default_factory=dict)
    labels: dict[str, LabelSlot] = field(default_factory=dict)
    arcs: dict[str, ArcGeometry] = field(default_factory=dict)
    config: LayoutConfig = field(default_factory=LayoutConfig)

    def bounds_xz(self) -> tuple[float, float, float, float]:
        if not self.boxes:
            raise LayoutError("empty layout has no bounds")
        xs0 = min(b.min_corner[0] for b in self.boxes.values())
        zs0 = min(b.min_corner[2] for b in self.boxes.values())
        xs1 = max(b.max_corner[0] for b in self.boxes.values())
        zs1 = max(b.max_corner[2] for b in self.boxes.values())
        return xs0, zs0, xs1, zs1

    def class_box(self, fqn: str) -> EntityBox:
        box = self.boxes.get(class_entity_id(fqn))
        if box is None:
            raise LayoutError(f"class not present in layout: {fqn}")
        return box

    def to_dict(self) -> dict:
        return {
            "boxes": [b.to_dict() for b in self.boxes.values()],
            "labels": [l.to_dict() for l in self.labels.values()],
            "arcs": [a.to_dict() for a in self.arcs.values()],
            "config": self.config.to_dict(),
        }


# ---------------------------------------------------------------------------
# Row packing
# ---------------------------------------------------------------------------

def _class_side(method_count: int, config: LayoutConfig) -> float:
    side = config.class_footprint * (1.0 + 0.15 * math.sqrt(max(method_count - 1, 0)))
    return min(max(side, 1.0), 3.0)


def _pack_rows(
    items: list[tuple[float, float, str]], gap: float
) -> tuple[dict[str, tuple[float, float]], float, float]:
    """Pack (width, depth, key) items into near-square rows.

    Items are laid out left to right along x; full rows advance along z.
    Returns per-key min-corner offsets relative to the packed region and
    the region's total width/depth. Caller supplies the sort order.
    """
    if not items:
        return {}, 0.0, 0.0
    total_area = sum(w * d for w, d, _ in items)
    target = max(math.sqrt(total_area) * 1.25, max(w for w, _, _ in items))
    positions: dict[str, tuple[float, float]] = {}
    x = z = row_depth = region_w = 0.0
    for w, d, key in items:
        if x > 0.0 and x + w > target:
            z += row_depth + gap
            x = 0.0
            row_depth = 0.0
        positions[key] = (x, z)
        x += w
        region_w = max(region_w, x)
        x += gap
        row_depth = max(row_depth, d)
    return positions, region_w, z + row_depth


@dataclass
class _Measured:
    key: str
    kind: str
    width: float
    depth: float
    child_offsets: dict[str, tuple[float, float]]
    children: list["_Measured"]
    payload: object


def _measure_package(pkg, path, app_name, config: LayoutConfig) -> _Measured:
    children = [
        _measure_package(sub, path + (sub.name,), app_name, config)
        for sub in pkg.sub_packages
    ]
    for cls in pkg.classes:
        side = _class_side(len(cls.methods), config)
        children.append(
            _Measured(class_entity_id(cls.fqn), "class", side, side, {}, [], cls)
        )
    children.sort(key=lambda m: (-(m.width * m.depth), m.key))
    offsets, inner_w, inner_d = _pack_rows(
        [(c.width, c.depth, c.key) for c in children], config.margin
    )
    m = config.margin
    return _Measured(
        key=package_entity_id(app_name, path),
        kind="package",
        width=inner_w + 2 * m,
        depth=inner_d + 2 * m,
        child_offsets=offsets,
        children=children,
        payload=pkg,
    )


def _measure_app(app, config: LayoutConfig) -> _Measured:
    children = [
        _measure_package(pkg, (pkg.name,), app.name, config) for pkg in app.root_packages
    ]
    children.sort(key=lambda m: (-(m.width * m.depth), m.key))
    offsets, inner_w, inner_d = _pack_rows(
        [(c.width, c.depth, c.key) for c in children], config.margin
    )
    m = config.margin
    return _Measured(
        key=app_entity_id(app.name),
        kind="application",
        width=inner_w + 2 * m,
        depth=inner_d + 2 * m,
        child_offsets=offsets,
        children=children,
        payload=app,
    )


def _emit(node: _Measured, origin_x: float, origin_z: float, depth: int,
          config: LayoutConfig, layout: CityLayout) -> None:
    step = config.package_height_step
    if node.kind == "application":
        y0, y1 = 0.0, step
        text = node.payload.name
    elif node.kind == "package":
        y0, y1 = depth * step, (depth + 1) * step
        text = node.payload.name
    else:
        y0 = depth * step
        y1 = y0 + config.base_class_height
        text = node.payload.name
    box = EntityBox(
        entity_id=node.key,
        kind=node.kind,
        min_corner=(origin_x, y0, origin_z),
        max_corner=(origin_x + node.width, y1, origin_z + node.depth),
        depth=depth,
    )
    layout.boxes[node.key] = box
    cx, _, cz = box.center
    layout.labels[node.key] = LabelSlot(
        entity_id=node.key,
        text=text,
        anchor=(cx, box.max_corner[1], cz),
        max_width=node.width * 0.9,
    )
    for child in node.children:
        off_x, off_z = node.child_offsets[child.key]
        _emit(
            child,
            origin_x + config.margin + off_x,
            origin_z + config.margin + off_z,
            depth + 1,
            config,
            layout,
        )


def compute_layout(structure: LandscapeStructure, config: LayoutConfig | None = None) -> CityLayout:
    """Lay out the whole landscape; identical inputs give identical output."""
    config = (config or LayoutConfig()).validate()
    structure.validate()
    layout = CityLayout(config=config)

    measured = [_measure_app(app, config) for app in structure.applications]
    measured.sort(key=lambda m: (-(m.width * m.depth), m.key))
    cols = max(1, math.ceil(math.sqrt(len(measured))))
    x = z = row_depth = 0.0
    for i, node in enumerate(measured):
        if i > 0 and i % cols == 0:
            z += row_depth + config.foundation_gap
            x = 0.0
            row_depth = 0.0
        _emit(node, x, z, 0, config, layout)
        x += node.width + config.foundation_gap
        row_depth = max(row_depth, node.depth)

    for link in structure.communications:
        arc = arc_geometry(link, layout, curvature_factor=1.0)
        layout.arcs[arc.link_id] = arc
    return layout


def arc_geometry(
    link: CommunicationLink, layout: CityLayout, curvature_factor: float = 1.0
) -> ArcGeometry:
    """Quadratic arc from source roof center to target roof center.

    Apex height is curvature_factor * 0.3 * endpoint distance; a factor of
    zero degenerates to a straight segment.
    """
    if curvature_factor < 0:
        raise ValidationError("curvature_factor must be >= 0")
    start = layout.class_box(link.source_fqn).roof_center
    end = layout.class_box(link.target_fqn).roof_center
    distance = math.dist(start, end)
    apex = curvature_factor * 0.3 * distance
    mid = tuple((a + b) / 2 for a, b in zip(start, end))
    control = (mid[0], mid[1] + 2 * apex, mid[2])
    samples = 16
    polyline = tuple(
        tuple(
            (1 - t) ** 2 * s + 2 * (1 - t) * t * c + t**2 * e
            for s, c, e in zip(start, control, end)
        )
        for t in (i / samples for i in range(samples + 1))
    )
    return ArcGeometry(
        link_id=link_entity_id(class_entity_id(link.source_fqn), class_entity_id(link.target_fqn)),
        start=start,
        end=end,
        apex_height=apex,
        polyline=polyline,
    )
